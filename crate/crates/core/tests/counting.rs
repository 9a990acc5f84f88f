use num_bigint::BigUint;
use vsynth::ccsearch::step_allowed;
use vsynth::counting::{
    closed_form_bound, count_adopted, enumerate_adopted, su2_word_count, vcount_lower_bound, Model,
};
use vsynth::gateset::CcStep;

/// Sequences of `n` steps whose neighbours all pass the canonical filter.
fn dp_count(n: usize) -> BigUint {
    let steps: Vec<CcStep> = CcStep::all().collect();
    let mut ways: Vec<BigUint> = vec![BigUint::from(1u32); steps.len()];
    for _ in 1..n {
        ways = steps
            .iter()
            .map(|next| {
                steps.iter().zip(&ways).filter(|(prev, _)| step_allowed(**prev, *next)).map(|(_, w)| w.clone()).sum()
            })
            .collect();
    }
    ways.into_iter().sum()
}

#[test]
fn counts_match_transition_dynamic_program() {
    for n in 1..=20 {
        assert_eq!(count_adopted(n).unwrap(), dp_count(n), "n = {n}");
    }
}

#[test]
fn counts_satisfy_three_term_recurrence() {
    for n in 2..40 {
        let lhs = count_adopted(n + 1).unwrap() + count_adopted(n - 1).unwrap();
        assert_eq!(lhs, count_adopted(n).unwrap() * 10u32);
    }
}

#[test]
fn closed_form_is_exact_for_small_lengths() {
    let started = std::time::Instant::now();
    let phi = 5.0 + 2.0 * 6f64.sqrt();
    let psi = 5.0 - 2.0 * 6f64.sqrt();
    for n in 1..=8 {
        let exact: f64 = count_adopted(n).unwrap().to_string().parse().unwrap();
        let oracle = 1.5f64.sqrt() * (phi.powi(n as i32) - psi.powi(n as i32));
        assert!((closed_form_bound(n) - exact).abs() / exact <= 1e-12);
        assert!((oracle - exact).abs() / exact <= 1e-12);
    }
    assert!(started.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn enumeration_agrees_with_counts() {
    for n in 1..=4 {
        let (count, distinct) = enumerate_adopted(n).unwrap();
        assert_eq!(BigUint::from(count), count_adopted(n).unwrap());
        assert!(distinct as u64 <= count);
    }
}

#[test]
fn reduced_su2_words() {
    for n in 1..=10u32 {
        assert_eq!(su2_word_count(n as usize), BigUint::from(6u64 * 5u64.pow(n - 1)));
    }
}

#[test]
fn lower_bounds_scale_with_log_accuracy() {
    let a = vcount_lower_bound(Model::Su2V, 1e-2).unwrap();
    let b = vcount_lower_bound(Model::Su2V, 1e-4).unwrap();
    assert!((b - 2.0 * a).abs() < 1e-9);
    assert!((a - 3.0 * 100f64.ln() / 5f64.ln()).abs() < 1e-12);
    let phi = 5.0 + 2.0 * 6f64.sqrt();
    assert!((vcount_lower_bound(Model::CcPhi, 1e-3).unwrap() - 3.0 * 1e3f64.ln() / phi.ln()).abs() < 1e-12);
    let one = vcount_lower_bound(Model::SunV(1), 1e-3).unwrap();
    assert!((one - vcount_lower_bound(Model::Su2V, 1e-3).unwrap()).abs() < 1e-12);
    assert!(vcount_lower_bound(Model::Su2V, 0.0).is_err());
    assert!(vcount_lower_bound(Model::Su2V, 1.5).is_err());
}

#[test]
fn model_names_round_trip() {
    for m in [Model::Su2V, Model::CcPhi, Model::SunV(2)] {
        assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
    }
    assert!("sun_v(0)".parse::<Model>().is_err());
}
