use vsynth::ccsearch::{cc_brute_force, CcSearcher};
use vsynth::circuit::Gate;
use vsynth::gateset::{vbasis, Axis, GateSet};
use vsynth::linalg::distance::dist_phase_invariant;
use vsynth::linalg::haar::haar_random;
use vsynth::mitm::{brute_force_search, mitm_search, verify, Limits, MitmSearcher};
use vsynth::UMat64;

fn limits() -> Limits {
    Limits::default()
}

fn same_up_to_phase(a: &UMat64, b: &UMat64) -> bool {
    dist_phase_invariant(a, b).unwrap() < 1e-9
}

fn cliffords(n: usize) -> Vec<UMat64> {
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(Gate::H(q).matrix(n));
        gens.push(Gate::S(q).matrix(n));
        for t in 0..n {
            if t != q {
                gens.push(Gate::Cnot(q, t).matrix(n));
            }
        }
    }
    gens
}

fn check_clifford_closure(gs: &GateSet, n: usize) {
    for c in cliffords(n) {
        for e in gs.basis() {
            let conj = &(&c * &e.matrix) * &c.adjoint();
            assert!(
                gs.basis().iter().any(|f| same_up_to_phase(&f.matrix, &conj)),
                "conjugate of {} leaves the basis",
                e.label
            );
        }
    }
}

#[test]
fn vbasis_is_closed_under_clifford_conjugation() {
    check_clifford_closure(&vbasis(1).unwrap(), 1);
    check_clifford_closure(&vbasis(2).unwrap(), 2);
}

#[test]
fn vbasis_elements_are_well_separated() {
    for n in 1..=3usize {
        let gs = vbasis(n).unwrap();
        let d = 1usize << n;
        assert_eq!(gs.len(), 2 * (d * d - 1));
        for (i, a) in gs.basis().iter().enumerate() {
            let t = a.matrix.trace().norm() / d as f64;
            assert!((t - 1.0 / 5f64.sqrt()).abs() < 1e-12, "{}", a.label);
            assert!(a.matrix.is_unitary());
            let inv = &gs.basis()[gs.inverse_of(i)].matrix;
            assert!((&a.matrix * inv).max_abs_diff(&UMat64::identity(d)) < 1e-12);
            for b in &gs.basis()[i + 1..] {
                assert!(dist_phase_invariant(&a.matrix, &b.matrix).unwrap() > 0.1);
            }
        }
    }
}

#[test]
fn v_letters_match_definition() {
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        let p = match axis {
            Axis::X => Gate::X(0).matrix(1),
            Axis::Y => Gate::Y(0).matrix(1),
            Axis::Z => Gate::Z(0).matrix(1),
        };
        let s = 1.0 / 5f64.sqrt();
        for (dagger, sign) in [(false, 1.0), (true, -1.0)] {
            let id = UMat64::identity(2);
            let data = id
                .data()
                .iter()
                .zip(p.data())
                .map(|(a, b)| (a + b * vsynth::Complex64::new(0.0, 2.0 * sign)) * s)
                .collect();
            let want = UMat64::from_raw(2, data).unwrap();
            assert!(axis.v_matrix(dagger).max_abs_diff(&want) < 1e-15);
        }
    }
}

#[test]
fn frontier_sizes_follow_reduced_word_law() {
    for (n, depth) in [(1usize, 7usize), (2, 2)] {
        let gs = vbasis(n).unwrap();
        let b = gs.len();
        let mut s = MitmSearcher::new(&gs).unwrap();
        let target = haar_random::<f64>(1 << n, 99);
        let _ = s.min_error(&target, 2 * depth, &limits()).unwrap();
        let sizes = s.level_sizes();
        assert!(sizes.len() > depth);
        assert_eq!(sizes[0], 1);
        for (i, &len) in sizes.iter().enumerate().skip(1) {
            assert_eq!(len, b * (b - 1).pow(i as u32 - 1), "n={n} level {i}");
        }
    }
}

#[test]
fn mitm_matches_exhaustive_enumeration() {
    let gs = vbasis(1).unwrap();
    for seed in 0..20 {
        let t = haar_random::<f64>(2, 1000 + seed);
        let fast = mitm_search(&gs, &t, 0.15, &limits()).unwrap();
        let slow = brute_force_search(&gs, &t, 0.15, 8).unwrap();
        assert_eq!(fast.vcount, slow.vcount, "seed {seed}");
        assert!(fast.error < 0.15);
        verify(&gs, &fast, &t).unwrap();
    }
}

#[test]
fn minimal_length_is_monotone_in_accuracy() {
    let gs = vbasis(1).unwrap();
    let mut s = MitmSearcher::new(&gs).unwrap();
    for seed in 0..10 {
        let t = haar_random::<f64>(2, 300 + seed);
        let mut last = 0;
        for eps in [0.3, 0.1, 0.03, 0.01, 0.003] {
            let r = s.search(&t, eps, &limits()).unwrap();
            assert!(r.error < eps);
            assert!(r.vcount >= last, "seed {seed} eps {eps}");
            last = r.vcount;
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let gs = vbasis(1).unwrap();
    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| {
            (0..8u64)
                .map(|seed| {
                    let t = haar_random::<f64>(2, 700 + seed);
                    let r = mitm_search(&gs, &t, 0.01, &limits()).unwrap();
                    let c = CcSearcher::new().search(&t, 0.05, &limits()).unwrap();
                    (r.word.letters, r.word.suffix, c.word.steps)
                })
                .collect::<Vec<_>>()
        })
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(4));
}

#[test]
fn two_qubit_search_meets_tolerance() {
    let gs = vbasis(2).unwrap();
    let mut s = MitmSearcher::new(&gs).unwrap();
    for seed in 0..3 {
        let t = haar_random::<f64>(4, 40 + seed);
        let r = s.search(&t, 0.5, &limits()).unwrap();
        assert!(r.error < 0.5);
        verify(&gs, &r, &t).unwrap();
    }
}

#[test]
fn cc_levels_grow_by_eleven() {
    let mut s = CcSearcher::new();
    let t = haar_random::<f64>(2, 5);
    let _ = s.min_error(&t, 6, &limits()).unwrap();
    let sizes = s.level_sizes();
    assert!(sizes.len() >= 4);
    for (i, &len) in sizes.iter().enumerate().skip(1).take(3) {
        assert_eq!(len, 12 * 11usize.pow(i as u32 - 1));
        assert_eq!(s.level_len(i), len);
    }
}

#[test]
fn cc_search_matches_exhaustive_enumeration() {
    let mut s = CcSearcher::new();
    for seed in 0..15 {
        let t = haar_random::<f64>(2, 2000 + seed);
        let fast = s.search(&t, 0.2, &limits()).unwrap();
        let slow = cc_brute_force(&t, 0.2, 6).unwrap();
        assert_eq!(fast.vcount, slow.vcount, "seed {seed}");
        assert!(fast.error < 0.2);
    }
}

#[test]
fn canonical_ordering_never_lengthens_words() {
    let mut plain = CcSearcher::new();
    let mut canon = CcSearcher::with_canonical(true);
    for seed in 0..200 {
        let t = haar_random::<f64>(2, 5000 + seed);
        let a = plain.search(&t, 0.1, &limits()).unwrap();
        let b = canon.search(&t, 0.1, &limits()).unwrap();
        assert_eq!(a.vcount, b.vcount, "seed {seed}");
        assert!(b.error < 0.1);
    }
}

#[test]
fn cc_circuit_realizes_controlled_gate() {
    let mut s = CcSearcher::new();
    for seed in 0..10 {
        let t = haar_random::<f64>(2, 60 + seed);
        let r = s.search(&t, 0.05, &limits()).unwrap();
        assert!(r.circuit.product().max_abs_diff(&r.controlled) < 1e-12);
        assert_eq!(r.circuit.vcount(), r.vcount);
        assert!(r.controlled.off_block_norm(2) < 1e-12);
    }
}
