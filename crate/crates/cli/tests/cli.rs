use std::process::{Command, Output};

use serde_json::Value;

fn vsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsynth")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).expect("stdout is one JSON object")
}

#[test]
fn synth_basis_letter_is_one_step() {
    let o = vsynth(&["synth", "--target", "vx", "--eps", "0.01"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("circuit: Vx | suffix=I"), "{s}");
    assert!(s.contains("vcount: 1"), "{s}");
}

#[test]
fn synth_json_report() {
    let o = vsynth(&["synth", "--target", "haar:2:7", "--eps", "0.05", "--json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert_eq!(v["ok"], true);
    assert_eq!(v["schema"], "vsynth.report/1");
    assert!(v["error"].as_f64().unwrap() < 0.05);
    let letters = v["letters"].as_array().unwrap();
    assert_eq!(letters.len() as u64, v["vcount"].as_u64().unwrap());
    assert!(v["nodes_expanded"].as_u64().unwrap() > 0);
}

#[test]
fn synth_two_qubit_defaults_to_v2q() {
    let o = vsynth(&["synth", "--target", "cz", "--eps", "0.3", "--max-len", "3", "--json"]);
    let v = json_of(&o);
    if o.status.success() {
        assert_eq!(v["gateset"], "v2q");
    } else {
        assert_eq!(o.status.code(), Some(2));
        assert_eq!(v["ok"], false);
    }
}

#[test]
fn missing_target_file_exits_one() {
    let o = vsynth(&["synth", "--target", "file:/definitely/not/here.json", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_target_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"dim": 2, "matrix": [[1, 0]]}"#).unwrap();
    let o = vsynth(&["synth", "--target", &format!("file:{}", p.display()), "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn target_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("h.json");
    let r = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&p, format!(r#"{{"dim": 2, "matrix": [[{r},0],[{r},0],[{r},0],[{},0]]}}"#, -r)).unwrap();
    let o = vsynth(&["synth", "--target", &format!("file:{}", p.display()), "--eps", "0.1", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json_of(&o)["error"].as_f64().unwrap() < 0.1);
}

#[test]
fn length_limit_exits_two() {
    let o = vsynth(&["synth", "--target", "haar:2:3", "--eps", "1e-6", "--max-len", "4", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json_of(&o);
    assert_eq!(v["ok"], false);
    assert_eq!(v["error"]["kind"], "not_found");
}

#[test]
fn count_first_terms() {
    for (n, c) in [(1, "12"), (2, "120"), (3, "1188"), (4, "11760")] {
        let o = vsynth(&["count", "--n", &n.to_string(), "--json"]);
        assert!(o.status.success());
        assert_eq!(json_of(&o)["count_adopted"], c);
    }
}

#[test]
fn count_rejects_out_of_range() {
    assert_eq!(vsynth(&["count", "--n", "0"]).status.code(), Some(1));
}

#[test]
fn bounds_su2() {
    let o = vsynth(&["bounds", "--model", "su2_v", "--eps", "1e-3", "--json"]);
    assert!(o.status.success());
    let b = json_of(&o)["vcount_lower_bound"].as_f64().unwrap();
    let expect = 3.0 * 1e3f64.ln() / 5f64.ln();
    assert!((b - expect).abs() < 1e-9, "{b} vs {expect}");
}

#[test]
fn synth_cc_product() {
    let o = vsynth(&["synth-cc", "--target", "haar:2:1", "--eps", "0.1", "--json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert!(v["error"].as_f64().unwrap() < 0.1);
    assert_eq!(v["steps"].as_array().unwrap().len() as u64, v["vcount"].as_u64().unwrap());
}

#[test]
fn synth_controlled_narrow_and_generalized() {
    let o = vsynth(&["synth-controlled", "--blocks", "i,vz", "--eps", "0.1", "--narrow", "--json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert!(v["error"].as_f64().unwrap() <= v["error_bound"].as_f64().unwrap() + 1e-12);
    assert!(v["error"].as_f64().unwrap() < 0.1);

    let o = vsynth(&["synth-controlled", "--blocks", "haar:2:1,haar:2:2", "--eps", "0.2", "--json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert!(v["error"].as_f64().unwrap() < 0.2);
    assert!(v["reassembly_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn synth_controlled_rejects_narrow_with_nontrivial_top_block() {
    let o = vsynth(&["synth-controlled", "--blocks", "vx,vz", "--eps", "0.1", "--narrow"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = vsynth(&[
            "bench",
            "--method",
            "mitm-su2",
            "--eps-grid",
            "0.1,0.03",
            "--num-targets",
            "3",
            "--seed",
            "5",
            "--zero-timing",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("method,target_class,seed,epsilon,vcount,achieved_error,elapsed_s,nodes_expanded\n"));
    assert_eq!(text.lines().count(), 7);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn bench_unknown_method_exits_one() {
    let o = vsynth(&["bench", "--method", "nope", "--eps-grid", "0.1", "--out", "/tmp/never.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gateset_json_lists_basis() {
    let o = vsynth(&["gateset", "--name", "v1q", "--json"]);
    assert!(o.status.success());
    let v = json_of(&o);
    assert_eq!(v["dim"], 2);
}

#[test]
fn worker_override_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_vsynth"))
        .args(["count", "--n", "1"])
        .env("VSYNTH_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
