use std::path::Path;
use std::process::{Command, Output};

fn gm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gm")).args(args).current_dir(dir).output().expect("run gm")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sample_then_match() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("model.json"), r#"{"model":"hom","n":60,"p":0.5,"r":0.9,"rng_seed":3}"#).unwrap();
    ok(&gm(&["sample", "--config", "model.json", "--out-prefix", "pair"], dir.path()));
    assert!(dir.path().join("pair_a.edges").exists());

    let seeds: String = (0..20).map(|i| format!("{i} {i}\n")).collect();
    std::fs::write(dir.path().join("seeds.txt"), seeds).unwrap();
    let out = gm(
        &[
            "match", "--graph-a", "pair_a.edges", "--graph-b", "pair_b.edges", "--n", "60", "--init", "seeds",
            "--seeds-file", "seeds.txt", "--out", "result.json",
        ],
        dir.path(),
    );
    ok(&out);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(doc["accuracy"], 1.0);
    assert_eq!(doc["sigma"].as_array().unwrap().len(), 60);
    assert!(doc["trajectory"][0]["alpha"].is_null());
}

#[test]
fn match_with_similarity() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.edges"), "0 1\n1 2\n2 3\n").unwrap();
    std::fs::write(dir.path().join("b.edges"), "0 1\n1 2\n2 3\n").unwrap();
    std::fs::write(dir.path().join("s.csv"), "c0,c1,c2,c3\n9,0,0,0\n0,9,0,0\n0,0,9,0\n0,0,0,9\n").unwrap();
    ok(&gm(
        &["match", "--graph-a", "a.edges", "--graph-b", "b.edges", "--similarity", "s.csv", "--out", "r.json"],
        dir.path(),
    ));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(doc["sigma"], serde_json::json!([0, 1, 2, 3]));
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"kind":"trajectory","model":{"model":"hom","n":30,"p":0.5,"r":0.5},"s_grid":[2,10],"replicates":2,"detail_s":10}"#,
    )
    .unwrap();
    ok(&gm(&["experiment", "--config", "cfg.json", "--out-dir", "out"], dir.path()));
    for name in ["trajectory.csv", "trajectory_mean.csv", "trajectory_summary.csv", "trajectory_mean.svg", "trajectory_s10.svg"] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
}

#[test]
fn bad_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"kind":"trajectory","replicatez":2}"#).unwrap();
    assert!(!gm(&["experiment", "--config", "cfg.json", "--out-dir", "out"], dir.path()).status.success());
    std::fs::write(dir.path().join("a.edges"), "0 1\n").unwrap();
    let out = gm(&["match", "--graph-a", "a.edges", "--graph-b", "a.edges", "--init", "bogus", "--out", "r.json"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown init spec"));
}
