mod common;

use std::path::Path;
use std::process::Command;

use affect_trace::config::RunConfig;
use affect_trace::run;

const BIN: &str = env!("CARGO_BIN_EXE_affect-trace");

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).env(run::THREADS_ENV, "2").output().unwrap()
}

fn ok(args: &[&str]) {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn write_config(dir: &Path, cfg: &RunConfig) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, cfg.to_toml()).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = common::tiny_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    common::run_all(&cfg, a.path()).unwrap();
    common::run_all(&cfg, b.path()).unwrap();
    let (sa, sb) = (common::snapshot(a.path()), common::snapshot(b.path()));
    assert!(sa.keys().any(|k| k.ends_with("report.json")));
    assert_eq!(sa, sb);
}

#[test]
fn binary_matches_library() {
    let cfg = common::tiny_config();
    let lib = tempfile::tempdir().unwrap();
    common::run_all(&cfg, lib.path()).unwrap();

    let bin = tempfile::tempdir().unwrap();
    let c = write_config(bin.path(), &cfg);
    let r = bin.path().join("run");
    let (data, model, pred, eval) = (r.join("data"), r.join("model"), r.join("pred"), r.join("eval"));
    ok(&["simulate", "--config", &c, "--out", s(&data)]);
    ok(&["train", "--config", &c, "--data", s(&data), "--out", s(&model)]);
    let ckpt = model.join(run::CHECKPOINT_FILE);
    ok(&["infer", "--config", &c, "--checkpoint", s(&ckpt), "--input", s(&data), "--split", "test", "--out", s(&pred)]);
    ok(&["eval", "--config", &c, "--data", s(&data), "--predictions", s(&pred), "--out", s(&eval)]);
    assert_eq!(common::snapshot(lib.path()), common::snapshot(&r));
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), &common::tiny_config());
    let out = dir.path().join("sim");
    ok(&["simulate", "--config", &c, "--seed", "9", "--clips", "10", "--out", s(&out)]);
    let used = RunConfig::load(&out.join(affect_trace::config::RUN_CONFIG_FILE)).unwrap();
    assert_eq!((used.sim.seed, used.plan.total(), used.sim.clip_len_frames), (9, 10, 40));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut cfg = common::tiny_config();
    cfg.plan = affect_trace::sim::DatasetPlan { train: 4, val: 0, test: 2, clips_per_subject: 2 };
    cfg.train.epochs = 1;
    let c = write_config(d, &cfg);

    std::fs::write(d.join("bad.toml"), "[train]\nepoch = 3\n").unwrap();
    assert_eq!(cli(&["simulate", "--config", s(&d.join("bad.toml")), "--out", s(&d.join("x"))]).status.code(), Some(2));
    assert_eq!(cli(&["simulate", "--clips", "0", "--out", s(&d.join("x"))]).status.code(), Some(2));
    assert_eq!(cli(&["train", "--config", &c, "--data", s(&d.join("missing")), "--out", s(&d.join("m"))]).status.code(), Some(3));

    let (data, model, pred) = (d.join("data"), d.join("model"), d.join("pred"));
    ok(&["simulate", "--config", &c, "--out", s(&data)]);
    ok(&["train", "--config", &c, "--data", s(&data), "--out", s(&model)]);
    let ckpt = model.join(run::CHECKPOINT_FILE);

    let mut wide = cfg.clone();
    wide.model.hidden_dim = 32;
    let wide_path = d.join("wide.toml");
    std::fs::write(&wide_path, wide.to_toml()).unwrap();
    let r = cli(&["infer", "--config", s(&wide_path), "--checkpoint", s(&ckpt), "--input", s(&data), "--out", s(&pred)]);
    assert_eq!(r.status.code(), Some(5));

    ok(&["infer", "--config", &c, "--checkpoint", s(&ckpt), "--input", s(&data), "--split", "test", "--out", s(&pred)]);
    let victim = std::fs::read_dir(&pred)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .unwrap();
    let text = std::fs::read_to_string(&victim).unwrap();
    let keep: Vec<&str> = text.lines().take(5).collect();
    std::fs::write(&victim, keep.join("\n") + "\n").unwrap();
    let r = cli(&["eval", "--config", &c, "--data", s(&data), "--predictions", s(&pred), "--out", s(&d.join("e"))]);
    assert_eq!(r.status.code(), Some(6), "{}", String::from_utf8_lossy(&r.stderr));

    std::fs::write(&victim, "frame,valence\n0,0.1\n").unwrap();
    let r = cli(&["eval", "--config", &c, "--data", s(&data), "--predictions", s(&pred), "--out", s(&d.join("e"))]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn single_trace_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut cfg = common::tiny_config();
    cfg.plan = affect_trace::sim::DatasetPlan { train: 2, val: 0, test: 1, clips_per_subject: 1 };
    cfg.train.epochs = 1;
    let c = write_config(d, &cfg);
    ok(&["simulate", "--config", &c, "--out", s(&d.join("data"))]);
    ok(&["train", "--config", &c, "--data", s(&d.join("data")), "--out", s(&d.join("m"))]);
    let trace = d.join("data/traces/clip00002.jsonl");
    ok(&["infer", "--config", &c, "--checkpoint", s(&d.join("m").join(run::CHECKPOINT_FILE)), "--input", s(&trace), "--window", "8", "--out", s(&d.join("p"))]);
    let p = std::fs::read_to_string(d.join("p/clip00002.csv")).unwrap();
    assert_eq!(p.lines().count(), 41);
}
