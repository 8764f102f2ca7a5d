use std::path::Path;
use std::process::{Command, Output};

fn hopewave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopewave"))
        .args(args)
        .current_dir(dir)
        .env_remove("HOPEWAVE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

const TRAIN: &[&str] = &["--epochs", "2", "--hops", "1,2,4", "--latent", "4", "--quiet"];

fn small_corpus(dir: &Path) {
    let o = hopewave(
        dir,
        &["gen", "--kind", "mix", "--count", "12", "--n-min", "5", "--n-max", "9", "--seed", "4", "--out", "m.jsonl"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn pretrain(dir: &Path, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["pretrain", "--corpus", "m.jsonl", "--seed", "7", "--out", out];
    args.extend_from_slice(TRAIN);
    args.extend_from_slice(extra);
    hopewave(dir, &args)
}

#[test]
fn gen_writes_one_line_per_graph() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopewave(dir.path(), &["gen", "--kind", "cycle", "--n", "12", "--count", "5", "--seed", "1", "--out", "c.jsonl"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(read(dir.path(), "c.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.contains("\"n\":12")));
}

#[test]
fn pretrain_without_corpus_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopewave(dir.path(), &["pretrain", "--seed", "1", "--out", "x.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn pretrain_requires_explicit_seed() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    let o = hopewave(dir.path(), &["pretrain", "--corpus", "m.jsonl", "--out", "x.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopewave(dir.path(), &["selftest"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn unknown_flags_and_bad_files_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hopewave(dir.path(), &["gen", "--kind", "cycle", "--bogus", "1", "--out", "x"])), 1);
    assert_eq!(code(&hopewave(dir.path(), &["eval", "--ckpt", "missing.json", "--corpus", "m.jsonl", "--out", "r"])), 1);
    std::fs::write(dir.path().join("bad.jsonl"), "{\"id\":\"g\",\"n\":2,\"edges\":[[0,5]]}\n").unwrap();
    let o = hopewave(dir.path(), &["pretrain", "--corpus", "bad.jsonl", "--seed", "1", "--out", "x.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn help_lists_flags_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, flags) in [
        ("pretrain", &["--corpus", "--scales", "--hops", "--latent", "--threshold", "--epochs", "--batch", "--lr", "--seed", "--method", "--order", "--out"][..]),
        ("eval", &["--ckpt", "--corpus", "--mask-mode", "--seed", "--out"][..]),
        ("wavelet", &["--method", "--order", "--scales", "--format"][..]),
        ("gen", &["--kind", "--n", "--count", "--seed", "--out"][..]),
        ("encode", &["--ckpt", "--graph", "--out"][..]),
        ("ablate-channels", &["--counts", "--scale-min", "--scale-max"][..]),
        ("ablate-mask", &["--corpus", "--out"][..]),
        ("cross-eval", &["--corpus", "--out"][..]),
        ("selftest", &["--threads"][..]),
    ] {
        let o = hopewave(dir.path(), &[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        let text = String::from_utf8(o.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{sub} --help misses {f}");
        }
        if sub == "pretrain" {
            for d in ["[default: 32]", "[default: 100]", "[default: 0.0005]", "[default: 1,2,4,16]", "[default: 20]"] {
                assert!(text.contains(d), "pretrain --help misses {d}");
            }
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_corpus(d);
    assert_eq!(code(&pretrain(d, "a.json", &["--threads", "1"])), 0);
    assert_eq!(code(&pretrain(d, "b.json", &["--threads", "3"])), 0);
    assert_eq!(code(&pretrain(d, "c.json", &[])), 0);
    assert_eq!(read(d, "a.json"), read(d, "b.json"));
    assert_eq!(read(d, "a.json"), read(d, "c.json"));

    for out in ["r1.csv", "r2.csv"] {
        let o = hopewave(d, &["eval", "--ckpt", "a.json", "--corpus", "m.jsonl", "--seed", "3", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(read(d, "r1.csv"), read(d, "r2.csv"));
    let report = String::from_utf8(read(d, "r1.csv")).unwrap();
    assert!(report.starts_with("corpus,checkpoint,hop,masked_accuracy,unmasked_accuracy,kept_entries\n"));

    for out in ["z1.csv", "z2.csv"] {
        let o = hopewave(d, &["encode", "--ckpt", "a.json", "--corpus", "m.jsonl", "--index", "1", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(read(d, "z1.csv"), read(d, "z2.csv"));
    assert!(String::from_utf8(read(d, "z1.csv")).unwrap().starts_with("node,z0,z1,z2,z3\n"));
}

#[test]
fn env_threads_fallback_matches() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_corpus(d);
    assert_eq!(code(&pretrain(d, "a.json", &[])), 0);
    let mut args = vec!["pretrain", "--corpus", "m.jsonl", "--seed", "7", "--out", "e.json"];
    args.extend_from_slice(TRAIN);
    let o = Command::new(env!("CARGO_BIN_EXE_hopewave")).args(&args).current_dir(d).env("HOPEWAVE_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(read(d, "a.json"), read(d, "e.json"));
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_corpus(d);
    std::fs::write(d.join("cfg.toml"), "seed = 7\nquiet = true\n[pretrain]\nepochs = 2\nhops = [1, 2, 4]\nlatent = 4\n").unwrap();
    let o = hopewave(d, &["--config", "cfg.toml", "pretrain", "--corpus", "m.jsonl", "--out", "cfg.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&pretrain(d, "flags.json", &[])), 0);
    assert_eq!(read(d, "cfg.json"), read(d, "flags.json"));

    std::fs::write(d.join("bad.toml"), "nonsense_key = 1\n").unwrap();
    let o = hopewave(d, &["--config", "bad.toml", "gen", "--kind", "cycle", "--out", "x.jsonl"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn corrupt_and_future_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_corpus(d);
    assert_eq!(code(&pretrain(d, "a.json", &[])), 0);
    let text = String::from_utf8(read(d, "a.json")).unwrap();
    std::fs::write(d.join("trunc.json"), &text[..text.len() / 2]).unwrap();
    std::fs::write(d.join("v9.json"), text.replacen("\"format_version\": 1", "\"format_version\": 9", 1)).unwrap();
    for (f, needle) in [("trunc.json", "line"), ("v9.json", "9")] {
        let o = hopewave(d, &["eval", "--ckpt", f, "--corpus", "m.jsonl", "--out", "r.csv"]);
        assert_eq!(code(&o), 1, "{f}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle), "{f}");
    }
}

#[test]
fn wavelet_dump_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("k2.txt"), "2 1\n0 1\n").unwrap();
    let o = hopewave(d, &["wavelet", "--graph", "k2.txt", "--method", "exact", "--scales", "1", "--out", "w.json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&read(d, "w.json")).unwrap();
    let on = v["channels"][0][0][0].as_f64().unwrap();
    assert!((on - (1.0 + (-2.0f64).exp()) / 2.0).abs() < 1e-12);

    let o = hopewave(d, &["wavelet", "--graph", "k2.txt", "--format", "csv", "--scales", "1,2", "--out", "wdir"]);
    assert_eq!(code(&o), 0);
    assert!(d.join("wdir/channel_1.csv").exists());
}

#[test]
fn ablation_commands_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_corpus(d);
    let mut args = vec!["ablate-channels", "--corpus", "m.jsonl", "--counts", "1,3", "--out", "ch.csv"];
    args.extend_from_slice(&TRAIN[..TRAIN.len() - 1]);
    assert_eq!(code(&hopewave(d, &args)), 0);
    assert!(String::from_utf8(read(d, "ch.csv")).unwrap().starts_with("channels,scales,hop"));

    let mut args = vec!["ablate-mask", "--corpus", "m.jsonl", "--out", "mask.csv"];
    args.extend_from_slice(&TRAIN[..TRAIN.len() - 1]);
    assert_eq!(code(&hopewave(d, &args)), 0);
    assert!(String::from_utf8(read(d, "mask.csv")).unwrap().contains("non_saturated"));

    let mut args = vec!["cross-eval", "--corpus", "a=m.jsonl", "--corpus", "b=m.jsonl", "--out", "x.csv"];
    args.extend_from_slice(&TRAIN[..TRAIN.len() - 1]);
    assert_eq!(code(&hopewave(d, &args)), 0);
    assert!(String::from_utf8(read(d, "x.csv")).unwrap().starts_with("train,a,b\n"));

    let o = hopewave(d, &["cross-eval", "--corpus", "a=m.jsonl", "--out", "x.csv"]);
    assert_eq!(code(&o), 1);
}
