use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xprs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xprs")).args(args).env("XPRS_THREADS", "2").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = xprs(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn eval_on_separated_scores_gives_zero_eer() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(&scores, "score,label\n0.9,1\n0.8,1\n0.7,1\n0.3,0\n0.2,0\n0.1,0\n").unwrap();
    let report: serde_json::Value = serde_json::from_str(&ok(&["eval", "--scores", p(&scores), "--seed", "3"])).unwrap();
    assert_eq!(report["eer"], 0.0);
    assert_eq!(report["seed"], 3);
    assert!(report["run_config"].is_object());

    let roc = ok(&["roc", "--scores", p(&scores)]);
    let mut lines = roc.lines();
    assert_eq!(lines.next(), Some("threshold,far,frr"));
    assert_eq!(lines.next(), Some("-inf,1,0"));
    assert_eq!(roc.lines().last(), Some("inf,0,1"));
}

#[test]
fn worked_example_scores_file() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("s.csv");
    fs::write(&scores, "label,score\ntrue,0.9\ntrue,0.8\ntrue,0.4\nfalse,0.1\nfalse,0.2\nfalse,0.6\n").unwrap();
    let report: serde_json::Value = serde_json::from_str(&ok(&["eval", "--scores", p(&scores)])).unwrap();
    assert!((report["eer"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn gradcheck_passes() {
    let out = ok(&["gradcheck"]);
    assert!(out.lines().last().unwrap().starts_with("PASS"));
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn errors_print_code_then_detail() {
    let dir = tempfile::tempdir().unwrap();
    let out = xprs(&["eval", "--scores", p(&dir.path().join("missing.csv"))]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let mut lines = err.lines();
    assert_eq!(lines.next(), Some("IO_ERROR"));
    assert!(lines.next().is_some());

    let out = xprs(&["gradcheck", "--override", "gradcheck.step=oops"]);
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().next(), Some("BAD_CONFIG"));

    let bad = dir.path().join("one.csv");
    fs::write(&bad, "score,label\n0.1,1\n0.2,1\n").unwrap();
    let out = xprs(&["eval", "--scores", p(&bad)]);
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().next(), Some("ONE_CLASS_ONLY"));
}

#[test]
fn synthetic_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = d.join("corpus");
    let quick = [
        "--seed", "5",
        "--override", "synth_queries=120",
        "--override", "split={\"pretrain\":60,\"balanced_train\":30,\"dev\":15,\"eval\":20}",
        "--override", "expression.hidden_dim=8",
        "--override", "expression.embedding_dim=8",
        "--override", "expression.pretrain.max_epochs=2",
        "--override", "expression.finetune.max_epochs=2",
        "--override", "emotion.hidden_dim=6",
        "--override", "emotion.embedding_dim=6",
        "--override", "emotion.train.max_epochs=2",
        "--override", "inversion.hidden_dim=8",
        "--override", "inversion.embedding_dim=8",
        "--override", "inversion.train.max_epochs=1",
        "--override", "fusion.train.max_epochs=3",
        "--override", "bow.train.max_epochs=3",
    ];
    let run = |args: &[&str]| -> String {
        let mut all: Vec<&str> = args.to_vec();
        all.extend(quick);
        ok(&all)
    };
    run(&["synth", "--out", p(&corpus)]);
    let manifest = corpus.join("manifest.jsonl");
    let split = corpus.join("split.json");
    assert!(manifest.exists() && split.exists());

    let (m, s) = (p(&manifest), p(&split));
    run(&["extract", "--manifest", m, "--out", p(&d.join("mfcc")), "--feature", "mfcc"]);
    run(&["train-expr", "--manifest", m, "--split", s, "--features", p(&d.join("mfcc")), "--out", p(&d.join("expr.xprs"))]);
    let log = fs::read_to_string(d.join("expr.log.csv")).unwrap();
    assert!(log.starts_with("stage,epoch,train_loss,cv_error,learning_rate,backoff\n"));
    assert!(log.lines().count() > 2);

    let report_path = d.join("report.json");
    run(&["eval", "--model", p(&d.join("expr.xprs")), "--manifest", m, "--split", s, "--features", p(&d.join("mfcc")), "--out", p(&report_path)]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    for key in ["eer", "wa", "uwa", "f_score", "roc", "at_eer", "at_half", "n_pos", "n_neg"] {
        assert!(!report[key].is_null(), "missing {key}");
    }
    let eer = report["eer"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&eer));

    // articulatory branch, emotion, embeddings and fusion
    run(&["train-inversion", "--manifest", m, "--out", p(&d.join("inv.xprs"))]);
    let tvdir = d.join("mfcc_f0v_tv");
    run(&["extract", "--manifest", m, "--out", p(&tvdir), "--feature", "concat:mfcc,f0v+tv", "--inversion", p(&d.join("inv.xprs"))]);
    run(&["train-emo", "--manifest", m, "--split", s, "--features", p(&tvdir), "--out", p(&d.join("emo.xprs"))]);
    run(&["embed", "--model", p(&d.join("expr.xprs")), "--manifest", m, "--features", p(&d.join("mfcc")), "--out", p(&d.join("ae.feat"))]);
    run(&["embed", "--model", p(&d.join("emo.xprs")), "--manifest", m, "--features", p(&tvdir), "--out", p(&d.join("ee.feat"))]);
    let ids = fs::read_to_string(d.join("ae.feat.ids")).unwrap();
    assert_eq!(ids, fs::read_to_string(d.join("ee.feat.ids")).unwrap());
    let (ae, ee) = (p(&d.join("ae.feat")).to_string(), p(&d.join("ee.feat")).to_string());
    run(&["train-fusion", "--manifest", m, "--split", s, "--embeddings", &ae, "--embeddings", &ee, "--out", p(&d.join("fus.xprs"))]);
    let fused = run(&[
        "eval", "--model", p(&d.join("fus.xprs")), "--manifest", m, "--split", s, "--embeddings", &ae, "--embeddings", &ee,
        "--emotion-model", p(&d.join("emo.xprs")), "--emotion-features", p(&tvdir),
    ]);
    let fused: serde_json::Value = serde_json::from_str(&fused).unwrap();
    assert!(fused["ccc_valence"].is_number() && fused["ccc_arousal"].is_number());

    // swapped source order is refused
    let out = xprs(&["eval", "--model", p(&d.join("fus.xprs")), "--manifest", m, "--split", s, "--embeddings", &ee, "--embeddings", &ae]);
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().next(), Some("SOURCE_LIST_MISMATCH"));

    run(&["train-bow", "--manifest", m, "--split", s, "--out", p(&d.join("bow.xprs"))]);
    let roc = run(&["roc", "--model", p(&d.join("bow.xprs")), "--manifest", m, "--split", s]);
    assert!(roc.starts_with("threshold,far,frr\n"));
}

#[test]
fn reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["--seed", "2", "--override", "synth_queries=100"];
    let with = |extra: &[&str]| {
        let mut v = extra.to_vec();
        v.extend(args);
        ok(&v)
    };
    with(&["synth", "--out", p(&d.join("a"))]);
    with(&["synth", "--out", p(&d.join("b"))]);
    for f in ["manifest.jsonl", "split.json", "wav/q00007.wav", "tv/q00042.feat"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let m = d.join("a/manifest.jsonl");
    with(&["extract", "--manifest", p(&m), "--out", p(&d.join("f1")), "--feature", "concat:mfcc,f0v"]);
    std::env::set_var("XPRS_THREADS", "1");
    with(&["extract", "--manifest", p(&m), "--out", p(&d.join("f2")), "--feature", "concat:mfcc,f0v"]);
    for entry in fs::read_dir(d.join("f1")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(d.join("f1").join(&name)).unwrap(), fs::read(d.join("f2").join(&name)).unwrap());
    }
}
