use std::path::Path;
use std::process::{Command, Output};

fn fdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdlab")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    fdlab(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["gen", "--no-such-flag"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["gen", "--config", p(&bad)]), 2);
    std::fs::write(&bad, r#"{"scenario": 1, "colour": "red"}"#).unwrap();
    assert_eq!(code(&["gen", "--config", p(&bad)]), 2);
    assert_eq!(code(&["gen", "--set", "n_per_class=0"]), 2);
    assert_eq!(code(&["gen", "--scenario", "1", "--mu", "1.0"]), 2);
    assert_eq!(code(&["gen", "--threads", "0"]), 2);

    let missing = dir.path().join("absent.jsonl");
    assert_eq!(code(&["fit", "--set", &format!("data=\"{}\"", p(&missing))]), 3);
}

#[test]
fn conditions_report_for_convergent_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cond.json");
    assert_eq!(
        code(&[
            "conditions",
            "--scenario",
            "1",
            "--gamma",
            "1.7",
            "--set",
            "n_probe=2000",
            "--out",
            p(&out)
        ]),
        0
    );
    let v = json(&out);
    assert_eq!(v["series"]["verdict"], "Convergent");
    assert_eq!(v["power_law"], false);
    assert!(v["bayes_risk"].is_null());
    let resolved = json(&dir.path().join("cond.json.config.json"));
    assert_eq!(resolved["gamma"], 1.7);
    assert_eq!(resolved["n_probe"], 2000);

    let out2 = dir.path().join("cond2.json");
    assert_eq!(
        code(&[
            "conditions",
            "--scenario",
            "2",
            "--mu",
            "0.8",
            "--set",
            "n_probe=2000",
            "--out",
            p(&out2)
        ]),
        0
    );
    let b = json(&out2)["bayes_risk"].as_f64().unwrap();
    assert!((b - 0.1).abs() < 1e-12);
}

#[test]
fn gen_fit_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.jsonl");
    let test = dir.path().join("test.jsonl");
    assert_eq!(
        code(&[
            "gen",
            "--scenario",
            "2",
            "--mu",
            "1.5",
            "--set",
            "n_per_class=20",
            "--seed",
            "1",
            "--out",
            p(&train)
        ]),
        0
    );
    assert_eq!(
        code(&[
            "gen",
            "--scenario",
            "2",
            "--mu",
            "1.5",
            "--set",
            "n_per_class=50",
            "--seed",
            "2",
            "--out",
            p(&test)
        ]),
        0
    );
    let again = dir.path().join("again.jsonl");
    assert_eq!(
        code(&[
            "gen",
            "--scenario",
            "2",
            "--mu",
            "1.5",
            "--set",
            "n_per_class=20",
            "--seed",
            "1",
            "--out",
            p(&again)
        ]),
        0
    );
    assert_eq!(std::fs::read(&train).unwrap(), std::fs::read(&again).unwrap());
    assert_eq!(std::fs::read_to_string(&train).unwrap().lines().count(), 40);

    let cfg = dir.path().join("fit.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "data": train,
            "method": {"kind": "rkhs", "penalty": "paper_sum_squares", "ip_mode": "coefficient"},
            "params": {"h": 1.0, "lambda": 0.0625}
        })
        .to_string(),
    )
    .unwrap();
    let model = dir.path().join("model.json");
    assert_eq!(code(&["fit", "--config", p(&cfg), "--out", p(&model)]), 0);
    let tuned = dir.path().join("tuned.json");
    assert_eq!(
        code(&[
            "fit",
            "--set",
            &format!("data=\"{}\"", p(&train)),
            "--set",
            "method.kind=centroid",
            "--out",
            p(&tuned)
        ]),
        0
    );

    for m in [&model, &tuned] {
        let report = dir.path().join("eval.json");
        let evcfg = serde_json::json!({"model": m, "data": test}).to_string();
        let evpath = dir.path().join("eval_cfg.json");
        std::fs::write(&evpath, evcfg).unwrap();
        assert_eq!(code(&["eval", "--config", p(&evpath), "--out", p(&report)]), 0);
        let v = json(&report);
        assert_eq!(v["n"], 100);
        assert!(v["error"].as_f64().unwrap() <= 0.05);
        assert_eq!(v["predictions"].as_array().unwrap().len(), 100);
    }
}

#[test]
fn sweep_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        serde_json::json!({
            "scenarios": [{"kind": "scenario2", "param": 0.8}],
            "n_grid": [10, 20, 40],
            "repetitions": 2,
            "m_test": 50,
            "m_val": 50,
            "methods": [{"method": {"kind": "centroid"}}],
            "master_seed": 3
        })
        .to_string(),
    )
    .unwrap();
    let out = dir.path().join("run");
    assert_eq!(
        code(&["sweep", "--config", p(&plan), "--threads", "2", "--out", p(&out)]),
        0
    );
    for f in [
        "errors_long.csv",
        "summary.csv",
        "manifest.json",
        "plan.resolved.json",
        "selections.jsonl",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let long = std::fs::read_to_string(out.join("errors_long.csv")).unwrap();
    assert!(long.starts_with("method,scenario,param,n,rep,error"));
    assert_eq!(long.lines().count(), 1 + 3 * 2);

    let svg = dir.path().join("plot.svg");
    assert_eq!(
        code(&[
            "plot",
            "--set",
            &format!("input=\"{}\"", p(&out.join("errors_long.csv"))),
            "--out",
            p(&svg)
        ]),
        0
    );
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert_eq!(
        code(&[
            "plot",
            "--set",
            &format!("input=\"{}\"", p(&out.join("errors_long.csv")))
        ]),
        2
    );
}
