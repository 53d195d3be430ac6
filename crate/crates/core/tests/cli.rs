use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rnntc::cli::{CliError, TrainedModel};
use rnntc::corpus::{split_dataset, TokenSequence};
use rnntc::pipeline::desk_config;
use rnntc::recurrent::{CellKind, RecurrentClassifier};
use rnntc::training::{Dataset, TrainConfig, TrainError, Trainer};

fn rnntc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnntc"))
        .args(args)
        .env_remove("RNNTC_SEED")
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn prepare(dir: &Path, name: &str, per_class: &str) -> std::path::PathBuf {
    let bundle = dir.join(name);
    ok(rnntc(&[
        "prepare",
        "--synthetic",
        "--per-class",
        per_class,
        "--seed",
        "4",
        "--out",
        s(&bundle),
    ]));
    bundle
}

fn train(bundle: &Path, cell: &str, model: &Path, epochs: &str) -> String {
    ok(rnntc(&[
        "train",
        "--bundle",
        s(bundle),
        "--cell",
        cell,
        "--epochs",
        epochs,
        "--seed",
        "4",
        "--model",
        s(model),
    ]))
}

const CSV: &str = "\
id,Summary,damageLevel
1,\"The pilot reported a routine, uneventful landing.\",None
2,A scratch and a dent on the wingtip.,Minor
3,The spar was buckled and the gear fractured.,Substantial
4,The wreckage was consumed by fire.,Destroyed
5,Missing label here,
6,Normal taxi; safe arrival.,None
";

#[test]
fn prepare_is_reproducible_and_counts_records() {
    let dir = tempfile::tempdir().unwrap();
    let a = prepare(dir.path(), "a", "50");
    let b = prepare(dir.path(), "b", "50");
    for f in [
        "manifest.json",
        "vocabulary.json",
        "split.json",
        "sequences.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs between runs"
        );
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["counts"]["retained"], 200);
    let rows = fs::read_to_string(a.join("sequences.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 201, "header plus one row per record");
}

#[test]
fn csv_prepare_drops_empty_labels_and_reports_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let body: String = CSV
        .lines()
        .skip(1)
        .map(|l| format!("{l}\n"))
        .collect::<String>()
        .repeat(6);
    fs::write(&csv, format!("{}\n{body}", CSV.lines().next().unwrap())).unwrap();
    let text = ok(rnntc(&[
        "prepare",
        "--csv",
        s(&csv),
        "--out",
        s(&dir.path().join("b")),
    ]));
    assert!(text.contains("raw records: 36"), "{text}");
    assert!(text.contains("dropped (empty label): 6"), "{text}");
    assert!(text.contains("None: 12"), "{text}");

    let out = rnntc(&[
        "prepare",
        "--csv",
        s(&csv),
        "--label-column",
        "severity",
        "--out",
        s(&dir.path().join("c")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("severity"));
}

#[test]
fn missing_inputs_exit_with_input_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = rnntc(&[
        "train",
        "--bundle",
        s(&dir.path().join("nope")),
        "--cell",
        "gru",
        "--model",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = rnntc(&[
        "predict",
        "--model",
        s(&dir.path().join("nope.json")),
        "--text",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_evaluate_predict_compare() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = prepare(dir.path(), "bundle", "25");
    let blstm = dir.path().join("blstm.json");
    let gru = dir.path().join("gru.json");
    let text = train(&bundle, "blstm", &blstm, "2");
    assert!(
        text.contains("head input dim 64"),
        "BLSTM head reads [h_fwd, h_bwd] = 2 x 32: {text}"
    );
    assert_eq!(
        TrainedModel::load(&blstm)
            .unwrap()
            .model
            .config
            .feature_dim(),
        64
    );
    let text = train(&bundle, "gru", &gru, "2");
    assert!(text.contains("head input dim 32"), "{text}");
    let history = fs::read_to_string(gru.with_extension("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);

    let report_dir = dir.path().join("report");
    let text = ok(rnntc(&[
        "evaluate",
        "--model",
        s(&gru),
        "--data",
        s(&bundle),
        "--out",
        s(&report_dir),
    ]));
    assert!(text.contains("weighted avg"), "{text}");
    for f in ["report.txt", "report.json", "confusion.csv"] {
        assert!(report_dir.join(f).exists(), "{f} missing");
    }
    let confusion = fs::read_to_string(report_dir.join("confusion.csv")).unwrap();
    assert_eq!(
        confusion.lines().next().unwrap(),
        "true,None,Minor,Substantial,Destroyed"
    );

    let text = ok(rnntc(&[
        "predict",
        "--model",
        s(&gru),
        "--text",
        "the wreckage was consumed",
        "--text",
        "the of and",
    ]));
    let preds: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(preds.len(), 2);
    assert_eq!(preds[0]["empty_input"], false);
    assert_eq!(preds[1]["empty_input"], true);
    for p in &preds {
        let total: f64 = p["probabilities"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["probability"].as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    let text = ok(rnntc(&[
        "compare",
        "--models",
        s(&gru),
        s(&blstm),
        "--data",
        s(&bundle),
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,precision,recall,f1,accuracy");
    assert_eq!(lines.len(), 3);
    let names: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert!(
        names.contains(&"GRU") && names.contains(&"BLSTM"),
        "{names:?}"
    );
    let accs: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(accs[0] >= accs[1], "rows sorted by accuracy");
}

#[test]
fn evaluate_on_labelled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = prepare(dir.path(), "bundle", "15");
    let model = dir.path().join("srnn.json");
    train(&bundle, "srnn", &model, "1");
    let csv = dir.path().join("data.csv");
    fs::write(&csv, CSV).unwrap();
    let text = ok(rnntc(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&csv),
    ]));
    let accuracy = text
        .lines()
        .find(|l| l.trim_start().starts_with("accuracy"))
        .unwrap();
    assert!(
        accuracy.trim_end().ends_with(" 5"),
        "support counts the 5 labelled rows: {accuracy}"
    );
}

#[test]
fn unknown_major_version_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = prepare(dir.path(), "bundle", "10");
    let model = dir.path().join("m.json");
    train(&bundle, "srnn", &model, "1");
    let body = fs::read_to_string(&model)
        .unwrap()
        .replace("\"format_version\": \"1.0\"", "\"format_version\": \"2.0\"");
    let bumped = dir.path().join("bumped.json");
    fs::write(&bumped, body).unwrap();
    let out = rnntc(&["predict", "--model", s(&bumped), "--text", "routine"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2.0"));

    let minor = fs::read_to_string(&model)
        .unwrap()
        .replace("\"format_version\": \"1.0\"", "\"format_version\": \"1.7\"");
    fs::write(&bumped, minor).unwrap();
    ok(rnntc(&[
        "predict",
        "--model",
        s(&bumped),
        "--text",
        "routine",
    ]));
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rnntc"));
        cmd.args([
            "prepare",
            "--synthetic",
            "--per-class",
            "5",
            "--out",
            s(&out),
        ])
        .env_remove("RNNTC_SEED");
        if let Some(seed) = seed {
            cmd.env("RNNTC_SEED", seed);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(out.join("sequences.csv")).unwrap()
    };
    let env9 = run("env9", Some("9"));
    let flag9 = dir.path().join("flag9");
    ok(rnntc(&[
        "prepare",
        "--synthetic",
        "--per-class",
        "5",
        "--seed",
        "9",
        "--out",
        s(&flag9),
    ]));
    assert_eq!(env9, fs::read(flag9.join("sequences.csv")).unwrap());
    assert_ne!(env9, run("default", None));
}

#[test]
fn non_finite_training_maps_to_numeric_exit() {
    let err = CliError::from(TrainError::NonFiniteLoss { epoch: 1, batch: 2 });
    assert_eq!(err.exit_code(), 3);
    assert_eq!(CliError::Input("x".into()).exit_code(), 2);

    let cfg = desk_config(CellKind::Gru, 4);
    let mut model = RecurrentClassifier::zeros(cfg.clone()).unwrap();
    model.params.embedding.fill(f64::NAN);
    let seqs = (0..40)
        .map(|i| TokenSequence::from_ids(vec![0; 63].into_iter().chain([2 + i % 5]).collect()))
        .collect();
    let data = Dataset::new(seqs, (0..40).map(|i| i % 4).collect(), 4).unwrap();
    let split = split_dataset(40, 0).unwrap();
    let mut trainer =
        Trainer::with_model(model, &data, &split, TrainConfig::new(1, 8, 0).unwrap()).unwrap();
    let err = trainer.run_epoch().unwrap_err();
    assert!(
        matches!(err, TrainError::NonFiniteLoss { epoch: 1, batch: 1 }),
        "{err:?}"
    );
    assert_eq!(CliError::from(err).exit_code(), 3);
}
