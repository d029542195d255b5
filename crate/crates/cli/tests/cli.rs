use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ecm");

fn ecm(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ECM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const ECM1D: [&str; 7] = [
    "ecm1d",
    "--kappa-met",
    "2",
    "--kappa-cer",
    "6",
    "--vol-cer",
    "0.5",
];

#[test]
fn ecm1d_example_reaches_harmonic_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut args = ECM1D.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let o = ecm(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("kappa_dummy = 3.0000"));
    let s = json(&out.join("summary.json"));
    let limit = s["ecm"]["limit"].as_f64().unwrap();
    assert!((limit - 3.0).abs() <= 1e-8, "{limit}");
    assert_eq!(s["ecm"]["converged"], Value::Bool(true));
    assert_eq!(s["config"]["command"], "ecm1d");
    let rows = csv_rows(&out.join("trace.csv"));
    assert_eq!(rows[0], ["n", "dummy_value", "force", "rel_change"]);
    assert_eq!(
        rows.len() - 1,
        s["ecm"]["iterations"].as_u64().unwrap() as usize
    );
}

#[test]
fn ecm2d_without_contrast_takes_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ecm(&[
        "ecm2d",
        "--lambda-met",
        "1.5",
        "--mu",
        "1",
        "--d-c",
        "1",
        "--vol-cer",
        "0.5",
        "--eps",
        "0",
        "--mesh-n",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["ecm"]["iterations"], 1);
    assert!((s["ecm"]["limit"].as_f64().unwrap() - 1.5).abs() < 1e-8);
}

#[test]
fn missing_flag_is_a_usage_error() {
    let o = ecm(&["ecm1d", "--kappa-met", "2", "--vol-cer", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa-cer"));
    let o = ecm(&["ecm1d", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ecm(&["nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn capped_iteration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut args = ECM1D.to_vec();
    args.extend(["--max-iter", "5", "--out", out.to_str().unwrap()]);
    let o = ecm(&args);
    assert_eq!(o.status.code(), Some(2));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["ecm"]["stop_reason"], "max_iter");
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "kappa_met = 2.0\nkappa_cer = 6.0\nvol_cer = 0.5\nl = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = ecm(&[
        "ecm1d",
        "--config",
        cfg.to_str().unwrap(),
        "--vol-cer",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["config"]["params"]["vol_cer"], 0.25);
    assert_eq!(s["config"]["l"], 0.5);
    // 1 / (0.75/2 + 0.25/6)
    let expected = 2.4;
    assert!((s["ecm"]["limit"].as_f64().unwrap() - expected).abs() < 1e-8);
}

#[test]
fn env_var_sets_output_parent() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(ECM1D)
        .env("ECM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let runs: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(runs.len(), 1);
    assert!(runs[0].starts_with("ecm1d-"));
}

fn assert_same_files(a: &Path, b: &Path) {
    let mut names: Vec<_> = fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?} differs"
        );
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &[
            "stochastic1d",
            "--kappa-met",
            "2",
            "--kappa-cer",
            "6",
            "--vol-cer",
            "0.5",
            "--l",
            "1",
            "--n-cells",
            "10,100",
            "--samples",
            "50",
            "--seed",
            "7",
        ],
        &[
            "perturb2d",
            "--lambda-met",
            "1",
            "--mu",
            "1",
            "--d-c",
            "1",
            "--vol-cer",
            "0.5",
            "--mesh-n",
            "32",
        ],
        &[
            "plastic1d",
            "--kappa-cer",
            "2",
            "--alpha",
            "1",
            "--beta",
            "1",
            "--u-crit",
            "1",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("{i}a"));
        let b = dir.path().join(format!("{i}b"));
        for out in [&a, &b] {
            let mut full = args.to_vec();
            full.extend(["--out", out.to_str().unwrap()]);
            let o = ecm(&full);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        assert_same_files(&a, &b);
    }
}

#[test]
fn perturb2d_writes_slope_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ecm(&[
        "perturb2d",
        "--lambda-met",
        "1",
        "--mu",
        "1",
        "--d-c",
        "1",
        "--vol-cer",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("slopes.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][..2], ["u0", "1"]);
    assert_eq!(rows[2][..2], ["u0+eps*u1", "2"]);
    let s1: f64 = rows[1][2].parse().unwrap();
    let s2: f64 = rows[2][2].parse().unwrap();
    assert!((0.8..=1.2).contains(&s1));
    assert!(s2 >= 1.7);
    let errors = csv_rows(&out.join("errors.csv"));
    assert_eq!(errors[0], ["eps", "h1_error_order0", "h1_error_order1"]);
    assert_eq!(errors.len(), 4);
}

#[test]
fn outputs_round_trip() {
    use ecm_core::io::{from_csv_str, to_csv_string, EcmSummary, TraceRow};
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut args = ECM1D.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    assert!(ecm(&args).status.success());

    let text = fs::read_to_string(out.join("trace.csv")).unwrap();
    let rows: Vec<TraceRow> = from_csv_str(&text).unwrap();
    assert_eq!(to_csv_string(&rows).unwrap(), text);

    #[derive(Debug, PartialEq, serde::Serialize, serde::Deserialize)]
    struct Summary {
        config: Value,
        ecm: EcmSummary,
        force: f64,
        kappa_hom: f64,
    }
    let text = fs::read_to_string(out.join("summary.json")).unwrap();
    let parsed: Summary = serde_json::from_str(&text).unwrap();
    let again: Summary = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(parsed, again);
    assert_eq!(parsed.ecm.iterations, rows.len());
}

#[test]
fn small_delta_sweep_reports_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ecm(&[
        "deltasweep2d",
        "--lambda-met",
        "1",
        "--mu",
        "1",
        "--d-c",
        "1",
        "--vol-cer",
        "0.5",
        "--deltas",
        "1,0.5",
        "--mesh-per-period",
        "8",
        "--mesh-n",
        "32",
        "--max-iter",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let deltas = csv_rows(&out.join("deltas.csv"));
    assert_eq!(deltas[0], ["eps", "delta", "F_delta"]);
    assert_eq!(deltas.len(), 1 + 3 * 2);
    let gaps = csv_rows(&out.join("gaps.csv"));
    assert_eq!(gaps[0], ["eps", "gap", "fitted_slope"]);
    assert_eq!(gaps.len(), 4);
    let s = json(&out.join("summary.json"));
    assert!(s["gap_slope"].is_number());
}

#[test]
fn homogenize1d_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ecm(&[
        "homogenize1d",
        "--kappa-met",
        "2",
        "--kappa-cer",
        "6",
        "--vol-cer",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["kappa_hom"], 3.0);
    let rows = csv_rows(&out.join("periodic.csv"));
    assert_eq!(rows[0], ["n_periods", "force"]);
    assert_eq!(rows.len(), 5);
}
