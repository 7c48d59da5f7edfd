use std::fs;
use std::path::Path;
use std::process::Command;

use edge_lab::cli::{parse_config, SRange};
use edge_lab::fredholm::tw_cdf;
use serde_json::Value;

fn edge_lab(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_edge-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn equilibrium_gue() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(edge_lab(&["equilibrium", "--potential", "poly:0,0,2"], dir.path()), 0);
    let v = json(&dir.path().join("equilibrium.json"));
    assert_eq!(v["result"]["kind"], "OneCut");
    assert!((v["result"]["a"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    for e in v["result"]["edges"].as_array().unwrap() {
        assert!((e["gamma"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    }
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v["modules"]["equilibrium"], env!("CARGO_PKG_VERSION"));
    let density = fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert!(density.starts_with("# edge-lab"));
    assert!(density.contains(v["config_hash"].as_str().unwrap()));
    let rows = csv_rows(&dir.path().join("density.csv"));
    assert_eq!(rows.len(), 401);
    let mid: Vec<f64> = rows[200].iter().map(|x| x.parse().unwrap()).collect();
    assert!(mid[0].abs() < 1e-12 && (mid[1] - 2.0 / std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn equilibrium_two_cut() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        edge_lab(&["equilibrium", "--potential", "poly:0,0,-2,0,0.25"], dir.path()),
        0
    );
    let v = json(&dir.path().join("equilibrium.json"));
    assert_eq!(v["result"]["kind"], "TwoCut");
    assert!((v["result"]["a"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-8);
    assert!((v["result"]["b"].as_f64().unwrap() - 6f64.sqrt()).abs() < 1e-8);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(edge_lab(&["equilibrium"], d), 2);
    assert_eq!(edge_lab(&["frobnicate"], d), 2);
    assert_eq!(edge_lab(&["tw", "--s-range", "4:-6:0.1"], d), 2);
    assert_eq!(edge_lab(&["tw", "--s-range", "a:b"], d), 2);
    assert_eq!(edge_lab(&["equilibrium", "--potential", "poly:0,0,-1"], d), 2);
    assert_eq!(edge_lab(&["recurrence", "--potential", "poly:0,0,2", "--n", "2"], d), 2);
    assert_eq!(
        edge_lab(
            &[
                "recurrence",
                "--potential",
                "poly:0,0,2",
                "--n",
                "8",
                "--n-list",
                "8,16"
            ],
            d
        ),
        2
    );
    assert_eq!(edge_lab(&["tw", "--quad-order", "4"], d), 2);
    assert_eq!(edge_lab(&["tw", "--config", "/nonexistent/edge.cfg"], d), 2);
}

#[test]
fn tw_table() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(edge_lab(&["tw", "--s-range=-6:4:0.1"], dir.path()), 0);
    let rows = csv_rows(&dir.path().join("tw.csv"));
    assert_eq!(rows.len(), 101);
    let f: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(rows[0][0], "-6");
    assert_eq!(rows[100][0], "4");
    assert_eq!(f[0], tw_cdf(-6.0, 1e-10).unwrap());
    assert_eq!(f[100], tw_cdf(4.0, 1e-10).unwrap());
    let side = json(&dir.path().join("tw.json"));
    let reports = side["result"].as_array().unwrap();
    assert_eq!(reports.len(), 101);
    assert!(reports
        .iter()
        .all(|r| r["refinement_history"].as_array().unwrap().len() >= 2));
    assert!(reports[0]["truncation_T"].as_f64().unwrap() > 0.0);
}

#[test]
fn outputs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        assert_eq!(edge_lab(&["tw", "--s-range", "-2:0:0.5"], d), 0);
        assert_eq!(
            edge_lab(
                &["recurrence", "--potential", "poly:0,0,0,0,0.25", "--n-list", "20,40"],
                d
            ),
            0
        );
    }
    for name in [
        "tw.csv",
        "tw.json",
        "recurrence.json",
        "recurrence_n20.csv",
        "recurrence_n40.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# sweep\npotential = poly:0,0,2\nn_list = 30, 40\nquad_order = 24\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(edge_lab(&["recurrence", "--config", c], dir.path()), 0);
    let v = json(&dir.path().join("recurrence.json"));
    assert_eq!(v["config"]["n_list"], serde_json::json!([30, 40]));
    assert_eq!(v["config"]["quad_order"], 24);
    assert_eq!(edge_lab(&["recurrence", "--config", c, "--n", "36"], dir.path()), 0);
    let w = json(&dir.path().join("recurrence.json"));
    assert_eq!(w["config"]["n_list"], serde_json::json!([36]));
    assert_ne!(v["config_hash"], w["config_hash"]);
    let rows = csv_rows(&dir.path().join("recurrence_n36.csv"));
    assert_eq!(rows[0][0], "0");

    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(edge_lab(&["tw", "--config", c], dir.path()), 2);
}

#[test]
fn verify_small_n_is_a_diagnostic_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        edge_lab(&["verify", "--potential", "poly:0,0,2", "--n-list", "2"], dir.path()),
        1
    );
    let v = json(&dir.path().join("verify.json"));
    let r = &v["result"][0];
    assert_eq!(r["pass"], false);
    assert!(r["notes"][0].as_str().unwrap().contains("insufficient n"));
}

#[test]
fn kernel_edge_and_hole_prob() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        edge_lab(&["kernel-edge", "--potential", "poly:0,0,2", "--n-list", "50,100"], d),
        0
    );
    let v = json(&d.join("kernel_edge.json"));
    let errs = v["result"]["kernel"]["errors"].as_array().unwrap();
    assert!(errs[1].as_f64().unwrap() < errs[0].as_f64().unwrap());
    assert_eq!(csv_rows(&d.join("kernel_edge.csv")).len(), 50);

    assert_eq!(
        edge_lab(
            &[
                "hole-prob",
                "--potential",
                "poly:0,0,2",
                "--n",
                "100",
                "--s-range",
                "0:1:1"
            ],
            d
        ),
        0
    );
    let rows = csv_rows(&d.join("hole_prob.csv"));
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (e, f): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((e - f).abs() < 0.1, "{e} {f}");
    }
}

#[test]
fn config_parser_and_ranges() {
    let kv = parse_config("a = 1\n\n  # note\nb=x:y # trailing\n").unwrap();
    assert_eq!(kv, vec![("a".into(), "1".into()), ("b".into(), "x:y".into())]);
    assert!(parse_config("novalue\n").is_err());
    let r = SRange::parse("-6:4:0.1").unwrap();
    let v = r.values();
    assert_eq!(v.len(), 101);
    assert_eq!(v[1], -5.9);
    assert_eq!(SRange::parse("0:0:1").unwrap().values(), vec![0.0]);
    assert!(SRange::parse("0:1:0").is_err());
}
