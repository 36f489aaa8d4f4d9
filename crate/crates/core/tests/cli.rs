use std::path::Path;
use std::process::{Command, Output};

use stit_core::cli::SimulationDocument;

fn stit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stit")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn load(path: &Path) -> SimulationDocument {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Value column of a named row in table CSV output.
fn table_value(csv_text: &str, quantity: &str) -> Option<f64> {
    let body: String = csv_text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records()
        .map(Result::unwrap)
        .find(|rec| &rec[0] == quantity)
        .map(|rec| rec[1].parse().unwrap())
}

#[test]
fn tables_contain_the_headline_rows() {
    let o = stit(&["tables", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# seed: 3")));
    assert!((table_value(&text, "eps_E[TT]").unwrap() - 0.442878).abs() < 1e-6);
    assert!((table_value(&text, "eta_V,V[X]").unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert!(table_value(&text, "eps_E[P1,1] as-printed").is_some());
    assert!(table_value(&text, "eps_E[P1,1] figure-consistent").is_some());
}

#[test]
fn tables_as_json() {
    let o = stit(&["tables", "--format", "json", "--series-terms", "1000"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["rows"].as_array().unwrap().len() > 100);
}

#[test]
fn zero_time_keeps_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = stit(&["simulate", "--time", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = load(&out);
    assert_eq!(doc.construction.final_cells.len(), 1);
    assert!(doc.construction.polygons.is_empty());
    assert_eq!(doc.header["seed"], "1");
}

#[test]
fn fixed_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = stit(&["simulate", "--time", "6", "--seed", "42", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = dir.path().join("c.json");
    stit(&["simulate", "--time", "6", "--seed", "43", "--out", other.to_str().unwrap()]);
    assert_ne!(load(&a).construction.polygons, load(&other).construction.polygons);
}

#[test]
fn replicates_get_their_own_files_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let obj = dir.path().join("run.obj");
    let o = stit(&[
        "simulate",
        "--time",
        "5",
        "--replicates",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--export-obj",
        obj.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    for r in 0..3 {
        let doc = load(&dir.path().join(format!("run_r{r}.json")));
        assert_eq!(doc.construction.replicate, r);
    }
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().filter(|l| !l.starts_with('#')).count(), 4);
    let obj_text = std::fs::read_to_string(&obj).unwrap();
    assert!(obj_text.starts_with('#'));
    assert!(obj_text.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&stit(&["--no-such-flag", "tables"])), 1);
    assert_eq!(code(&stit(&["simulate", "--time", "1", "--target-cells", "10"])), 1);
    assert_eq!(code(&stit(&["tables", "--series-terms", "10"])), 2);
    assert_eq!(code(&stit(&["simulate", "--time", "30", "--cell-cap", "20"])), 3);
    let again = stit(&["simulate", "--time", "30", "--cell-cap", "20"]);
    assert_eq!(code(&again), 3);
}

#[test]
fn toml_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 9\ntime = 4.0\ndirection-dist = \"aniso-z2\"\n").unwrap();
    let out = dir.path().join("run.json");
    let o = stit(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = load(&out);
    assert_eq!(doc.construction.seed, 10);
    assert_eq!(doc.construction.t, 4.0);
    assert_eq!(doc.construction.direction_dist, "aniso-z2");

    std::fs::write(&cfg, "sead = 9\n").unwrap();
    assert_eq!(code(&stit(&["tables", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn sample_segment_report() {
    let o = stit(&["sample-segment", "--samples", "20000", "--seed", "4", "--format", "json"]);
    assert!(matches!(code(&o), 0 | 4));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["quantity"] == "p_L|T"));
}

#[test]
fn compare_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = stit(&[
        "compare",
        "--time",
        "8",
        "--replicates",
        "4",
        "--series-terms",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("recommended"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("eps_V[T]"));
    assert!(text.contains("P1 label assignment"));
}
