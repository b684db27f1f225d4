mod common;

use common::*;
use serde_json::Value;
use varlp::maximal::rearrangement_value;
use varlp::{Grid, GridFunction};
use varlp_cli::config::ScenarioConfig;
use varlp_cli::scenario::run_scenario;
use varlp_cli::verify::{level_set_mismatches, level_set_suite, verify_with, Level, MedianFn};

const SCENARIO: &str = r#"
name = "cli-test"
budget = 150
seed = 11

[grid]
dims = 1
box_sizes = [8, 16]

[exponent]
kind = "smooth-wave"
base = 2.0
amplitude = 0.5
period = 8.0

[[conditions]]
condition = "ainfty"
lambdas = [0.25, 0.75]

[[conditions]]
condition = "apvar"

[[conditions]]
condition = "rh"
r = 2.0

[[conditions]]
condition = "operator-norm"
operator = "median"
lambda = 0.5
tests = "indicators"

[[conditions]]
condition = "operator-norm"
operator = "averaging-uniform"
"#;

/// `m_λ` with the rank read one position too deep.
fn off_by_one_median(f: &GridFunction, lambda: f64) -> varlp::Result<GridFunction> {
    let g = f.grid();
    let mut out = vec![0.0f64; g.cell_count()];
    for q in g.all_cubes() {
        let t = (lambda * q.cell_count() as f64 + 1.0) * g.cell_measure();
        let v = rearrangement_value(f, &q, t)?.value;
        for c in g.cells_of(&q) {
            out[c] = out[c].max(v);
        }
    }
    GridFunction::new(g, out)
}

#[test]
fn mutated_rearrangement_fails_level_sets() {
    let g = Grid::line(6).unwrap();
    let f = GridFunction::new(&g, vec![0.0, 3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
    assert_eq!(level_set_mismatches(&f, 0.5, varlp::maximal::median_maximal), 0);
    assert!(level_set_mismatches(&f, 0.5, off_by_one_median) > 0);

    let mutant: MedianFn = off_by_one_median;
    let summary = verify_with(Level::Full, &[0.5], 1, mutant);
    assert!(!summary.all_passed);
    let failing: Vec<&str> =
        summary.suites.iter().filter(|s| !s.ok()).map(|s| s.name.as_str()).collect();
    assert_eq!(failing, vec!["level-set-identity"]);
}

#[test]
fn lambda_list_repeats_suites() {
    let summary = varlp_cli::verify::verify_suite(Level::Quick, &[0.25, 0.5, 0.75], 0);
    assert!(
        summary.all_passed,
        "{:#?}",
        summary.suites.iter().filter(|s| !s.ok()).collect::<Vec<_>>()
    );
    let level_sets = summary.suites.iter().filter(|s| s.name == "level-set-identity").count();
    assert_eq!(level_sets, 3);
    let mut rng = rand::SeedableRng::seed_from_u64(2);
    assert!(level_set_suite(&mut rng, 20, 0.3, varlp::maximal::median_maximal).ok());
}

#[test]
fn report_validates_against_schema() {
    let mut config = ScenarioConfig::from_toml(SCENARIO).unwrap();
    config.verify = Some(varlp_cli::config::VerifySpec { level: Level::Quick, lambdas: vec![0.5] });
    let report = run_scenario(&config).unwrap();
    let doc = serde_json::to_value(&report).unwrap();
    assert_eq!(schema_errors(&doc), Vec::<String>::new());

    let mut broken = doc.clone();
    broken["trends"][0]["witness_id"] = Value::from("nope");
    assert!(!schema_errors(&broken).is_empty());
    let mut broken = doc;
    broken.as_object_mut().unwrap().remove("schema_version");
    assert!(!schema_errors(&broken).is_empty());
}

#[test]
fn run_writes_report_and_trends() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, SCENARIO).unwrap();
    let out = dir.path().join("out");
    let o = varlp(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(schema_errors(&doc), Vec::<String>::new());
    let csv = std::fs::read_to_string(out.join("trends.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("box_cells,condition,lambda,best_ratio,witness_id"));
    // Two boxes, six reports each.
    assert_eq!(lines.count(), 12);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, SCENARIO).unwrap();
    let run = |seed: &str, name: &str| -> Value {
        let out = dir.path().join(name);
        let o = varlp(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
    };
    assert_eq!(run("5", "a")["config"]["seed"], 5);
    assert_eq!(run("6", "b")["config"]["seed"], 6);
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "name = \"x\"\n[grid]\nbox_sizes = []\n[exponent]\nkind = \"constant\"\np = 2.0\n",
    )
    .unwrap();
    let o = varlp(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("box_sizes"));
    assert!(!varlp(&["run"]).status.success());
    assert!(!varlp(&["run", "--config", "/nonexistent/x.toml"]).status.success());
}

fn json_stdout(args: &[&str]) -> Value {
    let o = varlp(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], "1.0.0");
    doc["result"].clone()
}

#[test]
fn array_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let p = dir.path().join("p.json");
    std::fs::write(&f, "dims,4\n0,0,8,0\n").unwrap();
    std::fs::write(&p, r#"{"dims":[4],"values":[2,2,2,2]}"#).unwrap();
    let (f, p) = (f.to_str().unwrap(), p.to_str().unwrap());

    let norm = json_stdout(&["norm", "--f", f, "--p", p]);
    assert_eq!(norm["norm"], 8.0);
    assert_eq!(norm["modular"], 64.0);

    let m = json_stdout(&["maximal", "--f", f]);
    assert_eq!(m["values"], serde_json::json!([8.0 / 3.0, 4.0, 8.0, 4.0]));
    let med = json_stdout(&["median", "--f", f, "--lambda", "0.5"]);
    assert_eq!(med["values"][2], 8.0);

    let cz = json_stdout(&["cz", "--f", f, "--threshold", "3"]);
    assert_eq!(cz["cubes"], serde_json::json!([{"anchor": [2], "side": 2}]));

    let out = dir.path().join("out");
    let o = varlp(&["maximal", "--f", f, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(out.join("maximal.csv")).unwrap(),
        "dims,4\n2.6666666666666665,4,8,4\n"
    );
    assert!(out.join("maximal.json").exists());
}

#[test]
fn search_and_chain_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    std::fs::write(&p, "dims,8\n2,2,2,2,2,2,2,2\n").unwrap();
    let p = p.to_str().unwrap();

    let a = json_stdout(&["ainfty-search", "--p", p, "--lambdas", "0.25", "--budget", "200"]);
    assert!((a[0]["best_ratio"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let ap = json_stdout(&["apvar-search", "--p", p, "--budget", "100", "--seed", "3"]);
    assert_eq!(ap["seed"], 3);
    let rh = json_stdout(&["rh", "--p", p, "--r", "2", "--c", "1", "--budget", "50"]);
    assert_eq!(rh["b"]["b"], 0.0);

    let c = json_stdout(&["chains", "--r", "2", "--c", "1", "--gamma", "1.5"]);
    assert_eq!(c["chain31"]["k"], 4.0);
    assert_eq!(c["chain45"]["r"], 13.0 / 14.0);

    let cover = json_stdout(&["cover", "--dims", "8,8", "--r", "0.5", "--seed", "4"]);
    assert!(cover["subfamily_count"].as_u64().unwrap() >= 1);
    assert_eq!(cover, json_stdout(&["cover", "--dims", "8,8", "--r", "0.5", "--seed", "4"]));
}

#[test]
fn verify_subcommand_reports() {
    let o = varlp(&["verify", "--level", "quick", "--lambdas", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["result"]["all_passed"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[PASS] level-set-identity (lambda=0.5)"));
}
