//! Scenario execution and experiment reports.

use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use varlp::conditions::{
    ainfty_search, apvar_search, operator_norm_estimate, rh_search, ConditionReport,
};
use varlp::Grid;

use crate::config::{ConditionSpec, ScenarioConfig};
use crate::generate::generate_exponent;
use crate::io::{to_json, write_text};
use crate::verify::{verify_suite, VerifySummary};

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_NAME: &str = "varlp";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys holding wall-clock measurements, dropped from the canonical payload.
pub const TIMING_KEYS: [&str; 2] = ["wall_time_secs", "runtime_secs"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    /// Cells per axis.
    pub box_cells: usize,
    pub grid: Grid,
    pub p_minus: f64,
    pub p_plus: f64,
    pub reports: Vec<ConditionReport>,
}

/// One row of the box-size trend table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub box_cells: usize,
    pub condition: String,
    pub lambda: Option<f64>,
    pub best_ratio: f64,
    /// `b<box_cells>-<index>`: the box and the position of the full report
    /// in its `reports` list.
    pub witness_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub tool: ToolInfo,
    pub config: ScenarioConfig,
    pub boxes: Vec<BoxReport>,
    pub trends: Vec<TrendRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySummary>,
    pub runtime_secs: f64,
}

impl ExperimentReport {
    /// The report as JSON with every timing field removed; identical
    /// configurations give identical payloads.
    pub fn canonical_payload(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        strip_keys(&mut v, &TIMING_KEYS);
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn trends_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["box_cells", "condition", "lambda", "best_ratio", "witness_id"])?;
        for row in &self.trends {
            w.write_record([
                row.box_cells.to_string(),
                row.condition.clone(),
                row.lambda.map(|l| l.to_string()).unwrap_or_default(),
                row.best_ratio.to_string(),
                row.witness_id.clone(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes the JSON report and the trend table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(&self.config.output.report), &to_json(self)?)?;
        write_text(&dir.join(&self.config.output.trends), &self.trends_csv()?)
    }
}

fn strip_keys(v: &mut Value, keys: &[&str]) {
    match v {
        Value::Object(map) => {
            for k in keys {
                map.remove(*k);
            }
            map.values_mut().for_each(|x| strip_keys(x, keys));
        }
        Value::Array(items) => items.iter_mut().for_each(|x| strip_keys(x, keys)),
        _ => {}
    }
}

/// Seed for one search, derived from the scenario seed and its position.
fn derive_seed(seed: u64, box_index: usize, condition: usize, item: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((box_index as u64) << 40) | ((condition as u64) << 20) | item as u64);
    rng.next_u64()
}

pub fn grid_for(config: &ScenarioConfig, box_cells: usize) -> Result<Grid> {
    Ok(Grid::new(vec![box_cells; config.grid.dims], config.grid.cell_side)?)
}

/// Runs every selected condition on every box size, then the verification
/// suite if requested. Scenario steps run in order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let mut boxes = Vec::new();
    let mut trends = Vec::new();
    for (bi, &box_cells) in config.grid.box_sizes.iter().enumerate() {
        let grid = grid_for(config, box_cells)?;
        let p = generate_exponent(&config.exponent, &grid)?;
        let mut reports = Vec::new();
        for (ci, spec) in config.conditions.iter().enumerate() {
            let budget = spec.budget().unwrap_or(config.budget);
            match spec {
                ConditionSpec::Ainfty { lambdas, .. } => {
                    for (li, &lambda) in lambdas.iter().enumerate() {
                        let seed = derive_seed(config.seed, bi, ci, li);
                        reports.push(ainfty_search(&p, lambda, budget, seed)?);
                    }
                }
                ConditionSpec::Apvar { .. } => {
                    reports.push(apvar_search(&p, budget, derive_seed(config.seed, bi, ci, 0))?);
                }
                ConditionSpec::Rh { r, .. } => {
                    reports.push(rh_search(&p, *r, budget, derive_seed(config.seed, bi, ci, 0))?);
                }
                ConditionSpec::OperatorNorm { operator, tests, .. } => {
                    let seed = derive_seed(config.seed, bi, ci, 0);
                    reports.push(operator_norm_estimate(*operator, &p, *tests, budget, seed)?);
                }
            }
        }
        for (i, r) in reports.iter().enumerate() {
            trends.push(TrendRow {
                box_cells,
                condition: r.condition.clone(),
                lambda: r.parameter("lambda"),
                best_ratio: r.best_ratio,
                witness_id: format!("b{box_cells}-{i}"),
            });
        }
        boxes.push(BoxReport {
            box_cells,
            grid,
            p_minus: p.p_minus(),
            p_plus: p.p_plus(),
            reports,
        });
    }
    let verify = config.verify.as_ref().map(|v| verify_suite(v.level, &v.lambdas, config.seed));
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION.into(),
        tool: ToolInfo { name: TOOL_NAME.into(), version: TOOL_VERSION.into() },
        config: config.clone(),
        boxes,
        trends,
        verify,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}
