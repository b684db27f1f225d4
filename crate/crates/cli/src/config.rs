//! Scenario configuration, read from TOML or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use varlp::conditions::{OperatorTag, TestFamily};

use crate::generate::ExponentSpec;
use crate::verify::Level;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub grid: GridSpec,
    pub exponent: ExponentSpec,
    #[serde(default)]
    pub conditions: Vec<ConditionSpec>,
    /// Candidates per search unless a condition overrides it.
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub dims: usize,
    /// Cells per axis, one run per entry.
    pub box_sizes: Vec<usize>,
    #[serde(default = "unit_side")]
    pub cell_side: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum ConditionSpec {
    Ainfty {
        lambdas: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Apvar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    Rh {
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
    OperatorNorm {
        #[serde(flatten)]
        operator: OperatorTag,
        #[serde(default = "all_tests")]
        tests: TestFamily,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<u64>,
    },
}

impl ConditionSpec {
    pub fn budget(&self) -> Option<u64> {
        match self {
            Self::Ainfty { budget, .. }
            | Self::Apvar { budget }
            | Self::Rh { budget, .. }
            | Self::OperatorNorm { budget, .. } => *budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub level: Level,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_trends")]
    pub trends: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, report: default_report(), trends: default_trends() }
    }
}

fn default_name() -> String {
    "scenario".into()
}
fn default_budget() -> u64 {
    1000
}
fn one() -> usize {
    1
}
fn unit_side() -> f64 {
    1.0
}
fn all_tests() -> TestFamily {
    TestFamily::All
}
pub fn default_lambdas() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_report() -> String {
    "report.json".into()
}
fn default_trends() -> String {
    "trends.csv".into()
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `.json` as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        };
        parsed.with_context(|| format!("loading config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(matches!(self.grid.dims, 1 | 2), "grid.dims must be 1 or 2");
        ensure!(!self.grid.box_sizes.is_empty(), "grid.box_sizes must not be empty");
        ensure!(self.grid.box_sizes.iter().all(|&n| n > 0), "box sizes must be positive");
        ensure!(self.budget > 0, "budget must be positive");
        for c in &self.conditions {
            ensure!(c.budget() != Some(0), "condition budgets must be positive");
            if let ConditionSpec::Ainfty { lambdas, .. } = c {
                ensure!(!lambdas.is_empty(), "ainfty needs at least one lambda");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
budget = 200
seed = 7

[grid]
dims = 1
box_sizes = [16, 32]

[exponent]
kind = "two-valued-split"
low = 1.5
high = 3.0

[[conditions]]
condition = "ainfty"
lambdas = [0.5]

[[conditions]]
condition = "operator-norm"
operator = "median"
lambda = 0.75
tests = "indicators"

[verify]
level = "quick"
"#;

    #[test]
    fn parses_toml() {
        let c = ScenarioConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.grid.box_sizes, vec![16, 32]);
        assert_eq!(c.conditions.len(), 2);
        assert_eq!(
            c.conditions[1],
            ConditionSpec::OperatorNorm {
                operator: OperatorTag::Median { lambda: 0.75 },
                tests: TestFamily::Indicators,
                budget: None
            }
        );
        assert_eq!(c.verify.as_ref().unwrap().lambdas, default_lambdas());
        assert_eq!(c.output.report, "report.json");
    }

    #[test]
    fn json_round_trip() {
        let c = ScenarioConfig::from_toml(SAMPLE).unwrap();
        let back = ScenarioConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_malformed() {
        assert!(ScenarioConfig::from_toml("name = 1").is_err());
        let bad = SAMPLE.replace("box_sizes = [16, 32]", "box_sizes = []");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
        let unknown = SAMPLE.replace("seed = 7", "seed = 7\ncolour = 3");
        assert!(ScenarioConfig::from_toml(&unknown).is_err());
    }
}
