//! Scenario reports and their files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::functionals::FlowRecord;

/// One checked quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Deterministic scenario output: no timestamps, sorted maps.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScenarioReport {
    pub command: String,
    pub scenario: String,
    pub seed: Option<u64>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
    #[serde(skip)]
    pub trace: Option<Vec<FlowRecord>>,
}

impl ScenarioReport {
    pub fn new(command: &str, scenario: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            scenario: scenario.into(),
            seed,
            passed: true,
            ..Self::default()
        }
    }

    /// Records `value ≤ tolerance`.
    pub fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> bool {
        let passed = value <= tolerance;
        self.push(name, value, tolerance, passed)
    }

    /// Records a boolean outcome with a reported value.
    pub fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64, passed: bool) -> bool {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            passed,
        });
        passed
    }

    pub fn data<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).expect("report data serializes");
        self.data.insert(key.into(), v);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `report.json`, `meta.json` and, for flows, `trace.csv` into `dir`.
    pub fn write_to(&self, dir: &Path, meta: &Meta) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(meta)? + "\n")?;
        if let Some(trace) = &self.trace {
            std::fs::write(dir.join("trace.csv"), trace_csv(trace))?;
        }
        Ok(())
    }
}

/// Run metadata kept apart from the deterministic report.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub config: String,
    pub unix_time: u64,
}

impl Meta {
    pub fn now(config: &Path) -> Self {
        let unix_time = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            version: env!("CARGO_PKG_VERSION"),
            config: config.display().to_string(),
            unix_time,
        }
    }
}

pub const TRACE_HEADER: &str = "iteration,value,step_size,gradient_norm,residual_d_prime,residual_curvature";

pub fn trace_csv(trace: &[FlowRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.iteration, r.value, r.step_size, r.gradient_norm, r.residual_d_prime, r.residual_curvature
        );
    }
    out
}
