//! Scenario configuration files.
//!
//! Configs are TOML. Unknown keys are rejected, seeds are mandatory for
//! randomized scenarios and every tolerance a scenario uses must be given.
//!
//! ```toml
//! scenario = "verify-default"
//! seed = 7
//! rank = 2
//! band = 1
//! amplitude = 0.03
//! higgs_scale = 0.5
//!
//! [chart]
//! n = 2
//! resolution = 16
//! period = 1.0
//!
//! [tolerances]
//! route = 1e-10
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::functionals::{FlowTarget, KappaScale};
use crate::lattice::LatticeChart;

/// Uniform torus: the same resolution and period on every real axis.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub n: usize,
    pub resolution: usize,
    pub period: f64,
}

impl ChartConfig {
    pub fn build(&self) -> Result<Arc<LatticeChart>> {
        LatticeChart::uniform(self.n, self.resolution, self.period)
    }

    /// Same grid in complex dimension `n`.
    pub fn build_dim(&self, n: usize) -> Result<Arc<LatticeChart>> {
        LatticeChart::uniform(n, self.resolution, self.period)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative gap between inner-product routes.
    pub route: Option<f64>,
    /// Pointwise `|tr[Φ, Φ̄_h]|`.
    pub trace: Option<f64>,
    /// Star and conjugation involutions.
    pub involution: Option<f64>,
    /// `‖𝓕‖² = 𝓗 + ‖d''Φ̄‖²`, relative.
    pub relation: Option<f64>,
    /// Agreement of the Hitchin formulations.
    pub equivalence: Option<f64>,
    /// SDYM against reduced SDYM.
    pub reduction: Option<f64>,
    /// Constant gauge covariance.
    pub gauge: Option<f64>,
    /// `‖D_z̄φ‖` of the holomorphic test configuration.
    pub holomorphy: Option<f64>,
    /// `‖∂_z̄ det φ‖` of the holomorphic test configuration.
    pub det_holomorphy: Option<f64>,
    /// `residual_2k` against the forms formulation.
    pub bridge: Option<f64>,
    /// Objective value at which the flow counts as converged.
    pub value: Option<f64>,
}

impl Tolerances {
    pub fn require(&self, key: &str) -> Result<f64> {
        let v = match key {
            "route" => self.route,
            "trace" => self.trace,
            "involution" => self.involution,
            "relation" => self.relation,
            "equivalence" => self.equivalence,
            "reduction" => self.reduction,
            "gauge" => self.gauge,
            "holomorphy" => self.holomorphy,
            "det_holomorphy" => self.det_holomorphy,
            "bridge" => self.bridge,
            "value" => self.value,
            _ => None,
        };
        match v {
            Some(t) if t.is_finite() && t >= 0.0 => Ok(t),
            Some(t) => Err(Error::Config(format!("tolerances.{key} = {t} must be finite and non-negative"))),
            None => Err(Error::Config(format!("missing tolerances.{key}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random instances per dimension.
    pub samples: usize,
}

/// Starting metric of a flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStart {
    /// `h = e^{−f}·I` with `f = amplitude·cos(2πx¹/L)`.
    SingleMode,
    /// Seeded band-limited metric.
    Random,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub target: FlowTarget,
    pub steps: usize,
    pub step_size: f64,
    pub start: FlowStart,
    /// Random metric perturbations probed around the final metric.
    pub samples: usize,
    /// Size of those perturbations.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reduce2dConfig {
    /// Use the zero configuration instead of a random one.
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: Option<u64>,
    pub chart: ChartConfig,
    pub rank: usize,
    pub band: usize,
    /// Metric amplitude of random instances and configurations.
    pub amplitude: f64,
    /// Higgs-field scale of random instances.
    pub higgs_scale: f64,
    pub kappa: Option<KappaScale>,
    pub out_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub verify: Option<VerifyConfig>,
    pub flow: Option<FlowConfig>,
    pub reduce2d: Option<Reduce2dConfig>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        self.chart.build()?;
        if self.rank == 0 {
            return Err(Error::Config("rank must be positive".into()));
        }
        if self.band == 0 || 2 * self.band >= self.chart.resolution {
            return Err(Error::Config(format!(
                "band {} must be positive and below half the resolution {}",
                self.band, self.chart.resolution
            )));
        }
        for (k, v) in [("amplitude", self.amplitude), ("higgs_scale", self.higgs_scale)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{k} = {v} must be finite and non-negative")));
            }
        }
        if let Some(f) = &self.flow {
            if !(f.step_size.is_finite() && f.step_size > 0.0) {
                return Err(Error::Config("flow.step_size must be positive".into()));
            }
            if !(f.radius.is_finite() && f.radius > 0.0) {
                return Err(Error::Config("flow.radius must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("this scenario is randomized: set `seed` or pass --seed".into()))
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| Error::Config(format!("missing [{name}] table")))
    }
}
