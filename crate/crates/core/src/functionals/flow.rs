//! Descent on the space of metrics with the Higgs field held fixed.
//!
//! Metrics are written `M = M₀^{1/2} exp(s) M₀^{1/2}` with `s` a hermitian
//! field spanned by real Fourier modes times a hermitian matrix basis.
//! Gradients are central differences; steps use Armijo backtracking, so every
//! accepted step lowers the objective.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{kobayashi_value, residual_2k, FunctionalReport, KappaScale};
use crate::endforms::MetricField;
use crate::error::{Error, Result};
use crate::higgs::HiggsInstance;
use crate::lattice::{LatticeChart, ScalarField, C64};
use crate::matrix::{expm_hermitian, sqrt_hermitian, MatrixField};

/// Functional to minimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowTarget {
    /// The non-abelian Seiberg–Witten functional.
    H,
    /// The Kobayashi functional.
    J,
}

impl FlowTarget {
    pub fn evaluate(self, inst: &HiggsInstance) -> Result<f64> {
        match self {
            FlowTarget::H => super::sw_value(inst),
            FlowTarget::J => kobayashi_value(inst),
        }
    }
}

/// Flow parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub target: FlowTarget,
    /// Maximum number of accepted steps.
    pub steps: usize,
    /// Initial trial step length.
    pub step_size: f64,
    /// Band of the Fourier modes spanning `s`.
    pub band: usize,
    /// Stop once the objective falls below this value.
    pub value_tol: f64,
    /// Halvings allowed per line search.
    pub max_backtracks: usize,
    /// Central-difference width.
    pub fd_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            target: FlowTarget::H,
            steps: 500,
            step_size: 1.0,
            band: 1,
            value_tol: 1e-12,
            max_backtracks: 40,
            fd_step: 1e-5,
        }
    }
}

/// One row of the flow trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowRecord {
    pub iteration: usize,
    pub value: f64,
    pub step_size: f64,
    pub gradient_norm: f64,
    pub residual_d_prime: f64,
    pub residual_curvature: f64,
}

/// Why the flow stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    /// The objective fell below the requested tolerance.
    Converged,
    /// The step budget ran out.
    StepLimit,
    /// No decrease was found after the allowed backtracking.
    Stalled,
}

/// Final state of a flow.
#[derive(Clone, Debug)]
pub struct FlowResult {
    pub instance: HiggsInstance,
    pub status: FlowStatus,
    pub report: FunctionalReport,
    /// Coefficients of `s` in the flow basis.
    pub coefficients: Vec<f64>,
}

struct Basis {
    root: MatrixField,
    elements: Vec<MatrixField>,
}

fn hermitian_basis(r: usize) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(r * r);
    for j in 0..r {
        let mut m = DMatrix::<C64>::zeros(r, r);
        m[(j, j)] = C64::new(1.0, 0.0);
        out.push(m);
    }
    for j in 0..r {
        for k in j + 1..r {
            let mut m = DMatrix::<C64>::zeros(r, r);
            m[(j, k)] = C64::new(1.0, 0.0);
            m[(k, j)] = C64::new(1.0, 0.0);
            out.push(m.clone());
            m[(j, k)] = C64::new(0.0, 1.0);
            m[(k, j)] = C64::new(0.0, -1.0);
            out.push(m);
        }
    }
    out
}

/// Real modes `1, cos(k·x), sin(k·x)` for `k` in a half-space with `|k_j| ≤ band`.
fn fourier_modes(chart: &std::sync::Arc<LatticeChart>, band: usize) -> Vec<ScalarField> {
    let axes = 2 * chart.n();
    let b = band as i64;
    let width = (2 * b + 1) as usize;
    let mut out = vec![ScalarField::constant(chart, C64::new(1.0, 0.0))];
    for flat in 0..width.pow(axes as u32) {
        let mut rest = flat;
        let mut k = vec![0i64; axes];
        for j in (0..axes).rev() {
            k[j] = (rest % width) as i64 - b;
            rest /= width;
        }
        // Keep k whose first nonzero entry is positive.
        match k.iter().find(|&&x| x != 0) {
            Some(&x) if x > 0 => {}
            _ => continue,
        }
        let periods: Vec<f64> = (0..axes).map(|j| chart.real_period(j)).collect();
        let phase = |x: &[f64]| -> f64 { (0..axes).map(|j| 2.0 * PI * k[j] as f64 * x[j] / periods[j]).sum() };
        out.push(ScalarField::from_fn(chart, |x| C64::new(phase(x).cos(), 0.0)));
        out.push(ScalarField::from_fn(chart, |x| C64::new(phase(x).sin(), 0.0)));
    }
    out
}

impl Basis {
    fn new(start: &MetricField, band: usize) -> Result<Self> {
        let chart = start.chart();
        let nmin = *chart.spec().resolution.iter().min().unwrap();
        if 2 * band >= nmin {
            return Err(Error::BandTooLarge {
                band,
                resolution: nmin,
            });
        }
        let r = start.rank();
        let root = start.gram().map_points(|m| sqrt_hermitian(&m.into_owned()));
        let mats = hermitian_basis(r);
        let mut elements = Vec::new();
        for f in fourier_modes(chart, band) {
            for m in &mats {
                elements.push(MatrixField::constant(chart, m).mul_scalar_field(&f)?);
            }
        }
        Ok(Self { root, elements })
    }

    fn metric(&self, coeffs: &[f64]) -> Result<MetricField> {
        let r = self.root.rank();
        let mut s = MatrixField::zeros(self.root.chart(), r);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            if *c != 0.0 {
                s = s.add(&e.scale(C64::new(*c, 0.0)))?;
            }
        }
        let exp_s = s.map_points(|m| expm_hermitian(&m.into_owned()));
        let gram = self.root.mul(&exp_s)?.mul(&self.root)?;
        // Symmetrize rounding so the hermiticity check sees an exact hermitian matrix.
        MetricField::from_gram(gram.add(&gram.adjoint())?.scale(C64::new(0.5, 0.0)))
    }
}

fn evaluate(base: &HiggsInstance, basis: &Basis, target: FlowTarget, coeffs: &[f64]) -> Result<(HiggsInstance, f64)> {
    let inst = base.with_metric(basis.metric(coeffs)?)?;
    let v = target.evaluate(&inst)?;
    Ok((inst, v))
}

fn record(iteration: usize, value: f64, step: f64, grad: f64, inst: &HiggsInstance) -> Result<FlowRecord> {
    let res = residual_2k(inst, KappaScale::Unit)?;
    Ok(FlowRecord {
        iteration,
        value,
        step_size: step,
        gradient_norm: grad,
        residual_d_prime: res.expect("d_prime"),
        residual_curvature: res.expect("curvature"),
    })
}

fn gradient(base: &HiggsInstance, basis: &Basis, target: FlowTarget, x: &[f64], eps: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(x.len());
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + eps;
        let (_, plus) = evaluate(base, basis, target, &y)?;
        y[i] = x[i] - eps;
        let (_, minus) = evaluate(base, basis, target, &y)?;
        y[i] = x[i];
        g.push((plus - minus) / (2.0 * eps));
    }
    Ok(g)
}

/// Minimizes the chosen functional over metrics, keeping `Φ` fixed.
pub fn flow_minimize(inst: &HiggsInstance, options: &FlowOptions) -> Result<FlowResult> {
    if inst.connection_override().is_some() {
        return Err(Error::NotApplicable(
            "metric flow needs the Chern connection of the metric".into(),
        ));
    }
    let basis = Basis::new(inst.metric(), options.band)?;
    let mut x = vec![0.0; basis.elements.len()];
    let (mut current, mut value) = evaluate(inst, &basis, options.target, &x)?;
    let mut trace = vec![record(0, value, 0.0, 0.0, &current)?];
    let mut step = options.step_size;
    let mut status = FlowStatus::StepLimit;
    let mut accepted = 0;
    while accepted < options.steps {
        if value < options.value_tol {
            status = FlowStatus::Converged;
            break;
        }
        let g = gradient(inst, &basis, options.target, &x, options.fd_step)?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2 == 0.0 {
            status = FlowStatus::Stalled;
            break;
        }
        let mut t = step;
        let mut found = None;
        for _ in 0..=options.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            if let Ok((cand, v)) = evaluate(inst, &basis, options.target, &trial) {
                if v <= value - 1e-4 * t * g2 && v < value {
                    found = Some((trial, cand, v));
                    break;
                }
            }
            t *= 0.5;
        }
        match found {
            Some((trial, cand, v)) => {
                x = trial;
                current = cand;
                value = v;
                accepted += 1;
                trace.push(record(accepted, value, t, g2.sqrt(), &current)?);
                step = (2.0 * t).min(1e6);
            }
            None => {
                status = FlowStatus::Stalled;
                break;
            }
        }
    }
    if status == FlowStatus::StepLimit && value < options.value_tol {
        status = FlowStatus::Converged;
    }
    let report = FunctionalReport {
        trace,
        ..Default::default()
    }
    .value("initial", inst_value(inst, options.target)?)
    .value("final", value)
    .value("accepted_steps", accepted as f64);
    Ok(FlowResult {
        instance: current,
        status,
        report,
        coefficients: x,
    })
}

fn inst_value(inst: &HiggsInstance, target: FlowTarget) -> Result<f64> {
    target.evaluate(inst)
}

/// Result of probing a metric with random perturbations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimumCheck {
    pub value: f64,
    pub min_perturbed: f64,
    pub samples: usize,
    /// `value ≤ min_perturbed` up to `1e-12 (1 + value)`.
    pub is_local_minimum: bool,
}

/// Evaluates the functional at `samples` random metrics `M^{1/2} exp(s) M^{1/2}`
/// with `|s|` of size `radius`.
pub fn minimum_check(
    inst: &HiggsInstance,
    target: FlowTarget,
    band: usize,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<MinimumCheck> {
    let basis = Basis::new(inst.metric(), band)?;
    let value = target.evaluate(inst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_perturbed = f64::INFINITY;
    for _ in 0..samples {
        let mut x: Vec<f64> = (0..basis.elements.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut x {
            *v *= radius / norm;
        }
        let (_, v) = evaluate(inst, &basis, target, &x)?;
        min_perturbed = min_perturbed.min(v);
    }
    Ok(MinimumCheck {
        value,
        min_perturbed,
        samples,
        is_local_minimum: value <= min_perturbed + 1e-12 * (1.0 + value),
    })
}
