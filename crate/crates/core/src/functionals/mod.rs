//! Full Yang–Mills–Higgs, Kobayashi and non-abelian Seiberg–Witten
//! functionals, the identities relating them and the reduced 2k-Hitchin
//! residuals.

mod flow;
mod lagrangian;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

pub use flow::{
    flow_minimize, minimum_check, FlowOptions, FlowRecord, FlowResult, FlowStatus, FlowTarget, MinimumCheck,
};
pub use lagrangian::{lagrangian_action, lagrangian_density, LagrangianCheck, LAGRANGIAN_TOL};

use crate::endforms::EndForm;
use crate::error::{Error, Result};
use crate::forms::ScalarForm;
use crate::higgs::{
    chern_data_of, end_norm_sq, factorial, field_norm_sq, hs_curvature, mean_curvature_from, HiggsInstance,
    HsCurvature,
};
use crate::lattice::C64;

/// Named values produced by a functional evaluation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub values: BTreeMap<String, f64>,
    pub identity_residuals: BTreeMap<String, f64>,
    pub trace: Vec<FlowRecord>,
}

impl FunctionalReport {
    fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    fn residual(mut self, name: &str, v: f64) -> Self {
        self.identity_residuals.insert(name.to_string(), v);
        self
    }

    /// Looks up a value or an identity residual by name.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values
            .get(name)
            .or_else(|| self.identity_residuals.get(name))
            .copied()
    }

    /// Like [`Self::get`] but panics on a missing name.
    pub fn expect(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("report has no entry `{name}`"))
    }
}

/// Norm of a form through `∫ tr(Ψ ∧ *̄_h Ψ)`.
fn wedge_norm_sq(psi: &EndForm, inst: &HiggsInstance) -> Result<f64> {
    Ok(psi.trace_inner_wedge(psi, inst.metric())?.re)
}

/// `‖𝓕‖² = ‖F + [Φ,Φ̄_h]‖² + ‖D'Φ‖² + ‖D''Φ̄_h‖²`, each piece evaluated as
/// `∫ tr(Ψ ∧ *̄_h Ψ)`. The graded pieces are orthogonal, so the total is also
/// checked against the pointwise norm of the whole curvature.
pub fn ymh_full(inst: &HiggsInstance) -> Result<FunctionalReport> {
    ymh_from(inst, &hs_curvature(inst)?)
}

fn ymh_from(inst: &HiggsInstance, hs: &HsCurvature) -> Result<FunctionalReport> {
    let h = inst.metric();
    let f11 = wedge_norm_sq(&hs.f11, inst)?;
    let f20 = wedge_norm_sq(&hs.f20, inst)?;
    let f02 = wedge_norm_sq(&hs.f02, inst)?;
    let total = f11 + f20 + f02;
    let local = end_norm_sq(&hs.f11, h)? + end_norm_sq(&hs.f20, h)? + end_norm_sq(&hs.f02, h)?;
    Ok(FunctionalReport::default()
        .value("curvature_11", f11)
        .value("d_prime_phi", f20)
        .value("d_double_prime_phi_bar", f02)
        .value("ymh", total)
        .residual("graded_decomposition", (total - local).abs() / (1.0 + total.abs())))
}

/// `𝓙(h) = (n!/2) ‖𝓚‖²` with the lower bound `2n(π deg)²/(r (n−1)! vol)`.
pub fn kobayashi(inst: &HiggsInstance) -> Result<FunctionalReport> {
    let hs = hs_curvature(inst)?;
    let k = mean_curvature_from(&hs)?;
    let n = inst.n();
    let k_sq = field_norm_sq(&k, inst.metric())?;
    let j = 0.5 * factorial(n) * k_sq;
    let degree = chern_data_of(&hs.curvature)?.degree;
    let vol = inst.chart().volume();
    let r = inst.rank() as f64;
    let bound = 2.0 * n as f64 * (PI * degree).powi(2) / (r * factorial(n - 1) * vol);
    let c = 2.0 * PI * degree / (r * factorial(n - 1) * vol);
    Ok(FunctionalReport::default()
        .value("kobayashi", j)
        .value("mean_curvature_sq", k_sq)
        .value("bound", bound)
        .value("gap", j - bound)
        .value("degree", degree)
        .value("einstein_constant", c))
}

/// `𝓗(h) = ‖D'Φ‖² + ‖F + [Φ,Φ̄_h]‖²` from pointwise norms, with the residual
/// of `‖𝓕‖² = 𝓗 + ‖D''Φ̄_h‖²` against [`ymh_full`].
pub fn sw_functional(inst: &HiggsInstance) -> Result<FunctionalReport> {
    let hs = hs_curvature(inst)?;
    let h = inst.metric();
    let d1 = end_norm_sq(&hs.f20, h)?;
    let f11 = end_norm_sq(&hs.f11, h)?;
    let value = d1 + f11;
    let full = ymh_from(inst, &hs)?;
    let ymh = full.expect("ymh");
    let d2 = full.expect("d_double_prime_phi_bar");
    Ok(FunctionalReport::default()
        .value("sw", value)
        .value("d_prime_phi", d1)
        .value("curvature_11", f11)
        .value("ymh", ymh)
        .value("d_double_prime_phi_bar", d2)
        .residual("ymh_relation", (ymh - value - d2).abs() / (1.0 + ymh.abs())))
}

/// `𝓗` alone from pointwise norms; the flow objective.
pub fn sw_value(inst: &HiggsInstance) -> Result<f64> {
    let hs = hs_curvature(inst)?;
    let h = inst.metric();
    Ok(end_norm_sq(&hs.f20, h)? + end_norm_sq(&hs.f11, h)?)
}

/// `𝓙` alone; the flow objective.
pub fn kobayashi_value(inst: &HiggsInstance) -> Result<f64> {
    let k = mean_curvature_from(&hs_curvature(inst)?)?;
    Ok(0.5 * factorial(inst.n()) * field_norm_sq(&k, inst.metric())?)
}

/// Scale of the commutator term in the curvature equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaScale {
    /// `F + ¼[Φ,Φ̄_h]`, before rescaling the Higgs field.
    Quarter,
    /// `F + [Φ,Φ̄_h]`.
    Unit,
}

impl KappaScale {
    pub fn value(self) -> f64 {
        match self {
            KappaScale::Quarter => 0.25,
            KappaScale::Unit => 1.0,
        }
    }
}

/// Residual norms of `D_hΦ = 0` and `F + κ[Φ,Φ̄_h] = 0`, with the two
/// equations that hold identically for a Higgs field and a Chern connection.
pub fn residual_2k(inst: &HiggsInstance, scale: KappaScale) -> Result<FunctionalReport> {
    let hs = hs_curvature(inst)?;
    let h = inst.metric();
    let kappa = C64::new(scale.value(), 0.0);
    let curv = hs.curvature.add(&hs.commutator.scale(kappa))?;
    let d1 = end_norm_sq(&hs.f20, h)?;
    let d2 = end_norm_sq(&hs.connection.d_double_prime(inst.higgs())?, h)?;
    let phi = inst.higgs();
    let wedge = end_norm_sq(&phi.commutator(phi)?, h)?;
    let f20 = end_norm_sq(&hs.connection.curvature_20()?, h)?;
    Ok(FunctionalReport::default()
        .value("kappa", scale.value())
        .value("d_prime", d1.sqrt())
        .value("d_double_prime", d2.sqrt())
        .value("covariant", (d1 + d2).sqrt())
        .value("curvature", end_norm_sq(&curv, h)?.sqrt())
        .value("higgs_wedge", wedge.sqrt())
        .value("curvature_20", f20.sqrt()))
}

/// Left and right sides of the two curvature identities relating
/// `‖F + [Φ,Φ̄_h]‖²`, `‖𝓕‖²` and `‖𝓚‖²` for `n ≥ 2`.
pub fn identity_residuals(inst: &HiggsInstance) -> Result<FunctionalReport> {
    let n = inst.n();
    if n < 2 {
        return Err(Error::NotApplicable(
            "curvature identities need complex dimension at least 2".into(),
        ));
    }
    let hs = hs_curvature(inst)?;
    let h = inst.metric();
    let k = mean_curvature_from(&hs)?;
    let k_sq = field_norm_sq(&k, h)?;
    let f11 = end_norm_sq(&hs.f11, h)?;
    let d1 = end_norm_sq(&hs.f20, h)?;
    let d2 = end_norm_sq(&hs.f02, h)?;
    let chern = chern_data_of(&hs.curvature)?;
    let topological = 4.0 * PI * PI * chern.discriminant.expect("n >= 2");
    let power = ScalarForm::kahler_power(inst.chart(), n - 2)?;
    let cross = 2.0
        * hs.curvature
            .wedge(&hs.commutator)?
            .trace()
            .wedge(&power)?
            .integrate_top()?
            .re;
    let lhs1 = f11 - k_sq;
    let rhs1 = topological + cross;
    let lhs2 = f11 + d1 + d2 - k_sq;
    let rhs2 = d1 + d2 + cross + topological;
    Ok(FunctionalReport::default()
        .value("curvature_11", f11)
        .value("mean_curvature_sq", k_sq)
        .value("d_prime_phi", d1)
        .value("d_double_prime_phi_bar", d2)
        .value("topological", topological)
        .value("cross", cross)
        .value("koba_lhs", lhs1)
        .value("koba_rhs", rhs1)
        .value("full_lhs", lhs2)
        .value("full_rhs", rhs2)
        .residual("koba", (lhs1 - rhs1).abs() / (1.0 + lhs1.abs()))
        .residual("full", (lhs2 - rhs2).abs() / (1.0 + lhs2.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endforms::MetricField;
    use crate::higgs::{central_curvature, constant_higgs, random_instance};
    use crate::lattice::{LatticeChart, ScalarField};
    use nalgebra::DMatrix;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn flat_instance_vanishes() {
        let chart = LatticeChart::uniform(2, 4, 1.0).unwrap();
        let inst = HiggsInstance::flat(&chart, 2).unwrap();
        assert_eq!(ymh_full(&inst).unwrap().expect("ymh"), 0.0);
        assert_eq!(kobayashi(&inst).unwrap().expect("kobayashi"), 0.0);
        assert_eq!(sw_functional(&inst).unwrap().expect("sw"), 0.0);
        let id = identity_residuals(&inst).unwrap();
        assert_eq!(id.expect("koba"), 0.0);
        assert_eq!(id.expect("full"), 0.0);
    }

    #[test]
    fn nilpotent_constant_higgs() {
        let chart = LatticeChart::uniform(1, 4, 1.0).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let inst = HiggsInstance::new(MetricField::identity(&chart, 2), constant_higgs(&chart, &[m.clone()]).unwrap())
            .unwrap();
        let comm = &m * m.adjoint() - m.adjoint() * &m;
        let oracle = (&comm * comm.adjoint()).trace().re * chart.volume();
        let r = ymh_full(&inst).unwrap();
        assert!((r.expect("ymh") - oracle).abs() < 1e-12);
        assert!((r.expect("curvature_11") - oracle).abs() < 1e-12);
    }

    #[test]
    fn central_curvature_attains_bound() {
        let chart = LatticeChart::uniform(1, 4, 1.0).unwrap();
        let f = central_curvature(&chart, 1, 2.0 * PI).unwrap();
        let inst = HiggsInstance::flat(&chart, 1).unwrap().with_synthetic_curvature(f).unwrap();
        let k = kobayashi(&inst).unwrap();
        assert!((k.expect("kobayashi") - 2.0 * PI * PI).abs() < 1e-10);
        assert!(k.expect("gap").abs() < 1e-10);
    }

    #[test]
    fn conformal_metric_exceeds_zero_bound() {
        let chart = LatticeChart::uniform(1, 16, 1.0).unwrap();
        let f = ScalarField::from_fn(&chart, |x| c(0.1 * (2.0 * PI * x[0]).cos()));
        let inst = HiggsInstance::new(MetricField::conformal(&f, 1).unwrap(), EndForm::zero(&chart, 1, 1, 0).unwrap())
            .unwrap();
        let k = kobayashi(&inst).unwrap();
        assert!(k.expect("kobayashi") > 0.0);
        assert!(k.expect("bound").abs() < 1e-12);
    }

    #[test]
    fn relations_on_random_instance() {
        let chart = LatticeChart::uniform(2, 8, 1.0).unwrap();
        let inst = random_instance(&chart, 2, 3, 1, 0.03, 0.5).unwrap();
        let sw = sw_functional(&inst).unwrap();
        assert!(sw.expect("ymh_relation") < 1e-10);
        let ids = identity_residuals(&inst).unwrap();
        assert!(ids.expect("full") < 1e-4, "{ids:?}");
        let q = residual_2k(&inst.with_higgs(inst.higgs().scale(c(2.0))).unwrap(), KappaScale::Quarter).unwrap();
        let u = residual_2k(&inst, KappaScale::Unit).unwrap();
        assert!((q.expect("curvature") - u.expect("curvature")).abs() < 1e-10 * (1.0 + u.expect("curvature")));
    }
}
