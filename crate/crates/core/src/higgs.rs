//! Higgs bundles over a flat torus: connections, Hitchin–Simpson curvature,
//! mean curvature, degree and example constructions.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::endforms::{trace_product, EndForm, MetricField};
use crate::error::{Error, Result};
use crate::forms::{volume_phase, ScalarForm};
use crate::lattice::{compensated_sum, LatticeChart, ScalarField, C64};
use crate::matrix::MatrixField;
use crate::multiindex::{merge, MultiIndex};

/// Global-norm tolerance for `d''Φ = 0`.
pub const HOLOMORPHY_TOL: f64 = 1e-8;
/// Global-norm tolerance for `Φ ∧ Φ = 0`.
pub const WEDGE_TOL: f64 = 1e-10;
/// Relative tolerance between the two mean-curvature routes.
pub const MEAN_CURVATURE_TOL: f64 = 1e-10;

/// Outcome of the Higgs-field conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HiggsCheck {
    /// `‖D''Φ‖` (flat `L²` norm).
    pub holomorphy: f64,
    /// `(Σ_{α<β} ‖[Φ_α, Φ_β]‖²)^{1/2}`.
    pub commutator: f64,
    pub passed: bool,
}

fn check_components(phi: &EndForm, a01: Option<&EndForm>) -> Result<HiggsCheck> {
    if phi.bidegree() != (1, 0) {
        let (p, q) = phi.bidegree();
        return Err(Error::BidegreeMismatch(p, q, 1, 0));
    }
    let mut dpp = phi.d_anti()?;
    if let Some(a) = a01 {
        dpp = dpp.add(&a.commutator(phi)?)?;
    }
    let holomorphy = dpp.frobenius_norm_sq().sqrt();
    let n = phi.n();
    let mut terms = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            let e = MultiIndex::empty(n);
            let pa = phi.coeff(MultiIndex::single(n, a)?, e);
            let pb = phi.coeff(MultiIndex::single(n, b)?, e);
            terms.push(pa.commutator(&pb)?.frobenius_norm_sq());
        }
    }
    let commutator = compensated_sum(terms).sqrt();
    Ok(HiggsCheck {
        holomorphy,
        commutator,
        passed: holomorphy <= HOLOMORPHY_TOL && commutator <= WEDGE_TOL,
    })
}

/// Checks `d''Φ = 0` and `[Φ_α, Φ_β] = 0` for a `(1,0)`-form.
pub fn check_higgs(phi: &EndForm) -> Result<HiggsCheck> {
    check_components(phi, None)
}

/// A connection `D = d + a¹⁰ + a⁰¹` on the trivialized bundle.
#[derive(Clone, Debug)]
pub struct Connection {
    pub a10: EndForm,
    pub a01: EndForm,
}

impl Connection {
    pub fn trivial(chart: &Arc<LatticeChart>, r: usize) -> Result<Self> {
        Ok(Self {
            a10: EndForm::zero(chart, r, 1, 0)?,
            a01: EndForm::zero(chart, r, 0, 1)?,
        })
    }

    /// Chern connection in the holomorphic frame: `a¹⁰_α = M⁻¹ ∂_α M`, `a⁰¹ = 0`.
    pub fn chern(h: &MetricField) -> Result<Self> {
        let chart = h.chart();
        let n = chart.n();
        let r = h.rank();
        let mut a10 = EndForm::zero(chart, r, 1, 0)?;
        for alpha in 1..=n {
            let d = h.gram().d_holo(alpha)?;
            a10.set(MultiIndex::single(n, alpha)?, MultiIndex::empty(n), h.gram_inv().mul(&d)?)?;
        }
        Ok(Self {
            a10,
            a01: EndForm::zero(chart, r, 0, 1)?,
        })
    }

    pub fn new(a10: EndForm, a01: EndForm) -> Result<Self> {
        if a10.bidegree() != (1, 0) || a01.bidegree() != (0, 1) {
            return Err(Error::InvalidInstance("connection forms must have bidegrees (1,0) and (0,1)".into()));
        }
        if !LatticeChart::same(a10.chart(), a01.chart()) {
            return Err(Error::ChartMismatch);
        }
        if a10.rank() != a01.rank() {
            return Err(Error::RankMismatch(a10.rank(), a01.rank()));
        }
        Ok(Self { a10, a01 })
    }

    /// `D'Ψ = ∂Ψ + [a¹⁰, Ψ]`.
    pub fn d_prime(&self, psi: &EndForm) -> Result<EndForm> {
        psi.d_holo()?.add(&self.a10.commutator(psi)?)
    }

    /// `D''Ψ = ∂̄Ψ + [a⁰¹, Ψ]`.
    pub fn d_double_prime(&self, psi: &EndForm) -> Result<EndForm> {
        psi.d_anti()?.add(&self.a01.commutator(psi)?)
    }

    /// The `(1,1)` curvature `∂̄a¹⁰ + ∂a⁰¹ + a¹⁰∧a⁰¹ + a⁰¹∧a¹⁰`.
    pub fn curvature(&self) -> Result<EndForm> {
        self.a10
            .d_anti()?
            .add(&self.a01.d_holo()?)?
            .add(&self.a10.wedge(&self.a01)?)?
            .add(&self.a01.wedge(&self.a10)?)
    }

    /// The `(2,0)` curvature `∂a¹⁰ + a¹⁰∧a¹⁰`.
    pub fn curvature_20(&self) -> Result<EndForm> {
        self.a10.d_holo()?.add(&self.a10.wedge(&self.a10)?)
    }

    /// The `(0,2)` curvature `∂̄a⁰¹ + a⁰¹∧a⁰¹`.
    pub fn curvature_02(&self) -> Result<EndForm> {
        self.a01.d_anti()?.add(&self.a01.wedge(&self.a01)?)
    }
}

/// Chern connection `A = h⁻¹∂h` and curvature `F = ∂̄A`.
pub fn chern_connection_curvature(h: &MetricField) -> Result<(EndForm, EndForm)> {
    let c = Connection::chern(h)?;
    let f = c.curvature()?;
    Ok((c.a10, f))
}

/// A Higgs bundle `(E, Φ)` with a metric.
#[derive(Clone, Debug)]
pub struct HiggsInstance {
    metric: MetricField,
    phi: EndForm,
    connection: Option<Connection>,
    synthetic_curvature: Option<EndForm>,
}

impl HiggsInstance {
    /// Validates `Φ` against the Chern connection of `metric`.
    pub fn new(metric: MetricField, phi: EndForm) -> Result<Self> {
        let inst = Self {
            metric,
            phi,
            connection: None,
            synthetic_curvature: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Instance with optional connection and curvature overrides, validated once.
    pub fn from_parts(
        metric: MetricField,
        phi: EndForm,
        connection: Option<Connection>,
        synthetic_curvature: Option<EndForm>,
    ) -> Result<Self> {
        let inst = Self {
            metric,
            phi,
            connection,
            synthetic_curvature,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// `h = I`, `Φ = 0`.
    pub fn flat(chart: &Arc<LatticeChart>, r: usize) -> Result<Self> {
        Self::new(MetricField::identity(chart, r), EndForm::zero(chart, r, 1, 0)?)
    }

    fn validate(&self) -> Result<()> {
        let chart = self.metric.chart();
        if !LatticeChart::same(chart, self.phi.chart()) {
            return Err(Error::ChartMismatch);
        }
        if self.phi.rank() != self.metric.rank() {
            return Err(Error::RankMismatch(self.phi.rank(), self.metric.rank()));
        }
        if let Some(f) = &self.synthetic_curvature {
            if f.bidegree() != (1, 1) || !LatticeChart::same(chart, f.chart()) || f.rank() != self.rank() {
                return Err(Error::InvalidInstance(
                    "synthetic curvature must be a (1,1)-form on the same chart and rank".into(),
                ));
            }
        }
        if let Some(c) = &self.connection {
            if !LatticeChart::same(chart, c.a10.chart()) || c.a10.rank() != self.rank() {
                return Err(Error::InvalidInstance("connection must live on the same chart and rank".into()));
            }
        }
        let report = self.check()?;
        if !report.passed {
            return Err(Error::NotHolomorphic {
                holomorphy: report.holomorphy,
                commutator: report.commutator,
            });
        }
        Ok(())
    }

    /// Replaces the metric-derived curvature by a given `(1,1)`-form.
    pub fn with_synthetic_curvature(mut self, f: EndForm) -> Result<Self> {
        self.synthetic_curvature = Some(f);
        self.validate()?;
        Ok(self)
    }

    /// Replaces the Chern connection by a given connection; holomorphy is
    /// then measured with its `D''`.
    pub fn with_connection(mut self, c: Connection) -> Result<Self> {
        self.connection = Some(c);
        self.validate()?;
        Ok(self)
    }

    /// Same Higgs field and overrides, new metric.
    pub fn with_metric(&self, metric: MetricField) -> Result<Self> {
        let inst = Self {
            metric,
            phi: self.phi.clone(),
            connection: self.connection.clone(),
            synthetic_curvature: self.synthetic_curvature.clone(),
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Same metric, new Higgs field.
    pub fn with_higgs(&self, phi: EndForm) -> Result<Self> {
        let inst = Self {
            metric: self.metric.clone(),
            phi,
            connection: self.connection.clone(),
            synthetic_curvature: self.synthetic_curvature.clone(),
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Frame change by a constant unitary `U`: `M ↦ UMU†`, `Φ ↦ UΦU†`.
    pub fn unitary_transform(&self, u: &DMatrix<C64>) -> Result<Self> {
        let ud = u.adjoint();
        let conj = |x: &EndForm| x.map_coeffs(|m| Ok(m.map_points(|a| u * a * &ud)));
        let inst = Self {
            metric: self.metric.unitary_transform(u)?,
            phi: conj(&self.phi)?,
            connection: match &self.connection {
                Some(c) => Some(Connection::new(conj(&c.a10)?, conj(&c.a01)?)?),
                None => None,
            },
            synthetic_curvature: match &self.synthetic_curvature {
                Some(f) => Some(conj(f)?),
                None => None,
            },
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        self.metric.chart()
    }

    pub fn n(&self) -> usize {
        self.chart().n()
    }

    pub fn rank(&self) -> usize {
        self.metric.rank()
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn higgs(&self) -> &EndForm {
        &self.phi
    }

    pub fn connection_override(&self) -> Option<&Connection> {
        self.connection.as_ref()
    }

    pub fn synthetic_curvature(&self) -> Option<&EndForm> {
        self.synthetic_curvature.as_ref()
    }

    /// The supplied connection, or the Chern connection of the metric.
    pub fn connection(&self) -> Result<Connection> {
        match &self.connection {
            Some(c) => Ok(c.clone()),
            None => Connection::chern(&self.metric),
        }
    }

    /// The synthetic curvature, or the curvature of [`Self::connection`].
    pub fn curvature(&self) -> Result<EndForm> {
        match &self.synthetic_curvature {
            Some(f) => Ok(f.clone()),
            None => self.connection()?.curvature(),
        }
    }

    /// Higgs-field conditions with `D''` of the instance's connection.
    pub fn check(&self) -> Result<HiggsCheck> {
        check_components(&self.phi, self.connection.as_ref().map(|c| &c.a01))
    }
}

/// The graded pieces of `𝓕 = F + D'Φ + D''Φ̄_h + [Φ, Φ̄_h]`.
#[derive(Clone, Debug)]
pub struct HsCurvature {
    pub connection: Connection,
    /// `F`, metric-derived or synthetic.
    pub curvature: EndForm,
    pub phi_bar: EndForm,
    /// `[Φ, Φ̄_h]`.
    pub commutator: EndForm,
    /// `(1,1)` piece `F + [Φ, Φ̄_h]`.
    pub f11: EndForm,
    /// `(2,0)` piece `D'Φ`.
    pub f20: EndForm,
    /// `(0,2)` piece `D''Φ̄_h`.
    pub f02: EndForm,
}

/// Hitchin–Simpson curvature of an instance.
pub fn hs_curvature(inst: &HiggsInstance) -> Result<HsCurvature> {
    let connection = inst.connection()?;
    let curvature = match inst.synthetic_curvature() {
        Some(f) => f.clone(),
        None => connection.curvature()?,
    };
    let phi = inst.higgs();
    let phi_bar = phi.hermitian_conjugate(inst.metric())?;
    let commutator = phi.commutator(&phi_bar)?;
    let f11 = curvature.add(&commutator)?;
    let f20 = connection.d_prime(phi)?;
    let f02 = connection.d_double_prime(&phi_bar)?;
    Ok(HsCurvature {
        connection,
        curvature,
        phi_bar,
        commutator,
        f11,
        f20,
        f02,
    })
}

/// `|Ψ|²` integrated: `Σ ∫ tr(Ψ_{AB̄} M⁻¹ Ψ_{AB̄}† M) dvol`.
pub fn end_norm_sq(psi: &EndForm, h: &MetricField) -> Result<f64> {
    Ok(psi.trace_inner_local(psi, h)?.integrate().re)
}

/// `∫ tr(K M⁻¹ K† M) dvol` for an endomorphism field.
pub fn field_norm_sq(k: &MatrixField, h: &MetricField) -> Result<f64> {
    Ok(trace_product(k, &h.adjoint_of(k)?)?.integrate().re)
}

/// `Σ_α X_{αᾱ}` of a `(1,1)`-form.
pub fn contract(x: &EndForm) -> Result<MatrixField> {
    if x.bidegree() != (1, 1) {
        let (p, q) = x.bidegree();
        return Err(Error::BidegreeMismatch(p, q, 1, 1));
    }
    let n = x.n();
    let mut k = MatrixField::zeros(x.chart(), x.rank());
    for alpha in 1..=n {
        let e = MultiIndex::single(n, alpha)?;
        if let Some(c) = x.get(e, e) {
            k = k.add(c)?;
        }
    }
    Ok(k)
}

/// `K` from `K ω^n = i n X ∧ ω^{n−1}`.
pub fn contract_by_wedge(x: &EndForm) -> Result<MatrixField> {
    let n = x.n();
    let power = ScalarForm::kahler_power(x.chart(), n - 1)?;
    let top = x.wedge_scalar(&power)?;
    let full = MultiIndex::full(n);
    // i n X∧ω^{n−1} = i n! X∧ω^{n−1}/(n−1)! and ω^n = n! · vol_phase · θθ̄.
    let s = C64::new(0.0, 1.0) / volume_phase(n).to_c64();
    Ok(top.coeff(full, full).scale(s))
}

/// Mean curvature from precomputed curvature pieces, checking both routes.
pub fn mean_curvature_from(hs: &HsCurvature) -> Result<MatrixField> {
    let k = contract(&hs.f11)?;
    let dual = contract_by_wedge(&hs.f11)?;
    let gap = k.sub(&dual)?.max_abs();
    let scale = k.max_abs().max(dual.max_abs());
    if gap > MEAN_CURVATURE_TOL * scale.max(f64::MIN_POSITIVE) && gap > 0.0 {
        return Err(Error::RouteMismatch {
            what: "mean curvature",
            a: format!("{:.6e}", k.max_abs()),
            b: format!("{:.6e}", dual.max_abs()),
            rel: gap / scale,
        });
    }
    Ok(k)
}

/// Hitchin–Simpson mean curvature `𝓚 = Σ_α 𝓕_{αᾱ}`.
pub fn mean_curvature(inst: &HiggsInstance) -> Result<MatrixField> {
    mean_curvature_from(&hs_curvature(inst)?)
}

/// `h 𝓚` as a hermitian form, pointwise `M 𝓚` in the Gram convention.
pub fn mean_curvature_form(inst: &HiggsInstance) -> Result<MatrixField> {
    inst.metric().gram().mul(&mean_curvature(inst)?)
}

/// Chern–Weil data of the curvature.
#[derive(Clone, Debug)]
pub struct ChernData {
    /// `c₁ = (i/2π) tr F`.
    pub c1: ScalarForm,
    /// `c₂ = (1/8π²)[tr(F∧F) − trF ∧ trF]`, absent for `n < 2`.
    pub c2: Option<ScalarForm>,
    /// `∫ c₁ ∧ ω^{n−1}`.
    pub degree: f64,
    /// `∫ (2c₂ − c₁²) ∧ ω^{n−2}/(n−2)!`, absent for `n < 2`.
    pub discriminant: Option<f64>,
}

/// Chern forms and degree of the instance's curvature.
pub fn chern_degree(inst: &HiggsInstance) -> Result<ChernData> {
    chern_data_of(&inst.curvature()?)
}

/// Chern forms and degree of a `(1,1)` curvature form.
pub fn chern_data_of(f: &EndForm) -> Result<ChernData> {
    let chart = f.chart().clone();
    let n = chart.n();
    let c1 = f.trace().scale(C64::new(0.0, 1.0 / (2.0 * PI)));
    let mut omega_pow = ScalarForm::kahler_power(&chart, n - 1)?;
    omega_pow = omega_pow.scale(C64::new(factorial(n - 1), 0.0));
    let degree = c1.wedge(&omega_pow)?.integrate_top()?.re;
    if n < 2 {
        return Ok(ChernData {
            c1,
            c2: None,
            degree,
            discriminant: None,
        });
    }
    let trf = f.trace();
    let c2 = f
        .wedge(f)?
        .trace()
        .sub(&trf.wedge(&trf)?)?
        .scale(C64::new(1.0 / (8.0 * PI * PI), 0.0));
    let disc_form = c2.scale(C64::new(2.0, 0.0)).sub(&c1.wedge(&c1)?)?;
    let discriminant = disc_form
        .wedge(&ScalarForm::kahler_power(&chart, n - 2)?)?
        .integrate_top()?
        .re;
    Ok(ChernData {
        c1,
        c2: Some(c2),
        degree,
        discriminant: Some(discriminant),
    })
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `c = 2π deg E / (r (n−1)! vol X)`.
pub fn einstein_constant_for(degree: f64, r: usize, n: usize, volume: f64) -> f64 {
    2.0 * PI * degree / (r as f64 * factorial(n - 1) * volume)
}

/// Einstein constant of an instance.
pub fn einstein_constant(inst: &HiggsInstance) -> Result<f64> {
    let d = chern_degree(inst)?;
    Ok(einstein_constant_for(d.degree, inst.rank(), inst.n(), inst.chart().volume()))
}

/// `∫ tr 𝓚 dvol / (r vol X)`, which equals `c` whenever `∫ c₁∧ω^{n−1}` is
/// computed from the same curvature.
pub fn einstein_constant_by_trace(inst: &HiggsInstance) -> Result<f64> {
    let k = mean_curvature(inst)?;
    Ok(k.trace().integrate().re / (inst.rank() as f64 * inst.chart().volume()))
}

/// `‖𝓚 − c I‖`.
pub fn hym_residual(inst: &HiggsInstance) -> Result<f64> {
    let k = mean_curvature(inst)?;
    let c = einstein_constant(inst)?;
    let id = MatrixField::identity(inst.chart(), inst.rank()).scale(C64::new(c, 0.0));
    Ok(field_norm_sq(&k.sub(&id)?, inst.metric())?.max(0.0).sqrt())
}

/// Constant central curvature `F = −iμ ω ⊗ I`.
pub fn central_curvature(chart: &Arc<LatticeChart>, r: usize, mu: f64) -> Result<EndForm> {
    let omega = ScalarForm::kahler(chart).scale(C64::new(0.0, -mu));
    Ok(EndForm::scalar_times_identity(&omega, r))
}

/// Constant `(1,0)`-form `Σ C_α θ^α`.
pub fn constant_higgs(chart: &Arc<LatticeChart>, components: &[DMatrix<C64>]) -> Result<EndForm> {
    let n = chart.n();
    if components.len() != n {
        return Err(Error::DimensionMismatch {
            left: components.len(),
            right: n,
        });
    }
    let r = components[0].nrows();
    let mut phi = EndForm::zero(chart, r, 1, 0)?;
    for (i, c) in components.iter().enumerate() {
        if c.nrows() != r || c.ncols() != r {
            return Err(Error::RankMismatch(c.nrows(), r));
        }
        phi.set(MultiIndex::single(n, i + 1)?, MultiIndex::empty(n), MatrixField::constant(chart, c))?;
    }
    Ok(phi)
}

/// Seeded commuting constant components `C_α = P D_α P⁻¹` with `D_α` diagonal.
pub fn commuting_components(n: usize, r: usize, seed: u64, scale: f64) -> Vec<DMatrix<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut p = DMatrix::<C64>::identity(r, r);
    for v in p.iter_mut() {
        *v += C64::new(0.3 * gauss(), 0.3 * gauss());
    }
    let p_inv = p.clone().try_inverse().expect("perturbed identity is invertible");
    (0..n)
        .map(|_| {
            let d = DMatrix::from_fn(r, r, |i, j| {
                if i == j {
                    C64::new(scale * gauss(), scale * gauss())
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            &p * d * &p_inv
        })
        .collect()
}

/// Random valid instance: `M = exp(amplitude · S)` and commuting constant `Φ`.
pub fn random_instance(
    chart: &Arc<LatticeChart>,
    r: usize,
    seed: u64,
    band: usize,
    amplitude: f64,
    higgs_scale: f64,
) -> Result<HiggsInstance> {
    let metric = MetricField::random(chart, r, seed, band, amplitude)?;
    let comps = commuting_components(chart.n(), r, seed ^ 0x5EED, higgs_scale);
    HiggsInstance::new(metric, constant_higgs(chart, &comps)?)
}

/// Block lower-shift Higgs field `Φ ⊗ θ¹` of a system of Hodge bundles.
/// `maps[k]` sends block `k` to block `k+1` and has shape `ranks[k+1] × ranks[k]`.
pub fn hodge_system(chart: &Arc<LatticeChart>, ranks: &[usize], maps: &[DMatrix<C64>]) -> Result<HiggsInstance> {
    if ranks.is_empty() || maps.len() + 1 != ranks.len() {
        return Err(Error::DimensionMismatch {
            left: maps.len() + 1,
            right: ranks.len(),
        });
    }
    for (k, m) in maps.iter().enumerate() {
        if m.nrows() != ranks[k + 1] || m.ncols() != ranks[k] {
            return Err(Error::DimensionMismatch {
                left: m.nrows() * m.ncols(),
                right: ranks[k + 1] * ranks[k],
            });
        }
    }
    for k in 0..maps.len().saturating_sub(1) {
        let comp = &maps[k + 1] * &maps[k];
        let scale = maps[k + 1].norm() * maps[k].norm();
        if comp.norm() > 1e-12 * scale.max(1.0) {
            return Err(Error::ChainCondition(k, k + 1));
        }
    }
    let r: usize = ranks.iter().sum();
    let mut offsets = vec![0usize];
    for &k in ranks {
        offsets.push(offsets.last().unwrap() + k);
    }
    let mut shift = DMatrix::<C64>::zeros(r, r);
    for (k, m) in maps.iter().enumerate() {
        shift
            .view_mut((offsets[k + 1], offsets[k]), (m.nrows(), m.ncols()))
            .copy_from(m);
    }
    let n = chart.n();
    let mut comps = vec![DMatrix::<C64>::zeros(r, r); n];
    comps[0] = shift;
    HiggsInstance::new(MetricField::identity(chart, r), constant_higgs(chart, &comps)?)
}

/// Basis `θ^A` of `⊕_p Λ^{p,0}`, ordered by degree then label mask.
pub fn exterior_basis(n: usize) -> Vec<MultiIndex> {
    MultiIndex::all(n)
}

/// Components of `Φ(∂_α)ξ = (ι_{∂_α} λ) ∧ ξ` for constant
/// `λ = Σ λ_S θ^S` of odd degree, in [`exterior_basis`].
pub fn contraction_components(n: usize, lambda: &[(MultiIndex, C64)]) -> Result<Vec<DMatrix<C64>>> {
    let s = lambda.first().map(|(m, _)| m.len()).unwrap_or(1);
    if s % 2 == 0 || lambda.iter().any(|(m, _)| m.len() != s || m.n() != n) {
        return Err(Error::InvalidInstance("λ must be a homogeneous form of odd degree".into()));
    }
    let basis = exterior_basis(n);
    let index = |m: MultiIndex| basis.iter().position(|b| *b == m).expect("basis covers all indices");
    let dim = basis.len();
    let mut out = Vec::with_capacity(n);
    for alpha in 1..=n {
        let mut phi = DMatrix::<C64>::zeros(dim, dim);
        for (sl, coef) in lambda {
            if !sl.contains(alpha) {
                continue;
            }
            // ι_{∂α} θ^S = (−1)^{#{s ∈ S : s < α}} θ^{S∖α}
            let before = sl.entries().iter().filter(|&&x| x < alpha).count();
            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<usize> = sl.entries().into_iter().filter(|&x| x != alpha).collect();
            let rest = MultiIndex::new(n, &rest)?;
            for (j, xi) in basis.iter().enumerate() {
                if let Some((m, sg)) = merge(rest, *xi) {
                    phi[(index(m), j)] += coef * sign * sg.to_f64();
                }
            }
        }
        out.push(phi);
    }
    Ok(out)
}

/// Contraction Higgs bundle on `⊕_p Λ^{p,0}` with the flat metric.
pub fn contraction(chart: &Arc<LatticeChart>, lambda: &[(MultiIndex, C64)]) -> Result<HiggsInstance> {
    let comps = contraction_components(chart.n(), lambda)?;
    let r = comps[0].nrows();
    HiggsInstance::new(MetricField::identity(chart, r), constant_higgs(chart, &comps)?)
}

/// `λ = θ¹`.
pub fn default_lambda(n: usize) -> Vec<(MultiIndex, C64)> {
    vec![(MultiIndex::single(n, 1).expect("n >= 1"), C64::new(1.0, 0.0))]
}

/// Pointwise maximum of `|tr X|` over all coefficients of `X`.
pub fn max_trace(x: &EndForm) -> f64 {
    x.coeffs()
        .values()
        .map(|m| m.trace().max_abs())
        .fold(0.0, f64::max)
}

/// `∫ |f|² dvol` of a scalar field, used for scalar oracles.
pub fn scalar_norm_sq(f: &ScalarField) -> f64 {
    let l = f.l2_norm();
    l * l
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn flat_instance_is_flat() {
        let chart = LatticeChart::uniform(2, 4, 1.0).unwrap();
        let inst = HiggsInstance::flat(&chart, 2).unwrap();
        let hs = hs_curvature(&inst).unwrap();
        assert_eq!(hs.f11.max_abs(), 0.0);
        assert_eq!(mean_curvature(&inst).unwrap().max_abs(), 0.0);
        assert_eq!(hym_residual(&inst).unwrap(), 0.0);
        assert_eq!(chern_degree(&inst).unwrap().degree, 0.0);
    }

    #[test]
    fn conformal_curvature_matches_laplacian() {
        let chart = LatticeChart::uniform(1, 32, 1.0).unwrap();
        let f = ScalarField::random_real(&chart, 4, 2).unwrap().scale(c(0.1, 0.0));
        let h = MetricField::conformal(&f, 1).unwrap();
        let (a, curv) = chern_connection_curvature(&h).unwrap();
        let e = MultiIndex::single(1, 1).unwrap();
        let empty = MultiIndex::empty(1);
        let da = f.d_holo(1).unwrap().scale(c(-1.0, 0.0));
        let g = a.coeff(e, empty).entry(0, 0).sub(&da).unwrap().max_abs(); assert!(g < 1e-9, "{g} {}", f.max_abs());
        let ddf = f.d_holo(1).unwrap().d_anti(1).unwrap();
        assert!(curv.coeff(e, e).entry(0, 0).sub(&ddf).unwrap().max_abs() < 1e-8);
        let scaled = h.scaled(3.5).unwrap();
        let (_, curv2) = chern_connection_curvature(&scaled).unwrap();
        assert!(curv2.sub(&curv).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn central_curvature_degree_and_constant() {
        let chart = LatticeChart::uniform(1, 4, 1.0).unwrap();
        let f = central_curvature(&chart, 1, 2.0 * PI).unwrap();
        let inst = HiggsInstance::flat(&chart, 1).unwrap().with_synthetic_curvature(f).unwrap();
        let d = chern_degree(&inst).unwrap();
        assert!((d.degree - 1.0).abs() < 1e-12);
        let cst = einstein_constant(&inst).unwrap();
        assert!((cst - 2.0 * PI).abs() < 1e-12);
        assert!((einstein_constant_by_trace(&inst).unwrap() - cst).abs() < 1e-12);
        assert!(hym_residual(&inst).unwrap() < 1e-12);
    }

    #[test]
    fn non_commuting_components_fail() {
        let chart = LatticeChart::uniform(2, 4, 2.0).unwrap();
        let c1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let c2 = c1.transpose();
        let phi = constant_higgs(&chart, &[c1.clone(), c2.clone()]).unwrap();
        let report = check_higgs(&phi).unwrap();
        assert!(!report.passed);
        let expected = (&c1 * &c2 - &c2 * &c1).norm() * chart.volume().sqrt();
        assert!((report.commutator - expected).abs() < 1e-12);
        assert!(matches!(
            HiggsInstance::new(MetricField::identity(&chart, 2), phi),
            Err(Error::NotHolomorphic { .. })
        ));
    }

    #[test]
    fn examples_are_higgs() {
        let chart = LatticeChart::uniform(1, 4, 1.0).unwrap();
        let inst = contraction(&chart, &default_lambda(1)).unwrap();
        assert_eq!(inst.rank(), 2);
        let comps = contraction_components(1, &default_lambda(1)).unwrap();
        assert_eq!(comps[0], DMatrix::<C64>::identity(2, 2));
        let chart2 = LatticeChart::uniform(2, 4, 1.0).unwrap();
        let inst2 = contraction(&chart2, &default_lambda(2)).unwrap();
        assert!(inst2.check().unwrap().passed);
        // θ¹∧θ²∧θ³ at n = 3 gives a nilpotent degree-two shift.
        let l = vec![(MultiIndex::full(3), c(1.0, 0.0))];
        let comps = contraction_components(3, &l).unwrap();
        for a in &comps {
            assert!((a * a).norm() < 1e-15);
            for b in &comps {
                assert!((a * b - b * a).norm() < 1e-15);
            }
        }
        let m = DMatrix::from_element(1, 1, c(2.0, 0.0));
        let hs = hodge_system(&chart, &[1, 1], &[m]).unwrap();
        assert!(hs.check().unwrap().passed);
        let z = DMatrix::from_element(1, 1, c(1.0, 0.0));
        assert!(matches!(
            hodge_system(&chart, &[1, 1, 1], &[z.clone(), z]),
            Err(Error::ChainCondition(0, 1))
        ));
    }

    #[test]
    fn commutator_piece_is_traceless() {
        let chart = LatticeChart::uniform(2, 16, 1.0).unwrap();
        let inst = random_instance(&chart, 3, 9, 1, 0.03, 0.5).unwrap();
        let hs = hs_curvature(&inst).unwrap();
        let t = max_trace(&hs.commutator);
        assert!(t < 1e-12, "{t}");
        assert_eq!(hs.f20.bidegree(), (2, 0));
        assert_eq!(hs.f02.bidegree(), (0, 2));
        assert_eq!(hs.f11.bidegree(), (1, 1));
        let f20 = hs.connection.curvature_20().unwrap();
        let g = f20.max_abs() / (1.0 + hs.curvature.max_abs());
        assert!(g < 1e-8, "{g}");
    }
}
