//! Self-dual Yang–Mills reduced to two dimensions: SU(2) fields on a periodic
//! plane and the real, complex, form and Kapustin–Witten versions of
//! Hitchin's equations.
//!
//! Real coordinates are `x¹ = x`, `x² = y` of a one-dimensional complex chart,
//! `∂_z̄ = ∂₁ + i∂₂` and `∂_z = ∂₁ − i∂₂`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::endforms::{EndForm, MetricField};
use crate::error::{Error, Result};
use crate::higgs::{Connection, HiggsInstance};
use crate::lattice::{LatticeChart, ScalarField, C64};
use crate::matrix::{expm, MatrixField};
use crate::multiindex::MultiIndex;

/// Pointwise tolerance for tracelessness and anti-hermiticity.
pub const SU2_TOL: f64 = 1e-13;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn norm(x: &MatrixField) -> f64 {
    x.frobenius_norm_sq().sqrt()
}

/// Largest deviation of `X` from `su(2)`, relative to `1 + max|X|`.
pub fn su2_defect(x: &MatrixField) -> f64 {
    let herm = x.add(&x.adjoint()).expect("same shape").max_abs();
    let tr = x.trace().max_abs();
    herm.max(tr) / (1.0 + x.max_abs())
}

fn check_su2(name: &str, x: &MatrixField) -> Result<()> {
    if x.rank() != 2 {
        return Err(Error::NotSu2(format!("{name} has rank {}", x.rank())));
    }
    let d = su2_defect(x);
    if d > SU2_TOL {
        return Err(Error::NotSu2(format!("{name} deviates by {d:.3e}")));
    }
    Ok(())
}

/// `i(c₁σ₁ + c₂σ₂ + c₃σ₃)` for real fields `c_a`.
pub fn su2_from_components(c1: &ScalarField, c2: &ScalarField, c3: &ScalarField) -> Result<MatrixField> {
    let re = |f: &ScalarField| f.map(|z| c(z.re));
    let (c1, c2, c3) = (re(c1), re(c2), re(c3));
    let e00 = c3.scale(I);
    let e10 = c1.scale(I).sub(&c2)?;
    let e01 = c1.scale(I).add(&c2)?;
    let e11 = c3.scale(-I);
    MatrixField::from_entries(&[e00, e10, e01, e11], 2)
}

/// SU(2) gauge potentials `A₁, A₂` and Higgs fields `φ₁, φ₂` on a periodic plane.
#[derive(Clone, Debug)]
pub struct SU2Config {
    a1: MatrixField,
    a2: MatrixField,
    phi1: MatrixField,
    phi2: MatrixField,
}

impl SU2Config {
    pub fn new(a1: MatrixField, a2: MatrixField, phi1: MatrixField, phi2: MatrixField) -> Result<Self> {
        let chart = a1.chart().clone();
        if chart.n() != 1 {
            return Err(Error::InvalidChart("the reduced plane needs a one-dimensional complex chart".into()));
        }
        for (name, x) in [("A1", &a1), ("A2", &a2), ("phi1", &phi1), ("phi2", &phi2)] {
            if !LatticeChart::same(&chart, x.chart()) {
                return Err(Error::ChartMismatch);
            }
            check_su2(name, x)?;
        }
        Ok(Self { a1, a2, phi1, phi2 })
    }

    pub fn zero(chart: &Arc<LatticeChart>) -> Result<Self> {
        let z = MatrixField::zeros(chart, 2);
        Self::new(z.clone(), z.clone(), z.clone(), z)
    }

    /// Seeded band-limited random configuration scaled by `amplitude`.
    pub fn random(chart: &Arc<LatticeChart>, seed: u64, band: usize, amplitude: f64) -> Result<Self> {
        let field = |k: u64| -> Result<MatrixField> {
            let s = seed.wrapping_mul(31).wrapping_add(3 * k);
            let f = |j: u64| ScalarField::random_real(chart, s.wrapping_add(j), band).map(|x| x.scale(c(amplitude)));
            su2_from_components(&f(0)?, &f(1)?, &f(2)?)
        };
        Self::new(field(0)?, field(1)?, field(2)?, field(3)?)
    }

    /// Constant fields.
    pub fn constant(chart: &Arc<LatticeChart>, a1: &DMatrix<C64>, a2: &DMatrix<C64>, phi1: &DMatrix<C64>, phi2: &DMatrix<C64>) -> Result<Self> {
        Self::new(
            MatrixField::constant(chart, a1),
            MatrixField::constant(chart, a2),
            MatrixField::constant(chart, phi1),
            MatrixField::constant(chart, phi2),
        )
    }

    /// From `A_z̄` and `φ`: `A₁ = (A_z̄ − A_z̄†)/2`, `A₂ = (A_z̄ + A_z̄†)/2i`,
    /// `φ₁ = (φ − φ†)/2`, `φ₂ = i(φ + φ†)/2`.
    pub fn from_complex(a_zbar: &MatrixField, phi: &MatrixField) -> Result<Self> {
        let half = c(0.5);
        let a1 = a_zbar.sub(&a_zbar.adjoint())?.scale(half);
        let a2 = a_zbar.add(&a_zbar.adjoint())?.scale(C64::new(0.0, -0.5));
        let phi1 = phi.sub(&phi.adjoint())?.scale(half);
        let phi2 = phi.add(&phi.adjoint())?.scale(C64::new(0.0, 0.5));
        Self::new(a1, a2, phi1, phi2)
    }

    /// Complex gauge transform of a constant Higgs field: `g = exp(X)` with
    /// `X` a seeded traceless field, `A_z̄ = −(∂_z̄ g) g⁻¹` (traceless part)
    /// and `φ = g φ₀ g⁻¹`, so that `D_z̄ φ = 0`.
    pub fn holomorphic(chart: &Arc<LatticeChart>, seed: u64, band: usize, amplitude: f64, phi0: &DMatrix<C64>) -> Result<Self> {
        let entry = |k: u64| ScalarField::random(chart, seed.wrapping_mul(17).wrapping_add(k), band).map(|f| f.scale(c(amplitude)));
        let (p, q, r) = (entry(0)?, entry(1)?, entry(2)?);
        let x = MatrixField::from_entries(&[p.clone(), q, r, p.scale(c(-1.0))], 2)?;
        let g = x.map_points(|m| expm(&m.into_owned()));
        let g_inv = g.inverse()?;
        let dzbar = g.d_real(0).add(&g.d_real(1).scale(I))?;
        let a = dzbar.mul(&g_inv)?.scale(c(-1.0));
        let tr = a.trace().scale(c(-0.5));
        let a = a.add(&MatrixField::scalar(&tr, 2))?;
        let phi = g.mul(&MatrixField::constant(chart, phi0))?.mul(&g_inv)?;
        Self::from_complex(&a, &phi)
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        self.a1.chart()
    }

    pub fn a1(&self) -> &MatrixField {
        &self.a1
    }

    pub fn a2(&self) -> &MatrixField {
        &self.a2
    }

    pub fn phi1(&self) -> &MatrixField {
        &self.phi1
    }

    pub fn phi2(&self) -> &MatrixField {
        &self.phi2
    }

    /// `φ = φ₁ − iφ₂`.
    pub fn phi(&self) -> MatrixField {
        self.phi1.sub(&self.phi2.scale(I)).expect("same shape")
    }

    /// `A_z̄ = A₁ + iA₂`.
    pub fn a_zbar(&self) -> MatrixField {
        self.a1.add(&self.a2.scale(I)).expect("same shape")
    }

    /// `A_z = A₁ − iA₂ = −A_z̄†`.
    pub fn a_z(&self) -> MatrixField {
        self.a1.sub(&self.a2.scale(I)).expect("same shape")
    }

    /// `A ↦ uAu†`, `φ_i ↦ uφ_iu†` for a constant `u ∈ SU(2)`.
    pub fn gauge_transform(&self, u: &DMatrix<C64>) -> Result<Self> {
        let ud = u.adjoint();
        let t = |x: &MatrixField| x.map_points(|m| u * m * &ud);
        Self::new(t(&self.a1), t(&self.a2), t(&self.phi1), t(&self.phi2))
    }

    /// `D_i X = ∂_i X + [A_i, X]` for `i ∈ {1, 2}`.
    pub fn covariant(&self, i: usize, x: &MatrixField) -> Result<MatrixField> {
        let a = match i {
            1 => &self.a1,
            2 => &self.a2,
            _ => return Err(Error::AxisOutOfRange { axis: i, n: 2 }),
        };
        x.d_real(i - 1).add(&a.commutator(x)?)
    }

    /// `D_z̄ X = ∂_z̄ X + [A_z̄, X]`.
    pub fn d_zbar(&self, x: &MatrixField) -> Result<MatrixField> {
        x.d_real(0)
            .add(&x.d_real(1).scale(I))?
            .add(&self.a_zbar().commutator(x)?)
    }
}

/// Field strength `F_{ij}` for `i, j ∈ 1..=d`, `d = 2` or `4`.
#[derive(Clone, Debug)]
pub struct FieldStrength {
    dim: usize,
    components: Vec<MatrixField>,
}

impl FieldStrength {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `F_{ij}` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> &MatrixField {
        &self.components[(i - 1) * self.dim + (j - 1)]
    }
}

/// `F_{ij} = ∂_iA_j − ∂_jA_i + [A_i, A_j]`; when `extended`, `A₃ = φ₁`,
/// `A₄ = φ₂` and `∂₃ = ∂₄ = 0`.
pub fn field_strength(cfg: &SU2Config, extended: bool) -> Result<FieldStrength> {
    let dim = if extended { 4 } else { 2 };
    let pots = [cfg.a1(), cfg.a2(), cfg.phi1(), cfg.phi2()];
    let deriv = |i: usize, x: &MatrixField| -> MatrixField {
        if i <= 2 {
            x.d_real(i - 1)
        } else {
            MatrixField::zeros(x.chart(), 2)
        }
    };
    let mut components = Vec::with_capacity(dim * dim);
    for i in 1..=dim {
        for j in 1..=dim {
            let f = deriv(i, pots[j - 1])
                .sub(&deriv(j, pots[i - 1]))?
                .add(&pots[i - 1].commutator(pots[j - 1])?)?;
            components.push(f);
        }
    }
    Ok(FieldStrength { dim, components })
}

/// Self-duality residuals `(‖F₁₂ − F₃₄‖, ‖F₁₃ − F₄₂‖, ‖F₁₄ − F₂₃‖)` of the
/// extended four-dimensional field.
pub fn sdym_residual(cfg: &SU2Config) -> Result<[f64; 3]> {
    let f = field_strength(cfg, true)?;
    Ok([
        norm(&f.get(1, 2).sub(f.get(3, 4))?),
        norm(&f.get(1, 3).sub(f.get(4, 2))?),
        norm(&f.get(1, 4).sub(f.get(2, 3))?),
    ])
}

/// Reduced residuals `(‖F₁₂ − [φ₁,φ₂]‖, ‖D₁φ₁ + D₂φ₂‖, ‖D₁φ₂ − D₂φ₁‖)`.
pub fn reduced_sdym_residual(cfg: &SU2Config) -> Result<[f64; 3]> {
    let f12 = field_strength(cfg, false)?.get(1, 2).clone();
    let d1p1 = cfg.covariant(1, cfg.phi1())?;
    let d2p2 = cfg.covariant(2, cfg.phi2())?;
    let d1p2 = cfg.covariant(1, cfg.phi2())?;
    let d2p1 = cfg.covariant(2, cfg.phi1())?;
    Ok([
        norm(&f12.sub(&cfg.phi1().commutator(cfg.phi2())?)?),
        norm(&d1p1.add(&d2p2)?),
        norm(&d1p2.sub(&d2p1)?),
    ])
}

/// Formulation of Hitchin's equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// `F₁₂ = (i/2)[φ,φ*]`, `(D₁ + iD₂)φ = 0`.
    Real,
    /// `F_{zz̄} + ¼[φ,φ*] = 0`, `D_z̄φ = 0`.
    Complex,
    /// `F + [Φ_c, Φ_c*] = 0`, `D''Φ_c = 0` with `Φ_c = ½φ dz`.
    Forms,
    /// `F − Φ∧Φ = 0`, `DΦ = 0`, `D*Φ = 0` with `Φ = φ₁dx¹ + φ₂dx²`.
    Kw,
}

impl Formulation {
    pub const ALL: [Formulation; 4] = [Formulation::Real, Formulation::Complex, Formulation::Forms, Formulation::Kw];
}

/// Residual norms of one formulation.
pub fn hitchin_residual(cfg: &SU2Config, form: Formulation) -> Result<Vec<f64>> {
    match form {
        Formulation::Real => real_residual(cfg),
        Formulation::Complex => complex_residual(cfg),
        Formulation::Forms => forms_residual(cfg),
        Formulation::Kw => kw_residual(cfg),
    }
}

fn real_residual(cfg: &SU2Config) -> Result<Vec<f64>> {
    let f12 = field_strength(cfg, false)?.get(1, 2).clone();
    let phi = cfg.phi();
    let comm = phi.commutator(&phi.adjoint())?.scale(C64::new(0.0, 0.5));
    let d = cfg.covariant(1, &phi)?.add(&cfg.covariant(2, &phi)?.scale(I))?;
    Ok(vec![norm(&f12.sub(&comm)?), norm(&d)])
}

fn complex_residual(cfg: &SU2Config) -> Result<Vec<f64>> {
    let az = cfg.a_z();
    let azb = cfg.a_zbar();
    let dz = |x: &MatrixField| x.d_real(0).sub(&x.d_real(1).scale(I));
    let dzb = |x: &MatrixField| x.d_real(0).add(&x.d_real(1).scale(I));
    let fzz = dz(&azb)?
        .sub(&dzb(&az)?)?
        .add(&az.commutator(&azb)?)?
        .scale(c(0.25));
    let phi = cfg.phi();
    let comm = phi.commutator(&phi.adjoint())?.scale(c(0.25));
    Ok(vec![norm(&fzz.add(&comm)?), norm(&cfg.d_zbar(&phi)?)])
}

/// `(A^{1,0}, A^{0,1}, Φ_c)` as matrix-valued forms on the chart.
pub fn complex_forms(cfg: &SU2Config) -> Result<(EndForm, EndForm, EndForm)> {
    let chart = cfg.chart();
    let e = MultiIndex::single(1, 1)?;
    let o = MultiIndex::empty(1);
    let a10 = EndForm::monomial(e, o, cfg.a_z().scale(c(0.5)))?;
    let a01 = EndForm::monomial(o, e, cfg.a_zbar().scale(c(0.5)))?;
    let phi_c = EndForm::monomial(e, o, cfg.phi().scale(c(0.5)))?;
    debug_assert!(LatticeChart::same(chart, a10.chart()));
    Ok((a10, a01, phi_c))
}

fn forms_residual(cfg: &SU2Config) -> Result<Vec<f64>> {
    let (a10, a01, phi_c) = complex_forms(cfg)?;
    let f = a10
        .d_anti()?
        .add(&a01.d_holo()?)?
        .add(&a10.commutator(&a01)?)?;
    // Φ_c* in the unitary frame: conjugate-transposed coefficient at dz̄.
    let e = MultiIndex::single(1, 1)?;
    let o = MultiIndex::empty(1);
    let phi_star = EndForm::monomial(o, e, phi_c.coeff(e, o).adjoint())?;
    let curv = f.add(&phi_c.commutator(&phi_star)?)?;
    let hol = phi_c.d_anti()?.add(&a01.commutator(&phi_c)?)?;
    Ok(vec![curv.frobenius_norm_sq().sqrt(), hol.frobenius_norm_sq().sqrt()])
}

/// 2D Hodge star on 1-forms `c₁dx + c₂dy ↦ −c₂dx + c₁dy`.
fn star1(c1: &MatrixField, c2: &MatrixField) -> (MatrixField, MatrixField) {
    (c2.scale(c(-1.0)), c1.clone())
}

/// Covariant exterior derivative of a 1-form, as the `dx∧dy` coefficient.
fn d_one_form(cfg: &SU2Config, c1: &MatrixField, c2: &MatrixField) -> Result<MatrixField> {
    cfg.covariant(1, c2)?.sub(&cfg.covariant(2, c1)?)
}

fn kw_residual(cfg: &SU2Config) -> Result<Vec<f64>> {
    let f12 = field_strength(cfg, false)?.get(1, 2).clone();
    let wedge = cfg.phi1().mul(cfg.phi2())?.sub(&cfg.phi2().mul(cfg.phi1())?)?;
    let d_phi = d_one_form(cfg, cfg.phi1(), cfg.phi2())?;
    let (s1, s2) = star1(cfg.phi1(), cfg.phi2());
    // *(dx∧dy) = 1
    let d_star = d_one_form(cfg, &s1, &s2)?;
    Ok(vec![norm(&f12.sub(&wedge)?), norm(&d_phi), norm(&d_star)])
}

/// `(‖D_z̄φ‖, ‖∂_z̄ det φ‖)`.
pub fn det_holomorphy(cfg: &SU2Config) -> Result<(f64, f64)> {
    let phi = cfg.phi();
    let det = phi
        .entry(0, 0)
        .mul(&phi.entry(1, 1))?
        .sub(&phi.entry(0, 1).mul(&phi.entry(1, 0))?)?;
    let dx = MatrixField::scalar(&det, 1).d_real(0).entry(0, 0);
    let dy = MatrixField::scalar(&det, 1).d_real(1).entry(0, 0);
    let d = dx.add(&dy.scale(I))?;
    Ok((norm(&cfg.d_zbar(&phi)?), d.l2_norm()))
}

/// The configuration as an `n = 1`, rank-2 Higgs instance: `h = I`,
/// `Φ = ½φ dz` and connection `a¹⁰ = ½A_z`, `a⁰¹ = ½A_z̄`.
pub fn to_higgs_instance(cfg: &SU2Config) -> Result<HiggsInstance> {
    let chart = cfg.chart();
    let (a10, a01, phi_c) = complex_forms(cfg)?;
    HiggsInstance::from_parts(MetricField::identity(chart, 2), phi_c, Some(Connection::new(a10, a01)?), None)
}
