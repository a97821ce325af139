//! Pointwise Lagrangian of the non-abelian Seiberg–Witten functional,
//! evaluated in the unitary frame `g = M^{1/2}` where `h`-adjoints are
//! plain conjugate transposes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::higgs::HiggsInstance;
use crate::lattice::{ScalarField, C64};
use crate::matrix::{sqrt_hermitian, MatrixField};
use crate::multiindex::MultiIndex;

/// Relative tolerance between `∫ 𝓛 ω^n/n!` and `𝓗`.
pub const LAGRANGIAN_TOL: f64 = 1e-8;

fn frob_sq(m: &MatrixField) -> ScalarField {
    m.frobenius_density()
}

/// `𝓛 = Σ_{α<β} |D_αΦ_β − D_βΦ_α|² + Σ |F_{αβ̄}|² + Σ |[Φ_α, Φ_β†]|²
/// + 2 Re Σ tr([Φ_α, Φ_β†] F_{αβ̄}†)`, all in the unitary frame.
pub fn lagrangian_density(inst: &HiggsInstance) -> Result<ScalarField> {
    let chart = inst.chart().clone();
    let n = chart.n();
    let h = inst.metric();
    let g = h.gram().map_points(|m| sqrt_hermitian(&m.into_owned()));
    let g_inv = g.inverse()?;
    let to_unitary = |x: &MatrixField| -> Result<MatrixField> { g.mul(x)?.mul(&g_inv) };
    let conn = inst.connection()?;
    let curv = inst.curvature()?;
    let empty = MultiIndex::empty(n);
    let single = |a: usize| MultiIndex::single(n, a).expect("axis in range");

    let mut phi_u = Vec::with_capacity(n);
    let mut a_u = Vec::with_capacity(n);
    for alpha in 1..=n {
        let e = single(alpha);
        phi_u.push(to_unitary(&inst.higgs().coeff(e, empty))?);
        let dg = g.d_holo(alpha)?;
        a_u.push(to_unitary(&conn.a10.coeff(e, empty))?.sub(&dg.mul(&g_inv)?)?);
    }
    let cov = |alpha: usize, beta: usize| -> Result<MatrixField> {
        let x = &phi_u[beta - 1];
        x.d_holo(alpha)?.add(&a_u[alpha - 1].commutator(x)?)
    };

    let mut density = ScalarField::zeros(&chart);
    for alpha in 1..=n {
        for beta in alpha + 1..=n {
            let d = cov(alpha, beta)?.sub(&cov(beta, alpha)?)?;
            density = density.add(&frob_sq(&d))?;
        }
    }
    for alpha in 1..=n {
        for beta in 1..=n {
            let f = to_unitary(&curv.coeff(single(alpha), single(beta)))?;
            let comm = phi_u[alpha - 1].commutator(&phi_u[beta - 1].adjoint())?;
            density = density.add(&frob_sq(&f))?.add(&frob_sq(&comm))?;
            let cross = comm.mul(&f.adjoint())?.trace().map(|z| C64::new(2.0 * z.re, 0.0));
            density = density.add(&cross)?;
        }
    }
    Ok(density)
}

/// Comparison of `∫ 𝓛 ω^n/n!` with `𝓗`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagrangianCheck {
    pub integral: f64,
    pub sw: f64,
    pub relative_gap: f64,
}

/// Integrates [`lagrangian_density`] and compares it with `𝓗`; a gap above
/// [`LAGRANGIAN_TOL`] is an error.
pub fn lagrangian_action(inst: &HiggsInstance) -> Result<LagrangianCheck> {
    let integral = lagrangian_density(inst)?.integrate().re;
    let sw = super::sw_value(inst)?;
    let relative_gap = (integral - sw).abs() / sw.abs().max(f64::MIN_POSITIVE);
    let relative_gap = if integral == sw { 0.0 } else { relative_gap };
    if relative_gap > LAGRANGIAN_TOL && (integral - sw).abs() > 1e-14 {
        return Err(Error::RouteMismatch {
            what: "Lagrangian integral",
            a: format!("{integral:.12e}"),
            b: format!("{sw:.12e}"),
            rel: relative_gap,
        });
    }
    Ok(LagrangianCheck {
        integral,
        sw,
        relative_gap,
    })
}
