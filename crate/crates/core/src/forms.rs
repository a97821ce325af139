//! Scalar `(p,q)`-forms in the unitary coframe `θ^α = dz^α`.
//!
//! A form stores one [`ScalarField`] per basis monomial `θ^A ∧ θ̄^B`; missing
//! keys are zero. The volume form is `ω^n/n! = i^n θ¹∧θ̄¹∧⋯∧θⁿ∧θ̄ⁿ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{compensated_sum, LatticeChart, ScalarField, C64};
use crate::multiindex::{epsilon, merge, MultiIndex, Sign};

/// Basis key `(A, B)` of the monomial `θ^A ∧ θ̄^B`.
pub type Key = (MultiIndex, MultiIndex);

/// Relative tolerance for agreement between inner-product routes.
pub const ROUTE_TOL: f64 = 1e-10;

/// An exact unit `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);

    /// `i^k`.
    pub fn i_pow(k: usize) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_c64(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }
}

impl From<Sign> for Phase {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => Phase(0),
            Sign::Minus => Phase(2),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl Mul<Sign> for Phase {
    type Output = Phase;
    fn mul(self, rhs: Sign) -> Phase {
        self * Phase::from(rhs)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["1", "i", "-1", "-i"][self.0 as usize])
    }
}

/// `(θ^Aθ̄^B) ∧ (θ^Cθ̄^D) = sign · θ^{A∪C} θ̄^{B∪D}`, or `None` on a repeated label.
pub fn monomial_wedge(a: MultiIndex, b: MultiIndex, c: MultiIndex, d: MultiIndex) -> Option<(Key, Sign)> {
    let (ac, s1) = merge(a, c)?;
    let (bd, s2) = merge(b, d)?;
    Some(((ac, bd), Sign::parity(b.len() * c.len()) * s1 * s2))
}

/// `ω^n/n! = i^n s_n θ^{1..n} ∧ θ̄^{1..n}` with `s_n = (-1)^{n(n-1)/2}`.
pub fn volume_phase(n: usize) -> Phase {
    Phase::i_pow(n) * Sign::parity(n * (n - 1) / 2)
}

/// The basis action `*̄(θ^Aθ̄^B) = s_{AB} θ^{A'}θ̄^{B'}`, with `s_{AB}` fixed by
/// `(θ^Aθ̄^B) ∧ *̄(θ^Aθ̄^B) = ω^n/n!`.
pub fn bar_star_basis(a: MultiIndex, b: MultiIndex) -> (Key, Phase) {
    let (ac, bc) = (a.complement(), b.complement());
    let (_, t) = monomial_wedge(a, b, ac, bc).expect("complements are disjoint");
    ((ac, bc), volume_phase(a.n()) * t)
}

/// The printed closed form `(-1)^{pq} i^n ε^{BA}` for the same basis action.
pub fn bar_star_closed_form(a: MultiIndex, b: MultiIndex) -> Phase {
    let e = epsilon(b, a).expect("same dimension");
    Phase::i_pow(a.n()) * Sign::parity(a.len() * b.len()) * e
}

/// How often the printed closed form matches the constructive basis sign.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormAgreement {
    pub n: usize,
    pub agree: usize,
    pub total: usize,
}

pub fn closed_form_agreement(n: usize) -> ClosedFormAgreement {
    let all = MultiIndex::all(n);
    let mut agree = 0;
    for &a in &all {
        for &b in &all {
            if bar_star_basis(a, b).1 == bar_star_closed_form(a, b) {
                agree += 1;
            }
        }
    }
    ClosedFormAgreement {
        n,
        agree,
        total: all.len() * all.len(),
    }
}

pub(crate) fn check_bidegree(n: usize, p: usize, q: usize) -> Result<()> {
    if p > n || q > n {
        return Err(Error::InvalidBidegree { p, q, n });
    }
    Ok(())
}

/// A scalar `(p,q)`-form `Σ φ_{AB̄} θ^A ∧ θ̄^B`.
#[derive(Clone, Debug)]
pub struct ScalarForm {
    chart: Arc<LatticeChart>,
    p: usize,
    q: usize,
    coeffs: BTreeMap<Key, ScalarField>,
}

impl ScalarForm {
    pub fn zero(chart: &Arc<LatticeChart>, p: usize, q: usize) -> Result<Self> {
        check_bidegree(chart.n(), p, q)?;
        Ok(Self {
            chart: chart.clone(),
            p,
            q,
            coeffs: BTreeMap::new(),
        })
    }

    /// `f θ^A ∧ θ̄^B`.
    pub fn monomial(a: MultiIndex, b: MultiIndex, f: ScalarField) -> Result<Self> {
        let mut out = Self::zero(f.chart(), a.len(), b.len())?;
        out.set(a, b, f)?;
        Ok(out)
    }

    /// The constant function `c` as a `(0,0)`-form.
    pub fn function(f: ScalarField) -> Self {
        let n = f.chart().n();
        Self::monomial(MultiIndex::empty(n), MultiIndex::empty(n), f).expect("valid bidegree")
    }

    /// Seeded random form with every basis key populated by a band-limited field.
    pub fn random(chart: &Arc<LatticeChart>, p: usize, q: usize, seed: u64, band: usize) -> Result<Self> {
        let mut out = Self::zero(chart, p, q)?;
        let n = chart.n();
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        for a in MultiIndex::of_len(n, p) {
            for b in MultiIndex::of_len(n, q) {
                s = s.wrapping_add(1);
                out.set(a, b, ScalarField::random(chart, s, band)?)?;
            }
        }
        Ok(out)
    }

    /// The Kähler form `ω = i Σ θ^α ∧ θ̄^α`.
    pub fn kahler(chart: &Arc<LatticeChart>) -> Self {
        let n = chart.n();
        let mut out = Self::zero(chart, 1, 1).expect("n >= 1");
        for alpha in 1..=n {
            let e = MultiIndex::single(n, alpha).unwrap();
            out.set(e, e, ScalarField::constant(chart, C64::new(0.0, 1.0)))
                .unwrap();
        }
        out
    }

    /// `ω^k / k!`.
    pub fn kahler_power(chart: &Arc<LatticeChart>, k: usize) -> Result<Self> {
        let n = chart.n();
        if k > n {
            return Err(Error::InvalidBidegree { p: k, q: k, n });
        }
        let omega = Self::kahler(chart);
        let mut out = Self::function(ScalarField::constant(chart, C64::new(1.0, 0.0)));
        for j in 1..=k {
            out = out.wedge(&omega)?.scale(C64::new(1.0 / j as f64, 0.0));
        }
        Ok(out)
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        &self.chart
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn coeffs(&self) -> &BTreeMap<Key, ScalarField> {
        &self.coeffs
    }

    pub fn get(&self, a: MultiIndex, b: MultiIndex) -> Option<&ScalarField> {
        self.coeffs.get(&(a, b))
    }

    /// Coefficient at `(A, B)`, zero when absent.
    pub fn coeff(&self, a: MultiIndex, b: MultiIndex) -> ScalarField {
        self.get(a, b)
            .cloned()
            .unwrap_or_else(|| ScalarField::zeros(&self.chart))
    }

    pub fn set(&mut self, a: MultiIndex, b: MultiIndex, f: ScalarField) -> Result<()> {
        if a.len() != self.p || b.len() != self.q || a.n() != self.n() || b.n() != self.n() {
            return Err(Error::BidegreeMismatch(a.len(), b.len(), self.p, self.q));
        }
        if !LatticeChart::same(&self.chart, f.chart()) {
            return Err(Error::ChartMismatch);
        }
        self.coeffs.insert((a, b), f);
        Ok(())
    }

    fn accumulate(&mut self, key: Key, f: ScalarField) {
        match self.coeffs.get_mut(&key) {
            Some(g) => *g = g.add(&f).expect("same chart"),
            None => {
                self.coeffs.insert(key, f);
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !LatticeChart::same(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        if self.bidegree() != other.bidegree() {
            return Err(Error::BidegreeMismatch(self.p, self.q, other.p, other.q));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, f) in &other.coeffs {
            out.accumulate(*k, f.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for f in out.coeffs.values_mut() {
            *f = f.scale(s);
        }
        out
    }

    /// Multiplies every coefficient by the function `f`.
    pub fn mul_function(&self, f: &ScalarField) -> Result<Self> {
        let mut out = self.clone();
        for g in out.coeffs.values_mut() {
            *g = g.mul(f)?;
        }
        Ok(out)
    }

    /// Exterior product. Bidegrees above `n` give the zero form.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if !LatticeChart::same(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        let mut out = Self {
            chart: self.chart.clone(),
            p: self.p + other.p,
            q: self.q + other.q,
            coeffs: BTreeMap::new(),
        };
        for ((a, b), f) in &self.coeffs {
            for ((c, d), g) in &other.coeffs {
                if let Some((key, s)) = monomial_wedge(*a, *b, *c, *d) {
                    out.accumulate(key, f.mul(g)?.scale(C64::new(s.to_f64(), 0.0)));
                }
            }
        }
        Ok(out)
    }

    /// `ψ̄`: bidegree `(q,p)`, coefficient at `(B,A)` is `(-1)^{pq} conj ψ_{AB̄}`.
    pub fn conjugate(&self) -> Self {
        let s = Sign::parity(self.p * self.q).to_f64();
        Self {
            chart: self.chart.clone(),
            p: self.q,
            q: self.p,
            coeffs: self
                .coeffs
                .iter()
                .map(|((a, b), f)| ((*b, *a), f.conj().scale(C64::new(s, 0.0))))
                .collect(),
        }
    }

    /// `*̄φ = Σ conj(φ_{AB̄}) s_{AB} θ^{A'} ∧ θ̄^{B'}`.
    pub fn bar_star(&self) -> Self {
        let n = self.n();
        Self {
            chart: self.chart.clone(),
            p: n - self.p,
            q: n - self.q,
            coeffs: self
                .coeffs
                .iter()
                .map(|((a, b), f)| {
                    let (key, s) = bar_star_basis(*a, *b);
                    (key, f.conj().scale(s.to_c64()))
                })
                .collect(),
        }
    }

    /// `*φ = *̄(φ̄)`, mapping `(p,q)` to `(n-q, n-p)`.
    pub fn hodge_star(&self) -> Self {
        self.conjugate().bar_star()
    }

    /// `∂φ = Σ_α θ^α ∧ ∂_α φ`.
    pub fn d_holo(&self) -> Result<Self> {
        self.exterior(true)
    }

    /// `∂̄φ = Σ_α θ̄^α ∧ ∂_ᾱ φ`.
    pub fn d_anti(&self) -> Result<Self> {
        self.exterior(false)
    }

    fn exterior(&self, holo: bool) -> Result<Self> {
        let n = self.n();
        let (p, q) = if holo { (self.p + 1, self.q) } else { (self.p, self.q + 1) };
        let mut out = Self {
            chart: self.chart.clone(),
            p,
            q,
            coeffs: BTreeMap::new(),
        };
        let empty = MultiIndex::empty(n);
        for ((a, b), f) in &self.coeffs {
            for alpha in 1..=n {
                let e = MultiIndex::single(n, alpha)?;
                let hit = if holo {
                    monomial_wedge(e, empty, *a, *b)
                } else {
                    monomial_wedge(empty, e, *a, *b)
                };
                if let Some((key, s)) = hit {
                    let d = if holo { f.d_holo(alpha)? } else { f.d_anti(alpha)? };
                    out.accumulate(key, d.scale(C64::new(s.to_f64(), 0.0)));
                }
            }
        }
        Ok(out)
    }

    /// Local inner product `Σ φ_{AB̄} conj(ψ_{AB̄})`.
    pub fn inner_local(&self, other: &Self) -> Result<ScalarField> {
        self.check_same(other)?;
        let mut acc = ScalarField::zeros(&self.chart);
        for (k, f) in &self.coeffs {
            if let Some(g) = other.coeffs.get(k) {
                acc = acc.add(&f.mul(&g.conj())?)?;
            }
        }
        Ok(acc)
    }

    /// The same local product through raised indices:
    /// `(-1)^{pq} Σ φ_{AB̄} ψ̄^{AB̄}` with `ψ̄^{AB̄} = ψ̄_{BĀ}`.
    pub fn inner_local_physics(&self, other: &Self) -> Result<ScalarField> {
        self.check_same(other)?;
        let bar = other.conjugate();
        let s = Sign::parity(self.p * self.q).to_f64();
        let mut acc = ScalarField::zeros(&self.chart);
        for ((a, b), f) in &self.coeffs {
            if let Some(g) = bar.coeffs.get(&(*b, *a)) {
                acc = acc.add(&f.mul(g)?)?;
            }
        }
        Ok(acc.scale(C64::new(s, 0.0)))
    }

    /// `∫ τ` for an `(n,n)`-form.
    pub fn integrate_top(&self) -> Result<C64> {
        let n = self.n();
        if self.bidegree() != (n, n) {
            return Err(Error::BidegreeMismatch(self.p, self.q, n, n));
        }
        let full = MultiIndex::full(n);
        Ok(match self.get(full, full) {
            Some(f) => f.integrate() / volume_phase(n).to_c64(),
            None => C64::new(0.0, 0.0),
        })
    }

    /// `⟨φ,ψ⟩ = ∫ φ ∧ *̄ψ`, checked against `∫ (φ,ψ) ω^n/n!`. Different
    /// bidegrees are orthogonal.
    pub fn inner_global(&self, other: &Self) -> Result<C64> {
        if !LatticeChart::same(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        if self.bidegree() != other.bidegree() {
            return Ok(C64::new(0.0, 0.0));
        }
        let wedge = self.wedge(&other.bar_star())?.integrate_top()?;
        let local = self.inner_local(other)?.integrate();
        let scale = (self.local_norm_sq() * other.local_norm_sq()).sqrt();
        check_routes("scalar inner product", wedge, local, scale)?;
        Ok(local)
    }

    /// `‖φ‖² = ⟨φ,φ⟩`.
    pub fn norm_sq(&self) -> Result<f64> {
        Ok(self.inner_global(self)?.re)
    }

    fn local_norm_sq(&self) -> f64 {
        let cell = self.chart.cell_volume();
        compensated_sum(
            self.coeffs
                .values()
                .flat_map(|f| f.data().iter().map(|z| z.norm_sqr())),
        ) * cell
    }

    /// Largest coefficient modulus over all keys and points.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(ScalarField::max_abs).fold(0.0, f64::max)
    }
}

/// Fails with [`Error::RouteMismatch`] when `|a - b| > ROUTE_TOL · scale`.
pub(crate) fn check_routes(what: &'static str, a: C64, b: C64, scale: f64) -> Result<()> {
    let gap = (a - b).norm();
    let denom = scale.max(a.norm()).max(b.norm());
    if gap > ROUTE_TOL * denom && gap > f64::MIN_POSITIVE {
        return Err(Error::RouteMismatch {
            what,
            a: format!("{a}"),
            b: format!("{b}"),
            rel: gap / denom,
        });
    }
    Ok(())
}
