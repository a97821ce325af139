//! `(p,q)`-forms with values in `End E` for a trivialized rank-`r` bundle.
//!
//! The bundle carries a fixed global holomorphic frame `e_i`. A metric is
//! stored as the matrix `h_{ij̄} = h(e_i, e_j)`; most formulas use the Gram
//! matrix `M = hᵀ`, for which `h(v, w) = w† M v` and the adjoint of an
//! endomorphism `X` is `M⁻¹ X† M`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::forms::{bar_star_basis, check_bidegree, check_routes, monomial_wedge, Key, ScalarForm};
use crate::lattice::{compensated_sum, LatticeChart, ScalarField, C64};
use crate::matrix::{expm_hermitian, MatrixField};
use crate::multiindex::{MultiIndex, Sign};

const ONE: C64 = C64::new(1.0, 0.0);

/// `tr(X Y)` pointwise, without forming the product.
pub fn trace_product(x: &MatrixField, y: &MatrixField) -> Result<ScalarField> {
    if !LatticeChart::same(x.chart(), y.chart()) {
        return Err(Error::ChartMismatch);
    }
    if x.rank() != y.rank() {
        return Err(Error::RankMismatch(x.rank(), y.rank()));
    }
    let r = x.rank();
    let rr = r * r;
    let (xd, yd) = (x.data(), y.data());
    let data = (0..x.num_points())
        .map(|p| {
            let b = p * rr;
            let mut s = C64::new(0.0, 0.0);
            for i in 0..r {
                for j in 0..r {
                    s += xd[b + i + r * j] * yd[b + j + r * i];
                }
            }
            s
        })
        .collect();
    ScalarField::new(x.chart().clone(), data)
}

/// A hermitian positive-definite bundle metric.
#[derive(Clone, Debug)]
pub struct MetricField {
    h: MatrixField,
    h_inv: MatrixField,
    gram: MatrixField,
    gram_inv: MatrixField,
}

impl MetricField {
    /// From the Gram matrix `M = hᵀ`, validating hermiticity and positivity.
    pub fn from_gram(gram: MatrixField) -> Result<Self> {
        let r = gram.rank();
        for p in 0..gram.num_points() {
            let m = gram.get(p);
            let scale = 1.0 + m.norm();
            if (&m - m.adjoint()).norm() > 1e-13 * scale {
                return Err(Error::InvalidMetric {
                    point: p,
                    reason: "not hermitian".into(),
                });
            }
            if Cholesky::new(m).is_none() {
                return Err(Error::InvalidMetric {
                    point: p,
                    reason: "not positive-definite".into(),
                });
            }
        }
        let gram_inv = gram.inverse()?;
        let h = gram.transpose();
        // h^{jk̄} = ((h⁻¹)ᵀ)_{jk} = (M⁻¹)_{jk}
        let h_inv = gram_inv.clone();
        debug_assert_eq!(h.rank(), r);
        Ok(Self {
            h,
            h_inv,
            gram,
            gram_inv,
        })
    }

    /// From the component matrix `h_{ij̄}`.
    pub fn from_components(h: MatrixField) -> Result<Self> {
        Self::from_gram(h.transpose())
    }

    pub fn identity(chart: &Arc<LatticeChart>, r: usize) -> Self {
        let id = MatrixField::identity(chart, r);
        Self {
            h: id.clone(),
            h_inv: id.clone(),
            gram: id.clone(),
            gram_inv: id,
        }
    }

    /// `M = exp(amplitude · S)` with `S` a seeded band-limited hermitian field.
    pub fn random(chart: &Arc<LatticeChart>, r: usize, seed: u64, band: usize, amplitude: f64) -> Result<Self> {
        let s = MatrixField::random_hermitian(chart, r, seed, band)?;
        let gram = s.map_points(|m| expm_hermitian(&(m.into_owned() * C64::new(amplitude, 0.0))));
        Self::from_gram(gram)
    }

    /// `h = e^{-f} I` for a real function `f`.
    pub fn conformal(f: &ScalarField, r: usize) -> Result<Self> {
        let e = f.map(|z| C64::new((-z.re).exp(), 0.0));
        Self::from_gram(MatrixField::scalar(&e, r))
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        self.h.chart()
    }

    pub fn rank(&self) -> usize {
        self.h.rank()
    }

    /// Components `h_{ij̄}`.
    pub fn components(&self) -> &MatrixField {
        &self.h
    }

    /// Inverse components `h^{jk̄}` with `Σ_k h_{ik̄} h^{jk̄} = δ_i^j`.
    pub fn inverse_components(&self) -> &MatrixField {
        &self.h_inv
    }

    /// Gram matrix `M = hᵀ`.
    pub fn gram(&self) -> &MatrixField {
        &self.gram
    }

    pub fn gram_inv(&self) -> &MatrixField {
        &self.gram_inv
    }

    /// `λ h` for a constant `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_gram(self.gram.scale(C64::new(lambda, 0.0)))
    }

    /// Frame change by a constant unitary `U`: `M ↦ U M U†`.
    pub fn unitary_transform(&self, u: &DMatrix<C64>) -> Result<Self> {
        let ud = u.adjoint();
        Self::from_gram(self.gram.map_points(|m| u * m * &ud))
    }

    /// Largest deviation of `Σ_k h_{ik̄} h^{jk̄}` from `δ_i^j`.
    pub fn inverse_residual(&self) -> f64 {
        let r = self.rank();
        let mut worst = 0.0f64;
        for p in 0..self.h.num_points() {
            let h = self.h.at(p);
            let g = self.h_inv.at(p);
            for i in 0..r {
                for j in 0..r {
                    let s: C64 = (0..r).map(|k| h[(i, k)] * g[(j, k)]).sum();
                    let target = if i == j { ONE } else { C64::new(0.0, 0.0) };
                    worst = worst.max((s - target).norm());
                }
            }
        }
        worst
    }

    /// `M⁻¹ X† M` pointwise.
    pub fn adjoint_of(&self, x: &MatrixField) -> Result<MatrixField> {
        self.gram_inv.mul(&x.adjoint())?.mul(&self.gram)
    }

    fn check(&self, chart: &Arc<LatticeChart>, r: usize) -> Result<()> {
        if !LatticeChart::same(self.chart(), chart) {
            return Err(Error::ChartMismatch);
        }
        if self.rank() != r {
            return Err(Error::RankMismatch(self.rank(), r));
        }
        Ok(())
    }
}

/// An `End E`-valued `(p,q)`-form `Σ Ψ_{AB̄} θ^A ∧ θ̄^B`.
#[derive(Clone, Debug)]
pub struct EndForm {
    chart: Arc<LatticeChart>,
    r: usize,
    p: usize,
    q: usize,
    coeffs: BTreeMap<Key, MatrixField>,
}

impl EndForm {
    pub fn zero(chart: &Arc<LatticeChart>, r: usize, p: usize, q: usize) -> Result<Self> {
        check_bidegree(chart.n(), p, q)?;
        Ok(Self {
            chart: chart.clone(),
            r,
            p,
            q,
            coeffs: BTreeMap::new(),
        })
    }

    /// `X θ^A ∧ θ̄^B`.
    pub fn monomial(a: MultiIndex, b: MultiIndex, x: MatrixField) -> Result<Self> {
        let mut out = Self::zero(x.chart(), x.rank(), a.len(), b.len())?;
        out.set(a, b, x)?;
        Ok(out)
    }

    /// An endomorphism field as a `(0,0)`-form.
    pub fn function(x: MatrixField) -> Self {
        let n = x.chart().n();
        Self::monomial(MultiIndex::empty(n), MultiIndex::empty(n), x).expect("valid bidegree")
    }

    /// Seeded random form with every key populated.
    pub fn random(chart: &Arc<LatticeChart>, r: usize, p: usize, q: usize, seed: u64, band: usize) -> Result<Self> {
        let mut out = Self::zero(chart, r, p, q)?;
        let n = chart.n();
        let mut s = seed.wrapping_mul(0xD134_2543_DE82_EF95);
        for a in MultiIndex::of_len(n, p) {
            for b in MultiIndex::of_len(n, q) {
                s = s.wrapping_add(97);
                out.set(a, b, MatrixField::random(chart, r, s, band)?)?;
            }
        }
        Ok(out)
    }

    /// Rank-one form from a scalar form.
    pub fn from_scalar(f: &ScalarForm) -> Self {
        let (p, q) = f.bidegree();
        Self {
            chart: f.chart().clone(),
            r: 1,
            p,
            q,
            coeffs: f
                .coeffs()
                .iter()
                .map(|(k, g)| (*k, MatrixField::scalar(g, 1)))
                .collect(),
        }
    }

    /// `f ⊗ I_r` for a scalar form `f`.
    pub fn scalar_times_identity(f: &ScalarForm, r: usize) -> Self {
        let (p, q) = f.bidegree();
        Self {
            chart: f.chart().clone(),
            r,
            p,
            q,
            coeffs: f
                .coeffs()
                .iter()
                .map(|(k, g)| (*k, MatrixField::scalar(g, r)))
                .collect(),
        }
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        &self.chart
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn degree(&self) -> usize {
        self.p + self.q
    }

    pub fn coeffs(&self) -> &BTreeMap<Key, MatrixField> {
        &self.coeffs
    }

    pub fn get(&self, a: MultiIndex, b: MultiIndex) -> Option<&MatrixField> {
        self.coeffs.get(&(a, b))
    }

    /// Coefficient at `(A, B)`, zero when absent.
    pub fn coeff(&self, a: MultiIndex, b: MultiIndex) -> MatrixField {
        self.get(a, b)
            .cloned()
            .unwrap_or_else(|| MatrixField::zeros(&self.chart, self.r))
    }

    pub fn set(&mut self, a: MultiIndex, b: MultiIndex, x: MatrixField) -> Result<()> {
        if a.len() != self.p || b.len() != self.q || a.n() != self.n() || b.n() != self.n() {
            return Err(Error::BidegreeMismatch(a.len(), b.len(), self.p, self.q));
        }
        if !LatticeChart::same(&self.chart, x.chart()) {
            return Err(Error::ChartMismatch);
        }
        if x.rank() != self.r {
            return Err(Error::RankMismatch(x.rank(), self.r));
        }
        self.coeffs.insert((a, b), x);
        Ok(())
    }

    fn accumulate(&mut self, key: Key, x: MatrixField) {
        match self.coeffs.get_mut(&key) {
            Some(y) => *y = y.add(&x).expect("same chart and rank"),
            None => {
                self.coeffs.insert(key, x);
            }
        }
    }

    fn empty_like(&self, p: usize, q: usize) -> Self {
        Self {
            chart: self.chart.clone(),
            r: self.r,
            p,
            q,
            coeffs: BTreeMap::new(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !LatticeChart::same(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        if self.r != other.r {
            return Err(Error::RankMismatch(self.r, other.r));
        }
        Ok(())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        if self.bidegree() != other.bidegree() {
            return Err(Error::BidegreeMismatch(self.p, self.q, other.p, other.q));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, x) in &other.coeffs {
            out.accumulate(*k, x.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for x in out.coeffs.values_mut() {
            *x = x.scale(s);
        }
        out
    }

    /// Applies a map to every coefficient, keeping keys.
    pub fn map_coeffs(&self, f: impl Fn(&MatrixField) -> Result<MatrixField>) -> Result<Self> {
        let mut out = self.empty_like(self.p, self.q);
        for (k, x) in &self.coeffs {
            let y = f(x)?;
            out.r = y.rank();
            out.coeffs.insert(*k, y);
        }
        Ok(out)
    }

    /// Exterior product with matrix multiplication of coefficients.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.empty_like(self.p + other.p, self.q + other.q);
        for ((a, b), x) in &self.coeffs {
            for ((c, d), y) in &other.coeffs {
                if let Some((key, s)) = monomial_wedge(*a, *b, *c, *d) {
                    let s = C64::new(s.to_f64(), 0.0);
                    match out.coeffs.get_mut(&key) {
                        Some(acc) => x.mul_acc(y, s, acc)?,
                        None => {
                            out.coeffs.insert(key, x.mul(y)?.scale(s));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Graded commutator `[Φ,Ψ] = Φ∧Ψ − (−1)^{(p+q)(s+u)} Ψ∧Φ`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let sign = Sign::parity(self.degree() * other.degree()).to_f64();
        let ab = self.wedge(other)?;
        let ba = other.wedge(self)?;
        ab.add(&ba.scale(C64::new(-sign, 0.0)))
    }

    /// `Ψ ∧ f` for a scalar form `f`.
    pub fn wedge_scalar(&self, f: &ScalarForm) -> Result<Self> {
        if !LatticeChart::same(&self.chart, f.chart()) {
            return Err(Error::ChartMismatch);
        }
        let (s, u) = f.bidegree();
        let mut out = self.empty_like(self.p + s, self.q + u);
        for ((a, b), x) in &self.coeffs {
            for ((c, d), g) in f.coeffs() {
                if let Some((key, sg)) = monomial_wedge(*a, *b, *c, *d) {
                    out.accumulate(key, x.mul_scalar_field(&g.scale(C64::new(sg.to_f64(), 0.0)))?);
                }
            }
        }
        Ok(out)
    }

    /// Pointwise trace, a scalar form.
    pub fn trace(&self) -> ScalarForm {
        let mut out = ScalarForm::zero(&self.chart, self.p.min(self.n()), self.q.min(self.n()))
            .expect("valid bidegree");
        if self.p > self.n() || self.q > self.n() {
            return out;
        }
        for ((a, b), x) in &self.coeffs {
            out.set(*a, *b, x.trace()).expect("matching bidegree");
        }
        out
    }

    /// The scalar form of a rank-one end form.
    pub fn to_scalar(&self) -> Result<ScalarForm> {
        if self.r != 1 {
            return Err(Error::RankMismatch(self.r, 1));
        }
        Ok(self.trace())
    }

    /// `Ψ†`: same keys, each coefficient conjugate-transposed.
    pub fn matricial_adjoint(&self) -> Self {
        let mut out = self.clone();
        for x in out.coeffs.values_mut() {
            *x = x.adjoint();
        }
        out
    }

    /// `Ψ̄_h` by the index formula
    /// `Ψ̄^m_{hBĀj} = (−1)^{pq} h_{jl̄} conj(Ψ^l_{AB̄k}) h^{mk̄}`.
    pub fn hermitian_conjugate(&self, h: &MetricField) -> Result<Self> {
        h.check(&self.chart, self.r)?;
        let r = self.r;
        let rr = r * r;
        let sign = Sign::parity(self.p * self.q).to_f64();
        let hd = h.components().data();
        let gd = h.inverse_components().data();
        let mut out = self.empty_like(self.q, self.p);
        for ((a, b), x) in &self.coeffs {
            let xd = x.data();
            let mut data = vec![C64::new(0.0, 0.0); xd.len()];
            for pt in 0..x.num_points() {
                let base = pt * rr;
                for m in 0..r {
                    for j in 0..r {
                        let mut s = C64::new(0.0, 0.0);
                        for l in 0..r {
                            let hjl = hd[base + j + r * l];
                            for k in 0..r {
                                s += hjl * xd[base + l + r * k].conj() * gd[base + m + r * k];
                            }
                        }
                        data[base + m + r * j] = s * sign;
                    }
                }
            }
            out.coeffs
                .insert((*b, *a), MatrixField::new(self.chart.clone(), r, data)?);
        }
        Ok(out)
    }

    /// `Ψ̄_h` through the matrix identity `(−1)^{pq} M⁻¹ Ψ_{AB̄}† M` at `(B, A)`.
    pub fn hermitian_conjugate_matrix(&self, h: &MetricField) -> Result<Self> {
        h.check(&self.chart, self.r)?;
        let sign = C64::new(Sign::parity(self.p * self.q).to_f64(), 0.0);
        let mut out = self.empty_like(self.q, self.p);
        for ((a, b), x) in &self.coeffs {
            out.coeffs.insert((*b, *a), h.adjoint_of(x)?.scale(sign));
        }
        Ok(out)
    }

    /// The Hodge star acting on basis monomials,
    /// `*(θ^Aθ̄^B) = (−1)^{pq} s_{BA} θ^{B'}θ̄^{A'}`, linear in coefficients.
    pub fn hodge_star(&self) -> Self {
        let n = self.n();
        let sign = Sign::parity(self.p * self.q);
        let mut out = self.empty_like(n - self.q, n - self.p);
        for ((a, b), x) in &self.coeffs {
            let (key, s) = bar_star_basis(*b, *a);
            out.coeffs.insert(key, x.scale((s * sign).to_c64()));
        }
        out
    }

    /// `*̄_h Ψ = *(Ψ̄_h)`.
    pub fn bar_star_h(&self, h: &MetricField) -> Result<Self> {
        Ok(self.hermitian_conjugate(h)?.hodge_star())
    }

    /// `Σ Ψ†_{AB̄} ⊗ *̄(θ^A ∧ θ̄^B)`, the flat-metric form of `*̄_h`.
    pub fn bar_star_flat(&self) -> Self {
        let n = self.n();
        let mut out = self.empty_like(n - self.p, n - self.q);
        for ((a, b), x) in &self.coeffs {
            let (key, s) = bar_star_basis(*a, *b);
            out.coeffs.insert(key, x.adjoint().scale(s.to_c64()));
        }
        out
    }

    /// Exterior `∂Ψ = Σ_α θ^α ∧ ∂_α Ψ`.
    pub fn d_holo(&self) -> Result<Self> {
        self.exterior(true)
    }

    /// Exterior `∂̄Ψ = Σ_α θ̄^α ∧ ∂_ᾱ Ψ`.
    pub fn d_anti(&self) -> Result<Self> {
        self.exterior(false)
    }

    fn exterior(&self, holo: bool) -> Result<Self> {
        let n = self.n();
        let (p, q) = if holo { (self.p + 1, self.q) } else { (self.p, self.q + 1) };
        let mut out = self.empty_like(p, q);
        let empty = MultiIndex::empty(n);
        for ((a, b), x) in &self.coeffs {
            for alpha in 1..=n {
                let e = MultiIndex::single(n, alpha)?;
                let hit = if holo {
                    monomial_wedge(e, empty, *a, *b)
                } else {
                    monomial_wedge(empty, e, *a, *b)
                };
                if let Some((key, s)) = hit {
                    let d = if holo { x.d_holo(alpha)? } else { x.d_anti(alpha)? };
                    out.accumulate(key, d.scale(C64::new(s.to_f64(), 0.0)));
                }
            }
        }
        Ok(out)
    }

    /// Local product `(Φ,Ψ) = Σ tr(Φ_{AB̄} M⁻¹ Ψ_{AB̄}† M)`.
    pub fn trace_inner_local(&self, other: &Self, h: &MetricField) -> Result<ScalarField> {
        self.check_same(other)?;
        h.check(&self.chart, self.r)?;
        let mut acc = ScalarField::zeros(&self.chart);
        for (k, x) in &self.coeffs {
            if let Some(y) = other.coeffs.get(k) {
                acc = acc.add(&trace_product(x, &h.adjoint_of(y)?)?)?;
            }
        }
        Ok(acc)
    }

    /// The same product through raised indices,
    /// `(−1)^{pq} Σ tr(Φ_{AB̄} Ψ̄_h^{AB̄})` with `Ψ̄_h^{AB̄} = Ψ̄_{hBĀ}`.
    pub fn trace_inner_local_physics(&self, other: &Self, h: &MetricField) -> Result<ScalarField> {
        self.check_same(other)?;
        let bar = other.hermitian_conjugate(h)?;
        let sign = C64::new(Sign::parity(self.p * self.q).to_f64(), 0.0);
        let mut acc = ScalarField::zeros(&self.chart);
        for ((a, b), x) in &self.coeffs {
            if let Some(y) = bar.coeffs.get(&(*b, *a)) {
                acc = acc.add(&trace_product(x, y)?)?;
            }
        }
        Ok(acc.scale(sign))
    }

    /// `⟨Φ,Ψ⟩ = ∫ tr(Φ ∧ *̄_h Ψ)`, checked against the local and raised-index
    /// routes. Different bidegrees are orthogonal.
    pub fn trace_inner_global(&self, other: &Self, h: &MetricField) -> Result<C64> {
        self.check_compatible(other)?;
        if self.bidegree() != other.bidegree() {
            return Ok(C64::new(0.0, 0.0));
        }
        let local = self.trace_inner_local(other, h)?.integrate();
        let scale = if std::ptr::eq(self, other) {
            local.norm()
        } else {
            let a = self.trace_inner_local(self, h)?.integrate().norm();
            let b = other.trace_inner_local(other, h)?.integrate().norm();
            (a * b).sqrt()
        };
        let wedge = self.trace_inner_wedge(other, h)?;
        check_routes("trace inner product (wedge route)", wedge, local, scale)?;
        let physics = self.trace_inner_local_physics(other, h)?.integrate();
        check_routes("trace inner product (raised-index route)", physics, local, scale)?;
        Ok(local)
    }

    /// `∫ tr(Φ ∧ *̄_h Ψ)` alone, without the local cross-check.
    pub fn trace_inner_wedge(&self, other: &Self, h: &MetricField) -> Result<C64> {
        self.check_same(other)?;
        if self.p > self.n() || self.q > self.n() {
            // Above the top degree every form vanishes.
            return Ok(C64::new(0.0, 0.0));
        }
        self.wedge(&other.bar_star_h(h)?)?.trace().integrate_top()
    }

    /// `‖Ψ‖²` under the metric `h`.
    pub fn norm_sq(&self, h: &MetricField) -> Result<f64> {
        Ok(self.trace_inner_global(self, h)?.re)
    }

    /// `Σ ∫ tr(Ψ_{AB̄} Ψ_{AB̄}†) dvol`, the flat-metric norm without route checks.
    pub fn frobenius_norm_sq(&self) -> f64 {
        compensated_sum(self.coeffs.values().map(MatrixField::frobenius_norm_sq))
    }

    /// Largest coefficient entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(MatrixField::max_abs).fold(0.0, f64::max)
    }
}
