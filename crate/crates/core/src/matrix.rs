//! Fields of `r×r` complex matrices on a chart.
//!
//! Each point stores its matrix contiguously in column-major order, so a
//! point slice can be viewed directly as a nalgebra matrix.

use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lattice::{compensated_sum, LatticeChart, ScalarField, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `exp(S)` for hermitian `S`, through its eigendecomposition.
pub fn expm_hermitian(s: &DMatrix<C64>) -> DMatrix<C64> {
    hermitian_fn(s, f64::exp)
}

/// The positive square root of a hermitian positive-definite matrix.
pub fn sqrt_hermitian(m: &DMatrix<C64>) -> DMatrix<C64> {
    hermitian_fn(m, f64::sqrt)
}

/// Applies `f` to the eigenvalues of the hermitian part of `m`.
pub fn hermitian_fn(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(f(l), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `exp(X)` for a general small matrix by scaling and squaring with a
/// Taylor core.
pub fn expm(x: &DMatrix<C64>) -> DMatrix<C64> {
    let norm = x.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let y = x / C64::new(2f64.powi(squarings), 0.0);
    let r = x.nrows();
    let mut term = DMatrix::<C64>::identity(r, r);
    let mut out = term.clone();
    for k in 1..=20 {
        term = &term * &y / C64::new(k as f64, 0.0);
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

/// A field of `r×r` complex matrices.
#[derive(Clone, Debug)]
pub struct MatrixField {
    chart: Arc<LatticeChart>,
    r: usize,
    data: Vec<C64>,
}

impl MatrixField {
    pub fn new(chart: Arc<LatticeChart>, r: usize, data: Vec<C64>) -> Result<Self> {
        if r == 0 || data.len() != chart.num_points() * r * r {
            return Err(Error::InvalidChart(format!(
                "matrix grid of length {} does not fit rank {r} on {} points",
                data.len(),
                chart.num_points()
            )));
        }
        Ok(Self { chart, r, data })
    }

    pub fn zeros(chart: &Arc<LatticeChart>, r: usize) -> Self {
        Self {
            chart: chart.clone(),
            r,
            data: vec![ZERO; chart.num_points() * r * r],
        }
    }

    /// The same matrix at every point.
    pub fn constant(chart: &Arc<LatticeChart>, m: &DMatrix<C64>) -> Self {
        let r = m.nrows();
        let mut data = Vec::with_capacity(chart.num_points() * r * r);
        for _ in 0..chart.num_points() {
            data.extend_from_slice(m.as_slice());
        }
        Self {
            chart: chart.clone(),
            r,
            data,
        }
    }

    pub fn identity(chart: &Arc<LatticeChart>, r: usize) -> Self {
        Self::constant(chart, &DMatrix::identity(r, r))
    }

    /// `f · I`.
    pub fn scalar(f: &ScalarField, r: usize) -> Self {
        let mut out = Self::zeros(f.chart(), r);
        let rr = r * r;
        for (p, v) in f.data().iter().enumerate() {
            for i in 0..r {
                out.data[p * rr + i * r + i] = *v;
            }
        }
        out
    }

    /// Assembles a field from per-entry scalar fields, `entries[i + r*j]`
    /// being the `(i, j)` entry.
    pub fn from_entries(entries: &[ScalarField], r: usize) -> Result<Self> {
        if entries.len() != r * r {
            return Err(Error::RankMismatch(entries.len(), r * r));
        }
        let chart = entries[0].chart().clone();
        let mut out = Self::zeros(&chart, r);
        let rr = r * r;
        for (e, f) in entries.iter().enumerate() {
            if !LatticeChart::same(&chart, f.chart()) {
                return Err(Error::ChartMismatch);
            }
            for (p, v) in f.data().iter().enumerate() {
                out.data[p * rr + e] = *v;
            }
        }
        Ok(out)
    }

    /// Entry `(i, j)` as a scalar field.
    pub fn entry(&self, i: usize, j: usize) -> ScalarField {
        let rr = self.r * self.r;
        let k = i + self.r * j;
        let data = (0..self.num_points()).map(|p| self.data[p * rr + k]).collect();
        ScalarField::new(self.chart.clone(), data).expect("shape")
    }

    /// Seeded band-limited random field; entry `e` uses seed `seed + e`.
    pub fn random(chart: &Arc<LatticeChart>, r: usize, seed: u64, band: usize) -> Result<Self> {
        let entries: Vec<ScalarField> = (0..r * r)
            .map(|e| ScalarField::random(chart, seed.wrapping_add(e as u64), band))
            .collect::<Result<_>>()?;
        Self::from_entries(&entries, r)
    }

    /// Seeded band-limited hermitian random field.
    pub fn random_hermitian(chart: &Arc<LatticeChart>, r: usize, seed: u64, band: usize) -> Result<Self> {
        let m = Self::random(chart, r, seed, band)?;
        Ok(m.add(&m.adjoint())?.scale(C64::new(0.5, 0.0)))
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn num_points(&self) -> usize {
        self.chart.num_points()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Matrix at point `p` as a borrowed view.
    pub fn at(&self, p: usize) -> DMatrixView<'_, C64> {
        let rr = self.r * self.r;
        DMatrixView::from_slice(&self.data[p * rr..(p + 1) * rr], self.r, self.r)
    }

    /// Matrix at point `p` as an owned matrix.
    pub fn get(&self, p: usize) -> DMatrix<C64> {
        self.at(p).into_owned()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !LatticeChart::same(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        if self.r != other.r {
            return Err(Error::RankMismatch(self.r, other.r));
        }
        Ok(())
    }

    /// Builds a field point by point.
    pub fn from_points(chart: &Arc<LatticeChart>, r: usize, f: impl Fn(usize) -> DMatrix<C64>) -> Self {
        let mut data = Vec::with_capacity(chart.num_points() * r * r);
        for p in 0..chart.num_points() {
            data.extend_from_slice(f(p).as_slice());
        }
        Self {
            chart: chart.clone(),
            r,
            data,
        }
    }

    /// Applies a per-point matrix map.
    pub fn map_points(&self, f: impl Fn(DMatrixView<'_, C64>) -> DMatrix<C64>) -> Self {
        Self::from_points(&self.chart, self.r, |p| f(self.at(p)))
    }

    pub fn zip_entries(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            chart: self.chart.clone(),
            r: self.r,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_entries(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_entries(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            chart: self.chart.clone(),
            r: self.r,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Multiplies each point's matrix by the value of `f` there.
    pub fn mul_scalar_field(&self, f: &ScalarField) -> Result<Self> {
        if !LatticeChart::same(&self.chart, f.chart()) {
            return Err(Error::ChartMismatch);
        }
        let rr = self.r * self.r;
        let mut out = self.clone();
        for (p, v) in f.data().iter().enumerate() {
            for z in &mut out.data[p * rr..(p + 1) * rr] {
                *z *= v;
            }
        }
        Ok(out)
    }

    /// Pointwise `α·self·other + β·acc`, the workhorse of every product.
    fn gemm_into(&self, other: &Self, alpha: C64, acc: &mut Self, beta: C64) {
        let r = self.r;
        let rr = r * r;
        for p in 0..self.num_points() {
            let a = self.at(p);
            let b = other.at(p);
            let mut c = DMatrixViewMut::from_slice(&mut acc.data[p * rr..(p + 1) * rr], r, r);
            c.gemm(alpha, &a, &b, beta);
        }
    }

    /// Pointwise matrix product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zeros(&self.chart, self.r);
        self.gemm_into(other, ONE, &mut out, ZERO);
        Ok(out)
    }

    /// `acc += s · self · other` pointwise.
    pub fn mul_acc(&self, other: &Self, s: C64, acc: &mut Self) -> Result<()> {
        self.check(other)?;
        self.check(acc)?;
        self.gemm_into(other, s, acc, ONE);
        Ok(())
    }

    /// Pointwise `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let mut out = self.mul(other)?;
        other.mul_acc(self, -ONE, &mut out)?;
        Ok(out)
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let r = self.r;
        let rr = r * r;
        let mut data = vec![ZERO; self.data.len()];
        for p in 0..self.num_points() {
            let base = p * rr;
            for i in 0..r {
                for j in 0..r {
                    data[base + j + r * i] = self.data[base + i + r * j].conj();
                }
            }
        }
        Self {
            chart: self.chart.clone(),
            r,
            data,
        }
    }

    /// Pointwise transpose.
    pub fn transpose(&self) -> Self {
        self.adjoint().map_entries(|z| z.conj())
    }

    pub fn map_entries(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            chart: self.chart.clone(),
            r: self.r,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn trace(&self) -> ScalarField {
        let r = self.r;
        let rr = r * r;
        let data = (0..self.num_points())
            .map(|p| (0..r).map(|i| self.data[p * rr + i + r * i]).sum())
            .collect();
        ScalarField::new(self.chart.clone(), data).expect("shape")
    }

    /// `∂/∂z^α` entrywise.
    pub fn d_holo(&self, alpha: usize) -> Result<Self> {
        self.chart.check_axis(alpha)?;
        Ok(Self {
            chart: self.chart.clone(),
            r: self.r,
            data: self.chart.d_holo_raw(&self.data, self.r * self.r, alpha),
        })
    }

    /// `∂/∂z̄^α` entrywise.
    pub fn d_anti(&self, alpha: usize) -> Result<Self> {
        self.chart.check_axis(alpha)?;
        Ok(Self {
            chart: self.chart.clone(),
            r: self.r,
            data: self.chart.d_anti_raw(&self.data, self.r * self.r, alpha),
        })
    }

    /// Derivative along real axis `k` entrywise.
    pub fn d_real(&self, k: usize) -> Self {
        Self {
            chart: self.chart.clone(),
            r: self.r,
            data: self.chart.real_derivative(&self.data, self.r * self.r, k),
        }
    }

    /// `∫ tr(X X†) dvol`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        compensated_sum(self.data.iter().map(|z| z.norm_sqr())) * self.chart.cell_volume()
    }

    /// Pointwise `tr(X X†)`.
    pub fn frobenius_density(&self) -> ScalarField {
        let rr = self.r * self.r;
        let data = self
            .data
            .chunks(rr)
            .map(|b| C64::new(b.iter().map(|z| z.norm_sqr()).sum(), 0.0))
            .collect();
        ScalarField::new(self.chart.clone(), data).expect("shape")
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Pointwise inverse; fails at a singular point.
    pub fn inverse(&self) -> Result<Self> {
        let mut data = Vec::with_capacity(self.data.len());
        for p in 0..self.num_points() {
            let inv = self.get(p).try_inverse().ok_or_else(|| Error::InvalidMetric {
                point: p,
                reason: "matrix is singular".into(),
            })?;
            data.extend_from_slice(inv.as_slice());
        }
        Ok(Self {
            chart: self.chart.clone(),
            r: self.r,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_matches_eigen_route() {
        let s = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.3, 0.0), C64::new(0.1, -0.7), C64::new(0.1, 0.7), C64::new(-1.2, 0.0)],
        );
        let a = expm(&s);
        let b = expm_hermitian(&s);
        assert!((a - b).norm() < 1e-13);
        let m = expm_hermitian(&s);
        let r = sqrt_hermitian(&m);
        assert!((&r * &r - m).norm() < 1e-13);
    }

    #[test]
    fn products_and_adjoints() {
        let c = LatticeChart::uniform(1, 4, 1.0).unwrap();
        let a = MatrixField::random(&c, 3, 1, 1).unwrap();
        let b = MatrixField::random(&c, 3, 9, 1).unwrap();
        let ab = a.mul(&b).unwrap();
        for p in 0..c.num_points() {
            assert!((ab.get(p) - a.get(p) * b.get(p)).norm() < 1e-13);
        }
        let lhs = ab.adjoint();
        let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-13);
        assert!(a.commutator(&a).unwrap().max_abs() < 1e-14);
        let t = a.commutator(&b).unwrap().trace();
        assert!(t.max_abs() < 1e-13);
        assert_eq!(a.entry(1, 2).data()[3], a.get(3)[(1, 2)]);
    }
}
