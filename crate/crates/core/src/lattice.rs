//! Flat Kähler tori sampled on uniform periodic grids.
//!
//! A chart of complex dimension `n` has `2n` real axes ordered
//! `(x¹, y¹, x², y², ...)`. Both real axes of the complex axis `α` use the
//! resolution `N_α` and carry their own period. Grid values are stored in
//! row-major order with `x¹` slowest; a grid may carry several complex
//! components per point, stored contiguously.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Serializable description of a chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub n: usize,
    /// Grid size `N_α` per complex axis.
    pub resolution: Vec<usize>,
    /// `[L_x, L_y]` per complex axis.
    pub periods: Vec<[f64; 2]>,
}

/// A flat torus `ℂⁿ / Λ` with the standard metric `g_{αβ̄} = δ_{αβ̄}`.
pub struct LatticeChart {
    spec: ChartSpec,
    dims: Vec<usize>,
    ffts: Vec<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl fmt::Debug for LatticeChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeChart")
            .field("n", &self.spec.n)
            .field("resolution", &self.spec.resolution)
            .field("periods", &self.spec.periods)
            .finish()
    }
}

impl PartialEq for LatticeChart {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl LatticeChart {
    pub fn new(spec: ChartSpec) -> Result<Arc<Self>> {
        let n = spec.n;
        if n == 0 || n > 4 {
            return Err(Error::InvalidChart(format!(
                "complex dimension must be in 1..=4, got {n}"
            )));
        }
        if spec.resolution.len() != n || spec.periods.len() != n {
            return Err(Error::InvalidChart(format!(
                "expected {n} resolutions and periods, got {} and {}",
                spec.resolution.len(),
                spec.periods.len()
            )));
        }
        for &r in &spec.resolution {
            if r < 4 || r % 2 != 0 {
                return Err(Error::InvalidChart(format!(
                    "resolution {r} must be even and at least 4"
                )));
            }
        }
        for p in spec.periods.iter().flatten() {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidChart(format!("period {p} must be positive")));
            }
        }
        let dims: Vec<usize> = spec.resolution.iter().flat_map(|&r| [r, r]).collect();
        let mut planner = FftPlanner::new();
        let ffts = spec
            .resolution
            .iter()
            .map(|&r| (planner.plan_fft_forward(r), planner.plan_fft_inverse(r)))
            .collect();
        Ok(Arc::new(Self { spec, dims, ffts }))
    }

    /// Chart with the same resolution and period on every real axis.
    pub fn uniform(n: usize, resolution: usize, period: f64) -> Result<Arc<Self>> {
        Self::new(ChartSpec {
            n,
            resolution: vec![resolution; n],
            periods: vec![[period, period]; n],
        })
    }

    pub fn spec(&self) -> &ChartSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Grid sizes of the `2n` real axes.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_points(&self) -> usize {
        self.dims.iter().product()
    }

    /// Period of real axis `k` (`2α` is `x^{α+1}`, `2α+1` is `y^{α+1}`).
    pub fn real_period(&self, k: usize) -> f64 {
        self.spec.periods[k / 2][k % 2]
    }

    pub fn volume(&self) -> f64 {
        self.spec.periods.iter().map(|p| p[0] * p[1]).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.num_points() as f64
    }

    /// Real coordinates of a grid point.
    pub fn coords(&self, point: usize) -> Vec<f64> {
        let mut rest = point;
        let mut out = vec![0.0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            let d = self.dims[k];
            out[k] = (rest % d) as f64 * self.real_period(k) / d as f64;
            rest /= d;
        }
        out
    }

    pub fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }

    pub fn check_axis(&self, alpha: usize) -> Result<()> {
        if alpha == 0 || alpha > self.n() {
            return Err(Error::AxisOutOfRange {
                axis: alpha,
                n: self.n(),
            });
        }
        Ok(())
    }

    /// Applies `f` to every line of `data` along real axis `k`.
    fn for_each_line(&self, data: &mut [C64], ncomp: usize, k: usize, mut f: impl FnMut(&mut [C64])) {
        let d = self.dims[k];
        let inner: usize = self.dims[k + 1..].iter().product::<usize>() * ncomp;
        let outer: usize = self.dims[..k].iter().product();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for o in 0..outer {
            let block = o * d * inner;
            for i in 0..inner {
                let base = block + i;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = data[base + j * inner];
                }
                f(&mut buf);
                for (j, b) in buf.iter().enumerate() {
                    data[base + j * inner] = *b;
                }
            }
        }
    }

    /// Spectral derivative along real axis `k`; the Nyquist mode is dropped.
    pub fn real_derivative(&self, data: &[C64], ncomp: usize, k: usize) -> Vec<C64> {
        let d = self.dims[k];
        let (fwd, inv) = self.ffts[k / 2].clone();
        let scale = 2.0 * std::f64::consts::PI / self.real_period(k) / d as f64;
        let factors: Vec<C64> = (0..d)
            .map(|j| {
                let m = if j < d / 2 {
                    j as f64
                } else if j == d / 2 {
                    0.0
                } else {
                    j as f64 - d as f64
                };
                I * (m * scale)
            })
            .collect();
        let mut out = data.to_vec();
        self.for_each_line(&mut out, ncomp, k, |line| {
            fwd.process(line);
            for (v, f) in line.iter_mut().zip(&factors) {
                *v *= f;
            }
            inv.process(line);
        });
        out
    }

    /// `∂/∂z^α = (∂_x − i∂_y)/2` on a multi-component grid; `alpha` is 1-based.
    pub fn d_holo_raw(&self, data: &[C64], ncomp: usize, alpha: usize) -> Vec<C64> {
        self.wirtinger(data, ncomp, alpha, -1.0)
    }

    /// `∂/∂z̄^α = (∂_x + i∂_y)/2` on a multi-component grid; `alpha` is 1-based.
    pub fn d_anti_raw(&self, data: &[C64], ncomp: usize, alpha: usize) -> Vec<C64> {
        self.wirtinger(data, ncomp, alpha, 1.0)
    }

    fn wirtinger(&self, data: &[C64], ncomp: usize, alpha: usize, s: f64) -> Vec<C64> {
        let dx = self.real_derivative(data, ncomp, 2 * (alpha - 1));
        let dy = self.real_derivative(data, ncomp, 2 * (alpha - 1) + 1);
        dx.iter()
            .zip(&dy)
            .map(|(a, b)| (a + I * s * b) * 0.5)
            .collect()
    }

    /// Uniform quadrature of a single-component grid.
    pub fn integrate_raw(&self, data: &[C64]) -> C64 {
        let re = compensated_sum(data.iter().map(|z| z.re));
        let im = compensated_sum(data.iter().map(|z| z.im));
        C64::new(re, im) * self.cell_volume()
    }

    /// Samples `Σ_k c_k exp(2πi Σ_j k_j x_j / L_j)` on the grid by inverse FFT.
    /// Modes must satisfy `|k_j| < N_j / 2`.
    pub fn synthesize(&self, modes: &[(Vec<i64>, C64)]) -> Result<Vec<C64>> {
        let mut grid = vec![C64::new(0.0, 0.0); self.num_points()];
        for (k, c) in modes {
            if k.len() != self.dims.len() {
                return Err(Error::InvalidChart(format!(
                    "mode {k:?} does not have {} entries",
                    self.dims.len()
                )));
            }
            let mut idx = 0usize;
            for (j, &kj) in k.iter().enumerate() {
                let d = self.dims[j] as i64;
                if 2 * kj.abs() >= d {
                    return Err(Error::BandTooLarge {
                        band: kj.unsigned_abs() as usize,
                        resolution: d as usize,
                    });
                }
                idx = idx * d as usize + kj.rem_euclid(d) as usize;
            }
            grid[idx] += c;
        }
        for k in 0..self.dims.len() {
            let inv = self.ffts[k / 2].1.clone();
            self.for_each_line(&mut grid, 1, k, |line| inv.process(line));
        }
        Ok(grid)
    }
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Fourier coefficients of the seeded random field, independent of the grid
/// resolution: every integer vector with `|k_j| <= band` on the `2n` real
/// axes, amplitude decaying like `1/(1+|k|²)`.
pub fn random_modes(n: usize, seed: u64, band: usize) -> Vec<(Vec<i64>, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = band as i64;
    let axes = 2 * n;
    let width = (2 * b + 1) as usize;
    let total = width.pow(axes as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut k = vec![0i64; axes];
        for j in (0..axes).rev() {
            k[j] = (rest % width) as i64 - b;
            rest /= width;
        }
        let k2: i64 = k.iter().map(|x| x * x).sum();
        let amp = 1.0 / (1.0 + k2 as f64);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        out.push((k, C64::new(re, im) * amp));
    }
    out
}

/// A complex function sampled on a chart.
#[derive(Clone, Debug)]
pub struct ScalarField {
    chart: Arc<LatticeChart>,
    data: Vec<C64>,
}

impl ScalarField {
    pub fn new(chart: Arc<LatticeChart>, data: Vec<C64>) -> Result<Self> {
        if data.len() != chart.num_points() {
            return Err(Error::InvalidChart(format!(
                "grid has {} values, chart has {} points",
                data.len(),
                chart.num_points()
            )));
        }
        Ok(Self { chart, data })
    }

    pub fn zeros(chart: &Arc<LatticeChart>) -> Self {
        Self::constant(chart, C64::new(0.0, 0.0))
    }

    pub fn constant(chart: &Arc<LatticeChart>, value: C64) -> Self {
        Self {
            chart: chart.clone(),
            data: vec![value; chart.num_points()],
        }
    }

    /// Samples `f` at the real coordinates of every grid point.
    pub fn from_fn(chart: &Arc<LatticeChart>, f: impl Fn(&[f64]) -> C64) -> Self {
        let data = (0..chart.num_points()).map(|p| f(&chart.coords(p))).collect();
        Self {
            chart: chart.clone(),
            data,
        }
    }

    /// Deterministic band-limited random field. The same seed and band give
    /// the same continuous field on every resolution.
    pub fn random(chart: &Arc<LatticeChart>, seed: u64, band: usize) -> Result<Self> {
        let nmin = *chart.spec.resolution.iter().min().unwrap();
        if 2 * band >= nmin {
            return Err(Error::BandTooLarge {
                band,
                resolution: nmin,
            });
        }
        let modes = random_modes(chart.n(), seed, band);
        Ok(Self {
            chart: chart.clone(),
            data: chart.synthesize(&modes)?,
        })
    }

    /// Real part of [`ScalarField::random`].
    pub fn random_real(chart: &Arc<LatticeChart>, seed: u64, band: usize) -> Result<Self> {
        Ok(Self::random(chart, seed, band)?.map(|z| C64::new(z.re, 0.0)))
    }

    pub fn chart(&self) -> &Arc<LatticeChart> {
        &self.chart
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            chart: self.chart.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if !LatticeChart::same(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        Ok(Self {
            chart: self.chart.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn d_holo(&self, alpha: usize) -> Result<Self> {
        self.chart.check_axis(alpha)?;
        Ok(Self {
            chart: self.chart.clone(),
            data: self.chart.d_holo_raw(&self.data, 1, alpha),
        })
    }

    pub fn d_anti(&self, alpha: usize) -> Result<Self> {
        self.chart.check_axis(alpha)?;
        Ok(Self {
            chart: self.chart.clone(),
            data: self.chart.d_anti_raw(&self.data, 1, alpha),
        })
    }

    /// `∫ f dvol` with `dvol = ω^n/n!`.
    pub fn integrate(&self) -> C64 {
        self.chart.integrate_raw(&self.data)
    }

    /// `(∫ |f|² dvol)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let s = compensated_sum(self.data.iter().map(|z| z.norm_sqr()));
        (s * self.chart.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// The `k = 0` coefficient of a mode list.
pub fn zero_mode(modes: &[(Vec<i64>, C64)]) -> C64 {
    modes
        .iter()
        .filter(|(k, _)| k.iter().all(|&x| x == 0))
        .map(|(_, c)| *c)
        .sum()
}
