//! Fractional Brownian motion: covariance arithmetic, exact path sampling
//! and the discrete inner-product quantities used by the weighted quadratic
//! variation experiments.
//!
//! Uniform grids are sampled by circulant embedding of the fractional
//! Gaussian noise covariance, arbitrary grids by a dense Cholesky factor of
//! the level covariance. At `H = 1/2` both reduce to independent increments,
//! which are drawn directly.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::mc::replica_rng;

/// Hurst index, `0 < h < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 1.0 {
            Ok(Hurst(h))
        } else {
            Err(Error::Parameter(format!("Hurst index must lie in (0,1), got {h}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True for standard Brownian motion.
    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        Hurst::new(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

/// Ordered sample times in `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("time grid must be nonempty".into()));
        }
        if points.iter().any(|t| !t.is_finite()) || points[0] < 0.0 {
            return Err(Error::Parameter("time grid points must be finite and nonnegative".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("time grid must be strictly increasing".into()));
        }
        Ok(TimeGrid { points })
    }

    /// `{0, T/n, 2T/n, ..., T}`.
    pub fn uniform(n: usize, horizon: f64) -> Result<Self> {
        if n == 0 || !(horizon > 0.0) {
            return Err(Error::Parameter(format!(
                "uniform grid needs n >= 1 and a positive horizon (n={n}, T={horizon})"
            )));
        }
        let points = (0..=n).map(|k| k as f64 / n as f64 * horizon).collect();
        TimeGrid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.points.last().expect("nonempty grid")
    }

    /// Step `dt` if the grid is `{0, dt, ..., N dt}` or `{dt, ..., N dt}`.
    pub fn uniform_step(&self) -> Option<f64> {
        let pts = &self.points;
        let leading_zero = pts[0] == 0.0;
        let steps = if leading_zero { pts.len() - 1 } else { pts.len() };
        if steps == 0 {
            return None;
        }
        let dt = self.horizon() / steps as f64;
        let offset = if leading_zero { 0 } else { 1 };
        let tol = 1e-12 * self.horizon();
        pts.iter()
            .enumerate()
            .all(|(i, &t)| (t - (i + offset) as f64 * dt).abs() <= tol)
            .then_some(dt)
    }
}

/// `E[B_s B_t] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2`; `min(s,t)` at `H = 1/2`.
pub fn fbm_covariance(s: f64, t: f64, h: Hurst) -> f64 {
    debug_assert!(s >= 0.0 && t >= 0.0);
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    if h.is_brownian() {
        return lo;
    }
    let two_h = 2.0 * h.value();
    0.5 * (hi.powf(two_h) + lo.powf(two_h) - (hi - lo).powf(two_h))
}

/// Inner product `<1_[a,b], 1_[c,d]>` in the reproducing space of fBm.
pub fn indicator_inner(a: f64, b: f64, c: f64, d: f64, h: Hurst) -> Result<f64> {
    if a < 0.0 || c < 0.0 {
        return Err(Error::Parameter(format!("negative interval endpoint ({a}, {c})")));
    }
    if a > b || c > d {
        return Err(Error::Parameter(format!("malformed intervals [{a},{b}], [{c},{d}]")));
    }
    Ok(fbm_covariance(b, d, h) - fbm_covariance(b, c, h) - fbm_covariance(a, d, h)
        + fbm_covariance(a, c, h))
}

/// Generalized binomial coefficient `binom(a, j)`.
fn binom_real(a: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a - i as f64) / (i + 1) as f64)
}

/// Unit-lag increment correlation `rho_H(p) = (|p+1|^{2H} + |p-1|^{2H} - 2|p|^{2H}) / 2`.
pub fn rho_h(p: i64, h: Hurst) -> f64 {
    let p = p.unsigned_abs();
    if p == 0 {
        return 1.0;
    }
    if h.is_brownian() {
        return 0.0;
    }
    let two_h = 2.0 * h.value();
    let x = p as f64;
    if p < 32 {
        return 0.5 * ((x + 1.0).powf(two_h) + (x - 1.0).powf(two_h) - 2.0 * x.powf(two_h));
    }
    // Even part of the binomial series of (1 ± 1/p)^{2H}; avoids cancellation.
    let inv2 = 1.0 / (x * x);
    let mut term_pow = 1.0;
    let mut sum = 0.0;
    for k in 1..=8u32 {
        term_pow *= inv2;
        sum += binom_real(two_h, 2 * k) * term_pow;
    }
    x.powf(two_h) * sum
}

/// `<delta_j, delta_k>` for `delta_k = 1_[k/n, (k+1)/n]`.
pub fn increment_inner(j: usize, k: usize, n: usize, h: Hurst) -> f64 {
    (n as f64).powf(-2.0 * h.value()) * rho_h(j as i64 - k as i64, h)
}

/// `<1_[0,t], delta_k>` for `delta_k = 1_[k/n, (k+1)/n]`, evaluated in the
/// scale-free form to avoid cancellation on fine grids.
pub fn indicator_increment_inner(t: f64, k: usize, n: usize, h: Hurst) -> f64 {
    let nf = n as f64;
    if h.is_brownian() {
        let lo = k as f64 / nf;
        let hi = (k + 1) as f64 / nf;
        return (t.min(hi) - lo).max(0.0);
    }
    let two_h = 2.0 * h.value();
    let x = nf * t;
    let k = k as f64;
    nf.powf(-two_h)
        * 0.5
        * ((k + 1.0).powf(two_h) - k.powf(two_h) - (x - k - 1.0).abs().powf(two_h)
            + (x - k).abs().powf(two_h))
}

/// Closed form of `int_0^1 int_0^t s^n t^m (t-s)^{2H-2} ds dt`
/// `= Gamma(n+1) Gamma(2H-1) / (Gamma(n+2H) (n+m+2H))`, valid for `H > 1/2`.
pub fn rho_nm(n: u32, m: u32, h: Hurst) -> Result<f64> {
    let hv = h.value();
    if hv <= 0.5 {
        return Err(Error::Domain(format!("rho_nm requires H > 1/2, got {hv}")));
    }
    let n = n as f64;
    let m = m as f64;
    let log_ratio = ln_gamma(n + 1.0) + ln_gamma(2.0 * hv - 1.0) - ln_gamma(n + 2.0 * hv);
    Ok(log_ratio.exp() / (n + m + 2.0 * hv))
}

/// Which algorithm produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    IndependentIncrements,
    Circulant,
    Cholesky,
}

/// Diagnostics recorded while preparing a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingDiagnostics {
    pub method: SamplingMethod,
    /// Number of slightly negative circulant eigenvalues clipped to zero.
    pub clipped_eigenvalues: usize,
    /// Circulant embedding was rejected and Cholesky used instead.
    pub circulant_fallback: bool,
    /// Diagonal jitter was needed for the Cholesky factorization.
    pub jitter_applied: bool,
}

/// One realized fBm path on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub hurst: Hurst,
    pub seed: u64,
    pub replica: u64,
    pub diagnostics: Option<SamplingDiagnostics>,
}

impl FbmPath {
    /// Wrap externally supplied values (forced paths in tests, replays).
    pub fn from_values(grid: TimeGrid, values: Vec<f64>, hurst: Hurst) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Contract(format!(
                "grid has {} points but {} values were supplied",
                grid.len(),
                values.len()
            )));
        }
        Ok(FbmPath { grid, values, hurst, seed: 0, replica: 0, diagnostics: None })
    }

    /// Keep every `step`-th point, starting from the first.
    pub fn subsample(&self, step: usize) -> Result<FbmPath> {
        if step == 0 || (self.values.len() - 1) % step != 0 {
            return Err(Error::Contract(format!(
                "subsampling step {step} does not divide {} intervals",
                self.values.len() - 1
            )));
        }
        let points = self.grid.points().iter().step_by(step).copied().collect();
        let values = self.values.iter().step_by(step).copied().collect();
        Ok(FbmPath { grid: TimeGrid::new(points)?, values, ..self.clone() })
    }

    /// Value at the last grid point.
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }
}

/// Relative magnitude below which negative circulant eigenvalues are clipped.
pub const CIRCULANT_CLIP_TOLERANCE: f64 = 1e-8;

enum Plan {
    Increments {
        scales: Vec<f64>,
    },
    Circulant {
        n_incr: usize,
        step_scale: f64,
        sqrt_eigs: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
        leading_zero: bool,
    },
    Cholesky {
        factor: Vec<f64>,
        dim: usize,
        leading_zero: bool,
    },
}

/// Reusable exact sampler for a fixed `(grid, H)`.
pub struct FbmSampler {
    grid: TimeGrid,
    hurst: Hurst,
    plan: Plan,
    diagnostics: SamplingDiagnostics,
}

/// Outcome of inspecting circulant eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum CirculantDecision {
    Accept { clipped: usize },
    Reject,
}

pub(crate) fn circulant_decision(eigs: &[f64], tolerance: f64) -> CirculantDecision {
    let max = eigs.iter().cloned().fold(0.0f64, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -tolerance * max {
        CirculantDecision::Reject
    } else {
        CirculantDecision::Accept { clipped: eigs.iter().filter(|&&l| l < 0.0).count() }
    }
}

/// Eigenvalues of the minimal circulant embedding of the unit-step
/// increment covariance for `n_incr` increments.
pub(crate) fn circulant_eigenvalues(n_incr: usize, h: Hurst) -> Vec<f64> {
    let m = 2 * n_incr;
    let mut row: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = if j <= n_incr { j } else { m - j };
            Complex64::new(rho_h(lag as i64, h), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut row);
    row.iter().map(|c| c.re).collect()
}

/// In-place lower Cholesky factorization of a row-major SPD matrix.
fn cholesky_in_place(a: &mut [f64], dim: usize) -> bool {
    for j in 0..dim {
        let mut diag = a[j * dim + j];
        for k in 0..j {
            diag -= a[j * dim + k] * a[j * dim + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return false;
        }
        let d = diag.sqrt();
        a[j * dim + j] = d;
        for i in (j + 1)..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = s / d;
        }
        for k in (j + 1)..dim {
            a[j * dim + k] = 0.0;
        }
    }
    true
}

/// Lower Cholesky factor of the covariance of `B` at the positive points of
/// `times`; retries once with diagonal jitter `1e-12 * trace / dim`.
pub(crate) fn covariance_cholesky(times: &[f64], h: Hurst) -> Result<(Vec<f64>, bool)> {
    let dim = times.len();
    let mut cov = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let c = fbm_covariance(times[i], times[j], h);
            cov[i * dim + j] = c;
            cov[j * dim + i] = c;
        }
    }
    let mut work = cov.clone();
    if cholesky_in_place(&mut work, dim) {
        return Ok((work, false));
    }
    let trace: f64 = (0..dim).map(|i| cov[i * dim + i]).sum();
    let jitter = 1e-12 * trace / dim as f64;
    for i in 0..dim {
        cov[i * dim + i] += jitter;
    }
    if cholesky_in_place(&mut cov, dim) {
        Ok((cov, true))
    } else {
        Err(Error::Generation(format!(
            "covariance matrix of dimension {dim} is not positive definite after jitter {jitter:e}"
        )))
    }
}

impl FbmSampler {
    pub fn new(grid: TimeGrid, hurst: Hurst) -> Result<Self> {
        Self::with_clip_tolerance(grid, hurst, CIRCULANT_CLIP_TOLERANCE)
    }

    /// Builds the sampler with a custom circulant clipping tolerance.
    pub fn with_clip_tolerance(grid: TimeGrid, hurst: Hurst, clip_tolerance: f64) -> Result<Self> {
        let pts = grid.points();
        let leading_zero = pts[0] == 0.0;
        let mut diagnostics = SamplingDiagnostics {
            method: SamplingMethod::IndependentIncrements,
            clipped_eigenvalues: 0,
            circulant_fallback: false,
            jitter_applied: false,
        };

        if hurst.is_brownian() {
            let mut prev = 0.0;
            let scales = pts
                .iter()
                .map(|&t| {
                    let s = (t - prev).sqrt();
                    prev = t;
                    s
                })
                .collect();
            return Ok(FbmSampler { grid, hurst, plan: Plan::Increments { scales }, diagnostics });
        }

        if let Some(dt) = grid.uniform_step() {
            let n_incr = if leading_zero { pts.len() - 1 } else { pts.len() };
            if n_incr >= 1 {
                let eigs = circulant_eigenvalues(n_incr, hurst);
                match circulant_decision(&eigs, clip_tolerance) {
                    CirculantDecision::Accept { clipped } => {
                        let m = eigs.len() as f64;
                        let sqrt_eigs = eigs.iter().map(|&l| (l.max(0.0) / m).sqrt()).collect();
                        diagnostics.method = SamplingMethod::Circulant;
                        diagnostics.clipped_eigenvalues = clipped;
                        let fft = FftPlanner::new().plan_fft_forward(2 * n_incr);
                        return Ok(FbmSampler {
                            grid,
                            hurst,
                            plan: Plan::Circulant {
                                n_incr,
                                step_scale: dt.powf(hurst.value()),
                                sqrt_eigs,
                                fft,
                                leading_zero,
                            },
                            diagnostics,
                        });
                    }
                    CirculantDecision::Reject => diagnostics.circulant_fallback = true,
                }
            }
        }

        let positive: Vec<f64> = pts.iter().copied().filter(|&t| t > 0.0).collect();
        let (factor, jitter) = covariance_cholesky(&positive, hurst)?;
        diagnostics.method = SamplingMethod::Cholesky;
        diagnostics.jitter_applied = jitter;
        Ok(FbmSampler {
            grid,
            hurst,
            plan: Plan::Cholesky { factor, dim: positive.len(), leading_zero },
            diagnostics,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn diagnostics(&self) -> SamplingDiagnostics {
        self.diagnostics
    }

    /// Draw one path's values from `rng`.
    pub fn sample_values<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.plan {
            Plan::Increments { scales } => {
                let mut acc = 0.0;
                scales
                    .iter()
                    .map(|&s| {
                        if s > 0.0 {
                            let z: f64 = rng.sample(StandardNormal);
                            acc += s * z;
                        }
                        acc
                    })
                    .collect()
            }
            Plan::Circulant { n_incr, step_scale, sqrt_eigs, fft, leading_zero } => {
                let mut buf: Vec<Complex64> = sqrt_eigs
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                let mut out = Vec::with_capacity(n_incr + 1);
                if *leading_zero {
                    out.push(0.0);
                }
                let mut acc = 0.0;
                for c in buf.iter().take(*n_incr) {
                    acc += c.re * step_scale;
                    out.push(acc);
                }
                out
            }
            Plan::Cholesky { factor, dim, leading_zero } => {
                let z: Vec<f64> = (0..*dim).map(|_| rng.sample(StandardNormal)).collect();
                let mut out = Vec::with_capacity(dim + 1);
                if *leading_zero {
                    out.push(0.0);
                }
                for i in 0..*dim {
                    let row = &factor[i * dim..i * dim + i + 1];
                    out.push(row.iter().zip(&z).map(|(l, z)| l * z).sum());
                }
                out
            }
        }
    }

    /// Draw one path per generator. Cholesky plans use a single matrix
    /// product for the whole batch; each generator consumes the same normals
    /// as [`FbmSampler::sample_values`] would.
    pub fn sample_values_batch(&self, rngs: &mut [ChaCha8Rng]) -> Vec<Vec<f64>> {
        match &self.plan {
            Plan::Cholesky { factor, dim, leading_zero } => {
                let b = rngs.len();
                let dim = *dim;
                if b == 0 {
                    return Vec::new();
                }
                let mut z = vec![0.0; dim * b];
                for (j, rng) in rngs.iter_mut().enumerate() {
                    for k in 0..dim {
                        z[k * b + j] = rng.sample(StandardNormal);
                    }
                }
                let mut out = vec![0.0; dim * b];
                // SAFETY: slices are sized dim*dim, dim*b and dim*b with row-major strides.
                unsafe {
                    matrixmultiply::dgemm(
                        dim, dim, b, 1.0,
                        factor.as_ptr(), dim as isize, 1,
                        z.as_ptr(), b as isize, 1,
                        0.0,
                        out.as_mut_ptr(), b as isize, 1,
                    );
                }
                (0..b)
                    .map(|j| {
                        let mut v = Vec::with_capacity(dim + 1);
                        if *leading_zero {
                            v.push(0.0);
                        }
                        v.extend((0..dim).map(|i| out[i * b + j]));
                        v
                    })
                    .collect()
            }
            _ => rngs.iter_mut().map(|rng| self.sample_values(rng)).collect(),
        }
    }

    /// Path for replica `replica` of master seed `seed`.
    pub fn sample(&self, seed: u64, replica: u64) -> FbmPath {
        let mut rng = replica_rng(seed, replica);
        let values = self.sample_values(&mut rng);
        FbmPath {
            grid: self.grid.clone(),
            values,
            hurst: self.hurst,
            seed,
            replica,
            diagnostics: Some(self.diagnostics),
        }
    }
}

/// Draw a single path; convenience over [`FbmSampler`].
pub fn sample_path(grid: TimeGrid, h: Hurst, seed: u64) -> Result<FbmPath> {
    Ok(FbmSampler::new(grid, h)?.sample(seed, 0))
}

/// Discrete quantities controlled by the technical lemma for `H < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma61Quantities {
    pub n: usize,
    pub q: u32,
    /// `sum_{j,k} |<delta_j, delta_k>|^q`.
    pub sum_beta_q: f64,
    /// `max_t sum_k |<1_[0,t], delta_k>|` over grid points and midpoints.
    pub sup_alpha_sum: f64,
    /// `max_{t,k} |<1_[0,t], delta_k>|` over the same evaluation set.
    pub max_alpha: f64,
}

pub fn lemma61_quantities(n: usize, q: u32, h: Hurst) -> Result<Lemma61Quantities> {
    if h.value() >= 0.5 {
        return Err(Error::Hypothesis(format!(
            "the increment bounds require H < 1/2, got {}",
            h.value()
        )));
    }
    if n < 2 || q < 1 {
        return Err(Error::Parameter(format!("need n >= 2 and q >= 1 (n={n}, q={q})")));
    }
    let two_h = 2.0 * h.value();
    let scale = (n as f64).powf(-two_h);

    let mut terms: Vec<f64> = (1..n as i64)
        .map(|p| 2.0 * (n as i64 - p) as f64 * (scale * rho_h(p, h).abs()).powi(q as i32))
        .collect();
    terms.push(n as f64 * scale.powi(q as i32));
    terms.reverse();
    let sum_beta_q = crate::mc::compensated_sum(terms);

    // Powers of half-integers: pw[j] = (j/2)^{2H}.
    let pw: Vec<f64> = (0..=2 * n + 2).map(|j| (j as f64 * 0.5).powf(two_h)).collect();
    let mut sup_alpha_sum = 0.0f64;
    let mut max_alpha = 0.0f64;
    for x2 in 0..=2 * n {
        let mut row_sum = 0.0;
        for k in 0..n {
            let k2 = 2 * k;
            let a = 0.5
                * (pw[k2 + 2] - pw[k2] - pw[(x2 as i64 - k2 as i64 - 2).unsigned_abs() as usize]
                    + pw[(x2 as i64 - k2 as i64).unsigned_abs() as usize])
                * scale;
            let a = a.abs();
            row_sum += a;
            max_alpha = max_alpha.max(a);
        }
        sup_alpha_sum = sup_alpha_sum.max(row_sum);
    }
    Ok(Lemma61Quantities { n, q, sum_beta_q, sup_alpha_sum, max_alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hurst(h: f64) -> Hurst {
        Hurst::new(h).unwrap()
    }

    #[test]
    fn hurst_validation() {
        assert!(Hurst::new(0.0).is_err());
        assert!(Hurst::new(1.0).is_err());
        assert!(Hurst::new(f64::NAN).is_err());
        assert!(Hurst::new(0.3).is_ok());
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(fbm_covariance(1.0, 1.0, hurst(0.75)), 1.0);
        assert_eq!(fbm_covariance(0.3, 0.7, hurst(0.5)), 0.3);
        assert!((fbm_covariance(0.5, 1.0, hurst(0.75)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn covariance_symmetric_exactly() {
        for &(s, t) in &[(0.1, 0.9), (0.33, 0.34), (2.0, 0.5)] {
            for &h in &[0.1, 0.3, 0.5, 0.8] {
                assert_eq!(fbm_covariance(s, t, hurst(h)), fbm_covariance(t, s, hurst(h)));
            }
        }
    }

    #[test]
    fn indicator_inner_examples() {
        let h = hurst(0.3);
        let direct = indicator_inner(0.0, 0.7, 0.0, 0.4, h).unwrap();
        assert!((direct - fbm_covariance(0.4, 0.7, h)).abs() < 1e-15);
        for &hv in &[0.2, 0.5, 0.9] {
            let v = indicator_inner(3.0 / 8.0, 4.0 / 8.0, 3.0 / 8.0, 4.0 / 8.0, hurst(hv)).unwrap();
            assert!((v - 8f64.powf(-2.0 * hv)).abs() < 1e-14);
        }
        // Adjacent quarter intervals at H = 0.3: 4^{-0.6} * rho(1).
        let adj = indicator_inner(0.0, 0.25, 0.25, 0.5, h).unwrap();
        let expected = 4f64.powf(-0.6) * 0.5 * (2f64.powf(0.6) - 2.0);
        assert!((adj - expected).abs() < 1e-14);
        assert!((adj - (-0.105399)).abs() < 1e-5);
    }

    #[test]
    fn indicator_inner_rejects_bad_intervals() {
        let h = hurst(0.4);
        assert!(matches!(indicator_inner(-0.1, 0.2, 0.0, 0.1, h), Err(Error::Parameter(_))));
        assert!(matches!(indicator_inner(0.3, 0.2, 0.0, 0.1, h), Err(Error::Parameter(_))));
    }

    #[test]
    fn indicator_inner_is_additive_under_splitting() {
        let h = hurst(0.35);
        let whole = indicator_inner(0.1, 0.9, 0.2, 0.6, h).unwrap();
        let left = indicator_inner(0.1, 0.45, 0.2, 0.6, h).unwrap();
        let right = indicator_inner(0.45, 0.9, 0.2, 0.6, h).unwrap();
        assert!((whole - left - right).abs() < 1e-14);
    }

    #[test]
    fn rho_examples() {
        for &hv in &[0.1, 0.3, 0.5, 0.9] {
            assert_eq!(rho_h(0, hurst(hv)), 1.0);
        }
        for p in 1..10 {
            assert_eq!(rho_h(p, hurst(0.5)), 0.0);
        }
        let r1 = rho_h(1, hurst(0.3));
        assert!((r1 - 0.5 * (2f64.powf(0.6) - 2.0)).abs() < 1e-15);
        assert!((r1 + 0.24214).abs() < 1e-5);
        let via_inner = indicator_inner(0.0, 1.0, 1.0, 2.0, hurst(0.3)).unwrap();
        assert!((r1 - via_inner).abs() < 1e-14);
    }

    #[test]
    fn rho_series_branch_matches_direct_formula() {
        for &hv in &[0.2, 0.35, 0.6, 0.85] {
            let two_h = 2.0 * hv;
            for p in [32i64, 40, 100] {
                let x = p as f64;
                let direct =
                    0.5 * ((x + 1.0).powf(two_h) + (x - 1.0).powf(two_h) - 2.0 * x.powf(two_h));
                let r = rho_h(p, hurst(hv));
                assert!((r - direct).abs() <= 1e-10 * direct.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn rho_is_even_and_decays() {
        let h = hurst(0.3);
        for p in 2..200i64 {
            assert_eq!(rho_h(p, h), rho_h(-p, h));
            let bound = (h.value() * (2.0 * h.value() - 1.0)).abs()
                * ((p - 1) as f64).powf(2.0 * h.value() - 2.0);
            assert!(rho_h(p, h).abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rho_nm_requires_long_memory() {
        assert!(rho_nm(1, 1, hurst(0.5)).is_err());
        assert!(rho_nm(2, 3, hurst(0.7)).unwrap() > 0.0);
    }

    #[test]
    fn circulant_decision_rules() {
        assert_eq!(circulant_decision(&[1.0, 0.5, 0.1], 1e-8), CirculantDecision::Accept { clipped: 0 });
        assert_eq!(
            circulant_decision(&[1.0, -1e-10, 0.2], 1e-8),
            CirculantDecision::Accept { clipped: 1 }
        );
        assert_eq!(circulant_decision(&[1.0, -1e-3], 1e-8), CirculantDecision::Reject);
    }

    #[test]
    fn fgn_circulant_is_nonnegative() {
        for &hv in &[0.1, 0.3, 0.45, 0.6, 0.75, 0.95] {
            let eigs = circulant_eigenvalues(256, hurst(hv));
            let max = eigs.iter().cloned().fold(0.0, f64::max);
            assert!(eigs.iter().all(|&l| l > -1e-10 * max), "H = {hv}");
        }
    }

    #[test]
    fn forced_fallback_uses_cholesky() {
        let grid = TimeGrid::uniform(16, 1.0).unwrap();
        // A negative tolerance rejects every embedding.
        let s = FbmSampler::with_clip_tolerance(grid, hurst(0.3), -1.0).unwrap();
        assert!(s.diagnostics().circulant_fallback);
        assert_eq!(s.diagnostics().method, SamplingMethod::Cholesky);
        let p = s.sample(3, 0);
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.values.len(), 17);
    }

    #[test]
    fn sampler_methods_and_determinism() {
        let uni = TimeGrid::uniform(64, 1.0).unwrap();
        let s = FbmSampler::new(uni.clone(), hurst(0.3)).unwrap();
        assert_eq!(s.diagnostics().method, SamplingMethod::Circulant);
        let a = s.sample(11, 5);
        let b = sample_path(uni.clone(), hurst(0.3), 11).unwrap();
        assert_eq!(a.values[0], 0.0);
        assert_eq!(s.sample(11, 5).values, a.values);
        assert_eq!(b.values, s.sample(11, 0).values);

        let irregular = TimeGrid::new(vec![0.0, 0.1, 0.15, 0.7, 1.0]).unwrap();
        let c = FbmSampler::new(irregular, hurst(0.7)).unwrap();
        assert_eq!(c.diagnostics().method, SamplingMethod::Cholesky);
        assert_eq!(c.sample(1, 1).values[0], 0.0);

        let bm = FbmSampler::new(uni, hurst(0.5)).unwrap();
        assert_eq!(bm.diagnostics().method, SamplingMethod::IndependentIncrements);
    }

    #[test]
    fn batch_matches_single_draw() {
        let grid = TimeGrid::new(vec![0.0, 0.2, 0.5, 0.55, 0.9, 1.0]).unwrap();
        let s = FbmSampler::new(grid, hurst(0.65)).unwrap();
        let mut rngs: Vec<_> = (0..5).map(|r| replica_rng(9, r)).collect();
        let batch = s.sample_values_batch(&mut rngs);
        for (r, v) in batch.iter().enumerate() {
            let single = s.sample(9, r as u64).values;
            for (x, y) in v.iter().zip(&single) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_matrices_factor_up_to_512_points() {
        for &hv in &[0.1, 0.3, 0.5, 0.75, 0.95] {
            let times: Vec<f64> = (1..=512).map(|k| k as f64 / 512.0).collect();
            assert!(covariance_cholesky(&times, hurst(hv)).is_ok(), "H = {hv}");
        }
    }

    #[test]
    fn uniform_step_detection() {
        assert!(TimeGrid::uniform(10, 2.0).unwrap().uniform_step().is_some());
        let offset = TimeGrid::new(vec![0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(offset.uniform_step(), Some(0.25));
        let irregular = TimeGrid::new(vec![0.0, 0.3, 1.0]).unwrap();
        assert_eq!(irregular.uniform_step(), None);
    }

    #[test]
    fn lemma61_small_case() {
        assert!(matches!(lemma61_quantities(8, 1, hurst(0.5)), Err(Error::Hypothesis(_))));
        let q = lemma61_quantities(2, 1, hurst(0.3)).unwrap();
        let s = 2f64.powf(-0.6);
        let beta01 = s * 0.5 * (2f64.powf(0.6) - 2.0);
        let expected = 2.0 * s + 2.0 * beta01.abs();
        assert!((q.sum_beta_q - expected).abs() < 1e-14);
        assert!((q.sum_beta_q - 1.63904).abs() < 1e-4);
    }

    #[test]
    fn lemma61_alpha_matches_indicator_inner() {
        let h = hurst(0.3);
        let n = 6;
        for x2 in 0..=2 * n {
            let t = x2 as f64 / (2 * n) as f64;
            for k in 0..n {
                let a = indicator_increment_inner(t, k, n, h);
                let b = indicator_inner(0.0, t, k as f64 / n as f64, (k + 1) as f64 / n as f64, h)
                    .unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
