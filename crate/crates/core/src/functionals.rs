//! Functionals of fBm paths and replicates of their mixed-Gaussian limits.
//!
//! * `A_n = (n^{1+H}/2) int_0^1 t^{n-1} (B_1^2 - B_t^2) dt`, limit `c_H |B_1| eta`;
//! * `F_n = A_n - H n^H / (2H + n)` (a centered Skorohod integral);
//! * the Itô integral `sqrt(n) int_0^1 t^n B_t dB_t` at `H = 1/2`;
//! * the weighted quadratic variation
//!   `n^{2H-1/2} sum_k f(B_{k/n}) [(Delta B_{k/n})^2 - n^{-2H}]`,
//!   limit `sqrt(sigma_H) sqrt(int f^2(B_s) ds) eta`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::chaos::Smooth1;
use crate::error::{Error, Result};
use crate::fbm::{rho_h, FbmPath, FbmSampler, Hurst, TimeGrid};
use crate::mc::{compensated_sum, replica_rng};

/// `c_H = sqrt(H (2H-1) Gamma(2H-1)) = sqrt(H Gamma(2H))`, `c_{1/2} = 1/sqrt(2)`.
pub fn c_h(h: Hurst) -> Result<f64> {
    let hv = h.value();
    if hv < 0.5 {
        return Err(Error::Domain(format!("c_H is defined for H >= 1/2, got {hv}")));
    }
    if h.is_brownian() {
        return Ok(std::f64::consts::FRAC_1_SQRT_2);
    }
    Ok((hv * gamma(2.0 * hv)).sqrt())
}

/// Largest explicit head tried by [`sigma_h_series`].
pub const SIGMA_MAX_TERMS: u64 = 1 << 22;

/// Terms of the even binomial expansion of `rho_H(p)` used in the tail.
const SIGMA_TAIL_ORDER: usize = 4;

/// `rho_H(x)^2 ~ sum_t coef_t x^{exp_t}` for large `x`, from
/// `rho_H(p) = sum_{r>=1} binom(2H, 2r) p^{2H-2r}`.
fn rho_squared_expansion(hv: f64) -> Vec<(f64, f64)> {
    let two_h = 2.0 * hv;
    let binom = |k: usize| (0..k).fold(1.0, |acc, i| acc * (two_h - i as f64) / (i + 1) as f64);
    let terms: Vec<(f64, f64)> = (1..=SIGMA_TAIL_ORDER).map(|r| (binom(2 * r), two_h - 2.0 * r as f64)).collect();
    let mut out = Vec::new();
    for &(c1, e1) in &terms {
        for &(c2, e2) in &terms {
            out.push((c1 * c2, e1 + e2));
        }
    }
    out
}

/// `k`-th derivative of `sum_t coef_t x^{exp_t}` at `x`.
fn power_sum_derivative(expansion: &[(f64, f64)], k: u32, x: f64) -> f64 {
    expansion
        .iter()
        .map(|&(c, e)| c * (0..k).fold(1.0, |acc, i| acc * (e - i as f64)) * x.powf(e - k as f64))
        .sum()
}

/// `sum_{p > P} rho_H(p)^2` by Euler-Maclaurin on the asymptotic expansion,
/// with the size of the last correction used as the error estimate.
fn sigma_tail(hv: f64, head: u64) -> (f64, f64) {
    let g = rho_squared_expansion(hv);
    let x = head as f64;
    let integral: f64 = g.iter().map(|&(c, e)| c * x.powf(e + 1.0) / -(e + 1.0)).sum();
    let g0 = power_sum_derivative(&g, 0, x);
    let g1 = power_sum_derivative(&g, 1, x);
    let g3 = power_sum_derivative(&g, 3, x);
    // sum_{p >= P} g(p) = int_P^inf g + g(P)/2 - g'(P)/12 + g^{(3)}(P)/720 - ...
    let from_head = integral + 0.5 * g0 - g1 / 12.0 + g3 / 720.0;
    (from_head - g0, (g3 / 720.0).abs())
}

/// `sigma_H = 2 sum_{p in Z} rho_H(p)^2` for `1/4 < H < 3/4`, accurate to `tol`.
///
/// The first `P` lags are summed explicitly; the tail uses Euler-Maclaurin
/// on the large-lag expansion of `rho_H`, whose remainder is `O(P^{4H-9})`.
pub fn sigma_h_series(h: Hurst, tol: f64) -> Result<f64> {
    let hv = h.value();
    if !(hv > 0.25 && hv < 0.75) {
        return Err(Error::Domain(format!("the sigma_H series diverges unless 1/4 < H < 3/4, got {hv}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if h.is_brownian() {
        return Ok(2.0);
    }
    let mut head: u64 = 256;
    loop {
        let (tail, err) = sigma_tail(hv, head);
        if 4.0 * err <= 0.1 * tol {
            return Ok(sigma_with_head(h, head, tail));
        }
        if head >= SIGMA_MAX_TERMS {
            return Err(Error::Accuracy(format!("sigma_H tail estimate {err:e} exceeds tolerance {tol:e}")));
        }
        head *= 2;
    }
}

fn sigma_with_head(h: Hurst, head: u64, tail: f64) -> f64 {
    // Smallest terms first.
    let explicit = compensated_sum((1..=head).rev().map(|p| rho_h(p as i64, h).powi(2)));
    2.0 + 4.0 * (explicit + tail)
}

/// Named weight functions used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightName {
    Cos,
    OnePlusXSquared,
    One,
    Zero,
    Identity,
}

impl WeightName {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cos" => Ok(WeightName::Cos),
            "one_plus_x2" | "1+x^2" => Ok(WeightName::OnePlusXSquared),
            "one" | "1" => Ok(WeightName::One),
            "zero" | "0" => Ok(WeightName::Zero),
            "identity" | "x" => Ok(WeightName::Identity),
            other => Err(Error::Config(format!(
                "unknown weight '{other}' (expected cos, one_plus_x2, one, zero or identity)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WeightName::Cos => "cos",
            WeightName::OnePlusXSquared => "one_plus_x2",
            WeightName::One => "one",
            WeightName::Zero => "zero",
            WeightName::Identity => "identity",
        }
    }
}

/// Weight `f` with derivatives up to a declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    profile: Smooth1,
    scale: f64,
    derivatives: usize,
    /// `|f(x)| <= A exp(B |x|^a)` with `a < 2`.
    pub moderate_growth: bool,
}

impl WeightFunction {
    pub fn new(profile: Smooth1, derivatives: usize) -> Self {
        WeightFunction { profile, scale: 1.0, derivatives, moderate_growth: true }
    }

    /// Bank member with nine derivatives.
    pub fn named(name: WeightName) -> Self {
        let profile = match name {
            WeightName::Cos => Smooth1::cos(),
            WeightName::OnePlusXSquared => Smooth1::Polynomial { coeffs: vec![1.0, 0.0, 1.0] },
            WeightName::One => Smooth1::constant(1.0),
            WeightName::Zero => Smooth1::constant(0.0),
            WeightName::Identity => Smooth1::Polynomial { coeffs: vec![0.0, 1.0] },
        };
        WeightFunction::new(profile, 9)
    }

    /// `c f`.
    pub fn scaled(&self, c: f64) -> Self {
        WeightFunction { scale: self.scale * c, ..self.clone() }
    }

    pub fn derivative_count(&self) -> usize {
        self.derivatives
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.profile.eval(x)
    }

    /// `f^{(order)}(x)`; contract error beyond the supplied order.
    pub fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        if order > self.derivatives {
            return Err(Error::Contract(format!(
                "derivative of order {order} requested, weight supplies {}",
                self.derivatives
            )));
        }
        Ok(self.scale * self.profile.derivative(order, x))
    }

    pub(crate) fn derivative_unchecked(&self, order: usize, x: f64) -> f64 {
        self.scale * self.profile.derivative(order, x)
    }
}

/// One Monte Carlo replicate of a functional with its coupled limit replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalSample {
    pub n: usize,
    pub value: f64,
    /// `s_value * eta`.
    pub limit_value: f64,
    pub b1: f64,
    pub s_value: f64,
    pub eta: f64,
}

/// Which mixed-Gaussian limit a sample targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Quadratic,
    WeightedQv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSpec {
    pub kind: LimitKind,
    pub hurst: Hurst,
    pub weight: Option<WeightFunction>,
}

impl LimitSpec {
    pub fn new(kind: LimitKind, hurst: Hurst, weight: Option<WeightFunction>) -> Result<Self> {
        if (kind == LimitKind::WeightedQv) != weight.is_some() {
            return Err(Error::Contract("a weight is required exactly for weighted_qv limits".into()));
        }
        Ok(LimitSpec { kind, hurst, weight })
    }
}

/// Default number of `u`-panels for the `A_n` quadrature.
pub const DEFAULT_U_GRID: usize = 2048;

/// Largest `u`-grid accepted (dense Cholesky memory guard).
pub const MAX_U_GRID: usize = 8192;

/// `E[A_n] = H n^H / (2H + n)`.
pub fn an_mean_shift(n: usize, h: Hurst) -> f64 {
    let hv = h.value();
    let nf = n as f64;
    hv * nf.powf(hv) / (2.0 * hv + nf)
}

/// Image grid `{0} u {(i/m)^{1/n} : i = 1..m}` (last point exactly 1).
pub fn an_image_grid(n: usize, m: usize) -> Result<TimeGrid> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter(format!("need n >= 1 and m >= 1 (n={n}, m={m})")));
    }
    let inv_n = 1.0 / n as f64;
    let mut points = Vec::with_capacity(m + 1);
    points.push(0.0);
    for i in 1..m {
        points.push((i as f64 / m as f64).powf(inv_n));
    }
    points.push(1.0);
    TimeGrid::new(points).map_err(|_| {
        Error::Accuracy(format!(
            "u-grid of {m} panels collapses under t = u^(1/{n}); reduce the grid or n"
        ))
    })
}

/// Sampler for `A_n` on the substituted grid `u = t^n`.
pub struct QuadraticSampler {
    n: usize,
    hurst: Hurst,
    u_grid: usize,
    sampler: FbmSampler,
    c_h: f64,
}

impl QuadraticSampler {
    pub fn new(n: usize, hurst: Hurst, u_grid: usize) -> Result<Self> {
        if hurst.value() < 0.5 {
            return Err(Error::Domain(format!("A_n requires H >= 1/2, got {}", hurst.value())));
        }
        if u_grid < 2 || u_grid > MAX_U_GRID {
            return Err(Error::Budget(format!("u-grid must lie in 2..={MAX_U_GRID}, got {u_grid}")));
        }
        let grid = an_image_grid(n, u_grid)?;
        let sampler = FbmSampler::new(grid, hurst)?;
        Ok(QuadraticSampler { n, hurst, u_grid, sampler, c_h: c_h(hurst)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn grid(&self) -> &TimeGrid {
        self.sampler.grid()
    }

    pub fn sampler(&self) -> &FbmSampler {
        &self.sampler
    }

    /// `A_n` from path values on [`an_image_grid`].
    pub fn a_n(&self, values: &[f64]) -> f64 {
        a_n_from_values(self.n, self.hurst, self.u_grid, values)
    }

    fn finish(&self, values: &[f64], rng: &mut ChaCha8Rng) -> FunctionalSample {
        let value = self.a_n(values);
        let b1 = *values.last().expect("nonempty path");
        let eta: f64 = rng.sample(StandardNormal);
        let s_value = self.c_h * b1.abs();
        FunctionalSample { n: self.n, value, limit_value: s_value * eta, b1, s_value, eta }
    }

    /// Replicate `replica` of seed `seed`.
    pub fn sample(&self, seed: u64, replica: u64) -> FunctionalSample {
        let mut rng = replica_rng(seed, replica);
        let values = self.sampler.sample_values(&mut rng);
        self.finish(&values, &mut rng)
    }

    /// Replicates for a contiguous replica range, batching the path draws.
    pub fn sample_range(&self, seed: u64, replicas: std::ops::Range<u64>) -> Vec<FunctionalSample> {
        let mut rngs: Vec<ChaCha8Rng> = replicas.map(|r| replica_rng(seed, r)).collect();
        let paths = self.sampler.sample_values_batch(&mut rngs);
        paths.iter().zip(rngs.iter_mut()).map(|(v, rng)| self.finish(v, rng)).collect()
    }
}

/// Quadrature of `(n^H/2) int_0^1 (B_1^2 - B_{u^{1/n}}^2) du` on `m` uniform
/// `u`-panels. The first panel uses its right endpoint: `u^{1/n}` stays
/// within `O(1/n)` of the first positive node on all but a vanishing part
/// of it; the others use the trapezoid rule.
pub fn a_n_from_values(n: usize, h: Hurst, m: usize, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), m + 1);
    let b1_sq = values[m] * values[m];
    let g = |i: usize| b1_sq - values[i] * values[i];
    let interior = compensated_sum((1..m).map(g));
    // Right endpoint on [u_0, u_1]; trapezoid on the rest.
    let integral = (g(1) + interior - 0.5 * g(1) + 0.5 * g(m)) / m as f64;
    0.5 * (n as f64).powf(h.value()) * integral
}

/// `A_n` on a supplied path over [`an_image_grid`]`(n, m)`.
pub fn a_n_from_path(path: &FbmPath, n: usize) -> Result<f64> {
    let m = path.values.len().checked_sub(1).filter(|&m| m >= 1).ok_or_else(|| {
        Error::Contract("path must contain at least two points".into())
    })?;
    let expected = an_image_grid(n, m)?;
    if expected != path.grid {
        return Err(Error::Contract(format!("path grid is not the A_n image grid for n={n}, m={m}")));
    }
    Ok(a_n_from_values(n, path.hurst, m, &path.values))
}

/// One replicate of `A_n` with its limit replicate `c_H |B_1| eta`.
pub fn quad_functional_an(n: usize, h: Hurst, seed: u64) -> Result<FunctionalSample> {
    Ok(QuadraticSampler::new(n, h, DEFAULT_U_GRID)?.sample(seed, 0))
}

/// `F_n = delta(u_n)` with `u_n(t) = n^H t^n B_t`, via `F_n = A_n - H n^H / (2H + n)`.
pub fn skorohod_fn(n: usize, h: Hurst, seed: u64) -> Result<f64> {
    if h.value() <= 0.5 {
        return Err(Error::Domain(format!("the Skorohod functional needs H > 1/2, got {}", h.value())));
    }
    Ok(quad_functional_an(n, h, seed)?.value - an_mean_shift(n, h))
}

/// Checks that `path` lives on a uniform grid `{0, 1/m, ..., 1}`; returns `m`.
fn uniform_unit_grid(path: &FbmPath) -> Result<usize> {
    let pts = path.grid.points();
    let m = pts.len() - 1;
    if m == 0 || pts[0] != 0.0 || (path.grid.horizon() - 1.0).abs() > 1e-12 || path.grid.uniform_step().is_none()
    {
        return Err(Error::Contract("path must be sampled on the uniform grid {0, 1/m, ..., 1}".into()));
    }
    Ok(m)
}

/// Minimal grid refinement, in intervals per unit of `n`, for the Itô sum.
pub const ITO_RESOLUTION: usize = 8;

/// Left-point Itô sum `sqrt(n) sum_k t_k^n B_{t_k} (B_{t_{k+1}} - B_{t_k})`.
pub fn ito_fn_half(path: &FbmPath, n: usize) -> Result<f64> {
    if !path.hurst.is_brownian() {
        return Err(Error::Hypothesis(format!("the Itô functional needs H = 1/2, got {}", path.hurst.value())));
    }
    let m = uniform_unit_grid(path)?;
    if m < ITO_RESOLUTION * n {
        return Err(Error::Accuracy(format!(
            "grid of {m} intervals is below the resolution guard {ITO_RESOLUTION}*n = {}",
            ITO_RESOLUTION * n
        )));
    }
    Ok(ito_from_values(&path.values, n))
}

pub(crate) fn ito_from_values(values: &[f64], n: usize) -> f64 {
    let m = values.len() - 1;
    let step = 1.0 / m as f64;
    let terms = (0..m).map(|k| (k as f64 * step).powi(n as i32) * values[k] * (values[k + 1] - values[k]));
    (n as f64).sqrt() * compensated_sum(terms)
}

/// Sampler for the `H = 1/2` Itô functional on `{0, 1/m, ..., 1}`.
pub struct ItoSampler {
    n: usize,
    sampler: FbmSampler,
}

impl ItoSampler {
    /// `m` intervals, at least `8n`.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        if m < ITO_RESOLUTION * n {
            return Err(Error::Accuracy(format!(
                "grid of {m} intervals is below the resolution guard {ITO_RESOLUTION}*n = {}",
                ITO_RESOLUTION * n
            )));
        }
        let sampler = FbmSampler::new(TimeGrid::uniform(m, 1.0)?, Hurst::new(0.5)?)?;
        Ok(ItoSampler { n, sampler })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn intervals(&self) -> usize {
        self.sampler.grid().len() - 1
    }

    /// Brownian path values of replicate `replica`, and its sample; the
    /// limit scale is `S = |B_1| / sqrt(2)`.
    pub fn sample_with_path(&self, seed: u64, replica: u64) -> (Vec<f64>, FunctionalSample) {
        let mut rng = replica_rng(seed, replica);
        let values = self.sampler.sample_values(&mut rng);
        let eta: f64 = rng.sample(StandardNormal);
        let b1 = *values.last().expect("nonempty path");
        let s_value = b1.abs() * std::f64::consts::FRAC_1_SQRT_2;
        let value = ito_from_values(&values, self.n);
        (values, FunctionalSample { n: self.n, value, limit_value: s_value * eta, b1, s_value, eta })
    }

    pub fn sample(&self, seed: u64, replica: u64) -> FunctionalSample {
        self.sample_with_path(seed, replica).1
    }
}

/// Weighted quadratic variation on a path sampled at `{0, 1/n, ..., 1}`.
pub fn weighted_qv_fn(path: &FbmPath, f: &WeightFunction, h: Hurst) -> Result<f64> {
    uniform_unit_grid(path)?;
    if path.hurst != h {
        return Err(Error::Contract("path Hurst index differs from the requested one".into()));
    }
    Ok(weighted_qv_from_values(&path.values, f, h))
}

pub(crate) fn weighted_qv_from_values(values: &[f64], f: &WeightFunction, h: Hurst) -> f64 {
    let n = values.len() - 1;
    let hv = h.value();
    let nf = n as f64;
    let var = nf.powf(-2.0 * hv);
    let terms = (0..n).map(|k| {
        let d = values[k + 1] - values[k];
        f.eval(values[k]) * (d * d - var)
    });
    nf.powf(2.0 * hv - 0.5) * compensated_sum(terms)
}

/// `(1/n) sum_{k<n} f^2(B_{k/n})`, the grid proxy for `int_0^1 f^2(B_s) ds`.
pub(crate) fn mean_square_weight(values: &[f64], f: &WeightFunction) -> f64 {
    let n = values.len() - 1;
    compensated_sum(values[..n].iter().map(|&x| f.eval(x).powi(2))) / n as f64
}

/// Tolerance used for `sigma_H` inside the samplers.
pub const SIGMA_TOLERANCE: f64 = 1e-10;

/// `sqrt(sigma_H) sqrt((1/n) sum_k f^2(B_{k/n})) eta`.
pub fn weighted_limit_sample(path: &FbmPath, f: &WeightFunction, h: Hurst, eta: f64) -> Result<f64> {
    uniform_unit_grid(path)?;
    let sigma = sigma_h_series(h, SIGMA_TOLERANCE)?;
    Ok(sigma.sqrt() * mean_square_weight(&path.values, f).sqrt() * eta)
}

/// Sampler for the weighted quadratic variation on `{0, 1/n, ..., 1}`.
pub struct WeightedQvSampler {
    n: usize,
    hurst: Hurst,
    weight: WeightFunction,
    sigma: f64,
    sampler: FbmSampler,
}

impl WeightedQvSampler {
    pub fn new(n: usize, hurst: Hurst, weight: WeightFunction) -> Result<Self> {
        let sigma = sigma_h_series(hurst, SIGMA_TOLERANCE)?;
        let sampler = FbmSampler::new(TimeGrid::uniform(n, 1.0)?, hurst)?;
        Ok(WeightedQvSampler { n, hurst, weight, sigma, sampler })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Path values and the coupled functional sample of one replicate.
    pub fn sample_with_path(&self, seed: u64, replica: u64) -> (Vec<f64>, FunctionalSample) {
        let mut rng = replica_rng(seed, replica);
        let values = self.sampler.sample_values(&mut rng);
        let eta: f64 = rng.sample(StandardNormal);
        let value = weighted_qv_from_values(&values, &self.weight, self.hurst);
        let s_value = (self.sigma * mean_square_weight(&values, &self.weight)).sqrt();
        let b1 = values[self.n];
        (values, FunctionalSample { n: self.n, value, limit_value: s_value * eta, b1, s_value, eta })
    }

    pub fn sample(&self, seed: u64, replica: u64) -> FunctionalSample {
        self.sample_with_path(seed, replica).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::MeanAccumulator;

    fn hurst(h: f64) -> Hurst {
        Hurst::new(h).unwrap()
    }

    #[test]
    fn c_h_values() {
        assert!((c_h(hurst(0.5)).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let expected = (0.375 * std::f64::consts::PI.sqrt()).sqrt();
        assert!((c_h(hurst(0.75)).unwrap() - expected).abs() < 1e-12);
        assert!((c_h(hurst(0.75)).unwrap() - 0.815273).abs() < 1e-6);
        assert!((c_h(hurst(0.51)).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05);
        assert!((c_h(hurst(0.5 + 1e-9)).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert!(matches!(c_h(hurst(0.4)), Err(Error::Domain(_))));
        // Original form sqrt(H(2H-1)Gamma(2H-1)).
        let h = 0.7f64;
        let original = (h * (2.0 * h - 1.0) * gamma(2.0 * h - 1.0)).sqrt();
        assert!((c_h(hurst(h)).unwrap() - original).abs() < 1e-12);
    }

    #[test]
    fn sigma_h_values() {
        assert_eq!(sigma_h_series(hurst(0.5), 1e-12).unwrap(), 2.0);
        assert!(sigma_h_series(hurst(0.2), 1e-8).is_err());
        assert!(sigma_h_series(hurst(0.8), 1e-8).is_err());
        let s = sigma_h_series(hurst(0.3), 1e-10).unwrap();
        let direct: f64 = 2.0 * (-1_000_000i64..=1_000_000).map(|p| rho_h(p, hurst(0.3)).powi(2)).sum::<f64>();
        assert!((s - direct).abs() < 1e-9, "{s} vs {direct}");
    }

    #[test]
    fn sigma_h_tail_consistent_across_heads() {
        for &hv in &[0.3, 0.45, 0.55, 0.7] {
            let h = hurst(hv);
            let vals: Vec<f64> =
                [128u64, 1024, 8192].iter().map(|&p| sigma_with_head(h, p, sigma_tail(hv, p).0)).collect();
            assert!((vals[0] - vals[2]).abs() < 1e-11 && (vals[1] - vals[2]).abs() < 1e-12, "H={hv}: {vals:?}");
            // Crude bracket from |H(2H-1)| (p -+ 1)^{2H-2} on the lags beyond 10^5.
            let p = 100_000u64;
            let c2 = (hv * (2.0 * hv - 1.0)).powi(2);
            let e = 4.0 * hv - 3.0;
            let head = 2.0 + 4.0 * (1..=p).rev().map(|k| rho_h(k as i64, h).powi(2)).sum::<f64>();
            let lo = head + 4.0 * c2 * (p as f64 + 2.0).powf(e) / -e;
            let hi = head + 4.0 * c2 * ((p as f64 - 1.0).powf(e) / -e + (p as f64 - 1.0).powf(e - 1.0));
            let s = sigma_h_series(h, 1e-10).unwrap();
            assert!(s >= lo - 1e-12 && s <= hi + 1e-12, "H={hv}: {lo} <= {s} <= {hi}");
        }
    }

    #[test]
    fn sigma_h_continuous_across_half() {
        for &eps in &[1e-3, 5e-4] {
            let lo = sigma_h_series(hurst(0.5 - eps), 1e-10).unwrap().sqrt();
            let hi = sigma_h_series(hurst(0.5 + eps), 1e-10).unwrap().sqrt();
            assert!((lo - 2f64.sqrt()).abs() < 1e-3 && (hi - 2f64.sqrt()).abs() < 1e-3);
        }
    }

    #[test]
    fn weight_derivative_consistency() {
        for name in [WeightName::Cos, WeightName::OnePlusXSquared, WeightName::Identity] {
            let f = WeightFunction::named(name);
            for order in 0..8 {
                for i in 0..=12 {
                    let x = -3.0 + 0.5 * i as f64;
                    let h = 1e-5;
                    let fd = (f.derivative(order, x + h).unwrap() - f.derivative(order, x - h).unwrap()) / (2.0 * h);
                    let exact = f.derivative(order + 1, x).unwrap();
                    assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1.0));
                }
            }
            assert!(f.derivative(10, 0.0).is_err());
        }
    }

    #[test]
    fn limit_spec_requires_weight_for_weighted_qv() {
        let h = hurst(0.4);
        assert!(LimitSpec::new(LimitKind::WeightedQv, h, None).is_err());
        assert!(LimitSpec::new(LimitKind::Quadratic, h, Some(WeightFunction::named(WeightName::Cos))).is_err());
        assert!(LimitSpec::new(LimitKind::Quadratic, h, None).is_ok());
    }

    #[test]
    fn zero_path_gives_zero_functionals() {
        let h = hurst(0.75);
        let grid = an_image_grid(8, 64).unwrap();
        let path = FbmPath::from_values(grid.clone(), vec![0.0; grid.len()], h).unwrap();
        assert_eq!(a_n_from_path(&path, 8).unwrap(), 0.0);

        let bm = hurst(0.5);
        let g = TimeGrid::uniform(64, 1.0).unwrap();
        let zero = FbmPath::from_values(g, vec![0.0; 65], bm).unwrap();
        assert_eq!(ito_fn_half(&zero, 8).unwrap(), 0.0);
        assert!(matches!(ito_fn_half(&zero, 9), Err(Error::Accuracy(_))));
    }

    #[test]
    fn an_expectation_matches_mean_shift() {
        // Exact mean of the discretized estimator against the closed form.
        for &(n, hv) in &[(4usize, 0.5), (64, 0.75), (512, 0.6)] {
            let h = hurst(hv);
            let m = 2048;
            let grid = an_image_grid(n, m).unwrap();
            let variances: Vec<f64> = grid.points().iter().map(|t| t.powf(2.0 * hv)).collect();
            let values: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
            let discrete = a_n_from_values(n, h, m, &values);
            let exact = an_mean_shift(n, h);
            assert!((discrete - exact).abs() < 2e-3 * exact.max(1.0), "n={n} H={hv}: {discrete} vs {exact}");
        }
    }

    #[test]
    fn an_quadrature_refinement_is_stable() {
        for &(n, hv) in &[(16usize, 0.5), (512, 0.75)] {
            let h = hurst(hv);
            let fine = QuadraticSampler::new(n, h, 1024).unwrap();
            let path = fine.sampler().sample(5, 0);
            let coarse_vals: Vec<f64> = path.values.iter().step_by(2).copied().collect();
            let a_fine = fine.a_n(&path.values);
            let a_coarse = a_n_from_values(n, h, 512, &coarse_vals);
            assert!((a_fine - a_coarse).abs() < 1e-3 * a_fine.abs().max(1.0), "n={n}: {a_fine} vs {a_coarse}");
        }
    }

    #[test]
    fn an_sampler_determinism_and_batch() {
        let s = QuadraticSampler::new(16, hurst(0.7), 128).unwrap();
        let single: Vec<_> = (0..4).map(|r| s.sample(3, r)).collect();
        let batch = s.sample_range(3, 0..4);
        for (a, b) in single.iter().zip(&batch) {
            assert!((a.value - b.value).abs() < 1e-10);
            assert_eq!(a.eta, b.eta);
            assert!((a.limit_value - a.s_value * a.eta).abs() < 1e-15);
        }
        assert!(skorohod_fn(1, hurst(0.6), 1).unwrap().is_finite());
        assert!(skorohod_fn(4, hurst(0.5), 1).is_err());
    }

    #[test]
    fn weighted_qv_basic_properties() {
        let h = hurst(0.5);
        let n = 64;
        let path = crate::fbm::sample_path(TimeGrid::uniform(n, 1.0).unwrap(), h, 4).unwrap();
        let zero = WeightFunction::named(WeightName::Zero);
        assert_eq!(weighted_qv_fn(&path, &zero, h).unwrap(), 0.0);
        assert_eq!(weighted_limit_sample(&path, &zero, h, 0.7).unwrap(), 0.0);
        let one = WeightFunction::named(WeightName::One);
        let qv: f64 = path.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        assert!((weighted_qv_fn(&path, &one, h).unwrap() - 8.0 * (qv - 1.0)).abs() < 1e-12);
        assert!((weighted_limit_sample(&path, &one, h, 0.7).unwrap() - 2f64.sqrt() * 0.7).abs() < 1e-15);
        let cos = WeightFunction::named(WeightName::Cos);
        let base = weighted_qv_fn(&path, &cos, h).unwrap();
        let tripled = weighted_qv_fn(&path, &cos.scaled(3.0), h).unwrap();
        assert!((tripled - 3.0 * base).abs() < 1e-12 * base.abs().max(1.0));
        let lim = weighted_limit_sample(&path, &cos, h, 1.1).unwrap();
        let lim3 = weighted_limit_sample(&path, &cos.scaled(3.0), h, 1.1).unwrap();
        assert!((lim3 - 3.0 * lim).abs() < 1e-12);
        let wrong = crate::fbm::sample_path(TimeGrid::uniform(n, 2.0).unwrap(), h, 4).unwrap();
        assert!(matches!(weighted_qv_fn(&wrong, &one, h), Err(Error::Contract(_))));
    }

    #[test]
    fn an_minus_ito_matches_shift_at_half() {
        // Same Brownian path on the union of the A_n image grid and a
        // uniform grid would be needed for a pathwise identity; compare means.
        let n = 16;
        let h = hurst(0.5);
        let q = QuadraticSampler::new(n, h, 1024).unwrap();
        let acc: MeanAccumulator = (0..20_000).map(|r| q.sample(11, r).value).collect();
        let shift = an_mean_shift(n, h);
        assert!((acc.mean() - shift).abs() < 4.0 * acc.std_error(), "{} vs {shift}", acc.mean());
    }
}
