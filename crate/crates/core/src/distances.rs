//! Empirical probability metrics, the stable-convergence characteristic
//! functional gap, and log-log rate regression.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::chaos::{GaussHermite, Smooth1};
use crate::error::{Error, Result};
use crate::fbm::Hurst;
use crate::functionals::c_h;
use crate::mc::{compensated_sum, replica_rng, MeanAccumulator};

/// Nonempty sample of finite reals with a label.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    pub values: Vec<f64>,
    pub label: String,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        check_sample(&values)?;
        Ok(EmpiricalSample { values, label: label.into() })
    }
}

fn check_sample(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Contract("empty sample".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract("sample contains non-finite values".into()));
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `W_1 = int_0^1 |F^{-1}(u) - G^{-1}(u)| du` between the empirical laws.
///
/// Equal sizes reduce to the mean gap between order statistics.
pub fn wasserstein1(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_sample(xs)?;
    check_sample(ys)?;
    let a = sorted(xs);
    let b = sorted(ys);
    if a.len() == b.len() {
        return Ok(compensated_sum(a.iter().zip(&b).map(|(x, y)| (x - y).abs())) / a.len() as f64);
    }
    // Merge the quantile breakpoints i/n and j/m.
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next_a = (i + 1) as f64 / n;
        let next_b = (j + 1) as f64 / m;
        let next = next_a.min(next_b);
        total += (next - u) * (a[i] - b[j]).abs();
        u = next;
        if next_a <= next {
            i += 1;
        }
        if next_b <= next {
            j += 1;
        }
    }
    Ok(total)
}

/// `sup_x |F_n(x) - G_m(x)|` over the merged support.
pub fn kolmogorov(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_sample(xs)?;
    check_sample(ys)?;
    let a = sorted(xs);
    let b = sorted(ys);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(best)
}

/// Number of grid points of the kernel density estimate.
pub const KDE_GRID: usize = 2048;

/// Silverman's rule `1.06 sd M^{-1/5}`.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let acc: MeanAccumulator = xs.iter().copied().collect();
    1.06 * acc.variance().sqrt() * (xs.len() as f64).powf(-0.2)
}

/// `(1/2) int |p - q|` with Gaussian-kernel densities on a common grid.
///
/// Samples are linearly binned onto the grid and convolved with the kernel
/// by FFT. A sample without spread falls back to the TV between the two
/// empirical (atomic) laws.
pub fn tv_kde(xs: &[f64], ys: &[f64], bandwidth: Option<f64>) -> Result<f64> {
    check_sample(xs)?;
    check_sample(ys)?;
    if let Some(bw) = bandwidth {
        if !(bw > 0.0) || !bw.is_finite() {
            return Err(Error::Parameter(format!("bandwidth must be positive, got {bw}")));
        }
    }
    let hx = bandwidth.unwrap_or_else(|| silverman_bandwidth(xs));
    let hy = bandwidth.unwrap_or_else(|| silverman_bandwidth(ys));
    if !(hx > 0.0 && hy > 0.0) {
        return Ok(atomic_tv(xs, ys));
    }
    let lo = xs.iter().chain(ys).copied().fold(f64::INFINITY, f64::min) - 4.0 * hx.max(hy);
    let hi = xs.iter().chain(ys).copied().fold(f64::NEG_INFINITY, f64::max) + 4.0 * hx.max(hy);
    let step = (hi - lo) / (KDE_GRID - 1) as f64;
    let p = binned_kde(xs, hx, lo, step);
    let q = binned_kde(ys, hy, lo, step);
    let diff: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).collect();
    let integral = step * (compensated_sum(diff.iter().copied()) - 0.5 * (diff[0] + diff[KDE_GRID - 1]));
    Ok((0.5 * integral).clamp(0.0, 1.0))
}

fn binned_kde(xs: &[f64], h: f64, lo: f64, step: f64) -> Vec<f64> {
    let g = KDE_GRID;
    // Zero-padded circular convolution of length 2g avoids wrap-around.
    let len = 2 * g;
    let mut bins = vec![Complex64::new(0.0, 0.0); len];
    let w = 1.0 / xs.len() as f64;
    for &x in xs {
        let pos = ((x - lo) / step).clamp(0.0, (g - 1) as f64);
        let i = (pos.floor() as usize).min(g - 2);
        let frac = pos - i as f64;
        bins[i].re += w * (1.0 - frac);
        bins[i + 1].re += w * frac;
    }
    let mut kernel = vec![Complex64::new(0.0, 0.0); len];
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    for (k, slot) in kernel.iter_mut().enumerate() {
        let offset = if k <= g { k as f64 } else { k as f64 - len as f64 };
        let z = offset * step / h;
        slot.re = norm * (-0.5 * z * z).exp();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut bins);
    fwd.process(&mut kernel);
    for (b, k) in bins.iter_mut().zip(&kernel) {
        *b *= k;
    }
    inv.process(&mut bins);
    bins[..g].iter().map(|c| (c.re / len as f64).max(0.0)).collect()
}

fn atomic_tv(xs: &[f64], ys: &[f64]) -> f64 {
    let a = sorted(xs);
    let b = sorted(ys);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        let (si, sj) = (i, j);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        total += ((i - si) as f64 / n - (j - sj) as f64 / m).abs();
    }
    0.5 * total
}

/// Bank of `C^5` test functions with `max_{i<=5} ||phi^{(i)}|| = 1`:
/// `cos` and `sin` at frequencies `1/2, 1, 2`.
pub fn default_smooth_bank() -> Vec<Smooth1> {
    let mut bank = Vec::new();
    for &freq in &[0.5f64, 1.0, 2.0] {
        let amplitude = 1.0 / freq.max(1.0).powi(5);
        for phase in [0.0, -std::f64::consts::FRAC_PI_2] {
            bank.push(Smooth1::Cosine { amplitude, freq, phase });
        }
    }
    bank
}

/// `max_phi |mean phi(xs) - mean phi(ys)|` over `bank`.
pub fn smooth_metric(xs: &[f64], ys: &[f64], bank: &[Smooth1]) -> Result<f64> {
    check_sample(xs)?;
    check_sample(ys)?;
    if bank.is_empty() {
        return Err(Error::Contract("empty test-function bank".into()));
    }
    let mean = |s: &[f64], f: &Smooth1| compensated_sum(s.iter().map(|&x| f.eval(x))) / s.len() as f64;
    Ok(bank.iter().map(|f| (mean(xs, f) - mean(ys, f)).abs()).fold(0.0, f64::max))
}

/// `E[phi(s eta)]` for a standard normal `eta`: closed form for cosines,
/// Gauss-Hermite quadrature otherwise.
pub fn gaussian_mixture_expectation(phi: &Smooth1, s: f64) -> f64 {
    match *phi {
        Smooth1::Cosine { amplitude, freq, phase } => amplitude * phase.cos() * (-0.5 * (freq * s).powi(2)).exp(),
        _ => GaussHermite::standard().expect(|x| phi.eval(s * x)),
    }
}

/// Smooth-metric gap between a sample `xs` and the mixture `S eta`, with
/// the limit side integrated over `eta` given each paired scale `S_j`.
/// Returns the largest gap over the bank and its standard error.
pub fn smooth_gap_mixture(xs: &[f64], scales: &[f64], bank: &[Smooth1]) -> Result<(f64, f64)> {
    check_sample(xs)?;
    check_sample(scales)?;
    if xs.len() != scales.len() {
        return Err(Error::Contract(format!("paired samples differ in length ({} vs {})", xs.len(), scales.len())));
    }
    if bank.is_empty() {
        return Err(Error::Contract("empty test-function bank".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for phi in bank {
        let acc: MeanAccumulator =
            xs.iter().zip(scales).map(|(&x, &s)| phi.eval(x) - gaussian_mixture_expectation(phi, s)).collect();
        let gap = acc.mean().abs();
        if gap > best.0 {
            best = (gap, acc.std_error());
        }
    }
    Ok(best)
}

/// Frequencies `(lambda, mu)` of the stable characteristic-functional test.
pub const CF_GRID: [(f64, f64); 6] = [(0.5, 0.0), (0.5, 1.0), (1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0)];

/// `E[exp(i mu B_1 + i lambda c_H |B_1| eta)]`
/// `= (1 + lambda^2 c_H^2)^{-1/2} exp(-mu^2 / (2 (1 + lambda^2 c_H^2)))`.
pub fn stable_cf_limit(lambda: f64, mu: f64, h: Hurst) -> Result<f64> {
    let a = lambda * lambda * c_h(h)?.powi(2);
    Ok((1.0 + a).powf(-0.5) * (-mu * mu / (2.0 * (1.0 + a))).exp())
}

/// Gap and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfGap {
    pub gap: f64,
    pub std_error: f64,
}

/// `|mean exp(i (mu b1_j + lambda F_j)) - limit|` with a standard error from
/// the replicate spread of the complex exponentials.
pub fn stable_cf_gap_with_se(f: &[f64], b1: &[f64], lambda: f64, mu: f64, h: Hurst) -> Result<CfGap> {
    if f.len() != b1.len() {
        return Err(Error::Contract(format!("paired samples differ in length ({} vs {})", f.len(), b1.len())));
    }
    check_sample(f)?;
    check_sample(b1)?;
    let limit = stable_cf_limit(lambda, mu, h)?;
    let mut re = MeanAccumulator::new();
    let mut im = MeanAccumulator::new();
    for (&x, &b) in f.iter().zip(b1) {
        let phase = mu * b + lambda * x;
        re.push(phase.cos());
        im.push(phase.sin());
    }
    let gap = Complex64::new(re.mean() - limit, im.mean()).norm();
    let std_error = (re.std_error().powi(2) + im.std_error().powi(2)).sqrt();
    Ok(CfGap { gap, std_error })
}

pub fn stable_cf_gap(f: &[f64], b1: &[f64], lambda: f64, mu: f64, h: Hurst) -> Result<f64> {
    Ok(stable_cf_gap_with_se(f, b1, lambda, mu, h)?.gap)
}

/// Largest gap over [`CF_GRID`], with the standard error at that point.
pub fn max_stable_cf_gap(f: &[f64], b1: &[f64], h: Hurst) -> Result<CfGap> {
    let mut best = CfGap { gap: f64::NEG_INFINITY, std_error: 0.0 };
    for &(lambda, mu) in &CF_GRID {
        let g = stable_cf_gap_with_se(f, b1, lambda, mu, h)?;
        if g.gap > best.gap {
            best = g;
        }
    }
    Ok(best)
}

/// Ordinary least squares of `log d` on `log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl RateFit {
    /// `exp(intercept) n^slope`.
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

pub fn rate_fit(ns: &[f64], ds: &[f64]) -> Result<RateFit> {
    if ns.len() != ds.len() || ns.len() < 3 {
        return Err(Error::Contract(format!("need matching ladders of at least 3 points ({} vs {})", ns.len(), ds.len())));
    }
    if let Some(bad) = ds.iter().chain(ns).find(|&&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::Contract(format!("rate fit needs positive finite values, got {bad}")));
    }
    let points: Vec<(f64, f64)> = ns.iter().zip(ds).map(|(n, d)| (n.ln(), d.ln())).collect();
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Contract("rate fit needs at least two distinct levels".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r_squared, points })
}

/// Resamples used by [`bootstrap_se`].
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Bootstrap standard error of a two-sample statistic. Paired samples
/// (equal lengths) are resampled jointly by replicate index.
pub fn bootstrap_se<F>(xs: &[f64], ys: &[f64], resamples: usize, seed: u64, stat: F) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> Result<f64>,
{
    check_sample(xs)?;
    check_sample(ys)?;
    if resamples < 2 {
        return Err(Error::Parameter("need at least two bootstrap resamples".into()));
    }
    let paired = xs.len() == ys.len();
    let mut acc = MeanAccumulator::new();
    let mut bx = vec![0.0; xs.len()];
    let mut by = vec![0.0; ys.len()];
    for b in 0..resamples {
        let mut rng = replica_rng(seed, b as u64);
        for k in 0..bx.len() {
            let i = rng.random_range(0..xs.len());
            bx[k] = xs[i];
            if paired {
                by[k] = ys[i];
            }
        }
        if !paired {
            for slot in by.iter_mut() {
                *slot = ys[rng.random_range(0..ys.len())];
            }
        }
        acc.push(stat(&bx, &by)?);
    }
    Ok(acc.variance().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn normals(seed: u64, count: usize, mean: f64, sd: f64) -> Vec<f64> {
        let mut rng = replica_rng(seed, 0);
        (0..count).map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn wasserstein_examples() {
        let xs = normals(1, 1000, 0.0, 1.0);
        assert_eq!(wasserstein1(&xs, &xs).unwrap(), 0.0);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.3).collect();
        assert!((wasserstein1(&xs, &shifted).unwrap() - 0.3).abs() < 1e-12);
        assert!(wasserstein1(&[], &xs).is_err());
        // Unequal sizes: {0, 1} vs {0, 0.5, 1}: quantile gaps 0, 1/2 on [1/3, 1/2] and [1/2, 2/3].
        let w = wasserstein1(&[0.0, 1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert!((w - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_scale_oracle() {
        let xs = normals(2, 1_000_000, 0.0, 1.0);
        let ys = normals(3, 1_000_000, 0.0, 2.0);
        let w = wasserstein1(&xs, &ys).unwrap();
        let oracle = (2.0 / std::f64::consts::PI).sqrt();
        assert!((w - oracle).abs() < 0.01 * oracle, "{w}");
    }

    #[test]
    fn kolmogorov_examples() {
        let xs = normals(4, 200_000, 0.0, 1.0);
        assert_eq!(kolmogorov(&xs, &xs).unwrap(), 0.0);
        assert_eq!(kolmogorov(&[0.0, 1.0], &[5.0, 6.0, 7.0]).unwrap(), 1.0);
        let ys = normals(5, 200_000, 1.0, 1.0);
        let oracle = 2.0 * Normal::standard().cdf(0.5) - 1.0;
        let k = kolmogorov(&xs, &ys).unwrap();
        assert!((k - oracle).abs() < 0.01 * oracle, "{k} vs {oracle}");
        assert!((kolmogorov(&ys, &xs).unwrap() - k).abs() < 1e-15);
    }

    #[test]
    fn tv_examples() {
        let xs = normals(6, 100_000, 0.0, 1.0);
        assert!(tv_kde(&xs, &xs, None).unwrap() <= 0.02);
        let far = normals(7, 100_000, 50.0, 1.0);
        assert!(tv_kde(&xs, &far, None).unwrap() >= 0.98);
        let ys = normals(8, 100_000, 0.5, 1.0);
        let oracle = 2.0 * Normal::standard().cdf(0.25) - 1.0;
        let t = tv_kde(&xs, &ys, None).unwrap();
        assert!((t - oracle).abs() < 0.02, "{t} vs {oracle}");
        let k = kolmogorov(&xs, &ys).unwrap();
        assert!(k <= 2.0 * t + 0.05);
        assert_eq!(tv_kde(&[1.0, 1.0], &[1.0, 1.0, 1.0], None).unwrap(), 0.0);
        assert_eq!(tv_kde(&[1.0; 4], &[2.0; 4], None).unwrap(), 1.0);
        assert!(tv_kde(&xs, &ys, Some(-1.0)).is_err());
    }

    #[test]
    fn smooth_metric_examples() {
        let xs = normals(9, 400_000, 0.0, 1.0);
        let bank = default_smooth_bank();
        assert_eq!(smooth_metric(&xs, &xs, &bank).unwrap(), 0.0);
        let cos = [Smooth1::cos()];
        let ys = normals(10, 400_000, 0.0, 1.2f64.sqrt());
        let mean_cos = |s: &[f64]| s.iter().map(|x| x.cos()).sum::<f64>() / s.len() as f64;
        let direct = (mean_cos(&xs) - mean_cos(&ys)).abs();
        assert!((smooth_metric(&xs, &ys, &cos).unwrap() - direct).abs() < 1e-12);
        let oracle = (-0.5f64).exp() - (-0.6f64).exp();
        assert!((direct - oracle).abs() < 0.006, "{direct} vs {oracle}");
        for f in &bank {
            let top = (0..=5).map(|i| f.sup_norm(i)).fold(0.0, f64::max);
            assert!((top - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_gap_matches_sampled_limit() {
        let s: Vec<f64> = normals(17, 200_000, 0.0, 1.0).iter().map(|b| b.abs()).collect();
        let eta = normals(18, 200_000, 0.0, 1.0);
        let exact: Vec<f64> = s.iter().zip(&eta).map(|(a, e)| a * e).collect();
        let bank = default_smooth_bank();
        let (gap, se) = smooth_gap_mixture(&exact, &s, &bank).unwrap();
        assert!(gap < 5.0 * se, "{gap} {se}");
        let logistic = Smooth1::Logistic { scale: 1.3 };
        let q = gaussian_mixture_expectation(&logistic, 0.8);
        assert!((q - 0.5).abs() < 1e-12);
        let poly = Smooth1::Polynomial { coeffs: vec![0.0, 0.0, 1.0] };
        assert!((gaussian_mixture_expectation(&poly, 0.8) - 0.64).abs() < 1e-12);
        let shifted: Vec<f64> = exact.iter().map(|x| x + 0.2).collect();
        assert!(smooth_gap_mixture(&shifted, &s, &bank).unwrap().0 > 0.05);
    }

    #[test]
    fn cf_gap_examples() {
        let h = Hurst::new(0.5).unwrap();
        let b1 = normals(11, 200_000, 0.0, 1.0);
        let f = normals(12, 200_000, 0.0, 1.0);
        assert_eq!(stable_cf_gap(&f, &b1, 0.0, 0.0, h).unwrap(), 0.0);
        let g = stable_cf_gap_with_se(&f, &b1, 0.0, 1.0, h).unwrap();
        assert!(g.gap < 4.0 * g.std_error + 1e-3);
        assert!((stable_cf_limit(1.0, 1.0, h).unwrap() - 0.5850454).abs() < 1e-6);
        assert!(stable_cf_gap(&f, &b1[..10], 1.0, 1.0, h).is_err());
        // Exact mixed-Gaussian sample has a small gap.
        let eta = normals(13, 200_000, 0.0, 1.0);
        let mixed: Vec<f64> = b1.iter().zip(&eta).map(|(b, e)| b.abs() * e * std::f64::consts::FRAC_1_SQRT_2).collect();
        let m = max_stable_cf_gap(&mixed, &b1, h).unwrap();
        assert!(m.gap < 4.0 * m.std_error + 1e-3, "{m:?}");
    }

    #[test]
    fn rate_fit_examples() {
        let ns = [8.0, 16.0, 32.0, 64.0, 128.0];
        let ds: Vec<f64> = ns.iter().map(|n: &f64| 3.0 * n.powf(-0.5)).collect();
        let fit = rate_fit(&ns, &ds).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(16.0) - ds[1]).abs() < 1e-12);
        assert!(rate_fit(&ns, &[1.0; 5]).unwrap().slope.abs() < 1e-15);
        assert!(rate_fit(&ns, &[1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(rate_fit(&ns[..2], &ds[..2]).is_err());
        let mut rng = replica_rng(14, 0);
        let noisy: Vec<f64> = ns
            .iter()
            .map(|n: &f64| n.powf(-1.0 / 6.0) * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        assert!((rate_fit(&ns, &noisy).unwrap().slope + 1.0 / 6.0).abs() < 0.02);
    }

    #[test]
    fn bootstrap_se_is_reasonable() {
        let xs = normals(15, 4000, 0.0, 1.0);
        let ys = normals(16, 4000, 0.0, 1.0);
        let mean_diff = |a: &[f64], b: &[f64]| -> Result<f64> {
            Ok(a.iter().sum::<f64>() / a.len() as f64 - b.iter().sum::<f64>() / b.len() as f64)
        };
        let se = bootstrap_se(&xs, &ys, BOOTSTRAP_RESAMPLES, 1, mean_diff).unwrap();
        let theory = (2.0f64 / 4000.0).sqrt();
        assert!((se - theory).abs() < 0.25 * theory, "{se} vs {theory}");
    }
}
