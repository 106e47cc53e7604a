//! Experiment runners and report writers behind the command-line tool.
//!
//! Each run yields three tables (distances, bounds, rate fits) and a JSON
//! manifest. Table bodies depend only on the configuration and seed: every
//! replicate draws from its own counter-derived stream and all reductions
//! run in replicate order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::chaos::{
    coeff_c, coeff_w, coeff_w_hat, enumerate_a, enumerate_b, MultiIndexAlpha, MultiIndexBeta,
};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::distances::{
    bootstrap_se, default_smooth_bank, kolmogorov, max_stable_cf_gap, rate_fit, smooth_gap_mixture, tv_kde,
    wasserstein1, RateFit,
};
use crate::error::{Error, Result};
use crate::fbm::{lemma61_quantities, Hurst};
use crate::functionals::{
    an_mean_shift, c_h, sigma_h_series, FunctionalSample, ItoSampler, QuadraticSampler, WeightFunction,
    WeightedQvSampler,
};
use crate::malliavin::{
    delta_bound, e_abs_b1_neg_alpha, l_tuples, estimate_prop36_ingredients_on_grid, estimate_weighted_qv_terms,
    kolmogorov_transfer, prop36_analytic_bounds, tv_transfer, BoundIngredients, WEIGHTED_QV_TERM_NAMES,
};
use crate::mc::{derive_seed, map_replica_chunks, map_replicas, with_threads, MeanAccumulator, SEEDING_SCHEME};

/// Version of the CSV layouts below.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub metric: String,
    pub n: usize,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub experiment: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub experiment: String,
    pub n: Option<usize>,
    #[serde(rename = "H")]
    pub hurst: Option<f64>,
    pub term: String,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub analytic_bound: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub experiment: String,
    pub metric: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub theory_slope: Option<f64>,
    pub pass: Option<bool>,
}

/// Output of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub distances: Vec<DistanceRow>,
    pub bounds: Vec<BoundRow>,
    pub rates: Vec<RateRow>,
    /// Levels skipped because the time budget ran out.
    pub truncated: bool,
}

impl RunReport {
    /// `false` if any row carries a failed check.
    pub fn all_pass(&self) -> bool {
        self.bounds.iter().all(|r| r.pass != Some(false)) && self.rates.iter().all(|r| r.pass != Some(false))
    }

    pub fn distances_csv(&self) -> Result<String> {
        to_csv(&self.distances, &["metric", "n", "H", "experiment", "estimate", "std_error"])
    }

    pub fn bounds_csv(&self) -> Result<String> {
        to_csv(&self.bounds, &["experiment", "n", "H", "term", "estimate", "std_error", "analytic_bound", "pass"])
    }

    pub fn rates_csv(&self) -> Result<String> {
        to_csv(&self.rates, &["experiment", "metric", "slope", "intercept", "r2", "theory_slope", "pass"])
    }
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Runs `cfg` on its own worker pool.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || run_inner(cfg))
}

struct Budget {
    start: Instant,
    limit: Option<f64>,
}

impl Budget {
    fn exhausted(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed().as_secs_f64() > l)
    }
}

fn run_inner(cfg: &ExperimentConfig) -> Result<RunReport> {
    let budget = Budget { start: Instant::now(), limit: cfg.time_budget_secs };
    let mut report = RunReport::default();
    match cfg.experiment {
        ExperimentKind::QuadraticBm => quadratic_bm(cfg, &budget, &mut report)?,
        ExperimentKind::QuadraticFbm => quadratic_fbm(cfg, &budget, &mut report)?,
        ExperimentKind::WeightedQv => weighted_qv(cfg, &budget, &mut report)?,
        ExperimentKind::BoundsProp36 => bounds_prop36(cfg, &budget, &mut report)?,
        ExperimentKind::WeightedBounds => weighted_bounds(cfg, &budget, &mut report)?,
        ExperimentKind::Lemma61 => lemma61(cfg, &budget, &mut report)?,
        ExperimentKind::Combinatorics => combinatorics(cfg, &mut report)?,
        ExperimentKind::Constants => constants(cfg, &mut report)?,
    }
    Ok(report)
}

/// Replicate stream seed of level `n`.
pub fn level_seed(seed: u64, n: usize) -> u64 {
    derive_seed(seed, &[n as u64])
}

/// Envelope test: `d(n) <= slack * C n^theta` with `C` fitted at the first level.
pub fn envelope_holds(ns: &[f64], ds: &[f64], theta: f64, slack: f64) -> bool {
    let c = ds[0] * ns[0].powf(-theta);
    ns.iter().zip(ds).all(|(n, d)| *d <= slack * c * n.powf(theta) * (1.0 + 1e-12))
}

/// `d(n_{i+1}) <= d(n_i) + 2 sqrt(se_i^2 + se_{i+1}^2)` along the ladder.
pub fn nonincreasing_within(ds: &[f64], ses: &[f64], k: f64) -> bool {
    ds.windows(2)
        .zip(ses.windows(2))
        .all(|(d, s)| d[1] <= d[0] + k * (s[0] * s[0] + s[1] * s[1]).sqrt())
}

fn fit_row(experiment: &str, metric: &str, ns: &[f64], ds: &[f64], theory: Option<f64>, pass: Option<bool>) -> Result<Option<RateRow>> {
    if ns.len() < 3 {
        return Ok(None);
    }
    let fit: RateFit = rate_fit(ns, ds)?;
    Ok(Some(RateRow {
        experiment: experiment.into(),
        metric: metric.into(),
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r_squared,
        theory_slope: theory,
        pass,
    }))
}

fn slope_of(ns: &[f64], ds: &[f64]) -> Option<f64> {
    (ns.len() >= 3).then(|| rate_fit(ns, ds).ok().map(|f| f.slope)).flatten()
}

fn bootstrap(cfg: &ExperimentConfig, xs: &[f64], ys: &[f64], n: usize, tag: u64, stat: impl Fn(&[f64], &[f64]) -> Result<f64>) -> Result<Option<f64>> {
    if cfg.bootstrap == 0 {
        return Ok(None);
    }
    let seed = derive_seed(cfg.seed, &[n as u64, 0xB007, tag]);
    bootstrap_se(xs, ys, cfg.bootstrap.max(2), seed, stat).map(Some)
}

struct LevelDistances {
    n: usize,
    wasserstein: f64,
}

fn columns(samples: &[FunctionalSample]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        samples.iter().map(|s| s.value).collect(),
        samples.iter().map(|s| s.limit_value).collect(),
        samples.iter().map(|s| s.b1).collect(),
        samples.iter().map(|s| s.s_value).collect(),
    )
}

fn distance_row(cfg: &ExperimentConfig, metric: &str, n: usize, estimate: f64, se: Option<f64>) -> DistanceRow {
    DistanceRow {
        metric: metric.into(),
        n,
        hurst: cfg.hurst,
        experiment: cfg.experiment.as_str().into(),
        estimate,
        std_error: se,
    }
}

fn quadratic_bm(cfg: &ExperimentConfig, budget: &Budget, report: &mut RunReport) -> Result<()> {
    let h = Hurst::new(0.5)?;
    let mut levels = Vec::new();
    for &n in &cfg.n_ladder {
        if budget.exhausted() {
            report.truncated = true;
            break;
        }
        let sampler = ItoSampler::new(n, cfg.grid_size)?;
        let seed = level_seed(cfg.seed, n);
        let samples = map_replicas(cfg.replicas, |r| sampler.sample(seed, r));
        let (f, limit, b1, s) = columns(&samples);
        let w = wasserstein1(&f, &limit)?;
        let w_se = bootstrap(cfg, &f, &limit, n, 1, wasserstein1)?;
        report.distances.push(distance_row(cfg, "wasserstein", n, w, w_se));
        report.distances.push(distance_row(cfg, "kolmogorov", n, kolmogorov(&f, &limit)?, None));
        let (sm, sm_se) = smooth_gap_mixture(&f, &s, &default_smooth_bank())?;
        report.distances.push(distance_row(cfg, "smooth_metric", n, sm, Some(sm_se)));
        let cf = max_stable_cf_gap(&f, &b1, h)?;
        report.distances.push(distance_row(cfg, "cf_gap_max", n, cf.gap, Some(cf.std_error)));
        levels.push(LevelDistances { n, wasserstein: w });
    }
    let ns: Vec<f64> = levels.iter().map(|l| l.n as f64).collect();
    let ws: Vec<f64> = levels.iter().map(|l| l.wasserstein).collect();
    let theory = -1.0 / 6.0;
    let pass = slope_of(&ns, &ws).map(|s| s <= theory + 0.08 && envelope_holds(&ns, &ws, theory, 1.25));
    report.rates.extend(fit_row(cfg.experiment.as_str(), "wasserstein", &ns, &ws, Some(theory), pass)?);
    Ok(())
}

fn quadratic_fbm(cfg: &ExperimentConfig, budget: &Budget, report: &mut RunReport) -> Result<()> {
    let h = Hurst::new(cfg.hurst)?;
    let (mut ns, mut ws, mut tvs, mut tv_ses) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &n in &cfg.n_ladder {
        if budget.exhausted() {
            report.truncated = true;
            break;
        }
        let sampler = QuadraticSampler::new(n, h, cfg.grid_size)?;
        let seed = level_seed(cfg.seed, n);
        let samples = map_replica_chunks(cfg.replicas, |range| sampler.sample_range(seed, range));
        let (a, limit, b1, _) = columns(&samples);
        let shift = an_mean_shift(n, h);
        let f: Vec<f64> = a.iter().map(|x| x - shift).collect();
        let w = wasserstein1(&f, &limit)?;
        let w_se = bootstrap(cfg, &f, &limit, n, 1, wasserstein1)?;
        report.distances.push(distance_row(cfg, "wasserstein_fn", n, w, w_se));
        report.distances.push(distance_row(cfg, "kolmogorov_fn", n, kolmogorov(&f, &limit)?, None));
        let tv = tv_kde(&a, &limit, None)?;
        let tv_se = bootstrap(cfg, &a, &limit, n, 2, |x, y| tv_kde(x, y, None))?;
        report.distances.push(distance_row(cfg, "tv_an", n, tv, tv_se));
        let cf = max_stable_cf_gap(&a, &b1, h)?;
        report.distances.push(distance_row(cfg, "cf_gap_an", n, cf.gap, Some(cf.std_error)));
        let cf_bound = 0.02 + 4.0 * cf.std_error;
        let is_last = n == *cfg.n_ladder.last().unwrap();
        report.bounds.push(BoundRow {
            experiment: cfg.experiment.as_str().into(),
            n: Some(n),
            hurst: Some(cfg.hurst),
            term: "stable_cf_gap_max".into(),
            estimate: Some(cf.gap),
            std_error: Some(cf.std_error),
            analytic_bound: Some(cf_bound),
            pass: is_last.then_some(cf.gap <= cf_bound),
        });
        ns.push(n as f64);
        ws.push(w);
        tvs.push(tv);
        tv_ses.push(tv_se.unwrap_or(0.0));
    }
    let name = cfg.experiment.as_str();
    let theory_w = -(1.0 - cfg.hurst) / 3.0;
    let pass_w = slope_of(&ns, &ws).map(|s| s <= theory_w + 0.08 && envelope_holds(&ns, &ws, theory_w, 1.25));
    report.rates.extend(fit_row(name, "wasserstein_fn", &ns, &ws, Some(theory_w), pass_w)?);
    let theory_tv = -(1.0 - cfg.hurst) / 15.0;
    let pass_tv = (ns.len() >= 3 && cfg.bootstrap > 0)
        .then(|| envelope_holds(&ns, &tvs, theory_tv, 1.0) && nonincreasing_within(&tvs, &tv_ses, 2.0));
    if tvs.iter().all(|&t| t > 0.0) {
        report.rates.extend(fit_row(name, "tv_an", &ns, &tvs, Some(theory_tv), pass_tv)?);
    }
    Ok(())
}

/// Theoretical slope of the weighted-variation smooth gap.
pub fn weighted_theory_slope(h: f64) -> f64 {
    if h == 0.5 {
        -0.5
    } else {
        0.5 - 2.0 * h
    }
}

fn weighted_qv(cfg: &ExperimentConfig, budget: &Budget, report: &mut RunReport) -> Result<()> {
    let h = Hurst::new(cfg.hurst)?;
    let weight = WeightFunction::named(cfg.weight);
    let (mut ns, mut gaps) = (Vec::new(), Vec::new());
    for &n in &cfg.n_ladder {
        if budget.exhausted() {
            report.truncated = true;
            break;
        }
        let sampler = WeightedQvSampler::new(n, h, weight.clone())?;
        let seed = level_seed(cfg.seed, n);
        let samples = map_replicas(cfg.replicas, |r| sampler.sample(seed, r));
        let (f, limit, _, s) = columns(&samples);
        let (gap, gap_se) = smooth_gap_mixture(&f, &s, &default_smooth_bank())?;
        report.distances.push(distance_row(cfg, "smooth_metric", n, gap, Some(gap_se)));
        let w = wasserstein1(&f, &limit)?;
        report.distances.push(distance_row(cfg, "wasserstein", n, w, None));
        let var: MeanAccumulator = f.iter().copied().collect();
        let scale: MeanAccumulator = s.iter().map(|x| x * x).collect();
        let ratio = var.variance() / scale.mean();
        let is_last = n == *cfg.n_ladder.last().unwrap();
        report.bounds.push(BoundRow {
            experiment: cfg.experiment.as_str().into(),
            n: Some(n),
            hurst: Some(cfg.hurst),
            term: "variance_ratio".into(),
            estimate: Some(ratio),
            std_error: None,
            analytic_bound: Some(0.05),
            pass: is_last.then_some((ratio - 1.0).abs() <= 0.05),
        });
        ns.push(n as f64);
        gaps.push(gap);
    }
    let theory = weighted_theory_slope(cfg.hurst);
    let pass = slope_of(&ns, &gaps).map(|s| s <= theory + 0.1);
    report.rates.extend(fit_row(cfg.experiment.as_str(), "smooth_metric", &ns, &gaps, Some(theory), pass)?);
    Ok(())
}

fn bounds_prop36(cfg: &ExperimentConfig, budget: &Budget, report: &mut RunReport) -> Result<()> {
    let max_n = *cfg.n_ladder.last().unwrap();
    let name = cfg.experiment.as_str();
    let alpha = 0.5;
    // S = |B_1| / sqrt 2, so E S^{-alpha} = 2^{alpha/2} E|B_1|^{-alpha}.
    let e_s_neg = 2f64.powf(alpha / 2.0) * e_abs_b1_neg_alpha(alpha)?;
    let e_s_exact = 1.0 / std::f64::consts::PI.sqrt();
    for &n in &cfg.n_ladder {
        if budget.exhausted() {
            report.truncated = true;
            break;
        }
        let grid = cfg.grid_size * n / max_n;
        let ing = estimate_prop36_ingredients_on_grid(n, grid, cfg.replicas, level_seed(cfg.seed, n))?;
        let (b3, b4, b5) = prop36_analytic_bounds(n);
        let row = |term: &str, est: f64, se: Option<f64>, bound: Option<f64>, pass: Option<bool>| BoundRow {
            experiment: name.into(),
            n: Some(n),
            hurst: Some(0.5),
            term: term.into(),
            estimate: Some(est),
            std_error: se,
            analytic_bound: bound,
            pass,
        };
        let se = ing.std_errors;
        report.bounds.push(row("e_inner_udf_minus_s2", ing.e_inner_udf_minus_s2, Some(se[0]), Some(b3), Some(ing.e_inner_udf_minus_s2 <= b3 + 3.0 * se[0])));
        report.bounds.push(row("e_inner_uds2", ing.e_inner_uds2, Some(se[1]), Some(b4), Some(ing.e_inner_uds2 <= b4 + 3.0 * se[1])));
        report.bounds.push(row("e_abs_f", ing.e_abs_f, Some(se[2]), Some(b5), Some(ing.e_abs_f <= b5 + 3.0 * se[2])));
        report.bounds.push(row("e_s", ing.e_s, Some(se[3]), Some(e_s_exact), Some((ing.e_s - e_s_exact).abs() <= 4.0 * se[3])));
        let delta = delta_bound(&ing);
        let analytic = BoundIngredients::new(b3, b4, b5, e_s_exact)?;
        let delta_analytic = delta_bound(&analytic);
        report.bounds.push(row("delta", delta, None, Some(delta_analytic), None));
        report.bounds.push(row("kolmogorov_transfer", kolmogorov_transfer(delta, alpha, e_s_neg)?, None, Some(kolmogorov_transfer(delta_analytic, alpha, e_s_neg)?), None));
        report.bounds.push(row("tv_transfer_p2", tv_transfer(delta, 2, 1.0)?, None, None, None));
    }
    Ok(())
}

fn weighted_bounds(cfg: &ExperimentConfig, budget: &Budget, report: &mut RunReport) -> Result<()> {
    let h = Hurst::new(cfg.hurst)?;
    let weight = WeightFunction::named(cfg.weight);
    let name = cfg.experiment.as_str();
    let mut ns = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); 6];
    for &n in &cfg.n_ladder {
        if budget.exhausted() {
            report.truncated = true;
            break;
        }
        let t = estimate_weighted_qv_terms(n, &weight, h, cfg.replicas, level_seed(cfg.seed, n))?;
        let entries = t.terms.iter().zip(WEIGHTED_QV_TERM_NAMES).map(|(e, name)| (name, *e)).chain([("aggregate", t.aggregate)]);
        for (i, (term, est)) in entries.enumerate() {
            report.bounds.push(BoundRow {
                experiment: name.into(),
                n: Some(n),
                hurst: Some(cfg.hurst),
                term: term.into(),
                estimate: Some(est.mean),
                std_error: Some(est.std_error),
                analytic_bound: None,
                pass: None,
            });
            series[i].push(est.mean);
        }
        ns.push(n as f64);
    }
    let theory = weighted_theory_slope(cfg.hurst);
    let brownian = cfg.hurst == 0.5;
    let names = WEIGHTED_QV_TERM_NAMES.iter().copied().chain(["aggregate"]);
    for (i, term) in names.enumerate() {
        let ds = &series[i];
        if ds.iter().any(|&d| d <= 0.0) {
            // Identically vanishing terms (constant weights) have no slope.
            continue;
        }
        let checked = brownian || i == 5;
        let pass = if checked { slope_of(&ns, ds).map(|s| s <= theory + 0.1) } else { None };
        report.rates.extend(fit_row(name, term, &ns, ds, checked.then_some(theory), pass)?);
    }
    Ok(())
}

fn lemma61(cfg: &ExperimentConfig, budget: &Budget, report: &mut RunReport) -> Result<()> {
    let h = Hurst::new(cfg.hurst)?;
    let name = cfg.experiment.as_str();
    let mut ns = Vec::new();
    let mut sums: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut sups = Vec::new();
    for &n in &cfg.n_ladder {
        if budget.exhausted() {
            report.truncated = true;
            break;
        }
        let envelope = (n as f64).powf(-2.0 * cfg.hurst);
        for q in 1..=2u32 {
            let lq = lemma61_quantities(n, q, h)?;
            report.bounds.push(BoundRow {
                experiment: name.into(),
                n: Some(n),
                hurst: Some(cfg.hurst),
                term: format!("sum_beta_q{q}"),
                estimate: Some(lq.sum_beta_q),
                std_error: None,
                analytic_bound: None,
                pass: None,
            });
            sums[q as usize - 1].push(lq.sum_beta_q);
            if q == 1 {
                report.bounds.push(BoundRow {
                    experiment: name.into(),
                    n: Some(n),
                    hurst: Some(cfg.hurst),
                    term: "sup_alpha_sum".into(),
                    estimate: Some(lq.sup_alpha_sum),
                    std_error: None,
                    analytic_bound: None,
                    pass: None,
                });
                report.bounds.push(BoundRow {
                    experiment: name.into(),
                    n: Some(n),
                    hurst: Some(cfg.hurst),
                    term: "max_alpha".into(),
                    estimate: Some(lq.max_alpha),
                    std_error: None,
                    analytic_bound: Some(envelope),
                    pass: Some(lq.max_alpha <= envelope * (1.0 + 1e-12)),
                });
                sups.push(lq.sup_alpha_sum);
            }
        }
        ns.push(n as f64);
    }
    for q in 1..=2usize {
        let theory = 1.0 - 2.0 * q as f64 * cfg.hurst;
        let pass = slope_of(&ns, &sums[q - 1]).map(|s| (s - theory).abs() <= 0.1);
        report.rates.extend(fit_row(name, &format!("sum_beta_q{q}"), &ns, &sums[q - 1], Some(theory), pass)?);
    }
    if !sups.is_empty() {
        let max = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
        report.bounds.push(BoundRow {
            experiment: name.into(),
            n: None,
            hurst: Some(cfg.hurst),
            term: "sup_alpha_sum_ratio".into(),
            estimate: Some(max / min),
            std_error: None,
            analytic_bound: Some(1.5),
            pass: Some(max / min <= 1.5),
        });
    }
    Ok(())
}

fn alpha_label(a: &MultiIndexAlpha) -> String {
    format!("A[k={:?};a={:?};b={:?}]", a.k, a.a, a.b).replace(' ', "")
}

fn beta_label(b: &MultiIndexBeta) -> String {
    format!("B[k={:?};a={:?};b1={:?};b2={:?}]", b.k, b.a, b.b_prime, b.b_second).replace(' ', "")
}

fn combinatorics(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let name = cfg.experiment.as_str();
    for &q in &cfg.n_ladder {
        let row = |term: String, est: f64| BoundRow {
            experiment: name.into(),
            n: Some(q),
            hurst: None,
            term,
            estimate: Some(est),
            std_error: None,
            analytic_bound: None,
            pass: None,
        };
        for a in enumerate_a(q, cfg.m, cfg.d)? {
            report.bounds.push(row(alpha_label(&a), ratio_to_f64(&coeff_c(&a))));
        }
        for b in enumerate_b(q, cfg.m, cfg.d)? {
            let zeros = vec![0; cfg.d];
            report.bounds.push(row(beta_label(&b), coeff_w_hat(&b, &zeros)?));
        }
    }
    Ok(())
}

fn ratio_to_f64(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Coefficient table of `B(q; m, d)`: one row per `(beta, l)` with columns
/// `q, m, d, k.., a.., b'.., b''.., l.., C, W, W_hat`.
pub fn coefficients_csv(q: usize, m: usize, d: usize) -> Result<String> {
    let mut header: Vec<String> = vec!["q".into(), "m".into(), "d".into()];
    header.extend((1..=q).map(|i| format!("k{i}")));
    header.extend((1..=m).map(|l| format!("a{l}")));
    for tag in ["b1", "b2"] {
        for i in 1..=q {
            header.extend((1..=d).map(|j| format!("{tag}_{i}{j}")));
        }
    }
    header.extend((1..=d).map(|s| format!("l{s}")));
    header.extend(["C".into(), "W".into(), "W_hat".into()]);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for beta in enumerate_b(q, m, d)? {
        let c = ratio_to_f64(&coeff_c(&beta.alpha()));
        for ls in l_tuples(&beta) {
            let mut rec: Vec<String> = vec![q.to_string(), m.to_string(), d.to_string()];
            rec.extend(beta.k.iter().map(u32::to_string));
            rec.extend(beta.a.iter().map(u32::to_string));
            rec.extend(beta.b_prime.iter().flatten().map(u32::to_string));
            rec.extend(beta.b_second.iter().flatten().map(u32::to_string));
            rec.extend(ls.iter().map(u32::to_string));
            rec.push(c.to_string());
            rec.push(ratio_to_f64(&coeff_w(&beta, &ls)?).to_string());
            rec.push(coeff_w_hat(&beta, &ls)?.to_string());
            w.write_record(&rec).map_err(io)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// Hurst grid of the constants table.
pub fn constants_grid() -> Vec<f64> {
    (0..=12).map(|i| ((30 + 5 * i) as f64) / 100.0).collect()
}

fn constants(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let name = cfg.experiment.as_str();
    for hv in constants_grid() {
        let h = Hurst::new(hv)?;
        let row = |term: &str, est: Option<f64>, bound: Option<f64>, pass: Option<bool>| BoundRow {
            experiment: name.into(),
            n: None,
            hurst: Some(hv),
            term: term.into(),
            estimate: est,
            std_error: None,
            analytic_bound: bound,
            pass,
        };
        let c = c_h(h).ok();
        let brownian = h.is_brownian();
        let half = std::f64::consts::FRAC_1_SQRT_2;
        report.bounds.push(row("c_H", c, brownian.then_some(half), brownian.then(|| (c.unwrap() - half).abs() <= 1e-12)));
        let s = sigma_h_series(h, 1e-10).ok();
        report.bounds.push(row("sigma_H", s, brownian.then_some(2.0), brownian.then(|| (s.unwrap() - 2.0).abs() <= 1e-12)));
    }
    Ok(())
}

/// Writes `distances.csv`, `bounds.csv`, `rates.csv` and `manifest.json` into `dir`.
pub fn write_report(dir: &Path, cfg: &ExperimentConfig, report: &RunReport, wall_clock_secs: f64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("distances.csv", report.distances_csv()?),
        ("bounds.csv", report.bounds_csv()?),
        ("rates.csv", report.rates_csv()?),
    ];
    let mut written = Vec::new();
    if cfg.experiment == ExperimentKind::Combinatorics {
        for &q in &cfg.n_ladder {
            let path = dir.join(format!("coefficients_q{q}.csv"));
            std::fs::write(&path, coefficients_csv(q, cfg.m, cfg.d)?)?;
            written.push(path);
        }
    }
    for (file, body) in files {
        let path = dir.join(file);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    let manifest = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "seeding": SEEDING_SCHEME,
        "versions": {
            "stable-rates": env!("CARGO_PKG_VERSION"),
        },
        "wall_clock_secs": wall_clock_secs,
        "truncated": report.truncated,
        "all_pass": report.all_pass(),
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    written.push(path);
    Ok(written)
}

/// Rate fits over a distances table: one row per `(experiment, metric, H)`.
pub fn rate_fits_from_distances_csv(text: &str) -> Result<Vec<RateRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Config(format!("input: {e}")))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Config(format!("input: missing column '{name}'")))
    };
    let (ci_metric, ci_n, ci_h, ci_exp, ci_est) = (col("metric")?, col("n")?, col("H")?, col("experiment")?, col("estimate")?);
    let mut groups: std::collections::BTreeMap<(String, String, String), Vec<(f64, f64)>> = Default::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Config(format!("input: {e}")))?;
        let num = |i: usize| {
            rec[i].parse::<f64>().map_err(|_| Error::Config(format!("input: '{}' is not a number", &rec[i])))
        };
        groups
            .entry((rec[ci_exp].to_string(), rec[ci_metric].to_string(), rec[ci_h].to_string()))
            .or_default()
            .push((num(ci_n)?, num(ci_est)?));
    }
    let mut rows = Vec::new();
    for ((exp, metric, h), pts) in groups {
        let ns: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ds: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if ds.iter().all(|&d| d > 0.0) {
            rows.extend(fit_row(&exp, &format!("{metric}@H={h}"), &ns, &ds, None, None)?);
        }
    }
    Ok(rows)
}
