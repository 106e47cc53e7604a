//! Bound arithmetic (Wasserstein, Kolmogorov and total-variation transfers),
//! Monte Carlo estimators of the Malliavin inner products entering those
//! bounds, and the exact assembly of the multivariate smooth bound.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::chaos::{coeff_w_hat, coeff_w_hat_exact, derivative_order, enumerate_b0, DerivativeOrder, MultiIndexBeta};
use crate::error::{Error, Result};
use crate::fbm::{increment_inner, indicator_increment_inner, FbmSampler, Hurst, TimeGrid};
use crate::functionals::{sigma_h_series, ItoSampler, WeightFunction, ITO_RESOLUTION, SIGMA_TOLERANCE};
use crate::mc::{map_replica_chunks, map_replicas, replica_rng, MeanAccumulator};

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl From<&MeanAccumulator> for Estimate {
    fn from(acc: &MeanAccumulator) -> Self {
        Estimate { mean: acc.mean(), std_error: acc.std_error() }
    }
}

/// Inputs of the Wasserstein bound `Delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundIngredients {
    /// `E|<u, DF> - S^2|`.
    pub e_inner_udf_minus_s2: f64,
    /// `E|<u, D S^2>|`.
    pub e_inner_uds2: f64,
    pub e_abs_f: f64,
    pub e_s: f64,
    /// Standard errors in field order; zero for analytic values.
    pub std_errors: [f64; 4],
}

impl BoundIngredients {
    pub fn new(e_inner_udf_minus_s2: f64, e_inner_uds2: f64, e_abs_f: f64, e_s: f64) -> Result<Self> {
        Self::with_errors(e_inner_udf_minus_s2, e_inner_uds2, e_abs_f, e_s, [0.0; 4])
    }

    pub fn with_errors(a: f64, b: f64, f: f64, s: f64, std_errors: [f64; 4]) -> Result<Self> {
        let all = [a, b, f, s].into_iter().chain(std_errors);
        if all.into_iter().any(|x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Parameter("bound ingredients must be finite and nonnegative".into()));
        }
        Ok(BoundIngredients { e_inner_udf_minus_s2: a, e_inner_uds2: b, e_abs_f: f, e_s: s, std_errors })
    }
}

/// `Phi_2 = E|<u,DF> - S^2| / sqrt(2 pi) + (sqrt 2 / 3) E|<u, D S^2>|`.
pub fn phi2(ing: &BoundIngredients) -> f64 {
    ing.e_inner_udf_minus_s2 / (2.0 * std::f64::consts::PI).sqrt() + std::f64::consts::SQRT_2 / 3.0 * ing.e_inner_uds2
}

/// `Delta = 3 Phi_2^{1/3} max{Phi_2, sqrt(2/pi)(2 + E S + E|F|)}^{2/3}`.
pub fn delta_bound(ing: &BoundIngredients) -> f64 {
    let p = phi2(ing);
    let other = (2.0 / std::f64::consts::PI).sqrt() * (2.0 + ing.e_s + ing.e_abs_f);
    3.0 * p.cbrt() * p.max(other).powf(2.0 / 3.0)
}

/// `d_Kol <= Delta^{alpha/(alpha+1)} (1 + E|S|^{-alpha})`, `0 < alpha <= 1`.
pub fn kolmogorov_transfer(delta: f64, alpha: f64, e_s_neg_alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(delta >= 0.0) || !(e_s_neg_alpha >= 0.0) || !e_s_neg_alpha.is_finite() {
        return Err(Error::Parameter("delta and E|S|^-alpha must be finite and nonnegative".into()));
    }
    Ok(delta.powf(alpha / (alpha + 1.0)) * (1.0 + e_s_neg_alpha))
}

/// `d_TV <= c d_W^{1/(1+2p)}` on the first `p` chaoses.
pub fn tv_transfer(d: f64, p: u32, c: f64) -> Result<f64> {
    if !(d >= 0.0) || p == 0 || !(c > 0.0) {
        return Err(Error::Parameter(format!("need d >= 0, p >= 1, c > 0 (got {d}, {p}, {c})")));
    }
    Ok(c * d.powf(1.0 / (1.0 + 2.0 * p as f64)))
}

/// `E|B_1|^{-alpha} = 2^{-alpha/2} Gamma((1-alpha)/2) / Gamma(1/2)` for `0 <= alpha < 1`.
pub fn e_abs_b1_neg_alpha(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("E|B_1|^-alpha is finite only for alpha < 1, got {alpha}")));
    }
    Ok(2f64.powf(-alpha / 2.0) * gamma((1.0 - alpha) / 2.0) / std::f64::consts::PI.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub delta: f64,
    pub kolmogorov_bound: f64,
    pub alpha: f64,
    pub tv_bound: Option<f64>,
    pub provenance: Provenance,
}

impl BoundReport {
    /// `tv` is `(p, c)` for the chaos transfer applied to `Delta`.
    pub fn build(
        n: usize,
        ing: &BoundIngredients,
        alpha: f64,
        e_s_neg_alpha: f64,
        tv: Option<(u32, f64)>,
        provenance: Provenance,
    ) -> Result<Self> {
        let delta = delta_bound(ing);
        let kolmogorov_bound = kolmogorov_transfer(delta, alpha, e_s_neg_alpha)?;
        let tv_bound = tv.map(|(p, c)| tv_transfer(delta, p, c)).transpose()?;
        Ok(BoundReport { n, delta, kolmogorov_bound, alpha, tv_bound, provenance })
    }
}

/// Analytic envelopes at `H = 1/2`: `(sqrt2/sqrt n + 1/(4n), 1/sqrt n, sqrt n / sqrt(2n+2))`
/// for `E|<u,DF> - S^2|`, `E|<u, D S^2>|` and `E|F_n|`.
pub fn prop36_analytic_bounds(n: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    (
        std::f64::consts::SQRT_2 / nf.sqrt() + 0.25 / nf,
        1.0 / nf.sqrt(),
        nf.sqrt() / (2.0 * nf + 2.0).sqrt(),
    )
}

/// Inner products of one Brownian replicate for `u_n(t) = sqrt(n) t^n B_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop36Replicate {
    /// `<u, DF> - S^2`.
    pub inner_udf_minus_s2: f64,
    /// `<u, D S^2>`.
    pub inner_uds2: f64,
    pub f: f64,
    pub s: f64,
    pub s2: f64,
}

/// Left-point discretization on `{0, 1/m, ..., 1}`; the inner integral
/// `int_s^1 t^n dB_t` is a backward partial sum of the same increments.
pub fn prop36_replicate(values: &[f64], n: usize) -> Prop36Replicate {
    let m = values.len() - 1;
    let dt = 1.0 / m as f64;
    let nf = n as f64;
    let pow: Vec<f64> = (0..m).map(|i| (i as f64 * dt).powi(n as i32)).collect();
    let mut tail = 0.0;
    let mut udf = 0.0;
    let mut uds = 0.0;
    let mut ito = 0.0;
    for i in (0..m).rev() {
        let db = values[i + 1] - values[i];
        tail += pow[i] * db;
        let b = values[i];
        udf += pow[i] * pow[i] * b * b + pow[i] * b * tail;
        uds += pow[i] * b;
        ito += pow[i] * b * db;
    }
    let b1 = values[m];
    let s2 = 0.5 * b1 * b1;
    Prop36Replicate {
        inner_udf_minus_s2: nf * dt * udf - s2,
        inner_uds2: nf.sqrt() * b1 * dt * uds,
        f: nf.sqrt() * ito,
        s: s2.sqrt(),
        s2,
    }
}

/// Minimum replicas for the ingredient estimators.
pub const MIN_REPLICAS: usize = 1000;

/// Monte Carlo ingredients at `H = 1/2` on the grid of `8n` intervals.
pub fn estimate_prop36_ingredients(n: usize, replicas: usize, seed: u64) -> Result<BoundIngredients> {
    estimate_prop36_ingredients_on_grid(n, ITO_RESOLUTION * n, replicas, seed)
}

/// As [`estimate_prop36_ingredients`] with `m` grid intervals.
pub fn estimate_prop36_ingredients_on_grid(n: usize, m: usize, replicas: usize, seed: u64) -> Result<BoundIngredients> {
    if replicas < MIN_REPLICAS {
        return Err(Error::Parameter(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    let sampler = ItoSampler::new(n, m)?;
    let reps = map_replicas(replicas, |r| {
        let (values, _) = sampler.sample_with_path(seed, r);
        prop36_replicate(&values, n)
    });
    let mut acc = [MeanAccumulator::new(), MeanAccumulator::new(), MeanAccumulator::new(), MeanAccumulator::new()];
    for r in &reps {
        acc[0].push(r.inner_udf_minus_s2.abs());
        acc[1].push(r.inner_uds2.abs());
        acc[2].push(r.f.abs());
        acc[3].push(r.s);
    }
    BoundIngredients::with_errors(
        acc[0].mean(),
        acc[1].mean(),
        acc[2].mean(),
        acc[3].mean(),
        [acc[0].std_error(), acc[1].std_error(), acc[2].std_error(), acc[3].std_error()],
    )
}

/// Names of the five weighted-variation bound terms.
pub const WEIGHTED_QV_TERM_NAMES: [&str; 5] = ["u_d2f_minus_s2", "u_df_df", "u_ds2_ds2", "u_d2s2", "u_df_ds2"];

/// The five term estimates and the aggregate
/// `E[|T1|/2 + |T2| + |T3| + |T4| + |T5|]` (unit constants).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedQvTerms {
    pub n: usize,
    pub hurst: f64,
    pub terms: [Estimate; 5],
    pub aggregate: Estimate,
}

/// Dense `n x n` inner-product tables for the weighted variation at level `n`,
/// with `beta_jk = <delta_j, delta_k>` and `e_jk = <delta_j, 1_[0,k/n]>`.
pub struct WeightedQvKernel {
    n: usize,
    hurst: Hurst,
    sigma: f64,
    beta: Vec<f64>,
    beta2: Vec<f64>,
    beta_e: Vec<f64>,
    e: Vec<f64>,
    e2: Vec<f64>,
}

/// Largest level accepted by [`WeightedQvKernel`] (five dense `n x n` tables).
pub const MAX_KERNEL_N: usize = 4096;

impl WeightedQvKernel {
    pub fn new(n: usize, hurst: Hurst) -> Result<Self> {
        let hv = hurst.value();
        if !(hv > 0.25 && hv <= 0.5) {
            return Err(Error::Hypothesis(format!("the weighted-variation terms need 1/4 < H <= 1/2, got {hv}")));
        }
        if n == 0 || n > MAX_KERNEL_N {
            return Err(Error::Budget(format!("level must lie in 1..={MAX_KERNEL_N}, got {n}")));
        }
        let sigma = sigma_h_series(hurst, SIGMA_TOLERANCE)?;
        let mut beta = vec![0.0; n * n];
        let mut e = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                beta[j * n + k] = increment_inner(j, k, n, hurst);
                e[j * n + k] = indicator_increment_inner(k as f64 / n as f64, j, n, hurst);
            }
        }
        let beta2 = beta.iter().map(|b| b * b).collect();
        let beta_e = beta.iter().zip(&e).map(|(b, x)| b * x).collect();
        let e2 = e.iter().map(|x| x * x).collect();
        Ok(WeightedQvKernel { n, hurst, sigma, beta, beta2, beta_e, e, e2 })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `|T1|..|T5|` for each path (values at `{0, 1/n, ..., 1}`).
    pub fn terms(&self, paths: &[Vec<f64>], f: &WeightFunction) -> Vec<[f64; 5]> {
        let n = self.n;
        let r = paths.len();
        if r == 0 {
            return Vec::new();
        }
        let nf = n as f64;
        let var = nf.powf(-2.0 * self.hurst.value());
        let c = nf.powf(2.0 * self.hurst.value() - 0.5);
        // Column-stacked inputs, row k holds the replicas' k-th entries.
        let mut cols = vec![vec![0.0; n * r]; 7];
        let mut fvals = vec![0.0; n * r];
        for (p, values) in paths.iter().enumerate() {
            for k in 0..n {
                let x = values[k];
                let db = values[k + 1] - x;
                let i2 = db * db - var;
                let (f0, f1, f2) = (f.eval(x), f.derivative_unchecked(1, x), f.derivative_unchecked(2, x));
                let at = k * r + p;
                fvals[at] = f0;
                cols[0][at] = f0;
                cols[1][at] = f1 * db;
                cols[2][at] = f2 * i2;
                cols[3][at] = f0 * db;
                cols[4][at] = f1 * i2;
                cols[5][at] = f0 * f1;
                cols[6][at] = f1 * f1 + f0 * f2;
            }
        }
        let mats: [&[f64]; 7] = [&self.beta2, &self.beta_e, &self.e2, &self.beta, &self.e, &self.e, &self.e2];
        let prod: Vec<Vec<f64>> = mats.iter().zip(&cols).map(|(m, x)| gemm(m, n, x, r)).collect();
        let sig = self.sigma;
        (0..r)
            .map(|p| {
                let mut t = [0.0; 5];
                let mut s2 = 0.0;
                for j in 0..n {
                    let at = j * r + p;
                    let fj = fvals[at];
                    s2 += fj * fj;
                    t[0] += fj * (2.0 * prod[0][at] + 4.0 * prod[1][at] + prod[2][at]);
                    let g = c * (2.0 * prod[3][at] + prod[4][at]);
                    let h = 2.0 * sig / nf * prod[5][at];
                    t[1] += fj * g * g;
                    t[2] += fj * h * h;
                    t[3] += fj * 2.0 * sig / nf * prod[6][at];
                    t[4] += fj * g * h;
                }
                t[0] = c * c * t[0] - sig * s2 / nf;
                for (i, x) in t.iter_mut().enumerate() {
                    if i > 0 {
                        *x *= c;
                    }
                    *x = x.abs();
                }
                t
            })
            .collect()
    }
}

/// `A (n x n) * X (n x r)`, row-major.
fn gemm(a: &[f64], n: usize, x: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * r];
    // SAFETY: a is n*n, x and out are n*r, all row-major and contiguous.
    unsafe {
        matrixmultiply::dgemm(
            n, n, r, 1.0,
            a.as_ptr(), n as isize, 1,
            x.as_ptr(), r as isize, 1,
            0.0,
            out.as_mut_ptr(), r as isize, 1,
        );
    }
    out
}

/// Monte Carlo estimates of the five weighted-variation terms at level `n`.
pub fn estimate_weighted_qv_terms(
    n: usize,
    f: &WeightFunction,
    h: Hurst,
    replicas: usize,
    seed: u64,
) -> Result<WeightedQvTerms> {
    if f.derivative_count() < 2 {
        return Err(Error::Contract(format!(
            "the term estimators need f, f', f''; weight supplies {} derivatives",
            f.derivative_count()
        )));
    }
    if replicas < 2 {
        return Err(Error::Parameter("need at least two replicas".into()));
    }
    let kernel = WeightedQvKernel::new(n, h)?;
    let sampler = FbmSampler::new(TimeGrid::uniform(n, 1.0)?, h)?;
    let rows = map_replica_chunks(replicas, |range| {
        let mut rngs: Vec<ChaCha8Rng> = range.map(|r| replica_rng(seed, r)).collect();
        let paths = sampler.sample_values_batch(&mut rngs);
        kernel.terms(&paths, f)
    });
    let mut acc: [MeanAccumulator; 5] = Default::default();
    let mut agg = MeanAccumulator::new();
    for t in &rows {
        for (a, &x) in acc.iter_mut().zip(t) {
            a.push(x);
        }
        agg.push(0.5 * t[0] + t[1..].iter().sum::<f64>());
    }
    Ok(WeightedQvTerms {
        n,
        hurst: h.value(),
        terms: [(&acc[0]).into(), (&acc[1]).into(), (&acc[2]).into(), (&acc[3]).into(), (&acc[4]).into()],
        aggregate: (&agg).into(),
    })
}

/// Key of a bound term in the multivariate smooth bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TermKey {
    /// `E|<D^{q_k} F_j, u_k> - 1_{j=k} S_j^2|` (zero-based `j`, `k`).
    Second { j: usize, k: usize },
    /// `E[prod_s S_s^{|b''_.s| - 2 l_s} |<u_k, ...>|]` for `beta` in `B_0(q_k)`.
    Star { k: usize, beta: MultiIndexBeta, ls: Vec<u32> },
}

/// All `l`-tuples with `0 <= l_s <= floor(|b''_.s| / 2)`.
pub fn l_tuples(beta: &MultiIndexBeta) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for c in beta.column_norms_second() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=c / 2).map(move |l| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

/// Derivative tuple of `d^2 phi / dx_j dx_k` with `m` leading `y`-slots.
pub fn second_order_tuple(j: usize, k: usize, m: usize, d: usize) -> DerivativeOrder {
    let mut x = vec![0; d];
    x[j] += 1;
    x[k] += 1;
    DerivativeOrder { y: vec![0; m], x }
}

/// One weighted term of the assembled bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTerm {
    pub key: TermKey,
    pub derivative: DerivativeOrder,
    /// Combinatorial weight (`1/2` for second-order terms, `W_hat / 2` otherwise).
    pub weight: f64,
}

/// Enumerates the bound terms for `q_list` (one chaos order per coordinate).
pub fn theorem51_terms(q_list: &[usize], d: usize, m: usize) -> Result<Vec<BoundTerm>> {
    if q_list.len() != d || d == 0 {
        return Err(Error::Contract(format!("q_list has {} entries, expected d = {d} >= 1", q_list.len())));
    }
    let mut out = Vec::new();
    for j in 0..d {
        for k in 0..d {
            out.push(BoundTerm {
                key: TermKey::Second { j, k },
                derivative: second_order_tuple(j, k, m, d),
                weight: 0.5,
            });
        }
    }
    for (k, &q) in q_list.iter().enumerate() {
        if q == 0 {
            return Err(Error::Parameter("chaos orders must be at least 1".into()));
        }
        for beta in enumerate_b0(q, m, d)? {
            for ls in l_tuples(&beta) {
                let weight = 0.5 * coeff_w_hat(&beta, &ls)?;
                let derivative = derivative_order(&beta, &ls, k)?;
                out.push(BoundTerm { key: TermKey::Star { k, beta: beta.clone(), ls }, derivative, weight });
            }
        }
    }
    Ok(out)
}

/// `sum weight * ||d_star phi|| * estimate` over [`theorem51_terms`].
pub fn assemble_theorem51_bound(
    q_list: &[usize],
    d: usize,
    m: usize,
    phi_norms: &BTreeMap<DerivativeOrder, f64>,
    term_estimates: &BTreeMap<TermKey, f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for term in theorem51_terms(q_list, d, m)? {
        let norm = phi_norms.get(&term.derivative).ok_or_else(|| {
            Error::Contract(format!("missing sup-norm for derivative tuple {:?}", term.derivative))
        })?;
        let est = term_estimates
            .get(&term.key)
            .ok_or_else(|| Error::Contract(format!("missing term estimate for {:?}", term.key)))?;
        total += term.weight * norm * est;
    }
    Ok(total)
}

/// Exact constants of the one-dimensional first-chaos bound
/// `c1 ||phi''|| E|<u,DF> - S^2| + c2 ||phi'''|| E|<u, D S^2>|`:
/// `c1 = 1/2`, and `c2 = (1/2) W_hat (1/2)` using `E[S |<u,DS>|] = E|<u, D S^2>| / 2`.
pub fn prop31_constants() -> Result<(BigRational, BigRational)> {
    let half = BigRational::new(1.into(), 2.into());
    let b0 = enumerate_b0(1, 0, 1)?;
    let mut c2 = BigRational::from_integer(0.into());
    for beta in &b0 {
        for ls in l_tuples(beta) {
            c2 += &half * coeff_w_hat_exact(beta, &ls)? * &half;
        }
    }
    Ok((half, c2))
}

/// Float view of [`prop31_constants`].
pub fn prop31_constants_f64() -> Result<(f64, f64)> {
    let (a, b) = prop31_constants()?;
    Ok((a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN)))
}
