//! Gauss–Hermite quadrature for expectations against the standard Gaussian.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Number of nodes per Gaussian dimension used by the library.
pub const STANDARD_NODES: usize = 200;

/// Largest rule supported by [`GaussHermite::new`]; beyond roughly 750 nodes
/// the Christoffel sums overflow in double precision.
pub const MAX_NODES: usize = 600;

/// Largest tensorized dimension.
pub const MAX_DIMENSION: usize = 3;

/// Nodes and weights with `E[f(eta)] ~ sum_i w_i f(x_i)`, `eta ~ N(0,1)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule with `n` nodes (exact for polynomials of degree `2n - 1`),
    /// from the eigen-decomposition of the Jacobi matrix of `He_k`.
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_NODES).contains(&n), "Gauss–Hermite rule needs 1..={MAX_NODES} nodes, got {n}");
        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (1..=n).map(|k| if k < n { (k as f64).sqrt() } else { 0.0 }).collect();
        let mut first_row = vec![0.0; n];
        first_row[0] = 1.0;
        tridiagonal_ql(&mut diag, &mut off, &mut first_row);
        let mut pairs: Vec<(f64, f64)> =
            diag.into_iter().zip(first_row.into_iter().map(|v| v * v)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Exact symmetry about 0.
        for i in 0..n / 2 {
            let x = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
            let w = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[n - 1 - i] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        // Newton polish on the orthonormal polynomial, then Christoffel weights
        // 1 / sum_k p_k(x)^2, which keep full relative accuracy in the tails.
        for pair in pairs.iter_mut() {
            for _ in 0..2 {
                let (pn, pn1, _) = orthonormal_values(n, pair.0);
                if pn1 != 0.0 {
                    pair.0 -= pn / ((n as f64).sqrt() * pn1);
                }
            }
            pair.1 = 1.0 / orthonormal_values(n, pair.0).2;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        GaussHermite {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    /// Shared 200-node rule.
    pub fn standard() -> &'static GaussHermite {
        static RULE: OnceLock<GaussHermite> = OnceLock::new();
        RULE.get_or_init(|| GaussHermite::new(STANDARD_NODES))
    }

    /// Ascending nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(eta)]`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E[f(eta_1, ..., eta_d)]` for i.i.d. standard Gaussians, `1 <= d <= 3`.
    pub fn expect_nd(&self, d: usize, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::Parameter(format!(
                "tensorized quadrature supports 1..={MAX_DIMENSION} dimensions, got {d}"
            )));
        }
        let n = self.nodes.len();
        let mut idx = vec![0usize; d];
        let mut point = vec![0.0; d];
        let mut total = 0.0;
        loop {
            let mut weight = 1.0;
            for l in 0..d {
                point[l] = self.nodes[idx[l]];
                weight *= self.weights[idx[l]];
            }
            if weight > 0.0 {
                total += weight * f(&point);
            }
            let mut l = 0;
            loop {
                idx[l] += 1;
                if idx[l] < n {
                    break;
                }
                idx[l] = 0;
                l += 1;
                if l == d {
                    return Ok(total);
                }
            }
        }
    }
}

/// `(p_n(x), p_{n-1}(x), sum_{k<n} p_k(x)^2)` for the orthonormal
/// probabilists' Hermite polynomials `p_k = He_k / sqrt(k!)`.
fn orthonormal_values(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut sum = 0.0;
    for k in 0..n {
        sum += cur * cur;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev, sum)
}

/// Implicit QL on a symmetric tridiagonal matrix (`diag`, `off[i]` joining
/// rows `i` and `i+1`, `off[n-1] = 0`). On return `diag` holds eigenvalues
/// and `row` holds the first row of the eigenvector matrix applied to the
/// initial `row`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], row: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 100, "tridiagonal QL failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let t = row[i + 1];
                row[i + 1] = s * row[i] + c * t;
                row[i] = c * row[i] - s * t;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::hermite::hermite;

    #[test]
    fn weights_and_even_moments() {
        let gh = GaussHermite::standard();
        assert_eq!(gh.nodes().len(), 200);
        assert!((gh.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        let mut double_fact = 1.0;
        for k in 1..=10 {
            double_fact *= (2 * k - 1) as f64;
            let m = gh.expect(|x| x.powi(2 * k as i32));
            assert!((m / double_fact - 1.0).abs() < 1e-10, "k = {k}");
            assert!(gh.expect(|x| x.powi(2 * k as i32 - 1)).abs() < 1e-8);
        }
    }

    #[test]
    fn small_rule_is_exact_for_low_degree() {
        let gh = GaussHermite::new(3);
        assert!((gh.expect(|x| x.powi(4)) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn largest_rule_stays_accurate() {
        let gh = GaussHermite::new(MAX_NODES);
        assert!(gh.weights().iter().all(|w| w.is_finite() && *w >= 0.0));
        assert!((gh.expect(|x| x.powi(8)) - 105.0).abs() < 1e-10);
        assert!((gh.expect(f64::cos) - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    #[should_panic(expected = "nodes")]
    fn oversized_rule_rejected() {
        GaussHermite::new(MAX_NODES + 1);
    }

    #[test]
    fn hermite_orthogonality() {
        let gh = GaussHermite::standard();
        let mut q_fact = 1.0;
        for q in 0..=10 {
            if q > 0 {
                q_fact *= q as f64;
            }
            for p in 0..=10 {
                let v = gh.expect(|x| hermite(p, x) * hermite(q, x));
                let expected = if p == q { q_fact } else { 0.0 };
                assert!((v - expected).abs() < 1e-8 * q_fact.max(1.0), "p={p} q={q} v={v}");
            }
        }
    }

    #[test]
    fn cosine_moment() {
        let gh = GaussHermite::standard();
        assert!((gh.expect(f64::cos) - (-0.5f64).exp()).abs() < 1e-14);
        let two = gh.expect_nd(2, |x| (x[0] + x[1]).cos()).unwrap();
        assert!((two - (-1.0f64).exp()).abs() < 1e-12);
        assert!(gh.expect_nd(4, |_| 1.0).is_err());
    }
}
