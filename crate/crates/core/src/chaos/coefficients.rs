//! Exact Faà di Bruno and Hermite-weight coefficients, and the Beta function.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::hermite::factorial;
use super::multiindex::{MultiIndexAlpha, MultiIndexBeta};
use crate::error::{Error, Result};

fn rational(n: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `C(alpha) = q! / (prod_i i!^{k_i} prod_l a_l! prod_ij b_ij!)`.
pub fn coeff_c(alpha: &MultiIndexAlpha) -> BigRational {
    let mut denom = BigUint::one();
    for (i, &k) in alpha.k.iter().enumerate() {
        denom *= factorial(i as u64 + 1).pow(k);
    }
    for &a in &alpha.a {
        denom *= factorial(a as u64);
    }
    for &b in alpha.b.iter().flatten() {
        denom *= factorial(b as u64);
    }
    BigRational::new(BigInt::from(factorial(alpha.q as u64)), BigInt::from(denom))
}

fn check_ls(beta: &MultiIndexBeta, ls: &[u32]) -> Result<Vec<u32>> {
    let cols = beta.column_norms_second();
    if ls.len() != beta.d {
        return Err(Error::Contract(format!("expected {} l-values, got {}", beta.d, ls.len())));
    }
    for (s, (&l, &c)) in ls.iter().zip(&cols).enumerate() {
        if 2 * l > c {
            return Err(Error::Contract(format!(
                "l_{} = {l} exceeds floor(|b''_.{}|/2) = {}",
                s + 1,
                s + 1,
                c / 2
            )));
        }
    }
    Ok(cols)
}

/// `W(beta; l) = C(alpha(beta)) prod_ij binom(b'_ij + b''_ij, b'_ij)
///  prod_s |b''_.s|! / (2^{l_s} (|b''_.s| - 2 l_s)! l_s!)`.
pub fn coeff_w(beta: &MultiIndexBeta, ls: &[u32]) -> Result<BigRational> {
    let cols = check_ls(beta, ls)?;
    let mut w = coeff_c(&beta.alpha());
    for (r1, r2) in beta.b_prime.iter().zip(&beta.b_second) {
        for (&x, &y) in r1.iter().zip(r2) {
            let binom = factorial((x + y) as u64) / (factorial(x as u64) * factorial(y as u64));
            w *= rational(binom);
        }
    }
    for (&c, &l) in cols.iter().zip(ls) {
        let num = factorial(c as u64);
        let den = (BigUint::one() << l as usize)
            * factorial((c - 2 * l) as u64)
            * factorial(l as u64);
        w *= BigRational::new(BigInt::from(num), BigInt::from(den));
    }
    Ok(w)
}

/// `B(a + 1/2, k + 1) = k! / prod_{i=0}^{k} (a + 1/2 + i)`, exact.
pub fn beta_half_integer(a: u32, k: u32) -> BigRational {
    let mut r = rational(factorial(k as u64));
    for i in 0..=k {
        // a + 1/2 + i = (2a + 2i + 1) / 2
        r *= BigRational::new(BigInt::from(2u32), BigInt::from(2 * a + 2 * i + 1));
    }
    r
}

/// `W_hat(beta; l) = W(beta; l) B(|b'| + 1/2, |b''| + 1)`, exact.
pub fn coeff_w_hat_exact(beta: &MultiIndexBeta, ls: &[u32]) -> Result<BigRational> {
    Ok(coeff_w(beta, ls)? * beta_half_integer(beta.norm_prime(), beta.norm_second()))
}

/// `W_hat(beta; l)` as a float.
pub fn coeff_w_hat(beta: &MultiIndexBeta, ls: &[u32]) -> Result<f64> {
    Ok(to_f64(&coeff_w(beta, ls)?) * beta_function(beta.norm_prime() as f64 + 0.5, beta.norm_second() as f64 + 1.0)?)
}

/// Euler Beta function `B(u, v)`, `u, v > 0`.
pub fn beta_function(u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) || !u.is_finite() || !v.is_finite() {
        return Err(Error::Domain(format!("Beta function needs positive arguments, got ({u}, {v})")));
    }
    // Integer second argument: (v-1)! / prod_{i<v} (u + i), free of gamma round-off.
    for (x, y) in [(u, v), (v, u)] {
        if y.fract() == 0.0 && y <= 64.0 {
            let n = y as u32;
            let mut r = 1.0;
            for i in 0..n {
                r *= if i == 0 { 1.0 / x } else { i as f64 / (x + i as f64) };
            }
            return Ok(r);
        }
    }
    Ok((ln_gamma(u) + ln_gamma(v) - ln_gamma(u + v)).exp())
}

/// Orders of the derivative `d_star^{(beta; l)} phi_{x_k}`: `y_l` is
/// differentiated `a_l` times and `x_j` is differentiated
/// `sum_i b_ij + |b''_.j| - 2 l_j + [j = k]` times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DerivativeOrder {
    pub y: Vec<u32>,
    pub x: Vec<u32>,
}

impl DerivativeOrder {
    pub fn total(&self) -> u32 {
        self.y.iter().chain(&self.x).sum()
    }
}

/// Derivative tuple for `d_star^{(beta; l)} phi_{x_k}` with `k` zero-based.
pub fn derivative_order(beta: &MultiIndexBeta, ls: &[u32], k: usize) -> Result<DerivativeOrder> {
    let cols = check_ls(beta, ls)?;
    if k >= beta.d {
        return Err(Error::Contract(format!("coordinate index {k} out of range for d = {}", beta.d)));
    }
    let sums = beta.alpha().column_sums();
    let x = (0..beta.d)
        .map(|j| sums[j] + cols[j] - 2 * ls[j] + u32::from(j == k))
        .collect();
    Ok(DerivativeOrder { y: beta.a.clone(), x })
}

/// Faà di Bruno sum `sum_{alpha in A(q;0,1)} C(alpha) f^{(|k|)}(g) prod_i (g^{(i)})^{k_i}`,
/// given `f_derivs[j] = f^{(j)}(g(x))` for `j <= q` and
/// `g_derivs[i-1] = g^{(i)}(x)` for `1 <= i <= q`.
pub fn faa_di_bruno(q: usize, f_derivs: &[f64], g_derivs: &[f64]) -> Result<f64> {
    if f_derivs.len() < q + 1 || g_derivs.len() < q {
        return Err(Error::Contract(format!("order {q} needs {} f- and {q} g-derivatives", q + 1)));
    }
    let alphas = super::multiindex::enumerate_a(q, 0, 1)?;
    Ok(alphas
        .iter()
        .map(|alpha| {
            let total: u32 = alpha.k.iter().sum();
            let prod: f64 = alpha
                .k
                .iter()
                .enumerate()
                .map(|(i, &ki)| g_derivs[i].powi(ki as i32))
                .product();
            to_f64(&coeff_c(alpha)) * f_derivs[total as usize] * prod
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::multiindex::{enumerate_a, enumerate_b0};
    use num_complex::Complex64;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn c_examples() {
        let a1 = enumerate_a(1, 0, 1).unwrap();
        assert_eq!(coeff_c(&a1[0]), r(1, 1));
        let a2 = enumerate_a(2, 0, 1).unwrap();
        assert!(a2.iter().all(|a| coeff_c(a) == r(1, 1)));
        let mut c3: Vec<_> = enumerate_a(3, 0, 1).unwrap().iter().map(coeff_c).collect();
        c3.sort();
        assert_eq!(c3, vec![r(1, 1), r(1, 1), r(3, 1)]);
    }

    #[test]
    fn w_examples() {
        let b0 = enumerate_b0(1, 0, 1).unwrap();
        assert_eq!(coeff_w(&b0[0], &[0]).unwrap(), r(1, 1));
        assert_eq!(coeff_w_hat_exact(&b0[0], &[0]).unwrap(), r(4, 3));
        assert!((coeff_w_hat(&b0[0], &[0]).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(coeff_w(&b0[0], &[1]).is_err());
        assert!(coeff_w(&b0[0], &[0, 0]).is_err());
        // b'' = 0 gives W = C(alpha).
        for beta in crate::chaos::multiindex::enumerate_b(3, 1, 2).unwrap() {
            if beta.norm_second() == 0 {
                assert_eq!(coeff_w(&beta, &[0, 0]).unwrap(), coeff_c(&beta.alpha()));
            }
        }
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_function(1.0, 1.0).unwrap(), 1.0);
        assert!((beta_function(0.5, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((beta_function(0.5, 0.5).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert!(beta_function(0.0, 1.0).is_err());
        for a in 0..5 {
            for k in 0..6 {
                let exact = to_f64(&beta_half_integer(a, k));
                let float = beta_function(a as f64 + 0.5, k as f64 + 1.0).unwrap();
                let gamma = (ln_gamma(a as f64 + 0.5) + ln_gamma(k as f64 + 1.0)
                    - ln_gamma(a as f64 + k as f64 + 1.5))
                .exp();
                assert!((exact - float).abs() < 1e-14 * exact);
                assert!((exact - gamma).abs() < 1e-12 * exact);
            }
        }
    }

    #[test]
    fn derivative_order_reduction() {
        let b0 = enumerate_b0(1, 0, 1).unwrap();
        let o = derivative_order(&b0[0], &[0], 0).unwrap();
        assert_eq!(o, DerivativeOrder { y: vec![], x: vec![3] });
    }

    /// `h^{(q)}(x0)` by the Cauchy integral formula on a circle of radius `rad`.
    fn cauchy_derivative(h: impl Fn(Complex64) -> Complex64, x0: f64, q: usize, rad: f64) -> f64 {
        let n = 256;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let z = Complex64::from_polar(rad, theta);
            acc += h(x0 + z) * Complex64::from_polar(1.0, -(q as f64) * theta);
        }
        let q_fact: f64 = (1..=q).map(|i| i as f64).product();
        (acc / n as f64).re * q_fact / rad.powi(q as i32)
    }

    #[test]
    fn faa_di_bruno_matches_composite_derivatives() {
        // f = exp, g = sin: (f o g)^{(q)} via contour integral.
        for q in 1..=6 {
            for &x in &[-0.7f64, 0.2, 1.3] {
                let g = x.sin();
                let f_derivs = vec![g.exp(); q + 1];
                let g_derivs: Vec<f64> = (1..=q)
                    .map(|i| (x + i as f64 * std::f64::consts::FRAC_PI_2).sin())
                    .collect();
                let fdb = faa_di_bruno(q, &f_derivs, &g_derivs).unwrap();
                let oracle = cauchy_derivative(|z| z.sin().exp(), x, q, 0.5);
                assert!((fdb - oracle).abs() <= 1e-4 * oracle.abs().max(1e-3), "q={q} x={x}");
            }
        }
    }
}
