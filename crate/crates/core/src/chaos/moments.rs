//! Gaussian moment identity: `E[f(alpha . eta) prod eta_l^{k_l}]` rewritten
//! as a combination of derivative expectations.

use num_traits::ToPrimitive;

use super::hermite::hermite_expand_power;
use super::quadrature::GaussHermite;
use super::smooth::SmoothFunction;
use crate::error::{Error, Result};

/// Right-hand side of the moment identity
/// `sum_j prod_l [k_l! / (2^{j_l} (k_l - 2 j_l)! j_l!) alpha_l^{k_l - 2 j_l}]
///  E[d^{k - 2j} f(alpha_1 eta_1, ..., alpha_d eta_d)]`,
/// with each expectation evaluated by tensorized Gauss–Hermite quadrature.
pub fn gaussian_moment_functional(
    f: &dyn SmoothFunction,
    alphas: &[f64],
    ks: &[usize],
) -> Result<f64> {
    let d = alphas.len();
    if ks.len() != d || f.dim() != d {
        return Err(Error::Contract(format!(
            "dimension mismatch: {} scales, {} exponents, function of {} variables",
            d,
            ks.len(),
            f.dim()
        )));
    }
    let total: usize = ks.iter().sum();
    if total > f.max_order() {
        return Err(Error::Contract(format!(
            "moment of total order {total} needs {total} derivatives, only {} supplied",
            f.max_order()
        )));
    }
    let coeffs: Vec<Vec<f64>> = ks
        .iter()
        .map(|&k| hermite_expand_power(k).iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect())
        .collect();
    let gh = GaussHermite::standard();
    let mut js = vec![0usize; d];
    let mut sum = 0.0;
    loop {
        let orders: Vec<usize> = ks.iter().zip(&js).map(|(&k, &j)| k - 2 * j).collect();
        let weight: f64 = (0..d)
            .map(|l| coeffs[l][js[l]] * alphas[l].powi(orders[l] as i32))
            .product();
        if weight != 0.0 {
            let expectation = gh.expect_nd(d, |eta| {
                let x: Vec<f64> = eta.iter().zip(alphas).map(|(e, a)| e * a).collect();
                f.partial(&orders, &x)
            })?;
            sum += weight * expectation;
        }
        let mut l = 0;
        loop {
            if l == d {
                return Ok(sum);
            }
            js[l] += 1;
            if 2 * js[l] <= ks[l] {
                break;
            }
            js[l] = 0;
            l += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::smooth::{Ridge, Smooth1};

    fn one_d(profile: Smooth1, max_order: usize) -> Ridge {
        Ridge { profile, weights: vec![1.0], max_order }
    }

    fn lhs(f: &dyn SmoothFunction, alphas: &[f64], ks: &[usize]) -> f64 {
        GaussHermite::standard()
            .expect_nd(alphas.len(), |eta| {
                let x: Vec<f64> = eta.iter().zip(alphas).map(|(e, a)| e * a).collect();
                let monomial: f64 = eta.iter().zip(ks).map(|(e, &k)| e.powi(k as i32)).product();
                f.eval(&x) * monomial
            })
            .unwrap()
    }

    #[test]
    fn trivial_examples() {
        let one = one_d(Smooth1::constant(1.0), 6);
        assert!((gaussian_moment_functional(&one, &[1.0], &[2]).unwrap() - 1.0).abs() < 1e-13);
        let id = one_d(Smooth1::Polynomial { coeffs: vec![0.0, 1.0] }, 6);
        assert!((gaussian_moment_functional(&id, &[1.0], &[1]).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cosine_example_matches_quadrature() {
        let f = one_d(Smooth1::cos(), 6);
        let rhs = gaussian_moment_functional(&f, &[1.0], &[2]).unwrap();
        let direct = lhs(&f, &[1.0], &[2]);
        // E[cos(eta) eta^2] = E[cos] - E[cos] ... = 0 for alpha = 1.
        assert!((rhs - direct).abs() < 1e-13);
        assert!(direct.abs() < 1e-13);
        let rhs = gaussian_moment_functional(&f, &[0.7], &[2]).unwrap();
        let direct = lhs(&f, &[0.7], &[2]);
        assert!(((rhs - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn insufficient_derivatives_rejected() {
        let f = one_d(Smooth1::cos(), 2);
        assert!(matches!(gaussian_moment_functional(&f, &[1.0], &[3]), Err(Error::Contract(_))));
    }

    #[test]
    fn two_dimensional_case() {
        let f = Ridge { profile: Smooth1::cos(), weights: vec![1.0, 0.5], max_order: 6 };
        let rhs = gaussian_moment_functional(&f, &[0.6, -1.1], &[4, 2]).unwrap();
        let direct = lhs(&f, &[0.6, -1.1], &[4, 2]);
        assert!(((rhs - direct) / direct).abs() < 1e-8, "{rhs} vs {direct}");
    }
}
