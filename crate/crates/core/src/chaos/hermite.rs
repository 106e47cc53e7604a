//! Probabilists' Hermite polynomials and the Hermite expansion of monomials.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// `H_q(x)` by the three-term recurrence `H_{q+1} = x H_q - q H_{q-1}`.
pub fn hermite(q: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return prev;
    }
    for j in 1..q {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Monomial coefficients `[c_0, ..., c_q]` of `H_q`.
pub fn hermite_coefficients(q: usize) -> Vec<BigInt> {
    let mut prev = vec![BigInt::one()];
    if q == 0 {
        return prev;
    }
    let mut cur = vec![BigInt::zero(), BigInt::one()];
    for j in 1..q {
        let mut next = vec![BigInt::zero(); j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c * BigInt::from(j);
        }
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Coefficients `c_j = k! / (2^j (k-2j)! j!)` with `x^k = sum_j c_j H_{k-2j}(x)`,
/// for `j = 0..=k/2`.
pub fn hermite_expand_power(k: usize) -> Vec<BigUint> {
    let k = k as u64;
    let kf = factorial(k);
    (0..=k / 2)
        .map(|j| &kf / (factorial(k - 2 * j) * factorial(j) * (BigUint::one() << j as usize)))
        .collect()
}
