//! Index sets of the multivariate Faà di Bruno formula.
//!
//! An element of `A(q; m, d)` is `(k_1..k_q; a_1..a_m; b_ij)` with
//! `sum_i i k_i = q`, `sum_l a_l + sum_j b_1j = k_1` and `sum_j b_ij = k_i`
//! for `i >= 2`. `B(q)` splits every `b_ij` as `b'_ij + b''_ij`; `B_0(q)`
//! additionally requires `b'_qj = 0`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum number of index vectors produced by one enumeration.
pub const ENUMERATION_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiIndexAlpha {
    pub q: usize,
    pub m: usize,
    pub d: usize,
    pub k: Vec<u32>,
    pub a: Vec<u32>,
    /// `q x d`, row `i` holds `b_{i+1, j}`.
    pub b: Vec<Vec<u32>>,
}

impl MultiIndexAlpha {
    /// Checks the Diophantine constraints.
    pub fn is_valid(&self) -> bool {
        if self.k.len() != self.q
            || self.a.len() != self.m
            || self.b.len() != self.q
            || self.b.iter().any(|row| row.len() != self.d)
        {
            return false;
        }
        let weighted: usize = self.k.iter().enumerate().map(|(i, &k)| (i + 1) * k as usize).sum();
        if weighted != self.q {
            return false;
        }
        (0..self.q).all(|i| {
            let row: u32 = self.b[i].iter().sum();
            let extra: u32 = if i == 0 { self.a.iter().sum() } else { 0 };
            row + extra == self.k[i]
        })
    }

    /// Total x_j derivative order `sum_i b_ij` for each `j`.
    pub fn column_sums(&self) -> Vec<u32> {
        (0..self.d).map(|j| self.b.iter().map(|row| row[j]).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiIndexBeta {
    pub q: usize,
    pub m: usize,
    pub d: usize,
    pub k: Vec<u32>,
    pub a: Vec<u32>,
    pub b_prime: Vec<Vec<u32>>,
    pub b_second: Vec<Vec<u32>>,
}

impl MultiIndexBeta {
    /// `alpha(beta)` with `b = b' + b''`.
    pub fn alpha(&self) -> MultiIndexAlpha {
        let b = self
            .b_prime
            .iter()
            .zip(&self.b_second)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| x + y).collect())
            .collect();
        MultiIndexAlpha { q: self.q, m: self.m, d: self.d, k: self.k.clone(), a: self.a.clone(), b }
    }

    /// `|b'|`.
    pub fn norm_prime(&self) -> u32 {
        self.b_prime.iter().flatten().sum()
    }

    /// `|b''|`.
    pub fn norm_second(&self) -> u32 {
        self.b_second.iter().flatten().sum()
    }

    /// `|b''_{. j}|` for each `j`.
    pub fn column_norms_second(&self) -> Vec<u32> {
        (0..self.d).map(|j| self.b_second.iter().map(|row| row[j]).sum()).collect()
    }

    /// Membership in `B_0`: `b'_qj = 0` for every `j`.
    pub fn in_b0(&self) -> bool {
        self.b_prime[self.q - 1].iter().all(|&x| x == 0)
    }
}

/// Integer partitions of `q` as multiplicity vectors `k` with
/// `sum_i i k_i = q`, in ascending lexicographic order of `k`.
pub fn partitions(q: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, remaining: usize, q: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i > q {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // Ascending k_i; the suffix must absorb what remains.
        let tail_max: usize = remaining;
        for ki in 0..=tail_max / i {
            cur.push(ki as u32);
            rec(i + 1, remaining - ki * i, q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, q, q, &mut Vec::with_capacity(q), &mut out);
    out
}

/// Weak compositions of `total` into `parts` entries, ascending lexicographic.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(total: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=total {
            cur.push(x);
            rec(total - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Cartesian product of choice lists, last list varying fastest.
fn cartesian(choices: &[Vec<Vec<u32>>]) -> Vec<Vec<Vec<u32>>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect()
    })
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_shape(q: usize, d: usize) -> Result<()> {
    if q == 0 || d == 0 {
        return Err(Error::Parameter(format!("need q >= 1 and d >= 1 (q={q}, d={d})")));
    }
    Ok(())
}

/// Cardinality of `A(q; m, d)` without enumerating it.
pub fn count_a(q: usize, m: usize, d: usize) -> f64 {
    partitions(q)
        .iter()
        .map(|k| {
            let first = binomial_f64(k[0] as u64 + (m + d) as u64 - 1, (m + d) as u64 - 1);
            let rest: f64 = k[1..]
                .iter()
                .map(|&ki| binomial_f64(ki as u64 + d as u64 - 1, d as u64 - 1))
                .product();
            first * rest
        })
        .sum()
}

/// All of `A(q; m, d)`, ordered lexicographically on `(k, a, b rows)`.
pub fn enumerate_a(q: usize, m: usize, d: usize) -> Result<Vec<MultiIndexAlpha>> {
    check_shape(q, d)?;
    let count = count_a(q, m, d);
    if count > ENUMERATION_BUDGET as f64 {
        return Err(Error::Budget(format!(
            "A(q={q}, m={m}, d={d}) has {count} elements, above the budget of {ENUMERATION_BUDGET}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for k in partitions(q) {
        let first_rows = compositions(k[0], m + d);
        let other_rows: Vec<Vec<Vec<u32>>> = k[1..].iter().map(|&ki| compositions(ki, d)).collect();
        for first in &first_rows {
            let a = first[..m].to_vec();
            let b1 = first[m..].to_vec();
            for rest in cartesian(&other_rows) {
                let mut b = Vec::with_capacity(q);
                b.push(b1.clone());
                b.extend(rest);
                out.push(MultiIndexAlpha { q, m, d, k: k.clone(), a: a.clone(), b });
            }
        }
    }
    Ok(out)
}

fn splits(alpha: &MultiIndexAlpha, restrict_last_row: bool) -> Vec<MultiIndexBeta> {
    let cells: Vec<(usize, usize)> =
        (0..alpha.q).flat_map(|i| (0..alpha.d).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let mut prime = vec![0u32; cells.len()];
    loop {
        let mut b_prime = vec![vec![0u32; alpha.d]; alpha.q];
        let mut b_second = vec![vec![0u32; alpha.d]; alpha.q];
        for (c, &(i, j)) in cells.iter().enumerate() {
            b_prime[i][j] = prime[c];
            b_second[i][j] = alpha.b[i][j] - prime[c];
        }
        let beta = MultiIndexBeta {
            q: alpha.q,
            m: alpha.m,
            d: alpha.d,
            k: alpha.k.clone(),
            a: alpha.a.clone(),
            b_prime,
            b_second,
        };
        if !restrict_last_row || beta.in_b0() {
            out.push(beta);
        }
        let mut c = cells.len();
        loop {
            if c == 0 {
                return out;
            }
            c -= 1;
            let (i, j) = cells[c];
            if prime[c] < alpha.b[i][j] {
                prime[c] += 1;
                break;
            }
            prime[c] = 0;
        }
    }
}

fn enumerate_splits(q: usize, m: usize, d: usize, restrict: bool) -> Result<Vec<MultiIndexBeta>> {
    let alphas = enumerate_a(q, m, d)?;
    let count: f64 = alphas
        .iter()
        .map(|a| a.b.iter().flatten().map(|&x| (x + 1) as f64).product::<f64>())
        .sum();
    if count > ENUMERATION_BUDGET as f64 {
        return Err(Error::Budget(format!(
            "B(q={q}, m={m}, d={d}) has {count} elements, above the budget of {ENUMERATION_BUDGET}"
        )));
    }
    Ok(alphas.iter().flat_map(|a| splits(a, restrict)).collect())
}

/// All of `B(q; m, d)`: every split `b = b' + b''` of every element of
/// `A(q; m, d)`, grouped by parent and ordered by `b'` lexicographically.
pub fn enumerate_b(q: usize, m: usize, d: usize) -> Result<Vec<MultiIndexBeta>> {
    enumerate_splits(q, m, d, false)
}

/// The subset of `B(q; m, d)` with `b'_qj = 0` for all `j`.
pub fn enumerate_b0(q: usize, m: usize, d: usize) -> Result<Vec<MultiIndexBeta>> {
    enumerate_splits(q, m, d, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Partition numbers by Euler's pentagonal recurrence.
    fn partition_numbers(up_to: usize) -> Vec<u64> {
        let mut p = vec![0i64; up_to + 1];
        p[0] = 1;
        for n in 1..=up_to {
            let mut s = 0i64;
            for k in 1.. {
                let g1 = k * (3 * k - 1) / 2;
                if g1 > n {
                    break;
                }
                let sign = if k % 2 == 1 { 1 } else { -1 };
                s += sign * p[n - g1];
                let g2 = k * (3 * k + 1) / 2;
                if g2 <= n {
                    s += sign * p[n - g2];
                }
            }
            p[n] = s;
        }
        p.into_iter().map(|x| x as u64).collect()
    }

    #[test]
    fn small_examples() {
        let a = enumerate_a(1, 0, 1).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].k, vec![1]);
        assert_eq!(a[0].b, vec![vec![1]]);

        let a = enumerate_a(2, 0, 1).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].k.clone(), a[0].b.clone()), (vec![0, 1], vec![vec![0], vec![1]]));
        assert_eq!((a[1].k.clone(), a[1].b.clone()), (vec![2, 0], vec![vec![2], vec![0]]));

        assert_eq!(enumerate_b(1, 0, 1).unwrap().len(), 2);
        let b0 = enumerate_b0(1, 0, 1).unwrap();
        assert_eq!(b0.len(), 1);
        assert_eq!((b0[0].b_prime[0][0], b0[0].b_second[0][0]), (0, 1));
        assert_eq!(enumerate_b(2, 0, 1).unwrap().len(), 5);
    }

    #[test]
    fn partition_counts() {
        let p = partition_numbers(10);
        for q in 1..=10 {
            assert_eq!(enumerate_a(q, 0, 1).unwrap().len() as u64, p[q], "q = {q}");
        }
    }

    #[test]
    fn enumeration_is_valid_sorted_and_unique() {
        for q in 1..=5 {
            for m in 0..=2 {
                for d in 1..=3 {
                    let a = enumerate_a(q, m, d).unwrap();
                    assert_eq!(a.len() as f64, count_a(q, m, d));
                    assert!(a.iter().all(MultiIndexAlpha::is_valid));
                    let keys: Vec<_> = a.iter().map(|x| (x.k.clone(), x.a.clone(), x.b.clone())).collect();
                    let mut sorted = keys.clone();
                    sorted.sort();
                    assert_eq!(keys, sorted);
                    assert_eq!(keys.iter().collect::<HashSet<_>>().len(), keys.len());

                    let b = enumerate_b(q, m, d).unwrap();
                    let expected: u32 =
                        a.iter().map(|x| x.b.iter().flatten().map(|&v| v + 1).product::<u32>()).sum();
                    assert_eq!(b.len() as u32, expected);
                    assert!(b.iter().all(|x| x.alpha().is_valid()));
                    let b0 = enumerate_b0(q, m, d).unwrap();
                    assert!(b0.iter().all(MultiIndexBeta::in_b0));
                    assert_eq!(b0.len(), b.iter().filter(|x| x.in_b0()).count());
                }
            }
        }
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(enumerate_a(12, 6, 6), Err(Error::Budget(_))));
        assert!(enumerate_a(0, 0, 1).is_err());
    }
}
