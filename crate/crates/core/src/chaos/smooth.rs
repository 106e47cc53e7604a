//! Smooth test functions with analytic derivatives of every order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar function of one variable with closed-form derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smooth1 {
    /// `sum_i c_i x^i`.
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude * cos(freq * x + phase)`.
    Cosine { amplitude: f64, freq: f64, phase: f64 },
    /// `1 / (1 + exp(-scale * x))`.
    Logistic { scale: f64 },
}

impl Smooth1 {
    pub fn constant(c: f64) -> Self {
        Smooth1::Polynomial { coeffs: vec![c] }
    }

    pub fn cos() -> Self {
        Smooth1::Cosine { amplitude: 1.0, freq: 1.0, phase: 0.0 }
    }

    pub fn sin() -> Self {
        Smooth1::Cosine { amplitude: 1.0, freq: 1.0, phase: -std::f64::consts::FRAC_PI_2 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `f^{(order)}(x)`.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        match self {
            Smooth1::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for i in (order..coeffs.len()).rev() {
                    let falling: f64 = (0..order).map(|j| (i - j) as f64).product();
                    acc = acc * x + coeffs[i] * falling;
                }
                acc
            }
            Smooth1::Cosine { amplitude, freq, phase } => {
                let shift = order as f64 * std::f64::consts::FRAC_PI_2;
                amplitude * freq.powi(order as i32) * (freq * x + phase + shift).cos()
            }
            Smooth1::Logistic { scale } => {
                let s = 1.0 / (1.0 + (-scale * x).exp());
                let poly = logistic_poly(order);
                let v = poly.iter().rev().fold(0.0, |acc, c| acc * s + c);
                scale.powi(order as i32) * v
            }
        }
    }

    /// Upper bound on `sup_x |f^{(order)}(x)|`; infinite for nonconstant
    /// polynomial derivatives.
    pub fn sup_norm(&self, order: usize) -> f64 {
        match self {
            Smooth1::Polynomial { coeffs } => {
                if coeffs.len() <= order + 1 {
                    self.derivative(order, 0.0).abs()
                } else {
                    f64::INFINITY
                }
            }
            Smooth1::Cosine { amplitude, freq, .. } => amplitude.abs() * freq.abs().powi(order as i32),
            Smooth1::Logistic { scale } => {
                let poly = logistic_poly(order);
                // Sup over s in [0,1] of |P(s)| on a fine grid, padded by 1%.
                let m = (0..=4096)
                    .map(|i| {
                        let s = i as f64 / 4096.0;
                        poly.iter().rev().fold(0.0, |acc, c| acc * s + c).abs()
                    })
                    .fold(0.0, f64::max);
                1.01 * m * scale.abs().powi(order as i32)
            }
        }
    }

    /// Short identifier for reports.
    pub fn label(&self) -> String {
        match self {
            Smooth1::Polynomial { coeffs } => format!("poly{coeffs:?}"),
            Smooth1::Cosine { amplitude, freq, phase } => format!("{amplitude}cos({freq}x+{phase})"),
            Smooth1::Logistic { scale } => format!("logistic({scale})"),
        }
    }
}

/// Coefficients in `s` of `P_k` where `(d/dx)^k sigma(x) = P_k(sigma(x))`,
/// `sigma' = sigma (1 - sigma)`.
fn logistic_poly(order: usize) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..order {
        // d/dx P(s) = P'(s) * (s - s^2).
        let mut next = vec![0.0; p.len() + 1];
        for i in 1..p.len() {
            let d = p[i] * i as f64;
            next[i] += d;
            next[i + 1] -= d;
        }
        p = next;
    }
    p
}

/// A function on `R^d` supplying partial derivatives up to a declared order.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// Largest total derivative order available.
    fn max_order(&self) -> usize;

    /// `d^{|o|} f / dx_1^{o_1} ... dx_d^{o_d}` at `x`.
    fn partial(&self, orders: &[usize], x: &[f64]) -> f64;

    fn eval(&self, x: &[f64]) -> f64 {
        self.partial(&vec![0; self.dim()], x)
    }

    /// Checks that `orders` is within the supplied derivative range.
    fn check_orders(&self, orders: &[usize]) -> Result<()> {
        if orders.len() != self.dim() {
            return Err(Error::Contract(format!(
                "derivative tuple of length {} for a function of {} variables",
                orders.len(),
                self.dim()
            )));
        }
        let total: usize = orders.iter().sum();
        if total > self.max_order() {
            return Err(Error::Contract(format!(
                "derivative of total order {total} requested, only {} supplied",
                self.max_order()
            )));
        }
        Ok(())
    }
}

/// `f(x) = prod_l g_l(x_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separable {
    pub factors: Vec<Smooth1>,
    pub max_order: usize,
}

impl SmoothFunction for Separable {
    fn dim(&self) -> usize {
        self.factors.len()
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn partial(&self, orders: &[usize], x: &[f64]) -> f64 {
        self.factors.iter().zip(orders).zip(x).map(|((g, &o), &xi)| g.derivative(o, xi)).product()
    }
}

/// `f(x) = g(w . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    pub profile: Smooth1,
    pub weights: Vec<f64>,
    pub max_order: usize,
}

impl SmoothFunction for Ridge {
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn partial(&self, orders: &[usize], x: &[f64]) -> f64 {
        let arg: f64 = self.weights.iter().zip(x).map(|(w, xi)| w * xi).sum();
        let total: usize = orders.iter().sum();
        let scale: f64 =
            self.weights.iter().zip(orders).map(|(w, &o)| w.powi(o as i32)).product();
        scale * self.profile.derivative(total, arg)
    }
}

/// Fixed bank of test functions on `R^d` used by the moment identities:
/// polynomial, cosine, logistic, a separable product and a ridge function.
pub fn test_bank(d: usize, max_order: usize) -> Vec<(String, Box<dyn SmoothFunction>)> {
    let poly = Smooth1::Polynomial { coeffs: vec![0.5, -1.0, 0.25, 0.0, 0.1] };
    let cos = Smooth1::Cosine { amplitude: 1.0, freq: 0.8, phase: 0.3 };
    let logistic = Smooth1::Logistic { scale: 1.5 };
    let weights: Vec<f64> = (0..d).map(|l| 1.0 - 0.3 * l as f64).collect();
    let mut bank: Vec<(String, Box<dyn SmoothFunction>)> = Vec::new();
    for (name, g) in [("polynomial", poly.clone()), ("cosine", cos.clone()), ("logistic", logistic)] {
        bank.push((
            name.to_string(),
            Box::new(Ridge { profile: g, weights: weights.clone(), max_order }),
        ));
    }
    let factors = (0..d).map(|l| if l % 2 == 0 { cos.clone() } else { poly.clone() }).collect();
    bank.push(("separable".to_string(), Box::new(Separable { factors, max_order })));
    bank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_difference(f: &Smooth1, order: usize, x: f64) -> f64 {
        let h = 1e-5;
        (f.derivative(order, x + h) - f.derivative(order, x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_are_consistent() {
        let bank = [
            Smooth1::Polynomial { coeffs: vec![1.0, 0.0, 1.0] },
            Smooth1::cos(),
            Smooth1::sin(),
            Smooth1::Logistic { scale: 1.5 },
        ];
        for f in &bank {
            for order in 0..8 {
                for &x in &[-3.0, -1.2, 0.0, 0.7, 3.0] {
                    let fd = central_difference(f, order, x);
                    let exact = f.derivative(order + 1, x);
                    assert!(
                        (fd - exact).abs() <= 1e-4 * exact.abs().max(1.0),
                        "{} order {order} at {x}: {fd} vs {exact}",
                        f.label()
                    );
                }
            }
        }
    }

    #[test]
    fn sine_and_polynomial_values() {
        assert!((Smooth1::sin().eval(0.4) - 0.4f64.sin()).abs() < 1e-15);
        let p = Smooth1::Polynomial { coeffs: vec![1.0, 0.0, 1.0] };
        assert_eq!(p.eval(2.0), 5.0);
        assert_eq!(p.derivative(2, 7.0), 2.0);
        assert_eq!(p.derivative(3, 7.0), 0.0);
    }

    #[test]
    fn sup_norms() {
        assert_eq!(Smooth1::cos().sup_norm(5), 1.0);
        let logistic = Smooth1::Logistic { scale: 1.0 };
        assert!((logistic.sup_norm(1) / 1.01 - 0.25).abs() < 1e-6);
        assert!(Smooth1::Polynomial { coeffs: vec![1.0, 1.0] }.sup_norm(0).is_infinite());
    }

    #[test]
    fn ridge_partials_match_finite_differences() {
        let f = Ridge { profile: Smooth1::cos(), weights: vec![0.5, -1.5], max_order: 4 };
        let x = [0.3, 0.9];
        let h = 1e-5;
        let fd = (f.eval(&[x[0], x[1] + h]) - f.eval(&[x[0], x[1] - h])) / (2.0 * h);
        assert!((fd - f.partial(&[0, 1], &x)).abs() < 1e-8);
        assert!(f.check_orders(&[3, 2]).is_err());
        assert!(f.check_orders(&[1]).is_err());
    }
}
