//! Chebyshev step polynomial `S(x)`: close to 1 left of `-w`, close to 0 right of `+w`.
//!
//! The target is `(1 - tau/2) erfc(kappa x) / 2`, with `kappa` chosen so the target's
//! own tail at `|x| = w` is `tau/4`. Chebyshev coefficients come from a DCT on
//! Chebyshev nodes; the degree is the smallest one whose discarded coefficient mass
//! stays below `tau/4`, which bounds `sup |S - target|` on `[-1, 1]`.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_DEGREE_CAP: usize = 1 << 21;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPolynomial {
    pub degree: usize,
    pub chebyshev_coeffs: Vec<f64>,
    /// `w`: the step must be settled for `|x| >= w`.
    pub threshold_width: f64,
    /// `tau`: allowed deviation from 1 (left) and 0 (right) beyond `w`.
    pub tail_bound: f64,
    pub steepness: f64,
    /// `sum_{k > degree} |c_k|`, an upper bound on the truncation error.
    pub truncation_bound: f64,
}

/// Inverse of erfc on (0, 1] by bisection.
pub(crate) fn erfc_inv(y: f64) -> f64 {
    debug_assert!(y > 0.0 && y <= 1.0);
    let (mut lo, mut hi) = (0.0f64, 27.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if libm::erfc(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `c_k = (2/N) sum_j f(cos t_j) cos(k t_j)`, `t_j = pi (j + 1/2) / N`, with `c_0` halved.
pub fn chebyshev_coefficients<F: Fn(f64) -> f64>(f: F, n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); 2 * n];
    for j in 0..n {
        let v = f((PI * (j as f64 + 0.5) / n as f64).cos());
        buf[j] = Complex::new(v, 0.0);
        buf[2 * n - 1 - j] = Complex::new(v, 0.0);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(2 * n).process(&mut buf);
    let mut c: Vec<f64> = (0..n)
        .map(|k| {
            let tw = Complex::from_polar(1.0, -PI * k as f64 / (2 * n) as f64);
            (tw * buf[k]).re / n as f64
        })
        .collect();
    c[0] *= 0.5;
    c
}

/// Clenshaw evaluation of `sum_k c_k T_k(x)`.
pub fn chebyshev_eval(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

impl StepPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        chebyshev_eval(&self.chebyshev_coeffs, x)
    }

    /// The smooth function the polynomial approximates.
    pub fn target(&self, x: f64) -> f64 {
        (1.0 - self.tail_bound / 2.0) * 0.5 * libm::erfc(self.steepness * x)
    }

    /// The constant polynomial 1.
    pub fn identity() -> Self {
        Self {
            degree: 0,
            chebyshev_coeffs: vec![1.0],
            threshold_width: 1.0,
            tail_bound: 0.0,
            steepness: 0.0,
            truncation_bound: 0.0,
        }
    }
}

/// Step with width `eps / (2 alpha)` and tail `eps_prime / 2`.
pub fn build_step_polynomial(alpha: f64, eps: f64, eps_prime: f64) -> Result<StepPolynomial> {
    build_step_polynomial_capped(alpha, eps, eps_prime, DEFAULT_DEGREE_CAP)
}

pub fn build_step_polynomial_capped(alpha: f64, eps: f64, eps_prime: f64, cap: usize) -> Result<StepPolynomial> {
    if !(alpha > 0.0 && eps > 0.0 && eps_prime > 0.0) {
        return Err(Error::Config(format!(
            "step polynomial needs positive alpha, eps, eps' (got {alpha}, {eps}, {eps_prime})"
        )));
    }
    let width = eps / (2.0 * alpha);
    if width >= 1.0 {
        return Err(Error::Config(format!("threshold width eps/(2 alpha) = {width} must be < 1")));
    }
    step_polynomial_from_width(width, eps_prime / 2.0, cap)
}

pub fn step_polynomial_from_width(width: f64, tail: f64, cap: usize) -> Result<StepPolynomial> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(Error::Config(format!("tail bound {tail} outside (0, 1)")));
    }
    let kappa = erfc_inv(tail / 2.0) / width;
    let target = |x: f64| (1.0 - tail / 2.0) * 0.5 * libm::erfc(kappa * x);
    let budget = 0.9 * tail / 4.0;
    let mut n = ((8.0 * kappa) as usize + 64).next_power_of_two();
    loop {
        if n > 2 * cap.max(1) {
            return Err(Error::Config(format!(
                "step polynomial needs degree above the cap {cap}; raise the cap or the tail bound"
            )));
        }
        let c = chebyshev_coefficients(target, n);
        let upper: f64 = c[n / 2..].iter().map(|v| v.abs()).sum();
        if upper > 1e-3 * budget {
            n *= 2;
            continue;
        }
        // suffix[k] = sum_{j >= k} |c_j|
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + c[k].abs();
        }
        let degree = (0..n).find(|&d| suffix[d + 1] <= budget).unwrap_or(n - 1);
        if degree > cap {
            return Err(Error::Config(format!(
                "step polynomial needs degree {degree} above the cap {cap}; raise the cap or the tail bound"
            )));
        }
        let mut coeffs = c[..=degree].to_vec();
        // odd function plus a constant: drop the even coefficients that are pure round-off
        for (k, ck) in coeffs.iter_mut().enumerate() {
            if k > 0 && k % 2 == 0 {
                *ck = 0.0;
            }
        }
        return Ok(StepPolynomial {
            degree,
            chebyshev_coeffs: coeffs,
            threshold_width: width,
            tail_bound: tail,
            steepness: kappa,
            truncation_bound: suffix[degree + 1],
        });
    }
}
