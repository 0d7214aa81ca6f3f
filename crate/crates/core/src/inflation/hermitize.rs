//! Coefficients of the Hermitized adjoint Fokker-Planck operator.
//!
//! With `w = e^{1/v} / v` and `-L^dagger u = -M^2 (v u'' - v'/v u')` per field, the
//! similarity `w^{1/2} (-L^dagger) w^{-1/2}` is a symmetric operator
//! `-sum_i d_i (a_i d_i) + a_0` with `a_i = M^2 v` and
//! `a_0 = -M^2 sum_i [2 v^2 (1+v) v_ii - (1 + 4v + v^2) v_i^2] / (4 v^3)`.

use super::potential::ReducedPotential;
use crate::error::{Error, Result};
use crate::sturm_liouville::CoefficientField;
use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub struct HermitizedCoefficients {
    rp: ReducedPotential,
    mpl: f64,
}

pub fn hermitized_coefficients(rp: &ReducedPotential, mpl: f64) -> Result<HermitizedCoefficients> {
    if !(mpl > 0.0 && mpl.is_finite()) {
        return Err(Error::Config(format!("M_Pl must be positive, got {mpl}")));
    }
    Ok(HermitizedCoefficients { rp: rp.clone(), mpl })
}

impl HermitizedCoefficients {
    pub fn potential(&self) -> &ReducedPotential {
        &self.rp
    }

    pub fn mpl(&self) -> f64 {
        self.mpl
    }

    pub fn a_diffusion(&self, x: &[f64]) -> f64 {
        self.mpl * self.mpl * self.rp.v(x)
    }

    /// `a_0(x)`; NaN where `v <= 0`.
    pub fn a_zero(&self, x: &[f64]) -> f64 {
        self.checked_a_zero(x).unwrap_or(f64::NAN)
    }

    pub fn checked_a_zero(&self, x: &[f64]) -> Result<f64> {
        let v = self.rp.v(x);
        if !(v > 0.0) {
            return Err(Error::Domain(format!("a_0 undefined where v = {v} <= 0 (at {x:?})")));
        }
        let d = self.rp.dim();
        let mut g = vec![0.0; d];
        let mut h = vec![0.0; d];
        self.rp.grad(x, &mut g);
        self.rp.hess_diag(x, &mut h);
        let mut s = 0.0;
        for i in 0..d {
            s += 2.0 * v * v * (1.0 + v) * h[i] - (1.0 + 4.0 * v + v * v) * g[i] * g[i];
        }
        Ok(-self.mpl * self.mpl * s / (4.0 * v * v * v))
    }

    /// `log w = 1/v - ln v`.
    pub fn log_weight(&self, x: &[f64]) -> f64 {
        self.rp.log_w(x)
    }
}

impl CoefficientField for HermitizedCoefficients {
    fn a0(&self, x: &[f64]) -> f64 {
        self.a_zero(x)
    }
    fn a(&self, _axis: usize, x: &[f64]) -> f64 {
        self.a_diffusion(x)
    }
}

/// Central-difference matrix of the non-symmetric `-L^dagger` for one field on
/// `n` interior points of `(lower, upper)` with Dirichlet ends.
pub fn adjoint_fp_central_difference(rp: &ReducedPotential, mpl: f64, lower: f64, upper: f64, n: usize) -> Result<DMatrix<f64>> {
    if rp.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: rp.dim() });
    }
    if n < 2 || !(lower < upper) {
        return Err(Error::Config("need n >= 2 and lower < upper".into()));
    }
    let h = (upper - lower) / (n + 1) as f64;
    let m2 = mpl * mpl;
    let mut a = DMatrix::zeros(n, n);
    let mut g = [0.0];
    for j in 0..n {
        let x = [lower + (j + 1) as f64 * h];
        let v = rp.v(&x);
        if !(v > 0.0) {
            return Err(Error::Domain(format!("v = {v} <= 0 at {x:?}")));
        }
        rp.grad(&x, &mut g);
        let drift = g[0] / v;
        a[(j, j)] = m2 * 2.0 * v / (h * h);
        if j > 0 {
            a[(j, j - 1)] = m2 * (-v / (h * h) - drift / (2.0 * h));
        }
        if j + 1 < n {
            a[(j, j + 1)] = m2 * (-v / (h * h) + drift / (2.0 * h));
        }
    }
    Ok(a)
}

/// Real parts of the eigenvalues of a general matrix, ascending. Fails if any
/// eigenvalue has an imaginary part above `imag_tol` relative to its modulus.
pub fn general_real_eigenvalues(a: &DMatrix<f64>, imag_tol: f64) -> Result<Vec<f64>> {
    let ev = a.clone().complex_eigenvalues();
    let mut out = Vec::with_capacity(ev.len());
    for z in ev.iter() {
        if z.im.abs() > imag_tol * z.norm().max(1.0) {
            return Err(Error::Numeric(format!("eigenvalue {z} is not real")));
        }
        out.push(z.re);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::potential::{reduced_potential, HybridParams, PotentialModel};
    use crate::sturm_liouville::{assemble_fd_matrix, DomainBox, OperatorSpec};
    use std::sync::Arc;

    fn poly(coeffs: &[f64]) -> ReducedPotential {
        reduced_potential(&PotentialModel::Polynomial {
            coeffs: coeffs.to_vec(),
            lower: -1.0,
            upper: 1.0,
        })
        .unwrap()
    }

    /// `f''` and `f'` of a closure by Richardson-extrapolated central differences.
    fn derivs<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64, h: f64) -> (f64, f64) {
        let d1 = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        ((4.0 * d1(h / 2.0) - d1(h)) / 3.0, (4.0 * d2(h / 2.0) - d2(h)) / 3.0)
    }

    /// Checks `w^{1/2} (-L^dagger)(w^{-1/2} f) = (-(a f')' + a0 f)` pointwise for one field.
    fn conjugation_residual(rp: &ReducedPotential, mpl: f64, x: f64, f: &dyn Fn(f64) -> f64, h: f64) -> (f64, f64) {
        let hc = hermitized_coefficients(rp, mpl).unwrap();
        let x0 = [x];
        // u = w^{-1/2} f, scaled by w(x)^{1/2} through log-weight differences
        let u = |y: f64| (-0.5 * rp.log_w_difference(&x0, &[y])).exp() * f(y);
        let (du, ddu) = derivs(&u, x, h);
        let v = rp.v(&x0);
        let mut g = [0.0];
        rp.grad(&x0, &mut g);
        let lhs = -mpl * mpl * (v * ddu - g[0] / v * du);
        let a = |y: f64| hc.a_diffusion(&[y]);
        let flux = |y: f64| a(y) * derivs(f, y, h).0;
        let (dflux, _) = derivs(&flux, x, h);
        let rhs = -dflux + hc.a_zero(&x0) * f(x);
        (lhs, rhs)
    }

    #[test]
    fn conjugation_identity_single_field() {
        let f = |y: f64| (-(y - 0.1) * (y - 0.1) * 3.0).exp() * (1.0 + 0.2 * y);
        for coeffs in [vec![0.5, 0.15], vec![0.8, -0.2, 0.3], vec![1.2, 0.0, 0.0, 0.4]] {
            let rp = poly(&coeffs);
            for x in [-0.6, -0.1, 0.3, 0.7] {
                let (lhs, rhs) = conjugation_residual(&rp, 1.0, x, &f, 1e-3);
                assert!((lhs - rhs).abs() <= 1e-6 * lhs.abs().max(1.0), "{coeffs:?} x={x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn conjugation_identity_with_planck_mass() {
        let f = |y: f64| (1.0 - y * y).powi(2);
        let rp = poly(&[0.5, 0.15]);
        let (lhs, rhs) = conjugation_residual(&rp, 0.7, 0.2, &f, 1e-3);
        assert!((lhs - rhs).abs() <= 1e-6 * lhs.abs().max(1.0));
    }

    #[test]
    fn flat_potential_has_no_a0() {
        let rp = reduced_potential(&PotentialModel::QuantumWell { v0: 0.2, phi_f: 1.0 }).unwrap();
        let hc = hermitized_coefficients(&rp, 1.0).unwrap();
        assert_eq!(hc.a_zero(&[0.3]), 0.0);
        assert_eq!(hc.a_diffusion(&[0.3]), 0.2);
    }

    #[test]
    fn hybrid_conjugation_two_fields() {
        // w^{1/2} (-L^dagger) w^{-1/2} f against the symmetric form, at a point near the
        // critical line where both drifts are non-trivial
        let p = HybridParams::reference();
        let rp = reduced_potential(&PotentialModel::Hybrid(p.clone())).unwrap();
        let hc = hermitized_coefficients(&rp, 1.0).unwrap();
        let (sp, ss) = (2e-7, 3e-11);
        let x0 = [p.phi_c + 1.5e-7, 1e-11];
        let f = |x: &[f64]| (-((x[0] - p.phi_c) / sp).powi(2) - (x[1] / ss).powi(2)).exp();
        let steps = [sp * 2e-3, ss * 2e-3];
        let along = |axis: usize, g: &dyn Fn(&[f64]) -> f64, at: &[f64]| -> (f64, f64) {
            let h = steps[axis];
            let shifted = |t: f64| {
                let mut y = at.to_vec();
                y[axis] += t;
                g(&y)
            };
            derivs(&shifted, 0.0, h)
        };
        let u = |y: &[f64]| (-0.5 * rp.log_w_difference(&x0, y)).exp() * f(y);
        let v = rp.v(&x0);
        let mut g = [0.0; 2];
        rp.grad(&x0, &mut g);
        let mut lhs = 0.0;
        let mut rhs = hc.a_zero(&x0) * f(&x0);
        for axis in 0..2 {
            let (du, ddu) = along(axis, &u, &x0);
            lhs += -(v * ddu - g[axis] / v * du);
            let flux = |y: &[f64]| hc.a_diffusion(y) * along(axis, &f, y).0;
            rhs -= along(axis, &flux, &x0).0;
        }
        assert!((lhs - rhs).abs() <= 1e-5 * lhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn symmetric_and_nonsymmetric_spectra_agree() {
        let rp = poly(&[0.5, 0.15]);
        let hc = hermitized_coefficients(&rp, 1.0).unwrap();
        let spec = OperatorSpec::new(DomainBox::new(-1.0, 1.0, 1).unwrap(), Arc::new(hc), "herm").unwrap();
        let n = 120;
        let sym = assemble_fd_matrix(&spec, n).unwrap().matrix.to_dense().symmetric_eigenvalues();
        let mut sym: Vec<f64> = sym.iter().copied().collect();
        sym.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ns = general_real_eigenvalues(&adjoint_fp_central_difference(&rp, 1.0, -1.0, 1.0, n).unwrap(), 1e-8).unwrap();
        // same continuum limit, O(h^2) apart
        for k in 0..3 {
            assert!((sym[k] - ns[k]).abs() <= 2e-3 * sym[k], "{k}: {} vs {}", sym[k], ns[k]);
        }
    }

    #[test]
    fn a0_nan_where_v_nonpositive() {
        let rp = poly(&[0.5, 0.15]);
        let hc = hermitized_coefficients(&rp, 1.0).unwrap();
        assert!(hc.a_zero(&[-10.0]).is_nan());
        assert!(hc.checked_a_zero(&[-10.0]).is_err());
        assert!(hermitized_coefficients(&rp, 0.0).is_err());
    }
}
