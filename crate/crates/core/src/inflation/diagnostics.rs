//! Single-field diagnostics: curvature amplitude, stochasticity parameter and the
//! approximate mode frequency `omega_n^2`.

use super::potential::ReducedPotential;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct InflationDiagnostics {
    rp: ReducedPotential,
    mpl: f64,
}

pub fn diagnostics(rp: &ReducedPotential, mpl: f64) -> Result<InflationDiagnostics> {
    if rp.dim() != 1 {
        return Err(Error::Config("diagnostics are defined for single-field models".into()));
    }
    if !(mpl > 0.0) {
        return Err(Error::Config(format!("M_Pl must be positive, got {mpl}")));
    }
    Ok(InflationDiagnostics { rp: rp.clone(), mpl })
}

impl InflationDiagnostics {
    fn parts(&self, phi: f64) -> (f64, f64, f64) {
        let mut g = [0.0];
        let mut h = [0.0];
        self.rp.grad(&[phi], &mut g);
        self.rp.hess_diag(&[phi], &mut h);
        (self.rp.v(&[phi]), g[0], h[0])
    }

    /// `2 v^3 / (v'^2 M^2)`; `+inf` at flat points.
    pub fn p_zeta(&self, phi: f64) -> f64 {
        let (v, g, _) = self.parts(phi);
        if g == 0.0 {
            return f64::INFINITY;
        }
        2.0 * v * v * v / (g * g * self.mpl * self.mpl)
    }

    /// `v^2 v'' / v'^2`; infinite (or NaN when `v'' = 0`) at flat points.
    pub fn eta_sto(&self, phi: f64) -> f64 {
        let (v, g, h) = self.parts(phi);
        v * v * h / (g * g)
    }

    /// `M^2 v'' / v`.
    pub fn eta_v(&self, phi: f64) -> f64 {
        let (v, _, h) = self.parts(phi);
        self.mpl * self.mpl * h / v
    }

    /// `-(1 - 2 Lambda P - 2 eta_sto) / (2 M^2 v P)`, evaluated as
    /// `(2 Lambda + eta_V - 1/P) / (2 M^2 v)` so flat points stay finite.
    pub fn omega_n_sq(&self, lambda: f64, phi: f64) -> f64 {
        let (v, g, _) = self.parts(phi);
        let m2 = self.mpl * self.mpl;
        let inv_p = g * g * m2 / (2.0 * v * v * v);
        (2.0 * lambda + self.eta_v(phi) - inv_p) / (2.0 * m2 * v)
    }
}
