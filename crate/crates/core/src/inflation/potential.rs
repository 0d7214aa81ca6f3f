//! Inflaton potential models and their reduced potential `v = V / (24 pi^2 M_Pl^4)`.
//!
//! Internal units: `M_Pl = 1`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Reduced Planck mass in GeV.
pub const MPL_GEV: f64 = 2.435e18;

/// `1 / (24 pi^2)`.
pub fn reduction() -> f64 {
    1.0 / (24.0 * PI * PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridParams {
    /// `V_0` in `M_Pl^4`.
    #[serde(rename = "V0")]
    pub v0: f64,
    /// `M` in `M_Pl`.
    #[serde(rename = "M")]
    pub m: f64,
    pub phi_c: f64,
    pub beta: f64,
}

impl HybridParams {
    /// `V0 = 1e-15`, `M = 1e16 GeV`, `phi_c = sqrt(2) M`, `beta = 1e4`.
    pub fn reference() -> Self {
        Self::from_gev(1e-15, 1e16, std::f64::consts::SQRT_2, 1e4)
    }

    pub fn from_gev(v0: f64, m_gev: f64, phi_c_over_m: f64, beta: f64) -> Self {
        let m = m_gev / MPL_GEV;
        Self {
            v0,
            m,
            phi_c: phi_c_over_m * m,
            beta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialModel {
    /// `v = v0` on `[-phi_f, phi_f]`, absorbing at both ends.
    QuantumWell { v0: f64, phi_f: f64 },
    /// `v = v0` on `[-phi_f, phi_f]`, reflective at `+phi_f` in the analytic solution.
    InflectionWell { v0: f64, phi_f: f64 },
    /// Two fields `(phi, psi)` with a cubic inflaton term.
    Hybrid(HybridParams),
    /// Single field, `v = sum_k coeffs[k] phi^k` on `[lower, upper]`.
    Polynomial { coeffs: Vec<f64>, lower: f64, upper: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelFile {
    QuantumWell {
        v0: f64,
        phi_f: f64,
    },
    InflectionWell {
        v0: f64,
        phi_f: f64,
    },
    Hybrid {
        #[serde(rename = "V0")]
        v0: f64,
        #[serde(rename = "M_GeV")]
        m_gev: f64,
        #[serde(rename = "phi_c_over_M")]
        phi_c_over_m: f64,
        beta: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
        lower: f64,
        upper: f64,
    },
}

impl PotentialModel {
    /// Parses a model file; hybrid files carry `M` in GeV and `phi_c` in units of `M`.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        let m = match f {
            ModelFile::QuantumWell { v0, phi_f } => PotentialModel::QuantumWell { v0, phi_f },
            ModelFile::InflectionWell { v0, phi_f } => PotentialModel::InflectionWell { v0, phi_f },
            ModelFile::Hybrid {
                v0,
                m_gev,
                phi_c_over_m,
                beta,
            } => PotentialModel::Hybrid(HybridParams::from_gev(v0, m_gev, phi_c_over_m, beta)),
            ModelFile::Polynomial { coeffs, lower, upper } => PotentialModel::Polynomial { coeffs, lower, upper },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("invalid model parameters: {what}")));
        match self {
            PotentialModel::QuantumWell { v0, phi_f } | PotentialModel::InflectionWell { v0, phi_f } => {
                if !(*v0 > 0.0 && *phi_f > 0.0 && v0.is_finite() && phi_f.is_finite()) {
                    return bad("need v0 > 0 and phi_f > 0");
                }
            }
            PotentialModel::Hybrid(p) => {
                if ![p.v0, p.m, p.phi_c, p.beta].iter().all(|x| *x > 0.0 && x.is_finite()) {
                    return bad("need V0, M, phi_c, beta > 0");
                }
            }
            PotentialModel::Polynomial { coeffs, lower, upper } => {
                if coeffs.is_empty() || !(lower < upper) || coeffs.iter().any(|c| !c.is_finite()) {
                    return bad("need coefficients and lower < upper");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            PotentialModel::Hybrid(_) => 2,
            _ => 1,
        }
    }

    /// The field interval of single-field models.
    pub fn interval(&self) -> Option<(f64, f64)> {
        match self {
            PotentialModel::QuantumWell { phi_f, .. } | PotentialModel::InflectionWell { phi_f, .. } => {
                Some((-phi_f, *phi_f))
            }
            PotentialModel::Polynomial { lower, upper, .. } => Some((*lower, *upper)),
            PotentialModel::Hybrid(_) => None,
        }
    }
}

/// Reduced potential with closed-form gradient and Hessian diagonal.
///
/// Written as `v = base * (1 + e)` so that differences of `1/v` can be formed from
/// the excess `e` without cancellation when `v` is nearly constant.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPotential {
    model: PotentialModel,
}

pub fn reduced_potential(model: &PotentialModel) -> Result<ReducedPotential> {
    model.validate()?;
    let rp = ReducedPotential { model: model.clone() };
    let mut bad = Vec::new();
    let mut check = |x: &[f64]| {
        let v = rp.v(x);
        if !(v > 0.0 && v.is_finite()) {
            bad.push(x.to_vec());
        }
    };
    match model {
        PotentialModel::Hybrid(p) => {
            let dphi = 0.5 * p.beta.powf(-1.0 / 3.0);
            let dpsi = 0.5 * p.m;
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = [p.phi_c + dphi * (i as f64 / 10.0 - 1.0), dpsi * (j as f64 / 10.0 - 1.0)];
                    check(&x);
                }
            }
        }
        _ => {
            let (lo, hi) = model.interval().unwrap();
            for i in 0..=100 {
                check(&[lo + (hi - lo) * i as f64 / 100.0]);
            }
        }
    }
    if !bad.is_empty() {
        let first = &bad[0];
        let last = &bad[bad.len() - 1];
        return Err(Error::Domain(format!(
            "v <= 0 at {} sample points, from {first:?} to {last:?}",
            bad.len()
        )));
    }
    Ok(rp)
}

fn poly_eval(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
    for &ck in c.iter().rev() {
        ddp = ddp * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp, ddp)
}

impl ReducedPotential {
    pub fn model(&self) -> &PotentialModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Constant `base` in `v = base (1 + e)`.
    pub fn base_level(&self) -> f64 {
        match &self.model {
            PotentialModel::QuantumWell { v0, .. } | PotentialModel::InflectionWell { v0, .. } => *v0,
            PotentialModel::Hybrid(p) => reduction() * p.v0,
            PotentialModel::Polynomial { coeffs, .. } => {
                if coeffs[0] > 0.0 {
                    coeffs[0]
                } else {
                    1.0
                }
            }
        }
    }

    /// `e = v / base - 1`.
    pub fn excess(&self, x: &[f64]) -> f64 {
        match &self.model {
            PotentialModel::QuantumWell { .. } | PotentialModel::InflectionWell { .. } => 0.0,
            PotentialModel::Hybrid(p) => {
                let (phi, psi) = (x[0], x[1]);
                let d = phi - p.phi_c;
                p.beta * d * d * d + psi * psi * (2.0 * phi * phi / (p.phi_c * p.phi_c) - 1.0) / (p.m * p.m)
            }
            PotentialModel::Polynomial { coeffs, .. } => {
                if coeffs[0] > 0.0 {
                    let (tail, _, _) = poly_eval(&coeffs[1..], x[0]);
                    tail * x[0] / coeffs[0]
                } else {
                    poly_eval(coeffs, x[0]).0 - 1.0
                }
            }
        }
    }

    pub fn v(&self, x: &[f64]) -> f64 {
        match &self.model {
            PotentialModel::Polynomial { coeffs, .. } => poly_eval(coeffs, x[0]).0,
            _ => self.base_level() * (1.0 + self.excess(x)),
        }
    }

    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        match &self.model {
            PotentialModel::QuantumWell { .. } | PotentialModel::InflectionWell { .. } => out[0] = 0.0,
            PotentialModel::Hybrid(p) => {
                let c = reduction() * p.v0;
                let (phi, psi) = (x[0], x[1]);
                let (pc2, m2) = (p.phi_c * p.phi_c, p.m * p.m);
                let d = phi - p.phi_c;
                out[0] = c * (3.0 * p.beta * d * d + 4.0 * phi * psi * psi / (pc2 * m2));
                out[1] = c * 2.0 * psi * (2.0 * phi * phi / pc2 - 1.0) / m2;
            }
            PotentialModel::Polynomial { coeffs, .. } => out[0] = poly_eval(coeffs, x[0]).1,
        }
    }

    pub fn hess_diag(&self, x: &[f64], out: &mut [f64]) {
        match &self.model {
            PotentialModel::QuantumWell { .. } | PotentialModel::InflectionWell { .. } => out[0] = 0.0,
            PotentialModel::Hybrid(p) => {
                let c = reduction() * p.v0;
                let (phi, psi) = (x[0], x[1]);
                let (pc2, m2) = (p.phi_c * p.phi_c, p.m * p.m);
                out[0] = c * (6.0 * p.beta * (phi - p.phi_c) + 4.0 * psi * psi / (pc2 * m2));
                out[1] = c * 2.0 * (2.0 * phi * phi / pc2 - 1.0) / m2;
            }
            PotentialModel::Polynomial { coeffs, .. } => out[0] = poly_eval(coeffs, x[0]).2,
        }
    }

    /// `log w = 1/v - ln v`.
    pub fn log_w(&self, x: &[f64]) -> f64 {
        let v = self.v(x);
        1.0 / v - v.ln()
    }

    /// `log w(b) - log w(a)`, `+inf` when `v(b) <= 0`.
    pub fn log_w_difference(&self, a: &[f64], b: &[f64]) -> f64 {
        let (ea, eb) = (self.excess(a), self.excess(b));
        if 1.0 + eb <= 0.0 {
            return f64::INFINITY;
        }
        if 1.0 + ea <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let base = self.base_level();
        let inv = (ea - eb) / (base * (1.0 + ea) * (1.0 + eb));
        inv - ((eb - ea) / (1.0 + ea)).ln_1p()
    }
}
