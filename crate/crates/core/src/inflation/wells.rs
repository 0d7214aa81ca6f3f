//! Flat-potential wells: analytic eigenpairs, Gaussian test functions and their overlaps.

use super::cerf::erf_scaled;
use super::potential::PotentialModel;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    AbsorbingBoth,
    /// Absorbing at `-phi_f`, reflective at `+phi_f`.
    AbsorbingReflective,
}

/// Analytic eigenpair of the flat well on `[-phi_f, phi_f]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WellMode {
    pub n: usize,
    pub boundary: Boundary,
    pub phi_f: f64,
    pub lambda: f64,
}

impl WellMode {
    fn wavenumber(&self) -> f64 {
        let m = match self.boundary {
            Boundary::AbsorbingBoth => self.n as f64,
            Boundary::AbsorbingReflective => self.n as f64 - 0.5,
        };
        m * PI / (2.0 * self.phi_f)
    }

    /// `Psi_n(phi)`, unit L2 norm on the well, zero outside.
    pub fn eval(&self, phi: f64) -> f64 {
        if phi.abs() > self.phi_f {
            return 0.0;
        }
        (self.wavenumber() * (phi + self.phi_f)).sin() / self.phi_f.sqrt()
    }
}

pub fn quantum_well_eigensystem(model: &PotentialModel, n: usize, boundary: Boundary, mpl: f64) -> Result<WellMode> {
    let (v0, phi_f) = match model {
        PotentialModel::QuantumWell { v0, phi_f } | PotentialModel::InflectionWell { v0, phi_f } => (*v0, *phi_f),
        _ => return Err(Error::Config("analytic eigenpairs exist only for the flat wells".into())),
    };
    model.validate()?;
    if n == 0 {
        return Err(Error::Config("mode index starts at 1".into()));
    }
    let mut mode = WellMode {
        n,
        boundary,
        phi_f,
        lambda: 0.0,
    };
    let k = mode.wavenumber();
    mode.lambda = mpl * mpl * v0 * k * k;
    Ok(mode)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WellVariant {
    /// Gaussian centred at 0, absorbing walls at both ends.
    Hilltop,
    /// Gaussian centred at `phi_f`, reflective at `phi_f`.
    Inflection,
}

impl std::str::FromStr for WellVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hilltop" => Ok(WellVariant::Hilltop),
            "inflection" => Ok(WellVariant::Inflection),
            other => Err(Error::Config(format!("unknown well variant `{other}` (hilltop | inflection)"))),
        }
    }
}

impl WellVariant {
    pub fn boundary(self) -> Boundary {
        match self {
            WellVariant::Hilltop => Boundary::AbsorbingBoth,
            WellVariant::Inflection => Boundary::AbsorbingReflective,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `(sqrt(pi) r phi_f erf(1/r))^{-1/2} exp(-phi^2 / (2 r^2 phi_f^2))`.
    Hilltop { r: f64, phi_f: f64 },
    /// `(sqrt(pi)/2 r phi_f erf(2/r))^{-1/2} exp(-(phi - phi_f)^2 / (2 r^2 phi_f^2))`.
    Inflection { r: f64, phi_f: f64 },
    /// `exp(-(phi - phi_c)^2 / (2 s_phi^2) - psi^2 / (2 s_psi^2))`, unnormalized.
    Hybrid { phi_c: f64, sigma_phi: f64, sigma_psi: f64 },
}

pub fn gaussian_test_function(variant: WellVariant, r: f64, phi_f: f64) -> Result<TestFunction> {
    if !(r > 0.0 && phi_f > 0.0) {
        return Err(Error::Config(format!("test function needs r > 0 and phi_f > 0, got {r}, {phi_f}")));
    }
    Ok(match variant {
        WellVariant::Hilltop => TestFunction::Hilltop { r, phi_f },
        WellVariant::Inflection => TestFunction::Inflection { r, phi_f },
    })
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            TestFunction::Hilltop { r, phi_f } => {
                if x[0].abs() > phi_f {
                    return 0.0;
                }
                let norm = (PI.sqrt() * r * phi_f * libm::erf(1.0 / r)).powf(-0.5);
                norm * (-x[0] * x[0] / (2.0 * r * r * phi_f * phi_f)).exp()
            }
            TestFunction::Inflection { r, phi_f } => {
                if x[0].abs() > phi_f {
                    return 0.0;
                }
                let norm = (0.5 * PI.sqrt() * r * phi_f * libm::erf(2.0 / r)).powf(-0.5);
                let d = x[0] - phi_f;
                norm * (-d * d / (2.0 * r * r * phi_f * phi_f)).exp()
            }
            TestFunction::Hybrid {
                phi_c,
                sigma_phi,
                sigma_psi,
            } => {
                let a = (x[0] - phi_c) / sigma_phi;
                let b = x[1] / sigma_psi;
                (-0.5 * (a * a + b * b)).exp()
            }
        }
    }
}

/// Closed-form `<f_1 | Psi_n>` for the flat well; independent of `phi_f`.
pub fn analytic_well_overlap(variant: WellVariant, n: usize, r: f64) -> Result<f64> {
    if n == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::Config(format!("overlap needs n >= 1 and r > 0, got n={n}, r={r}")));
    }
    let nf = n as f64;
    let v = match variant {
        WellVariant::Hilltop => {
            if n % 2 == 0 {
                return Ok(0.0);
            }
            let z = Complex64::new(1.0 / (SQRT_2 * r), nf * PI * r / (2.0 * SQRT_2));
            let sign = if (n - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
            PI.powf(0.25) * r.sqrt() / (2.0 * libm::erf(1.0 / r)).sqrt() * sign * 2.0 * erf_scaled(z).re
        }
        WellVariant::Inflection => {
            let z = Complex64::new(SQRT_2 / r, (2.0 * nf - 1.0) * PI * r / (4.0 * SQRT_2));
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            sign * PI.powf(0.25) * r.sqrt() / (2.0 * libm::erf(2.0 / r).sqrt()) * 2.0 * erf_scaled(z).re
        }
    };
    if !v.is_finite() {
        return Err(Error::Numeric(format!("overlap overflowed at r = {r}")));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub n: usize,
    pub overlap_sq: f64,
}

/// `|<f_1|Psi_n>|^2` for `steps` values of `r` evenly spaced on `[r_min, r_max]`, `n = 1..=n_max`.
pub fn overlap_sweep(variant: WellVariant, r_min: f64, r_max: f64, steps: usize, n_max: usize) -> Result<Vec<SweepRow>> {
    if !(r_min > 0.0 && r_max >= r_min) || steps == 0 || n_max == 0 {
        return Err(Error::Config(format!(
            "sweep needs 0 < r_min <= r_max, steps >= 1, n_max >= 1 (got {r_min}, {r_max}, {steps}, {n_max})"
        )));
    }
    let mut rows = Vec::with_capacity(steps * n_max);
    for i in 0..steps {
        let r = if steps == 1 {
            r_min
        } else {
            r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64
        };
        for n in 1..=n_max {
            let o = analytic_well_overlap(variant, n, r)?;
            rows.push(SweepRow { r, n, overlap_sq: o * o });
        }
    }
    Ok(rows)
}

/// Row with the largest overlap for mode `n`.
pub fn sweep_argmax(rows: &[SweepRow], n: usize) -> Option<SweepRow> {
    rows.iter()
        .filter(|r| r.n == n)
        .max_by(|a, b| a.overlap_sq.partial_cmp(&b.overlap_sq).unwrap())
        .cloned()
}
