//! Matrix-level simulation of threshold-projector eigenvalue estimation.
//!
//! The block-encoded Hamiltonian is never materialized: a Chebyshev step polynomial
//! is applied to `(H - mu I) / (alpha + |mu|)` classically, and every Chebyshev step
//! is charged to the ledger as one use of the block-encoding.

pub mod estimator;
pub mod step;

pub use estimator::{
    apply_matrix_polynomial, end_to_end_estimate, end_to_end_grid_size, est_eig, inner_config, fit_grid_constants, fuzzy_bisection_decision,
    proj_amplitude, proj_success_probability, Decision, EndToEndResult, Estimate, Estimator, EstimatorConfig,
    SamplingConfig, SamplingMode,
};
pub use step::{
    build_step_polynomial, build_step_polynomial_capped, chebyshev_coefficients, chebyshev_eval,
    step_polynomial_from_width, StepPolynomial, DEFAULT_DEGREE_CAP,
};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::sturm_liouville::DomainBox;
use serde::{Deserialize, Serialize};

/// `eta(x) = (x^2 + sqrt(4 - 5x^2 + x^4)) / 2` on `(0, 1)`.
pub fn eta(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("eta needs x in (0, 1), got {x}")));
    }
    let x2 = x * x;
    // 4 - 5x^2 + x^4 = (1 - x^2)(4 - x^2)
    Ok(0.5 * (x2 + ((1.0 - x2) * (4.0 - x2)).sqrt()))
}

/// Grid size for which the discretization error is at most `eps/2` and the
/// discrete ground vector keeps overlap `eta(gamma)` with the sampled continuum one.
pub fn select_grid_size(eps: f64, gamma: f64, c1: f64, d1: f64, domain: &DomainBox) -> Result<usize> {
    if !(eps > 0.0) || !(c1 >= 0.0) || !(d1 >= 0.0) {
        return Err(Error::Domain(format!(
            "select_grid_size needs eps > 0 and C1, D1 >= 0 (got {eps}, {c1}, {d1})"
        )));
    }
    let e = eta(gamma)?;
    let first = (2.0 * c1 / eps).sqrt();
    let second = (2.0 * d1 / (1.0 - e)).sqrt() * domain.width().powf(domain.dim as f64 / 4.0);
    let n = first.max(second).ceil();
    if !n.is_finite() || n > usize::MAX as f64 / 2.0 {
        return Err(Error::Domain(format!("grid size {n} is not representable")));
    }
    Ok(n as usize)
}

/// Normalization and accounting constants of the sparse-access block-encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEncodingParams {
    /// `s * ||H||_max`.
    pub alpha: f64,
    pub sparsity: usize,
    pub max_abs: f64,
    /// `ceil(log2 N) + 3`, reported only.
    pub a_qubits: usize,
    /// Per-entry precision `(eps' / (8 degree))^2 alpha` that keeps the perturbed
    /// projector within `eps'/4`.
    pub eps_tilde: f64,
}

impl BlockEncodingParams {
    pub fn new(h: &CsrMatrix, eps_prime: f64, degree: usize) -> Self {
        let sparsity = h.max_row_nnz();
        let max_abs = h.max_abs();
        let alpha = sparsity as f64 * max_abs;
        let n_qubits = (h.dim().max(1) as f64).log2().ceil() as usize;
        let d = degree.max(1) as f64;
        Self {
            alpha,
            sparsity,
            max_abs,
            a_qubits: n_qubits + 3,
            eps_tilde: (eps_prime / (8.0 * d)).powi(2) * alpha,
        }
    }
}
