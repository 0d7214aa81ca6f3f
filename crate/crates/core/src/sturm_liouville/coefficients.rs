//! Coefficient fields `a_0, a_1..a_d` and the operator specification.

use super::grid::DomainBox;
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Coefficients of `-sum_i d_i (a_i d_i) + a_0`.
pub trait CoefficientField: Send + Sync {
    fn a0(&self, x: &[f64]) -> f64;
    /// Diffusion coefficient along `axis` (0-based).
    fn a(&self, axis: usize, x: &[f64]) -> f64;
}

/// Separable polynomial coefficients:
/// `a_i(x) = sum_k a[i][k] x_i^k` and `a_0(x) = sum_i sum_k a0[i][k] x_i^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialCoefficients {
    pub a0: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

impl PolynomialCoefficients {
    /// `a_i ≡ a`, `a_0 ≡ a0` in dimension `d`.
    pub fn constant(d: usize, a: f64, a0: f64) -> Self {
        let mut a0v = vec![vec![]; d];
        if d > 0 {
            a0v[0] = vec![a0];
        }
        Self {
            a0: a0v,
            a: vec![vec![a]; d],
        }
    }

    pub fn laplacian(d: usize) -> Self {
        Self::constant(d, 1.0, 0.0)
    }
}

impl CoefficientField for PolynomialCoefficients {
    fn a0(&self, x: &[f64]) -> f64 {
        self.a0.iter().zip(x).map(|(c, &xi)| horner(c, xi)).sum()
    }

    fn a(&self, axis: usize, x: &[f64]) -> f64 {
        horner(&self.a[axis], x[axis])
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type AxisFn = dyn Fn(usize, &[f64]) -> f64 + Send + Sync;

/// Coefficients given by closures.
pub struct FnCoefficients {
    a0: Box<ScalarFn>,
    a: Box<AxisFn>,
}

impl FnCoefficients {
    pub fn new(
        a0: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        a: impl Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            a0: Box::new(a0),
            a: Box::new(a),
        }
    }
}

impl CoefficientField for FnCoefficients {
    fn a0(&self, x: &[f64]) -> f64 {
        (self.a0)(x)
    }
    fn a(&self, axis: usize, x: &[f64]) -> f64 {
        (self.a)(axis, x)
    }
}

#[derive(Clone)]
pub struct OperatorSpec {
    pub domain: DomainBox,
    pub coefficients: Arc<dyn CoefficientField>,
    /// Short label used in manifests.
    pub label: String,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("domain", &self.domain)
            .field("label", &self.label)
            .finish()
    }
}

impl OperatorSpec {
    pub fn new(domain: DomainBox, coefficients: Arc<dyn CoefficientField>, label: impl Into<String>) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            domain,
            coefficients,
            label: label.into(),
        })
    }

    pub fn polynomial(domain: DomainBox, c: PolynomialCoefficients) -> Result<Self> {
        if c.a.len() != domain.dim || c.a0.len() > domain.dim {
            return Err(Error::Config(format!(
                "polynomial coefficients need {} axis lists, got a: {}, a0: {}",
                domain.dim,
                c.a.len(),
                c.a0.len()
            )));
        }
        Self::new(domain, Arc::new(c), "polynomial")
    }

    /// Dirichlet Laplacian `-Δ` on `(lower, upper)^d`.
    pub fn laplacian(lower: f64, upper: f64, d: usize) -> Result<Self> {
        let domain = DomainBox::new(lower, upper, d)?;
        Self::new(domain, Arc::new(PolynomialCoefficients::laplacian(d)), "laplacian")
    }

    pub fn from_fns(
        domain: DomainBox,
        a0: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        a: impl Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(domain, Arc::new(FnCoefficients::new(a0, a)), "custom")
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn a0(&self, x: &[f64]) -> f64 {
        self.coefficients.a0(x)
    }

    pub fn a(&self, axis: usize, x: &[f64]) -> f64 {
        self.coefficients.a(axis, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_evaluation() {
        let c = PolynomialCoefficients {
            a0: vec![vec![1.0, 2.0], vec![0.0, 0.0, 3.0]],
            a: vec![vec![1.0, 1.0], vec![2.0]],
        };
        let x = [0.5, 2.0];
        assert_eq!(c.a0(&x), 1.0 + 1.0 + 12.0);
        assert_eq!(c.a(0, &x), 1.5);
        assert_eq!(c.a(1, &x), 2.0);
    }

    #[test]
    fn constant_builder() {
        let c = PolynomialCoefficients::constant(3, 2.0, 0.5);
        assert_eq!(c.a0(&[0.1, 0.2, 0.3]), 0.5);
        assert_eq!(c.a(2, &[0.1, 0.2, 0.3]), 2.0);
    }

    #[test]
    fn spec_checks_axis_count() {
        let d = DomainBox::new(0.0, 1.0, 2).unwrap();
        assert!(OperatorSpec::polynomial(d, PolynomialCoefficients::laplacian(1)).is_err());
        assert!(OperatorSpec::polynomial(d, PolynomialCoefficients::laplacian(2)).is_ok());
    }
}
