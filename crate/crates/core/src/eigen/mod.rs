//! Classical eigensolvers, convergence fits, overlaps and the two overlap inequalities.

pub mod banded;
pub mod convergence;
pub mod dense;
pub mod lanczos;
pub mod lemmas;

pub use convergence::{richardson_fit, richardson_fit_with_reference, ConvergenceFit};
pub use dense::{dense_smallest_eigs, DENSE_CAP};
pub use lanczos::{lanczos_smallest_eigs, shift_invert_smallest_eigs, LanczosOptions};
pub use lemmas::{lemma1_bound_check, lemma2_bound_check};

use crate::error::{Error, Result};
use crate::sparse::SymmetricMatrix;
use std::io::Write;

/// Eigenpairs in ascending order. Vectors carry unit weighted norm
/// (`h^d sum v^2 = 1` on grids) and a positive largest-magnitude entry.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||L v - lambda v|| / ||v||`.
    pub residuals: Vec<f64>,
}

impl EigenResult {
    /// `(k, lambda, residual)` table, `k` starting at 1.
    pub fn write_values_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["k", "lambda", "residual"])?;
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            cw.write_record([(i + 1).to_string(), l.to_string(), r.to_string()])?;
        }
        cw.flush()?;
        Ok(())
    }
}

/// Flips `v` so that its first entry of (numerically) largest magnitude is positive.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(p) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-8)) {
        if v[p] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub(crate) fn finalize<M: SymmetricMatrix>(m: &M, lambdas: Vec<f64>, vectors: Vec<Vec<f64>>) -> EigenResult {
    let a = m.csr();
    let w = m.vector_weight();
    let mut idx: Vec<usize> = (0..lambdas.len()).collect();
    idx.sort_by(|&x, &y| lambdas[x].partial_cmp(&lambdas[y]).unwrap());
    let mut eigenvalues = Vec::with_capacity(idx.len());
    let mut eigenvectors = Vec::with_capacity(idx.len());
    let mut residuals = Vec::with_capacity(idx.len());
    let mut av = vec![0.0; a.dim()];
    for i in idx {
        let lambda = lambdas[i];
        let mut v = vectors[i].clone();
        let norm = (w * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        fix_sign(&mut v);
        a.matvec(&v, &mut av);
        let r: f64 = av.iter().zip(&v).map(|(y, x)| (y - lambda * x).powi(2)).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        eigenvalues.push(lambda);
        eigenvectors.push(v);
        residuals.push(r / nv);
    }
    EigenResult {
        eigenvalues,
        eigenvectors,
        residuals,
    }
}

/// Dense below a size threshold, shift-invert Lanczos above it.
pub fn smallest_eigs<M: SymmetricMatrix>(m: &M, k: usize) -> Result<EigenResult> {
    if m.csr().dim() <= 1024 {
        dense_smallest_eigs(m, k)
    } else {
        shift_invert_smallest_eigs(m, k, None, &LanczosOptions::default())
    }
}

/// `|sum u_J v_J| / (||u|| ||v||)`.
pub fn overlap(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: v.len(),
        });
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Numeric("overlap of a zero vector".into()));
    }
    let s: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((s.abs() / (nu * nv)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_basics() {
        let u = [1.0, 2.0, 3.0];
        assert!((overlap(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(overlap(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(overlap(&[0.0, 0.0], &[0.0, 1.0]).is_err());
        assert!(overlap(&[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
        let mut w = vec![-0.5, 0.2, 0.5];
        fix_sign(&mut w);
        assert_eq!(w, vec![0.5, -0.2, -0.5]);
    }

    #[test]
    fn values_csv_has_header_only_for_empty() {
        let r = EigenResult {
            eigenvalues: vec![],
            eigenvectors: vec![],
            residuals: vec![],
        };
        let mut buf = Vec::new();
        r.write_values_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,lambda,residual\n");
    }
}
