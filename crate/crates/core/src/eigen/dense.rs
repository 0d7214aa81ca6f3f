//! Full symmetric diagonalization for small matrices.

use super::{finalize, EigenResult};
use crate::error::{Error, Result};
use crate::sparse::SymmetricMatrix;

pub const DENSE_CAP: usize = 4096;

pub fn dense_smallest_eigs<M: SymmetricMatrix>(m: &M, k: usize) -> Result<EigenResult> {
    let a = m.csr();
    let n = a.dim();
    if n > DENSE_CAP {
        return Err(Error::Precondition(format!(
            "dense solver capped at {DENSE_CAP} unknowns, got {n}"
        )));
    }
    let eig = a.to_dense().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
    idx.truncate(k.min(n));
    let lambdas = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok(finalize(m, lambdas, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;
    use crate::sturm_liouville::{assemble_fd_matrix, OperatorSpec, PolynomialCoefficients, DomainBox};
    use std::f64::consts::PI;

    #[test]
    fn laplacian_closed_form() {
        for n in [7usize, 15, 31] {
            let m = assemble_fd_matrix(&OperatorSpec::laplacian(0.0, 1.0, 1).unwrap(), n).unwrap();
            let r = dense_smallest_eigs(&m, 3).unwrap();
            let h = m.grid.h;
            for k in 1..=3 {
                let exact = 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
                assert!((r.eigenvalues[k - 1] - exact).abs() <= 1e-10 * exact);
            }
            for v in &r.eigenvectors {
                let gn = (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
                assert!((gn - 1.0).abs() < 1e-12);
            }
            for res in &r.residuals {
                assert!(*res <= 1e-10 * m.max_abs_entry);
            }
        }
    }

    #[test]
    fn one_by_one() {
        let a = CsrMatrix::from_triplets(1, &[(0, 0, 2.5)]).unwrap();
        let r = dense_smallest_eigs(&a, 1).unwrap();
        assert_eq!(r.eigenvalues, vec![2.5]);
        assert_eq!(r.eigenvectors, vec![vec![1.0]]);
    }

    #[test]
    fn cap_enforced() {
        let m = assemble_fd_matrix(&OperatorSpec::laplacian(0.0, 1.0, 2).unwrap(), 65).unwrap();
        assert!(matches!(dense_smallest_eigs(&m, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn diagonal_shift_moves_every_eigenvalue() {
        let spec = OperatorSpec::from_fns(DomainBox::new(0.0, 1.0, 2).unwrap(), |x| x[0], |_, x| 1.0 + x[1]).unwrap();
        let m = assemble_fd_matrix(&spec, 8).unwrap();
        let base = dense_smallest_eigs(&m, 6).unwrap();
        let shifted = dense_smallest_eigs(&m.matrix.shifted(3.25), 6).unwrap();
        for (a, b) in base.eigenvalues.iter().zip(&shifted.eigenvalues) {
            assert!((b - a - 3.25).abs() < 1e-10);
        }
    }

    #[test]
    fn quantum_well_refines_towards_analytic() {
        // a_1 = v0 on (-phi_f, phi_f): Lambda_1 = pi^2 v0 / (4 phi_f^2)
        let (v0, pf) = (0.3, 1.7);
        let exact = PI * PI * v0 / (4.0 * pf * pf);
        let d = DomainBox::new(-pf, pf, 1).unwrap();
        let spec = OperatorSpec::polynomial(d, PolynomialCoefficients::constant(1, v0, 0.0)).unwrap();
        let mut prev = f64::INFINITY;
        for n in [15, 31, 63, 127] {
            let l = dense_smallest_eigs(&assemble_fd_matrix(&spec, n).unwrap(), 1).unwrap().eigenvalues[0];
            let err = (l - exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev / exact < 1e-4);
    }
}
