//! Checks of the two overlap inequalities used to pick the grid size.

use super::overlap;
use crate::error::{Error, Result};
use crate::qsvt::eta;
use crate::sturm_liouville::{grid_norm, UniformGrid};

const PRE_TOL: f64 = 1e-9;

fn signed_overlap(u: &[f64], v: &[f64]) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv)
}

/// With `||v||_grid = 1` and `||u - v||_max <= eps`, checks
/// `<u|v> >= 1 - 2 (U-L)^{d/2} eps` for the normalized inner product.
pub fn lemma1_bound_check(u: &[f64], v: &[f64], eps: f64, grid: &UniformGrid) -> Result<bool> {
    if u.len() != grid.total || v.len() != grid.total {
        return Err(Error::Dimension {
            expected: grid.total,
            got: u.len().min(v.len()),
        });
    }
    if (grid_norm(v, grid) - 1.0).abs() > PRE_TOL {
        return Err(Error::Precondition("v must have unit grid norm".into()));
    }
    let dev = u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if !(eps >= 0.0) || dev > eps * (1.0 + PRE_TOL) + PRE_TOL * f64::EPSILON {
        return Err(Error::Precondition(format!("||u - v||_max = {dev} exceeds eps = {eps}")));
    }
    let bound = 1.0 - 2.0 * grid.domain.width().powf(grid.dim() as f64 / 2.0) * eps;
    if bound <= 0.0 {
        return Ok(true);
    }
    if u.iter().all(|&x| x == 0.0) {
        return Ok(false);
    }
    Ok(signed_overlap(u, v) >= bound - 1e-12)
}

/// With `|<phi|psi>| >= gamma` and `|<psi|zeta>| >= eta(gamma)`, checks `|<phi|zeta>| >= gamma/2`.
pub fn lemma2_bound_check(phi: &[f64], psi: &[f64], zeta: &[f64], gamma: f64) -> Result<bool> {
    let e = eta(gamma)?;
    let a = overlap(phi, psi)?;
    let b = overlap(psi, zeta)?;
    if a < gamma - PRE_TOL || b < e - PRE_TOL {
        return Err(Error::Precondition(format!(
            "|<phi|psi>| = {a} (need >= {gamma}), |<psi|zeta>| = {b} (need >= {e})"
        )));
    }
    Ok(overlap(phi, zeta)? >= gamma / 2.0 - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturm_liouville::{sample_function, DomainBox};

    fn grid() -> UniformGrid {
        UniformGrid::new(DomainBox::new(0.0, 1.0, 1).unwrap(), 31).unwrap()
    }

    fn unit_sine(g: &UniformGrid) -> Vec<f64> {
        let v = sample_function(|x| (std::f64::consts::PI * x[0]).sin(), g).unwrap();
        v.normalized().unwrap().values
    }

    #[test]
    fn identical_vectors() {
        let g = grid();
        let v = unit_sine(&g);
        assert!(lemma1_bound_check(&v, &v, 0.0, &g).unwrap());
    }

    #[test]
    fn vacuous_bound_is_true() {
        let g = grid();
        let v = unit_sine(&g);
        let u: Vec<f64> = v.iter().map(|x| x - 0.6).collect();
        assert!(lemma1_bound_check(&u, &v, 0.6, &g).unwrap());
    }

    #[test]
    fn preconditions_enforced() {
        let g = grid();
        let v = unit_sine(&g);
        let w: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert!(lemma1_bound_check(&v, &w, 10.0, &g).is_err());
        let u: Vec<f64> = v.iter().map(|x| x + 0.1).collect();
        assert!(lemma1_bound_check(&u, &v, 0.05, &g).is_err());
    }

    #[test]
    fn lemma2_identical_states() {
        let v = [0.6, 0.8];
        assert!(lemma2_bound_check(&v, &v, &v, 0.999).unwrap());
    }

    #[test]
    fn lemma2_small_gamma_limit() {
        // eta(gamma) -> 1, so zeta must equal psi up to sign
        let phi = [1.0, 0.0, 0.0];
        let psi = [1e-3, 1.0, 0.0];
        let zeta = [-1e-3, -1.0, 0.0];
        assert!(lemma2_bound_check(&phi, &psi, &zeta, 9e-4).unwrap());
    }

    #[test]
    fn lemma2_precondition() {
        assert!(lemma2_bound_check(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], 0.5).is_err());
    }
}
