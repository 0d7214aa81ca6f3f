//! Threshold search and the log/linear tensor grid for the two-field hybrid model.
//!
//! Inside the stochastic window `[c - d_sto, c + d_sto]` nodes are equally spaced; on
//! each side `n_out` further nodes are equally spaced in `log |x - c|` out to `d_max`.
//! The outermost nodes are Dirichlet walls.

use super::nonuniform::TensorGrid;
use super::potential::{reduced_potential, HybridParams, PotentialModel, ReducedPotential};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Stochasticity level that delimits the stochastic window.
pub const ETA_STO_THRESHOLD: f64 = 0.1;
const REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridThresholds {
    pub phi_sto_plus: f64,
    pub phi_sto_minus: f64,
    pub psi_sto_plus: f64,
    pub psi_sto_minus: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub psi_min: f64,
    pub psi_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonuniformGrid2D {
    pub phi_nodes: Vec<f64>,
    pub psi_nodes: Vec<f64>,
    pub thresholds: HybridThresholds,
    pub scale: f64,
    pub phi_c: f64,
}

impl NonuniformGrid2D {
    pub fn tensor(&self) -> Result<TensorGrid> {
        TensorGrid::new(vec![self.phi_nodes.clone(), self.psi_nodes.clone()])
    }

    /// `Delta phi_k Delta psi_l` (forward differences) on interior nodes, `phi` fastest.
    pub fn cell_weights(&self) -> Result<Vec<f64>> {
        Ok(self.tensor()?.forward_weights())
    }
}

/// Steps geometrically from `start` by `factor` until `f` changes sign.
pub fn scan_bracket<F: Fn(f64) -> f64>(f: F, start: f64, factor: f64, limit: f64) -> Result<(f64, f64)> {
    let mut profile = Vec::new();
    let mut x = start;
    let mut fx = f(x);
    profile.push((x, fx));
    while x < limit {
        let y = (x * factor).min(limit);
        let fy = f(y);
        profile.push((y, fy));
        if fx.is_finite() && fy.is_finite() && fx.signum() != fy.signum() {
            return Ok((x, y));
        }
        x = y;
        fx = fy;
    }
    Err(Error::RootFind {
        message: format!("no sign change between {start} and {limit}"),
        profile,
    })
}

/// Bisection on a sign-change bracket down to relative width `rel_tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.signum() != fhi.signum()) || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::RootFind {
            message: "bracket does not straddle a root".into(),
            profile: vec![(lo, flo), (hi, fhi)],
        });
    }
    let lo_sign = flo.signum();
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) || mid == lo || mid == hi {
            break;
        }
        if f(mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn stochasticity(rp: &ReducedPotential, x: &[f64], axis: usize) -> f64 {
    let mut g = [0.0; 2];
    let mut h = [0.0; 2];
    rp.grad(x, &mut g);
    rp.hess_diag(x, &mut h);
    let v = rp.v(x);
    v * v * h[axis] / (g[axis] * g[axis])
}

pub fn hybrid_thresholds(p: &HybridParams) -> Result<HybridThresholds> {
    let rp = reduced_potential(&PotentialModel::Hybrid(p.clone()))?;
    let d_max = p.beta.powf(-1.0 / 3.0);
    let eta_phi = |x: f64| stochasticity(&rp, &[p.phi_c + x, 0.0], 0) - ETA_STO_THRESHOLD;
    let (a, b) = scan_bracket(eta_phi, p.phi_c * 1e-12, 2.0, d_max)?;
    let dphi = bisect(eta_phi, a, b, REL_TOL)?;
    let phi_plus = p.phi_c + dphi;

    let second = |s: f64| {
        let mut h = [0.0; 2];
        rp.hess_diag(&[p.phi_c, s], &mut h);
        (h[1] / rp.v(&[p.phi_c, s])).abs() - 1.0
    };
    let (a, b) = scan_bracket(second, p.m * 1e-6, 2.0, 1e6)?;
    let psi_max = bisect(second, a, b, REL_TOL)?;

    let eta_psi = |s: f64| stochasticity(&rp, &[phi_plus, s], 1) - ETA_STO_THRESHOLD;
    let (a, b) = scan_bracket(eta_psi, p.m * 1e-15, 2.0, psi_max)?;
    let psi_plus = bisect(eta_psi, a, b, REL_TOL)?;

    Ok(HybridThresholds {
        phi_sto_plus: phi_plus,
        phi_sto_minus: p.phi_c - dphi,
        psi_sto_plus: psi_plus,
        psi_sto_minus: -psi_plus,
        phi_min: p.phi_c - d_max,
        phi_max: p.phi_c + d_max,
        psi_min: -psi_max,
        psi_max,
    })
}

/// Offsets from the centre: `n_out` log-spaced from `-d_max`, `n_in` linear on
/// `[-d_sto, d_sto]`, then the mirror image. Exactly antisymmetric.
pub fn axis_offsets(d_sto: f64, d_max: f64, n_in: usize, n_out: usize) -> Result<Vec<f64>> {
    if !(0.0 < d_sto && d_sto < d_max) || n_in < 2 || n_out < 1 {
        return Err(Error::Config(format!(
            "axis needs 0 < d_sto < d_max, n_in >= 2, n_out >= 1 (got {d_sto}, {d_max}, {n_in}, {n_out})"
        )));
    }
    let (lmax, lsto) = (d_max.ln(), d_sto.ln());
    let mut half: Vec<f64> = (0..n_out)
        .map(|j| -(lmax + j as f64 * (lsto - lmax) / n_out as f64).exp())
        .collect();
    half[0] = -d_max;
    for i in 0..n_in / 2 {
        half.push(-d_sto + 2.0 * d_sto * i as f64 / (n_in - 1) as f64);
    }
    let mut out = half.clone();
    if n_in % 2 == 1 {
        out.push(0.0);
    }
    out.extend(half.iter().rev().map(|x| -x));
    Ok(out)
}

pub fn build_hybrid_grid(model: &PotentialModel, scale: f64) -> Result<NonuniformGrid2D> {
    let p = match model {
        PotentialModel::Hybrid(p) => p,
        _ => return Err(Error::Config("the nonuniform grid is built for the hybrid model".into())),
    };
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::Config(format!("resolution scale must lie in (0, 1], got {scale}")));
    }
    let t = hybrid_thresholds(p)?;
    let n_in = (1000.0 * scale).ceil() as usize;
    let n_out = (500.0 * scale).ceil() as usize;
    let dphi_sto = t.phi_sto_plus - p.phi_c;
    let d_max = t.phi_max - p.phi_c;
    let phi_nodes: Vec<f64> = axis_offsets(dphi_sto, d_max, n_in, n_out)?
        .into_iter()
        .map(|o| p.phi_c + o)
        .collect();
    let psi_nodes = axis_offsets(t.psi_sto_plus, t.psi_max, n_in, n_out)?;
    let g = NonuniformGrid2D {
        phi_nodes,
        psi_nodes,
        thresholds: t,
        scale,
        phi_c: p.phi_c,
    };
    g.tensor()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_thresholds() {
        let p = HybridParams::reference();
        let t = hybrid_thresholds(&p).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(t.phi_sto_plus - p.phi_c, 1.411884762727276e-7) < 1e-8, "{}", t.phi_sto_plus - p.phi_c);
        assert!(rel(t.psi_sto_plus, 1.886728581612835e-11) < 1e-8, "{}", t.psi_sto_plus);
        assert!(rel(t.psi_max, 1.4142075994667047) < 1e-10, "{}", t.psi_max);
        assert!(rel(t.phi_max - p.phi_c, 0.046415888336127795) < 1e-12);
        // closed forms: x^3 ~ 2 c V0 / (3 beta eta) and psi_max^2 = 2 - M^2
        let c = super::super::potential::reduction() * p.v0;
        let x = t.phi_sto_plus - p.phi_c;
        let closed = 2.0 * c * (1.0 + p.beta * x.powi(3)).powi(2) / (3.0 * p.beta * x.powi(3));
        assert!(rel(closed, 0.1) < 1e-9);
        assert!(rel(t.psi_max, (2.0 - p.m * p.m).sqrt()) < 1e-10);
        assert_eq!(t.psi_min, -t.psi_max);
        assert_eq!(t.psi_sto_minus, -t.psi_sto_plus);
    }

    #[test]
    fn node_counts_and_symmetry() {
        let m = PotentialModel::Hybrid(HybridParams::reference());
        let g = build_hybrid_grid(&m, 1.0).unwrap();
        assert_eq!(g.phi_nodes.len(), 2000);
        assert_eq!(g.psi_nodes.len(), 2000);
        let n = g.psi_nodes.len();
        for i in 0..n {
            assert_eq!(g.psi_nodes[i], -g.psi_nodes[n - 1 - i]);
        }
        assert!(g.phi_nodes.windows(2).all(|w| w[1] > w[0]));
        let g = build_hybrid_grid(&m, 0.1).unwrap();
        assert_eq!(g.phi_nodes.len(), 200);
        assert_eq!(g.cell_weights().unwrap().len(), 198 * 198);
    }

    #[test]
    fn inner_nodes_linear_outer_logarithmic() {
        let o = axis_offsets(1e-3, 1.0, 11, 6).unwrap();
        assert_eq!(o.len(), 23);
        let inner = &o[6..17];
        let d = inner[1] - inner[0];
        assert!(inner.windows(2).all(|w| ((w[1] - w[0]) - d).abs() < 1e-15));
        let logs: Vec<f64> = o[..6].iter().map(|x| (-x).ln()).collect();
        let step = logs[1] - logs[0];
        assert!(logs.windows(2).all(|w| ((w[1] - w[0]) - step).abs() < 1e-12));
        assert_eq!(o[0], -1.0);
        assert_eq!(o[11], 0.0);
    }

    #[test]
    fn failures() {
        let m = PotentialModel::QuantumWell { v0: 1.0, phi_f: 1.0 };
        assert!(build_hybrid_grid(&m, 0.1).is_err());
        let h = PotentialModel::Hybrid(HybridParams::reference());
        assert!(build_hybrid_grid(&h, 0.0).is_err());
        let e = scan_bracket(|x| x + 1.0, 1.0, 2.0, 100.0).unwrap_err();
        assert_eq!(e.exit_code(), 5);
        match e {
            Error::RootFind { profile, .. } => assert!(profile.len() > 3),
            _ => unreachable!(),
        }
    }

    #[test]
    fn bisection_converges() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
