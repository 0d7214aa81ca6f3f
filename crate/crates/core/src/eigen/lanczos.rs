//! Lanczos with full reorthogonalization and a seeded start vector.
//!
//! No restarts. After a run converges, a second run in the orthogonal complement
//! of the converged vectors checks for missed copies of repeated eigenvalues.

use super::banded::BandedLdl;
use super::{finalize, EigenResult};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SymmetricMatrix};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_SEED: u64 = 0x5EED_1A2C;

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub tol: f64,
    /// Maximum Krylov dimension per run.
    pub max_iter: usize,
    pub seed: u64,
    pub lock_check: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 600,
            seed: DEFAULT_SEED,
            lock_check: true,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Want {
    Smallest,
    Largest,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], locked: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in locked.iter().chain(basis) {
            let c = dot(w, q);
            axpy(-c, q, w);
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, basis: &[Vec<f64>], locked: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..5 {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        orthogonalize(&mut v, basis, locked);
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

struct RunOutput {
    thetas: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

/// One Lanczos run on `apply`, restricted to the complement of `locked`.
/// Converged when the Ritz residual `|beta s_m|` is below `ritz_tol(theta)` for the
/// `k` wanted Ritz values.
fn run(
    n: usize,
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    k: usize,
    want: Want,
    ritz_tol: &dyn Fn(f64) -> f64,
    max_dim: usize,
    seed: u64,
    locked: &[Vec<f64>],
) -> Result<RunOutput> {
    let avail = n - locked.len();
    let k = k.min(avail);
    if k == 0 {
        return Ok(RunOutput {
            thetas: vec![],
            vectors: vec![],
        });
    }
    let max_dim = max_dim.min(avail).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let first = random_unit(n, &mut rng, &q, locked)
        .ok_or_else(|| Error::Numeric("could not draw a Lanczos start vector".into()))?;
    q.push(first);
    let mut best = vec![f64::INFINITY; k];
    let mut next_check = k.max(8);
    loop {
        let j = q.len() - 1;
        apply(&q[j], &mut w);
        let a = dot(&w, &q[j]);
        alpha.push(a);
        axpy(-a, &q[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &q[j - 1], &mut w);
        }
        orthogonalize(&mut w, &q, locked);
        let mut b = dot(&w, &w).sqrt();
        let m = j + 1;
        let scale = alpha.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
        let exhausted = m >= max_dim;
        let breakdown = b <= 1e-13 * scale;
        if m >= next_check || exhausted || breakdown {
            next_check = m + (m / 8).max(4);
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = t.symmetric_eigen();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
            if want == Want::Largest {
                order.reverse();
            }
            let kk = k.min(m);
            let resid_b = if breakdown { 0.0 } else { b };
            let mut all = kk == k;
            for (slot, &idx) in order.iter().take(kk).enumerate() {
                let th = eig.eigenvalues[idx];
                let r = (resid_b * eig.eigenvectors[(m - 1, idx)]).abs();
                best[slot] = best[slot].min(r);
                if r > ritz_tol(th) {
                    all = false;
                }
            }
            let full_space = m >= avail;
            if all || full_space {
                let mut thetas = Vec::with_capacity(kk);
                let mut vectors = Vec::with_capacity(kk);
                for &idx in order.iter().take(kk) {
                    let mut y = vec![0.0; n];
                    for (i, qi) in q.iter().enumerate() {
                        axpy(eig.eigenvectors[(i, idx)], qi, &mut y);
                    }
                    let ny = dot(&y, &y).sqrt();
                    y.iter_mut().for_each(|x| *x /= ny);
                    thetas.push(eig.eigenvalues[idx]);
                    vectors.push(y);
                }
                return Ok(RunOutput { thetas, vectors });
            }
            if exhausted {
                return Err(Error::NoConvergence {
                    iterations: m,
                    residuals: best,
                });
            }
        }
        if breakdown {
            // invariant subspace found: continue in a fresh direction
            b = 0.0;
            match random_unit(n, &mut rng, &q, locked) {
                Some(v) => {
                    beta.push(b);
                    q.push(v);
                    continue;
                }
                None => {
                    return Err(Error::NoConvergence {
                        iterations: m,
                        residuals: best,
                    })
                }
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        q.push(w.clone());
    }
}

/// Repeats runs against the converged set until the complement offers nothing better.
fn run_with_locking(
    n: usize,
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    k: usize,
    want: Want,
    ritz_tol: &dyn Fn(f64) -> f64,
    opts: &LanczosOptions,
) -> Result<RunOutput> {
    let better = |a: f64, b: f64| match want {
        Want::Smallest => a < b,
        Want::Largest => a > b,
    };
    let first = run(n, apply, k, want, ritz_tol, opts.max_iter, opts.seed, &[])?;
    let mut thetas = first.thetas;
    let mut vectors = first.vectors;
    if !opts.lock_check {
        return Ok(RunOutput { thetas, vectors });
    }
    for pass in 1..=8u64 {
        if vectors.len() >= n || thetas.is_empty() {
            break;
        }
        let extra = run(n, apply, k, want, ritz_tol, opts.max_iter, opts.seed.wrapping_add(pass), &vectors)?;
        let worst = *thetas.last().unwrap();
        let margin = |t: f64| ritz_tol(t).max(1e-12 * t.abs());
        let gained: Vec<usize> = (0..extra.thetas.len())
            .filter(|&i| {
                let t = extra.thetas[i];
                thetas.len() < k || (better(t, worst) && (t - worst).abs() > margin(t))
            })
            .collect();
        if gained.is_empty() {
            break;
        }
        for i in gained {
            thetas.push(extra.thetas[i]);
            vectors.push(extra.vectors[i].clone());
        }
        let mut idx: Vec<usize> = (0..thetas.len()).collect();
        idx.sort_by(|&a, &b| {
            let o = thetas[a].partial_cmp(&thetas[b]).unwrap();
            if want == Want::Largest {
                o.reverse()
            } else {
                o
            }
        });
        idx.truncate(k);
        thetas = idx.iter().map(|&i| thetas[i]).collect();
        vectors = idx.iter().map(|&i| vectors[i].clone()).collect();
    }
    Ok(RunOutput { thetas, vectors })
}

/// First `k` eigenpairs of a symmetric matrix; residuals below `tol * ||L||_max`.
pub fn lanczos_smallest_eigs<M: SymmetricMatrix>(m: &M, k: usize, tol: f64, max_iter: usize) -> Result<EigenResult> {
    let opts = LanczosOptions {
        tol,
        max_iter,
        ..LanczosOptions::default()
    };
    lanczos_smallest_eigs_with(m, k, &opts)
}

pub fn lanczos_smallest_eigs_with<M: SymmetricMatrix>(m: &M, k: usize, opts: &LanczosOptions) -> Result<EigenResult> {
    let a = m.csr();
    let n = a.dim();
    let k = k.min(n);
    let target = opts.tol * a.max_abs();
    let ritz_tol = move |_t: f64| 0.5 * target;
    let mut apply = |x: &[f64], y: &mut [f64]| a.matvec(x, y);
    let out = run_with_locking(n, &mut apply, k, Want::Smallest, &ritz_tol, opts)?;
    let res = finalize(m, out.thetas, out.vectors);
    check_residuals(res, opts.tol * a.max_abs())
}

fn check_residuals(res: EigenResult, bound: f64) -> Result<EigenResult> {
    if res.residuals.iter().all(|&r| r <= bound) {
        Ok(res)
    } else {
        Err(Error::NoConvergence {
            iterations: 0,
            residuals: res.residuals,
        })
    }
}

/// Shift below the bottom of the spectrum, located from `LDL^T` inertia.
pub fn auto_shift(a: &CsrMatrix) -> Result<f64> {
    let inertia = |s: f64| BandedLdl::factor(a, s).map(|f| f.negative_pivots());
    let n = a.dim();
    let gersh = (0..n)
        .map(|i| {
            let (cols, vals) = a.row(i);
            let mut d = 0.0;
            let mut off = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    d = v;
                } else {
                    off += v.abs();
                }
            }
            d - off
        })
        .fold(f64::INFINITY, f64::min);
    let min_diag = a.diagonal().into_iter().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = if gersh >= 0.0 {
        (gersh, min_diag)
    } else if inertia(0.0).map(|c| c == 0).unwrap_or(false) {
        (0.0, min_diag)
    } else {
        let lo = gersh - 1e-12 * gersh.abs() - f64::MIN_POSITIVE;
        (lo, 0.0f64.min(min_diag))
    };
    if hi <= lo {
        return Ok(lo);
    }
    for _ in 0..200 {
        if hi - lo <= 0.25 * hi.abs().max(lo.abs()) {
            break;
        }
        let mid = if lo > 0.0 {
            (lo * hi).sqrt()
        } else if lo == 0.0 {
            0.1 * hi
        } else {
            0.5 * (lo + hi)
        };
        match inertia(mid) {
            Ok(0) => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(if lo > 0.0 { lo * 0.9 } else { lo - 0.1 * (hi - lo) })
}

/// Smallest `k` eigenpairs via Lanczos on `(A - sigma I)^{-1}` with a banded `LDL^T`.
/// `sigma = None` picks a shift below the spectrum automatically.
pub fn shift_invert_smallest_eigs<M: SymmetricMatrix>(
    m: &M,
    k: usize,
    sigma: Option<f64>,
    opts: &LanczosOptions,
) -> Result<EigenResult> {
    let a = m.csr();
    let n = a.dim();
    let k = k.min(n);
    let sigma = match sigma {
        Some(s) => s,
        None => auto_shift(a)?,
    };
    let f = BandedLdl::factor(a, sigma)?;
    if f.negative_pivots() > 0 {
        return Err(Error::Numeric(format!(
            "shift {sigma} lies above {} eigenvalues",
            f.negative_pivots()
        )));
    }
    let tol = opts.tol;
    let ritz_tol = move |t: f64| tol * t.abs();
    let mut apply = |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(x);
        f.solve_in_place(y);
    };
    let out = run_with_locking(n, &mut apply, k, Want::Largest, &ritz_tol, opts)?;
    let lambdas: Vec<f64> = out.thetas.iter().map(|t| sigma + 1.0 / t).collect();
    Ok(finalize(m, lambdas, out.vectors))
}
