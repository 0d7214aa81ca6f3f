//! Empirical convergence order and constants of the k-th discrete eigenvalue.

use super::smallest_eigs;
use crate::error::{Error, Result};
use crate::sturm_liouville::{assemble_fd_matrix, unflatten_index, OperatorSpec, UniformGrid};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    /// Minus the least-squares slope of `log|lambda(n) - lambda_ref|` against `log n`.
    pub order: f64,
    /// `max_n n^2 |lambda(n) - lambda_ref|`, an estimate of `C^k`.
    pub constant_estimate: f64,
    pub reference: f64,
    pub resolutions: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// `max_n n^2 ||v_n - v_finest||_max` over grids nested in the finest one.
    pub vector_constant_estimate: Option<f64>,
}

fn check_ellipticity(spec: &OperatorSpec, n: usize) -> Result<()> {
    let grid = UniformGrid::new(spec.domain, n)?;
    let d = grid.dim();
    let mut x = vec![0.0; d];
    for k in 0..grid.total {
        let j = unflatten_index(k, n, d)?;
        for i in 0..d {
            for e in [j[i] as isize - 1, j[i] as isize] {
                for (a, &ja) in j.iter().enumerate() {
                    x[a] = grid.coord(ja);
                }
                x[i] = grid.half_coord(e);
                let v = spec.a(i, &x);
                if !(v > 0.0) {
                    return Err(Error::Precondition(format!(
                        "a_{} = {v} at {x:?} violates ellipticity",
                        i + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn richardson_fit(spec: &OperatorSpec, resolutions: &[usize], k: usize) -> Result<ConvergenceFit> {
    richardson_fit_with_reference(spec, resolutions, k, None)
}

/// As [`richardson_fit`], with an optional analytic reference value.
pub fn richardson_fit_with_reference(
    spec: &OperatorSpec,
    resolutions: &[usize],
    k: usize,
    reference: Option<f64>,
) -> Result<ConvergenceFit> {
    if resolutions.len() < 3 {
        return Err(Error::Precondition("a fit needs at least 3 resolutions".into()));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("resolutions must be strictly ascending".into()));
    }
    if k == 0 {
        return Err(Error::Precondition("eigenvalue index k is 1-based".into()));
    }
    check_ellipticity(spec, resolutions[0])?;

    let mut eigenvalues = Vec::new();
    let mut vectors = Vec::new();
    let mut grids = Vec::new();
    for &n in resolutions {
        let m = assemble_fd_matrix(spec, n)?;
        let r = smallest_eigs(&m, k)?;
        if r.eigenvalues.len() < k {
            return Err(Error::Precondition(format!("grid n_gr={n} has fewer than {k} eigenvalues")));
        }
        eigenvalues.push(r.eigenvalues[k - 1]);
        vectors.push(r.eigenvectors[k - 1].clone());
        grids.push(m.grid);
    }

    let last = resolutions.len() - 1;
    let reference = reference.unwrap_or_else(|| {
        let (hc, hf) = (grids[last - 1].h, grids[last].h);
        let (lc, lf) = (eigenvalues[last - 1], eigenvalues[last]);
        (lf * hc * hc - lc * hf * hf) / (hc * hc - hf * hf)
    });
    let errors: Vec<f64> = eigenvalues.iter().map(|l| (l - reference).abs()).collect();
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Numeric(format!(
            "degenerate fit: errors {errors:?} against reference {reference}"
        )));
    }
    let xs: Vec<f64> = resolutions.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let order = -least_squares_slope(&xs, &ys);
    let constant_estimate = resolutions
        .iter()
        .zip(&errors)
        .map(|(&n, e)| (n * n) as f64 * e)
        .fold(0.0, f64::max);

    let fine = &vectors[last];
    let gf = grids[last];
    let mut vc: Option<f64> = None;
    for (i, &n) in resolutions.iter().enumerate().take(last) {
        if (gf.n_gr + 1) % (n + 1) != 0 {
            continue;
        }
        let ratio = (gf.n_gr + 1) / (n + 1);
        let d = gf.dim();
        let matched: Vec<f64> = (0..grids[i].total)
            .map(|kc| {
                let j = unflatten_index(kc, n, d).unwrap();
                let kf = j
                    .iter()
                    .rev()
                    .fold(0usize, |acc, &ji| acc * gf.n_gr + (ji + 1) * ratio - 1);
                fine[kf]
            })
            .collect();
        let dotp: f64 = matched.iter().zip(&vectors[i]).map(|(a, b)| a * b).sum();
        let sgn = if dotp < 0.0 { -1.0 } else { 1.0 };
        let dev = matched
            .iter()
            .zip(&vectors[i])
            .map(|(a, b)| (sgn * b - a).abs())
            .fold(0.0, f64::max);
        let est = (n * n) as f64 * dev;
        vc = Some(vc.map_or(est, |v: f64| v.max(est)));
    }

    Ok(ConvergenceFit {
        order,
        constant_estimate,
        reference,
        resolutions: resolutions.to_vec(),
        eigenvalues,
        vector_constant_estimate: vc,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
