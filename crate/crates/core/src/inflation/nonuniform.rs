//! Conservative finite differences on nonuniform tensor grids.
//!
//! Each axis carries its full node list; the first and last nodes are Dirichlet walls.
//! Rows are scaled by the dual-cell widths `(x_{k+1} - x_{k-1}) / 2`, and the stored
//! matrix is the symmetric `B = W^{1/2} A W^{-1/2}`. Eigenvectors of `B` map back to
//! grid functions through `Psi = y / sqrt(W)`.

use super::hermitize::HermitizedCoefficients;
use super::potential::ReducedPotential;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SymmetricMatrix};
use crate::sturm_liouville::CoefficientField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Diagonal contribution of a link whose half-node coefficient is not positive.
const BLOCKED_LINK: f64 = 1e130;
/// Cap on `log sqrt(w_nb / w_self)` so unreachable neighbours stay finite.
const MAX_HALF_LOG_RATIO: f64 = 300.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorGrid {
    pub axes: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Config("tensor grid needs at least one axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.len() < 3 {
                return Err(Error::Config(format!("axis {i} needs at least 3 nodes")));
            }
            if let Some(k) = a.windows(2).position(|w| !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite()) {
                return Err(Error::Config(format!(
                    "axis {i} is not strictly increasing at node {k} ({} -> {})",
                    a[k],
                    a[k + 1]
                )));
            }
        }
        Ok(Self { axes })
    }

    /// `n_gr` interior nodes per axis, spacing `(upper - lower)/(n_gr + 1)`.
    pub fn uniform(lower: f64, upper: f64, n_gr: usize, d: usize) -> Result<Self> {
        let h = (upper - lower) / (n_gr + 1) as f64;
        let axis: Vec<f64> = (0..n_gr + 2).map(|j| lower + j as f64 * h).collect();
        Self::new(vec![axis; d])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn interior_counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len() - 2).collect()
    }

    pub fn interior_total(&self) -> usize {
        self.interior_counts().iter().product()
    }

    /// Interior multi-index of flat index `k`, axis 0 fastest.
    pub fn interior_index(&self, mut k: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let n = a.len() - 2;
                let j = k % n;
                k /= n;
                j
            })
            .collect()
    }

    pub fn interior_point(&self, k: usize) -> Vec<f64> {
        self.interior_index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&j, a)| a[j + 1])
            .collect()
    }

    /// Dual-cell widths `(x_{j+1} - x_{j-1}) / 2` at interior nodes.
    pub fn dual_widths(&self, axis: usize) -> Vec<f64> {
        self.axes[axis].windows(3).map(|w| 0.5 * (w[2] - w[0])).collect()
    }

    /// Forward widths `x_{j+1} - x_j` at interior nodes.
    pub fn forward_widths(&self, axis: usize) -> Vec<f64> {
        let a = &self.axes[axis];
        (1..a.len() - 1).map(|j| a[j + 1] - a[j]).collect()
    }

    fn product_weights(&self, per_axis: &[Vec<f64>]) -> Vec<f64> {
        (0..self.interior_total())
            .map(|k| {
                self.interior_index(k)
                    .iter()
                    .zip(per_axis)
                    .map(|(&j, w)| w[j])
                    .product()
            })
            .collect()
    }

    pub fn dual_weights(&self) -> Vec<f64> {
        let w: Vec<Vec<f64>> = (0..self.dim()).map(|i| self.dual_widths(i)).collect();
        self.product_weights(&w)
    }

    /// `prod_i (x_{i, j_i + 1} - x_{i, j_i})`, the overlap quadrature weights.
    pub fn forward_weights(&self) -> Vec<f64> {
        let w: Vec<Vec<f64>> = (0..self.dim()).map(|i| self.forward_widths(i)).collect();
        self.product_weights(&w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Flux form of the Hermitized operator with `a_0` on the diagonal.
    Spec,
    /// Flux form of `-(1/w) div(w M^2 v grad)` carried into the Hermitized variable.
    Weighted,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spec" => Ok(Scheme::Spec),
            "weighted" => Ok(Scheme::Weighted),
            other => Err(Error::Config(format!("unknown scheme `{other}` (spec | weighted)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NonuniformOperator {
    /// Symmetric `B` on the active nodes.
    pub matrix: CsrMatrix,
    /// Dual-cell volume of each active node.
    pub weights: Vec<f64>,
    /// Flat interior index of each active node.
    pub active: Vec<usize>,
    pub interior_total: usize,
    pub scheme: Scheme,
}

impl SymmetricMatrix for NonuniformOperator {
    fn csr(&self) -> &CsrMatrix {
        &self.matrix
    }
}

impl NonuniformOperator {
    pub fn eliminated(&self) -> usize {
        self.interior_total - self.active.len()
    }

    /// `A = W^{-1/2} B W^{1/2}`, the operator in the plain nodal basis.
    pub fn unsymmetrized(&self) -> CsrMatrix {
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let trip: Vec<(usize, usize, f64)> = self
            .matrix
            .triplets()
            .map(|(i, j, v)| (i, j, v * sw[j] / sw[i]))
            .collect();
        CsrMatrix::from_triplets(self.matrix.dim(), &trip).expect("same pattern as B")
    }

    /// `Psi = y / sqrt(W)` on every interior node, zero on eliminated ones.
    pub fn to_field(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.active.len() {
            return Err(Error::Dimension {
                expected: self.active.len(),
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.interior_total];
        for ((&k, &w), &yi) in self.active.iter().zip(&self.weights).zip(y) {
            out[k] = yi / w.sqrt();
        }
        Ok(out)
    }
}

struct Link {
    neighbour: Option<usize>,
    half: Vec<f64>,
    node: Vec<f64>,
    spacing: f64,
}

/// The `2d` neighbours of interior node `k`; `neighbour = None` for wall nodes.
fn links(grid: &TensorGrid, k: usize) -> Vec<Link> {
    let j = grid.interior_index(k);
    let x = grid.interior_point(k);
    let counts = grid.interior_counts();
    let mut out = Vec::with_capacity(2 * grid.dim());
    let mut stride = 1;
    for i in 0..grid.dim() {
        let a = &grid.axes[i];
        for step in [-1isize, 1] {
            let full = (j[i] as isize + 1 + step) as usize;
            let mut node = x.clone();
            node[i] = a[full];
            let mut half = x.clone();
            half[i] = 0.5 * (x[i] + a[full]);
            let interior = full >= 1 && full <= counts[i];
            let neighbour = interior.then(|| if step < 0 { k - stride } else { k + stride });
            out.push(Link {
                neighbour,
                half,
                node,
                spacing: (a[full] - x[i]).abs(),
            });
        }
        stride *= counts[i];
    }
    out
}

fn axis_of(link_index: usize) -> usize {
    link_index / 2
}

fn build(
    grid: &TensorGrid,
    scheme: Scheme,
    active_mask: Vec<bool>,
    row: impl Fn(usize, &[Link], &[usize], &[f64]) -> Result<Vec<(usize, f64)>> + Sync,
) -> Result<NonuniformOperator> {
    let total = grid.interior_total();
    let mut slot = vec![usize::MAX; total];
    let mut active = Vec::new();
    for (k, &a) in active_mask.iter().enumerate() {
        if a {
            slot[k] = active.len();
            active.push(k);
        }
    }
    let dual: Vec<Vec<f64>> = (0..grid.dim()).map(|i| grid.dual_widths(i)).collect();
    let rows: Vec<Result<Vec<(usize, f64)>>> = active
        .par_iter()
        .map(|&k| {
            let j = grid.interior_index(k);
            let widths: Vec<f64> = j.iter().zip(&dual).map(|(&ji, w)| w[ji]).collect();
            row(k, &links(grid, k), &slot, &widths)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let matrix = CsrMatrix::from_rows(active.len(), rows)?;
    let all = grid.dual_weights();
    let weights = active.iter().map(|&k| all[k]).collect();
    Ok(NonuniformOperator {
        matrix,
        weights,
        active,
        interior_total: total,
        scheme,
    })
}

/// Flux-form assembly of `-div(a grad) + a_0`. Nodes where `a_0` is not finite are
/// eliminated (Dirichlet); on a uniform grid this is the uniform stencil.
pub fn assemble_spec_scheme(field: &dyn CoefficientField, grid: &TensorGrid) -> Result<NonuniformOperator> {
    let total = grid.interior_total();
    let mask: Vec<bool> = (0..total)
        .into_par_iter()
        .map(|k| field.a0(&grid.interior_point(k)).is_finite())
        .collect();
    let dual: Vec<Vec<f64>> = (0..grid.dim()).map(|i| grid.dual_widths(i)).collect();
    build(grid, Scheme::Spec, mask, |k, links, slot, widths| {
        let x = grid.interior_point(k);
        let mut diag = field.a0(&x);
        let mut row = Vec::with_capacity(links.len() + 1);
        for (li, l) in links.iter().enumerate() {
            let axis = axis_of(li);
            let a = field.a(axis, &l.half);
            if !a.is_finite() {
                return Err(Error::Assembly {
                    index: k,
                    coords: x.clone(),
                    message: format!("a_{} is not finite at the half node {:?}", axis + 1, l.half),
                });
            }
            let cond = a / l.spacing;
            diag += cond.max(0.0) / widths[axis];
            if let Some(nb) = l.neighbour {
                if slot[nb] != usize::MAX {
                    let wnb = dual[axis][grid.interior_index(nb)[axis]];
                    row.push((slot[nb], -cond / (widths[axis] * wnb).sqrt()));
                }
            }
        }
        row.push((slot[k], diag));
        Ok(row)
    })
}

/// Flux form of `-(1/w) div(w M^2 v grad)` with `w` at half nodes taken as the geometric
/// mean of its node values, expressed in the Hermitized variable. Nodes with `v <= 0`
/// are eliminated; links into them act as walls.
pub fn assemble_weighted_scheme(rp: &ReducedPotential, mpl: f64, grid: &TensorGrid) -> Result<NonuniformOperator> {
    if rp.dim() != grid.dim() {
        return Err(Error::Dimension {
            expected: rp.dim(),
            got: grid.dim(),
        });
    }
    let m2 = mpl * mpl;
    let total = grid.interior_total();
    let mask: Vec<bool> = (0..total)
        .into_par_iter()
        .map(|k| rp.v(&grid.interior_point(k)) > 0.0)
        .collect();
    let dual: Vec<Vec<f64>> = (0..grid.dim()).map(|i| grid.dual_widths(i)).collect();
    build(grid, Scheme::Weighted, mask, |k, links, slot, widths| {
        let x = grid.interior_point(k);
        let mut diag = 0.0;
        let mut row = Vec::with_capacity(links.len() + 1);
        for (li, l) in links.iter().enumerate() {
            let axis = axis_of(li);
            let cond = m2 * rp.v(&l.half) / l.spacing;
            let reachable = rp.v(&l.node) > 0.0;
            if cond > 0.0 {
                let half_log = (0.5 * rp.log_w_difference(&x, &l.node)).min(MAX_HALF_LOG_RATIO);
                diag += cond / widths[axis] * half_log.exp();
            } else {
                diag += BLOCKED_LINK;
            }
            if let (Some(nb), true) = (l.neighbour, reachable) {
                if slot[nb] != usize::MAX {
                    let wnb = dual[axis][grid.interior_index(nb)[axis]];
                    row.push((slot[nb], -cond / (widths[axis] * wnb).sqrt()));
                }
            }
        }
        if !diag.is_finite() {
            return Err(Error::Assembly {
                index: k,
                coords: x,
                message: "non-finite diagonal".into(),
            });
        }
        row.push((slot[k], diag));
        Ok(row)
    })
}

pub fn assemble_fp_matrix_nonuniform(
    coeffs: &HermitizedCoefficients,
    grid: &TensorGrid,
    scheme: Scheme,
) -> Result<NonuniformOperator> {
    match scheme {
        Scheme::Spec => assemble_spec_scheme(coeffs, grid),
        Scheme::Weighted => assemble_weighted_scheme(coeffs.potential(), coeffs.mpl(), grid),
    }
}

/// `|sum f Psi_n dV|^2 / (sum f^2 dV sum Psi_n^2 dV)` with forward-difference cell volumes,
/// for the first `k` fields.
pub fn overlap_spectrum(test: &[f64], fields: &[Vec<f64>], grid: &TensorGrid, k: usize) -> Result<Vec<f64>> {
    if k > fields.len() {
        return Err(Error::Precondition(format!("asked for {k} overlaps, have {} fields", fields.len())));
    }
    let n = grid.interior_total();
    if test.len() != n {
        return Err(Error::Dimension { expected: n, got: test.len() });
    }
    let dv = grid.forward_weights();
    let ff: f64 = test.iter().zip(&dv).map(|(f, w)| f * f * w).sum();
    if ff == 0.0 {
        return Err(Error::Numeric("test function has zero norm".into()));
    }
    fields[..k]
        .iter()
        .map(|psi| {
            if psi.len() != n {
                return Err(Error::Dimension { expected: n, got: psi.len() });
            }
            let pp: f64 = psi.iter().zip(&dv).map(|(p, w)| p * p * w).sum();
            if pp == 0.0 {
                return Err(Error::Numeric("eigenfunction has zero norm".into()));
            }
            let fp: f64 = test.iter().zip(psi).zip(&dv).map(|((f, p), w)| f * p * w).sum();
            Ok(fp * fp / (ff * pp))
        })
        .collect()
}
