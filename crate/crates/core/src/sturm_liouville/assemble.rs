//! Finite-difference matrix of `-sum_i d_i (a_i d_i) + a_0` with Dirichlet walls.

use super::coefficients::OperatorSpec;
use super::grid::{unflatten_index, GridVector, UniformGrid};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SymmetricMatrix};
use rayon::prelude::*;
use std::io::Write;

#[derive(Clone, Debug)]
pub struct FDMatrix {
    pub matrix: CsrMatrix,
    pub grid: UniformGrid,
    /// Structural sparsity `2d+1`.
    pub sparsity: usize,
    pub max_abs_entry: f64,
    /// Half-step points where some `a_i <= 0` (reported, not fatal).
    pub positivity_violations: usize,
}

impl SymmetricMatrix for FDMatrix {
    fn csr(&self) -> &CsrMatrix {
        &self.matrix
    }
    fn vector_weight(&self) -> f64 {
        self.grid.cell_volume()
    }
    fn stencil_dimension(&self) -> Option<usize> {
        Some(self.grid.dim())
    }
}

impl FDMatrix {
    pub fn dim(&self) -> usize {
        self.grid.total
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.matrix.get(j, k)
    }

    /// Triplet CSV with a `# n_gr=.. d=.. h=..` line and a column header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n_gr={} d={} h={}", self.grid.n_gr, self.grid.dim(), self.grid.h)?;
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["row", "col", "value"])?;
        for (i, j, v) in self.matrix.triplets() {
            cw.write_record([i.to_string(), j.to_string(), v.to_string()])?;
        }
        cw.flush()?;
        Ok(())
    }
}

/// The `2d+1` coefficient values a grid point needs: `a_0(x)` and `a_i(x ± h e_i / 2)`.
pub(crate) struct Stencil {
    pub a0: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

pub(crate) fn stencil(spec: &OperatorSpec, grid: &UniformGrid, j: &[usize]) -> Stencil {
    let d = grid.dim();
    let x: Vec<f64> = j.iter().map(|&ji| grid.coord(ji)).collect();
    let a0 = spec.a0(&x);
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    let mut y = x.clone();
    for i in 0..d {
        y[i] = grid.half_coord(j[i] as isize);
        plus[i] = spec.a(i, &y);
        y[i] = grid.half_coord(j[i] as isize - 1);
        minus[i] = spec.a(i, &y);
        y[i] = x[i];
    }
    Stencil { a0, plus, minus }
}

fn check_finite(st: &Stencil, k: usize, j: &[usize], grid: &UniformGrid) -> Result<()> {
    let bad = !st.a0.is_finite() || st.plus.iter().chain(&st.minus).any(|v| !v.is_finite());
    if bad {
        return Err(Error::Assembly {
            index: k,
            coords: j.iter().map(|&ji| grid.coord(ji)).collect(),
            message: "coefficient evaluated to a non-finite value".into(),
        });
    }
    Ok(())
}

pub fn assemble_fd_matrix(spec: &OperatorSpec, n_gr: usize) -> Result<FDMatrix> {
    let grid = UniformGrid::new(spec.domain, n_gr)?;
    let d = grid.dim();
    let h2 = grid.h * grid.h;
    let rows: Vec<Result<(Vec<(usize, f64)>, usize)>> = (0..grid.total)
        .into_par_iter()
        .map(|k| {
            let j = unflatten_index(k, n_gr, d)?;
            let st = stencil(spec, &grid, &j);
            check_finite(&st, k, &j, &grid)?;
            let mut row = Vec::with_capacity(2 * d + 1);
            let mut diag = 0.0;
            let mut bad = 0;
            let mut stride = 1usize;
            for i in 0..d {
                diag += (st.plus[i] + st.minus[i]) / h2;
                bad += (st.plus[i] <= 0.0) as usize + (st.minus[i] <= 0.0) as usize;
                if j[i] > 0 {
                    row.push((k - stride, -st.minus[i] / h2));
                }
                if j[i] + 1 < n_gr {
                    row.push((k + stride, -st.plus[i] / h2));
                }
                stride *= n_gr;
            }
            row.push((k, diag + st.a0));
            Ok((row, bad))
        })
        .collect();
    let mut csr_rows = Vec::with_capacity(grid.total);
    let mut violations = 0;
    for r in rows {
        let (row, bad) = r?;
        violations += bad;
        csr_rows.push(row);
    }
    if violations > 0 {
        log::warn!("{violations} half-step points with non-positive diffusion coefficient");
    }
    let matrix = CsrMatrix::from_rows(grid.total, csr_rows)?;
    Ok(FDMatrix {
        max_abs_entry: matrix.max_abs(),
        matrix,
        grid,
        sparsity: 2 * d + 1,
        positivity_violations: violations,
    })
}

pub fn apply_fd_operator(m: &FDMatrix, v: &GridVector) -> Result<GridVector> {
    if v.grid != m.grid {
        return Err(Error::Dimension {
            expected: m.dim(),
            got: v.values.len(),
        });
    }
    GridVector::new(m.matrix.mul_vec(&v.values)?, m.grid)
}
