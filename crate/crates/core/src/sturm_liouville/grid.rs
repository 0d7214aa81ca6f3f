//! Box domains, uniform interior grids and flattened multi-indices.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lower: f64,
    pub upper: f64,
    pub dim: usize,
}

impl DomainBox {
    pub fn new(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        let b = Self { lower, upper, dim };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite()) || self.upper <= self.lower {
            return Err(Error::Domain(format!(
                "box needs finite lower < upper, got ({}, {})",
                self.lower, self.upper
            )));
        }
        if self.dim == 0 {
            return Err(Error::Domain("box dimension must be at least 1".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Interior points `x_j = (j+1) h + L`, `j = 0..n_gr-1`, on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub domain: DomainBox,
    pub n_gr: usize,
    pub h: f64,
    pub total: usize,
}

impl UniformGrid {
    pub fn new(domain: DomainBox, n_gr: usize) -> Result<Self> {
        domain.validate()?;
        if n_gr == 0 {
            return Err(Error::Domain("n_gr must be at least 1".into()));
        }
        let total = n_gr
            .checked_pow(domain.dim as u32)
            .ok_or_else(|| Error::Domain(format!("n_gr^d overflows for n_gr={n_gr}, d={}", domain.dim)))?;
        Ok(Self {
            domain,
            n_gr,
            h: domain.width() / (n_gr as f64 + 1.0),
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    /// Coordinate of grid index `j` along any axis.
    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 + 1.0) * self.h + self.domain.lower
    }

    /// Coordinate of the half point between index `e` and `e+1`; `e = -1` is the
    /// half point next to the lower wall. Both neighbours use this same value.
    pub fn half_coord(&self, e: isize) -> f64 {
        (e as f64 + 1.5) * self.h + self.domain.lower
    }

    pub fn point(&self, k: usize, out: &mut [f64]) {
        let mut rem = k;
        for x in out.iter_mut().take(self.dim()) {
            *x = self.coord(rem % self.n_gr);
            rem /= self.n_gr;
        }
    }

    /// `h^d`, the cell volume used by the grid norm.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }
}

/// `J(j) = sum_i n_gr^(i-1) j_i`.
pub fn flatten_index(j: &[usize], n_gr: usize) -> Result<usize> {
    let mut k = 0usize;
    let mut stride = 1usize;
    for (axis, &ji) in j.iter().enumerate() {
        if ji >= n_gr {
            return Err(Error::Domain(format!(
                "component {axis} = {ji} outside [0, {n_gr})"
            )));
        }
        k += stride * ji;
        stride *= n_gr;
    }
    Ok(k)
}

/// Inverse of [`flatten_index`] by the division cascade (highest axis first).
pub fn unflatten_index(k: usize, n_gr: usize, d: usize) -> Result<Vec<usize>> {
    let total = n_gr.checked_pow(d as u32).unwrap_or(usize::MAX);
    if n_gr == 0 || k >= total {
        return Err(Error::Domain(format!("index {k} outside [0, {n_gr}^{d})")));
    }
    let mut j = vec![0; d];
    let mut rem = k;
    for i in (0..d).rev() {
        let stride = n_gr.pow(i as u32);
        j[i] = rem / stride;
        rem %= stride;
    }
    Ok(j)
}

/// Grid-ordered samples of a function.
#[derive(Clone, Debug, PartialEq)]
pub struct GridVector {
    pub values: Vec<f64>,
    pub grid: UniformGrid,
}

impl GridVector {
    pub fn new(values: Vec<f64>, grid: UniformGrid) -> Result<Self> {
        if values.len() != grid.total {
            return Err(Error::Dimension {
                expected: grid.total,
                got: values.len(),
            });
        }
        Ok(Self { values, grid })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self {
            values: vec![0.0; grid.total],
            grid,
        }
    }

    /// `sqrt(h^d sum v^2)`.
    pub fn grid_norm(&self) -> f64 {
        grid_norm(&self.values, &self.grid)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.grid_norm();
        if n == 0.0 {
            return Err(Error::Numeric("cannot normalize the zero vector".into()));
        }
        self.values.iter_mut().for_each(|v| *v /= n);
        Ok(self)
    }
}

pub fn grid_norm(values: &[f64], grid: &UniformGrid) -> f64 {
    (grid.cell_volume() * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `values[J] = f(x_J)` in flattened order; non-finite values are reported.
pub fn sample_function<F: Fn(&[f64]) -> f64>(f: F, grid: &UniformGrid) -> Result<GridVector> {
    let mut x = vec![0.0; grid.dim()];
    let mut values = Vec::with_capacity(grid.total);
    for k in 0..grid.total {
        grid.point(k, &mut x);
        let v = f(&x);
        if !v.is_finite() {
            return Err(Error::Assembly {
                index: k,
                coords: x.clone(),
                message: format!("function evaluated to {v}"),
            });
        }
        values.push(v);
    }
    GridVector::new(values, *grid)
}
