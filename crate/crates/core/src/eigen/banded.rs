//! Banded `LDL^T` factorization without pivoting, used for shift-invert solves.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub struct BandedLdl {
    n: usize,
    b: usize,
    /// Row `i` holds `L[i][i-b..i]` at `l[i*b..(i+1)*b]`; slots before column 0 stay zero.
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandedLdl {
    /// Factors `A - shift I` for a symmetric `A` (only the lower triangle is read).
    pub fn factor(a: &CsrMatrix, shift: f64) -> Result<Self> {
        let n = a.dim();
        let b = a.bandwidth();
        let mut l = vec![0.0; n * b];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c < i {
                    l[i * b + (c + b - i)] = v;
                } else if c == i {
                    d[i] = v - shift;
                }
            }
        }
        let mut u = vec![0.0; b];
        for i in 0..n {
            let lo = i.saturating_sub(b);
            // u[t - (i-b)] = L[i][t] d[t] for already finished columns t
            for c in lo..i {
                let off_i = c + b - i;
                let clo = lo.max(c.saturating_sub(b));
                let mut s = l[i * b + off_i];
                let row_c = &l[c * b..(c + 1) * b];
                for t in clo..c {
                    s -= u[t + b - i] * row_c[t + b - c];
                }
                let lic = s / d[c];
                l[i * b + off_i] = lic;
                u[off_i] = lic * d[c];
            }
            let mut di = d[i];
            for c in lo..i {
                di -= u[c + b - i] * l[i * b + (c + b - i)];
            }
            if di == 0.0 || !di.is_finite() {
                return Err(Error::Numeric(format!(
                    "LDL^T breakdown at pivot {i} (value {di}) for shift {shift}"
                )));
            }
            d[i] = di;
        }
        Ok(Self { n, b, l, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of negative pivots: by Sylvester's law, the eigenvalue count below the shift.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    /// Overwrites `x` with `(A - shift I)^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, b) = (self.n, self.b);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let row = &self.l[i * b..(i + 1) * b];
            let mut s = x[i];
            for c in lo..i {
                s -= row[c + b - i] * x[c];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let xi = x[i];
            let lo = i.saturating_sub(b);
            let row = &self.l[i * b..(i + 1) * b];
            for c in lo..i {
                x[c] -= row[c + b - i] * xi;
            }
        }
    }
}
