//! Complex error function in the scaled form `e^{-y^2} erf(x + i y)`.
//!
//! Series in `k` with Gaussian weights `e^{-k^2/4}` (Abramowitz-Stegun 7.1.29). All
//! exponentials are merged before evaluation so that large `x` or `y` never overflow.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `e^{-y^2} erf(x + i y)` for `z = x + i y`.
pub fn erf_scaled(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if x < 0.0 {
        // erf(-z) = -erf(z)
        return -erf_scaled(-z);
    }
    let ey2 = (-y * y).exp();
    let (s2, c2) = (2.0 * x * y).sin_cos();
    let mut re = ey2 * libm::erf(x);
    let mut im = 0.0;
    let exy = (-x * x - y * y).exp();
    if x == 0.0 {
        im += exy * y / PI;
    } else {
        let sxy = (x * y).sin();
        re += exy / (2.0 * PI * x) * (2.0 * sxy * sxy);
        im += exy / (2.0 * PI * x) * s2;
    }
    let kmax = (2.0 * y.abs() + 14.0).ceil() as usize;
    let (mut sre, mut sim) = (0.0, 0.0);
    for k in 1..=kmax {
        let kf = k as f64;
        // e^{-x^2 - y^2 - k^2/4} cosh(k y) and sinh(k y), merged
        let plus = (-x * x - (y - kf / 2.0).powi(2)).exp();
        let minus = (-x * x - (y + kf / 2.0).powi(2)).exp();
        let ch = 0.5 * (plus + minus);
        let sh = 0.5 * (plus - minus);
        let flat = (-x * x - kf * kf / 4.0 - y * y).exp();
        let denom = kf * kf + 4.0 * x * x;
        let f = 2.0 * x * flat - 2.0 * x * ch * c2 + kf * sh * s2;
        let g = 2.0 * x * ch * s2 + kf * sh * c2;
        sre += f / denom;
        sim += g / denom;
    }
    re += 2.0 / PI * sre;
    im += 2.0 / PI * sim;
    Complex64::new(re, im)
}

/// `erf(z)`; overflows for large `|Im z|`.
pub fn erf_complex(z: Complex64) -> Complex64 {
    erf_scaled(z) * (z.im * z.im).exp()
}
