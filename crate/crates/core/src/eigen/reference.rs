use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::bessel::bessel_zeros_below;
use super::Spectrum;
use crate::error::{Error, Result};

/// Shapes with closed-form or semi-analytic Dirichlet spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceShape {
    Interval { length: f64 },
    /// Clamped beam; the interval with `l = 2`.
    Beam { length: f64 },
    Disk { radius: f64 },
}

/// Nontrivial roots of `cos b cosh b = 1`; the `k`-th lies in
/// `(k pi, (k+1) pi)` near `(k + 1/2) pi`.
pub fn beam_roots(count: usize) -> Vec<f64> {
    // cos b - 1/cosh b has the same roots and stays bounded
    let g = |b: f64| b.cos() - 1.0 / b.cosh();
    (1..=count)
        .map(|k| {
            let (mut lo, mut hi) = (k as f64 * PI + 0.1, (k + 1) as f64 * PI - 0.1);
            let mut glo = g(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn disk_values(radius: f64, count: usize) -> Vec<f64> {
    // by Weyl's law about limit^2 / 4 values lie below limit^2 on the unit disk
    let mut limit = 2.0 * (count as f64).sqrt() + 6.0;
    loop {
        let mut vals = Vec::new();
        let mut m = 0usize;
        // every zero of J_m exceeds m
        while (m as f64) < limit {
            let mult = if m == 0 { 1 } else { 2 };
            for z in bessel_zeros_below(m, limit) {
                for _ in 0..mult {
                    vals.push((z / radius).powi(2));
                }
            }
            m += 1;
        }
        if vals.len() >= count {
            vals.sort_by(f64::total_cmp);
            vals.truncate(count);
            return vals;
        }
        limit *= 1.5;
    }
}

/// Exact (or root-found) continuum eigenvalues for the supported
/// `(shape, l)` pairs: interval with `l = 1`, beam (interval with `l = 2`)
/// and disk with `l = 1`.
pub fn reference_spectrum(shape: ReferenceShape, l: usize, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    let (label, values) = match (shape, l) {
        (ReferenceShape::Interval { length }, 1) => (
            format!("interval(L={length})"),
            (1..=count).map(|k| (k as f64 * PI / length).powi(2)).collect(),
        ),
        (ReferenceShape::Interval { length }, 2) | (ReferenceShape::Beam { length }, 2) => (
            format!("interval(L={length})"),
            beam_roots(count)
                .into_iter()
                .map(|b| (b / length).powi(4))
                .collect(),
        ),
        (ReferenceShape::Disk { radius }, 1) => {
            (format!("ball(R={radius},n=2)"), disk_values(radius, count))
        }
        (shape, l) => {
            return Err(Error::Unsupported(format!(
                "no reference spectrum for {shape:?} with l={l}"
            )))
        }
    };
    Ok(Spectrum {
        domain: label,
        l,
        h: 0.0,
        values,
        extrapolated: false,
        error_estimates: Vec::new(),
        vectors: None,
        grid: None,
    })
}

/// Clamped beam on `(0, L)` with the standard five-point biharmonic stencil
/// and the reflected ghost node `u_{-1} = u_1` at each end (second-order
/// clamping), solved densely. Cross-check for the zero-extension scheme.
pub fn clamped_beam_ghost_point(length: f64, divisions: usize, count: usize) -> Result<Vec<f64>> {
    if divisions < 4 || count == 0 || count > divisions - 1 {
        return Err(Error::invalid("divisions", "too coarse for the requested count"));
    }
    let n = divisions - 1;
    let h = length / divisions as f64;
    let s = h.powi(-4);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 6.0 * s;
        if i + 1 < n {
            m[(i, i + 1)] = -4.0 * s;
            m[(i + 1, i)] = -4.0 * s;
        }
        if i + 2 < n {
            m[(i, i + 2)] = s;
            m[(i + 2, i)] = s;
        }
    }
    m[(0, 0)] += s;
    m[(n - 1, n - 1)] += s;
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(count);
    Ok(vals)
}
