//! Distribution functions and symmetric decreasing rearrangement of
//! nonnegative grid functions.

use serde::{Deserialize, Serialize};

use crate::eigen::GridDomain;
use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume;
use crate::lemma::RadialProfile;

/// Nonnegative values, one per interior node of `grid`.
#[derive(Debug, Clone)]
pub struct GriddedFunction<'a> {
    grid: &'a GridDomain,
    values: Vec<f64>,
}

impl<'a> GriddedFunction<'a> {
    pub fn new(grid: &'a GridDomain, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "values",
                format!("{} values for {} nodes", values.len(), grid.len()),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("values", "must be finite and nonnegative"));
        }
        Ok(GriddedFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &'a GridDomain, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.coords(k))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridDomain {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sum f h^n`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `sum |x|^q f h^n` with `x` the node coordinates.
    pub fn moment_about_origin(&self, q: f64) -> f64 {
        let w = self.grid.cell_volume();
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| norm(self.grid.coords(k)).powf(q) * v * w)
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

/// `h^n * #{nodes with f > t}`.
pub fn distribution_function(f: &GriddedFunction, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("{t} is negative")));
    }
    Ok(f.values.iter().filter(|&&v| v > t).count() as f64 * f.grid.cell_volume())
}

/// The rearranged profile `phi` with `f*(x) = phi(|x|)` and its moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementResult {
    pub dim: usize,
    pub l: usize,
    pub h: f64,
    pub profile: RadialProfile,
    /// `sum f h^n`, which the rearrangement preserves.
    pub mass: f64,
    /// `n B_n int s^(n+2l-1) phi(s) ds`.
    pub radial_moment_2l: f64,
    /// Ties in the sorted values (cells sharing a value with a neighbour).
    pub ties: usize,
}

impl RearrangementResult {
    /// `|{f* > t}| = B_n rho(t)^n` with `rho` the superlevel radius of `phi`.
    pub fn distribution(&self, t: f64) -> f64 {
        let b = unit_ball_volume(self.dim).expect("dimension validated");
        b * self.profile.superlevel_radius(t).powi(self.dim as i32)
    }

    /// `n B_n int s^(n-1) phi(s) ds`, the mass of the continuous profile.
    pub fn profile_mass(&self) -> f64 {
        let n = self.dim as f64;
        let b = unit_ball_volume(self.dim).expect("dimension validated");
        n * b * self.profile.moment(n - 1.0)
    }

    /// `2l h R^(2l-1) mass`, the slack allowed when comparing
    /// `int |x|^(2l) f` with the rebinned `radial_moment_2l`.
    pub fn rebin_tolerance(&self, max_radius: f64) -> f64 {
        let l = self.l as f64;
        2.0 * l * self.h * max_radius.powf(2.0 * l - 1.0) * self.mass
    }
}

/// Radius enclosing `cells` cells: `B_n r^n = cells h^n`.
fn shell_radius(cells: f64, cell: f64, ball: f64, n: usize) -> f64 {
    (cells * cell / ball).powf(1.0 / n as f64)
}

/// Soft tolerance on the slope ratio reported by [`slope_bound_check`].
pub const TOL_SLOPE: f64 = 0.2;

/// Symmetric decreasing rearrangement by sorting. The `i`-th largest value
/// (ties broken by distance from the grid centroid) fills the shell
/// `(i+1/2) h^n` deep in measure, `phi(0)` is the maximum, `phi`
/// interpolates linearly between shells and keeps the smallest value out to
/// the radius `r` with `B_n r^n = V`.
pub fn rearrange(f: &GriddedFunction, l: usize) -> Result<RearrangementResult> {
    if l == 0 {
        return Err(Error::invalid("l", "must be at least 1"));
    }
    let grid = f.grid;
    let n = grid.dim();
    let ball = unit_ball_volume(n)?;
    let cell = grid.cell_volume();
    let c = grid.centroid();
    let radius: Vec<f64> = (0..grid.len())
        .map(|k| {
            let x = grid.coords(k);
            norm([x[0] - c[0], x[1] - c[1]])
        })
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        f.values[b]
            .total_cmp(&f.values[a])
            .then(radius[a].total_cmp(&radius[b]))
    });
    let sorted: Vec<f64> = order.iter().map(|&k| f.values[k]).collect();
    let ties = sorted.windows(2).filter(|w| w[0] == w[1]).count();

    let mut breaks = Vec::with_capacity(sorted.len() + 1);
    let mut vals = Vec::with_capacity(sorted.len() + 1);
    breaks.push(0.0);
    vals.push(sorted[0]);
    for (i, &v) in sorted.iter().enumerate() {
        breaks.push(shell_radius(i as f64 + 0.5, cell, ball, n));
        vals.push(v);
    }
    breaks.push(shell_radius(sorted.len() as f64, cell, ball, n));
    vals.push(*sorted.last().unwrap());
    let profile = RadialProfile::from_samples(breaks, vals)?;
    let nf = n as f64;
    let radial_moment_2l = nf * ball * profile.moment(nf + 2.0 * l as f64 - 1.0);
    Ok(RearrangementResult {
        dim: n,
        l,
        h: grid.h(),
        profile,
        mass: f.mass(),
        radial_moment_2l,
        ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    /// Largest finite-difference gradient magnitude over the nodes.
    pub tau: f64,
    /// Largest `|slope|` of `phi` over chords of radial length `sqrt(h R)`,
    /// `R` the outer radius of the profile.
    pub steepest_chord: f64,
    /// `steepest_chord / tau`; the continuum statement is `<= 1`.
    pub worst_ratio: f64,
    /// Set when `tau` is numerically zero; the ratio is meaningless then.
    pub skipped: bool,
    /// The bound relies on the domain being connected.
    pub connected: bool,
}

/// Compares the slope of the rearranged profile with `sup |grad f|`.
///
/// Chords of `phi` span at least `sqrt(h R)`: long enough to average out
/// the shell-radius noise of the lattice, short enough to converge.
pub fn slope_bound_check(f: &GriddedFunction) -> Result<SlopeReport> {
    let grid = f.grid;
    let h = grid.h();
    let lookup = grid.lattice_lookup();
    let [nx, ny] = grid.shape();
    let at = |i: i64, j: i64| -> Option<f64> {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            return None;
        }
        lookup[j as usize * nx + i as usize].map(|k| f.values[k])
    };
    // central differences, one-sided where a neighbour lies outside
    let diff = |here: f64, lo: Option<f64>, hi: Option<f64>| -> f64 {
        match (lo, hi) {
            (Some(a), Some(b)) => (b - a) / (2.0 * h),
            (Some(a), None) => (here - a) / h,
            (None, Some(b)) => (b - here) / h,
            (None, None) => 0.0,
        }
    };
    let mut tau: f64 = 0.0;
    for (k, &flat) in grid.interior().iter().enumerate() {
        let (i, j) = ((flat % nx) as i64, (flat / nx) as i64);
        let here = f.values[k];
        let gx = diff(here, at(i - 1, j), at(i + 1, j));
        let gy = if grid.dim() == 2 {
            diff(here, at(i, j - 1), at(i, j + 1))
        } else {
            0.0
        };
        tau = tau.max(gx.hypot(gy));
    }

    let r = rearrange(f, 1)?;
    // a run of tied values is one level set; keep it as a single node at
    // its mean radius so the staircase does not read as extra slope
    let tie = 1e-12 * f.max();
    let (mut b, mut v): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut run = (0.0, 0usize);
    let (pb, pv) = (r.profile.breakpoints(), r.profile.values());
    // the first and last nodes pin phi(0) and the outer radius; only the
    // shells in between are samples
    let last = pb.len() - 2;
    for i in 1..=last {
        run = (run.0 + pb[i], run.1 + 1);
        if i == last || (pv[i] - pv[i + 1]).abs() > tie {
            b.push(run.0 / run.1 as f64);
            v.push(pv[i]);
            run = (0.0, 0);
        }
    }
    // Shell radii carry lattice-point counting noise of a fraction of h, so
    // chords must be long compared with h yet still shrink: sqrt(h R).
    let reach = (h * pb[pb.len() - 1]).sqrt().max(h) * (1.0 - 1e-12);
    let mut steepest: f64 = 0.0;
    let mut j = 0;
    for i in 0..b.len() {
        while j < b.len() && b[j] - b[i] < reach {
            j += 1;
        }
        if j == b.len() {
            break;
        }
        steepest = steepest.max((v[i] - v[j]) / (b[j] - b[i]));
    }
    let skipped = tau <= 1e-12 * f.max().max(f64::MIN_POSITIVE) / h;
    Ok(SlopeReport {
        tau,
        steepest_chord: steepest,
        worst_ratio: if skipped { f64::NAN } else { steepest / tau },
        skipped,
        connected: grid.is_connected(),
    })
}
