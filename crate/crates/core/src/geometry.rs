//! Bounded domains, their volume, centroid and moment of inertia.
//!
//! Placement conventions: an interval of length `L` is `[0, L]`, a box is
//! `[0, a_1] x ... x [0, a_n]`, a ball is centered at the origin, and mask
//! pixel `(i, j)` covers `[i c, (i+1) c] x [j c, (j+1) c]` with `j = 0` the
//! bottom image row.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Volume of the unit ball in `R^n`, `2 pi^(n/2) / (n Gamma(n/2))`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    Ok(ln_unit_ball_volume(n)?.exp())
}

/// Natural log of [`unit_ball_volume`]; stays finite for large `n`.
pub fn ln_unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("dimension", "must be at least 1"));
    }
    let nf = n as f64;
    Ok(2f64.ln() + 0.5 * nf * PI.ln() - nf.ln() - ln_gamma(0.5 * nf))
}

/// Lower bound on `I(Omega)` over all domains of volume `V`: the inertia of
/// the centered ball of that volume, `n/(n+2) V (V/B_n)^(2/n)`.
pub fn inertia_floor(n: usize, volume: f64) -> Result<f64> {
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::invalid("volume", format!("{volume} is not positive")));
    }
    let nf = n as f64;
    let ln_b = ln_unit_ball_volume(n)?;
    let ln_v = volume.ln();
    Ok((nf / (nf + 2.0)) * (ln_v + (2.0 / nf) * (ln_v - ln_b)).exp())
}

/// Radius of the ball centered at the origin with volume `V`.
pub fn rearranged_radius(n: usize, volume: f64) -> Result<f64> {
    let ln_b = ln_unit_ball_volume(n)?;
    Ok(((volume.ln() - ln_b) / n as f64).exp())
}

/// A two-dimensional bitmap domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskDomain {
    pub width: usize,
    pub height: usize,
    /// Row-major, `cells[j * width + i]`, row `j = 0` at the bottom.
    pub cells: Vec<bool>,
    /// Pixel edge length.
    pub cell: f64,
}

impl MaskDomain {
    pub fn new(width: usize, height: usize, cells: Vec<bool>, cell: f64) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::invalid(
                "mask",
                format!("{} cells for a {width}x{height} bitmap", cells.len()),
            ));
        }
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(Error::invalid("cell", format!("{cell} is not positive")));
        }
        if !cells.iter().any(|&c| c) {
            return Err(Error::EmptyDomain);
        }
        Ok(MaskDomain {
            width,
            height,
            cells,
            cell,
        })
    }

    /// Reads an ASCII PGM (P2) file; nonzero pixels are interior.
    pub fn from_pgm(path: &Path, cell: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_pgm(&text, cell).map_err(|e| match e {
            Error::MaskFormat { reason, .. } => Error::MaskFormat {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    pub fn parse_pgm(text: &str, cell: f64) -> Result<Self> {
        let bad = |reason: String| Error::MaskFormat {
            path: PathBuf::from("<inline>"),
            reason,
        };
        let mut tokens = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        match tokens.next() {
            Some("P2") => {}
            other => return Err(bad(format!("expected magic P2, found {other:?}"))),
        }
        let mut header = [0usize; 3];
        for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
            let tok = tokens
                .next()
                .ok_or_else(|| bad(format!("missing {name}")))?;
            *slot = tok
                .parse()
                .map_err(|_| bad(format!("bad {name} {tok:?}")))?;
        }
        let [width, height, _maxval] = header;
        let mut cells = vec![false; width * height];
        for row in 0..height {
            for col in 0..width {
                let tok = tokens
                    .next()
                    .ok_or_else(|| bad(format!("truncated pixel data at row {row}")))?;
                let v: u64 = tok.parse().map_err(|_| bad(format!("bad pixel {tok:?}")))?;
                cells[(height - 1 - row) * width + col] = v != 0;
            }
        }
        Self::new(width, height, cells, cell)
    }

    pub fn is_set(&self, i: usize, j: usize) -> bool {
        i < self.width && j < self.height && self.cells[j * self.width + i]
    }

    pub fn interior_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Writes the bitmap back out as P2.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.width, self.height);
        for row in (0..self.height).rev() {
            let line: Vec<&str> = (0..self.width)
                .map(|col| if self.is_set(col, row) { "1" } else { "0" })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A bounded domain in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Interval { length: f64 },
    Box { lengths: Vec<f64> },
    Ball { radius: f64, dim: usize },
    Mask(MaskDomain),
}

/// JSON form of a domain; masks refer to a PGM file on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { length: f64 },
    Box { lengths: Vec<f64> },
    Ball { radius: f64, dim: usize },
    Mask { file: PathBuf, cell: f64 },
}

impl DomainConfig {
    /// Loads mask files relative to `base_dir` and validates the result.
    pub fn resolve(&self, base_dir: &Path) -> Result<DomainSpec> {
        let spec = match self {
            DomainConfig::Interval { length } => DomainSpec::Interval { length: *length },
            DomainConfig::Box { lengths } => DomainSpec::Box {
                lengths: lengths.clone(),
            },
            DomainConfig::Ball { radius, dim } => DomainSpec::Ball {
                radius: *radius,
                dim: *dim,
            },
            DomainConfig::Mask { file, cell } => {
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base_dir.join(file)
                };
                DomainSpec::Mask(MaskDomain::from_pgm(&path, *cell)?)
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} is not a positive finite number")))
    }
}

/// How [`measure`] integrates over the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    /// Closed forms; interval, box and ball only.
    Analytic,
    /// Cell quadrature on a lattice of cells of this edge length.
    Cell(f64),
}

/// Volume, centroid and inertia of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub dim: usize,
    pub volume: f64,
    pub centroid: Vec<f64>,
    /// `min_a int |x - a|^2 dx`, attained at the centroid.
    pub inertia: f64,
    /// Radius of the ball with the same volume.
    pub rearranged_radius: f64,
    /// Quadrature tolerance `5 h diam^2 V`; zero for analytic results.
    pub tol_quad: f64,
}

impl GeometrySummary {
    /// `inertia - inertia_floor(n, V)`; nonnegative up to `tol_quad`.
    pub fn inertia_slack(&self) -> f64 {
        self.inertia - inertia_floor(self.dim, self.volume).unwrap_or(f64::NAN)
    }
}

impl DomainSpec {
    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Box { lengths } => lengths.len(),
            DomainSpec::Ball { dim, .. } => *dim,
            DomainSpec::Mask(_) => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Interval { length } => positive("length", *length),
            DomainSpec::Box { lengths } => {
                if lengths.is_empty() {
                    return Err(Error::invalid("lengths", "box needs at least one axis"));
                }
                lengths.iter().try_for_each(|&a| positive("lengths", a))
            }
            DomainSpec::Ball { radius, dim } => {
                if *dim == 0 {
                    return Err(Error::invalid("dim", "must be at least 1"));
                }
                positive("radius", *radius)
            }
            DomainSpec::Mask(mask) => {
                positive("cell", mask.cell)?;
                if mask.interior_count() == 0 {
                    return Err(Error::EmptyDomain);
                }
                Ok(())
            }
        }
    }

    /// Short human-readable identifier used in reports.
    pub fn label(&self) -> String {
        match self {
            DomainSpec::Interval { length } => format!("interval(L={length})"),
            DomainSpec::Box { lengths } => format!("box({lengths:?})"),
            DomainSpec::Ball { radius, dim } => format!("ball(R={radius},n={dim})"),
            DomainSpec::Mask(m) => format!(
                "mask({}x{},cell={},cells={})",
                m.width,
                m.height,
                m.cell,
                m.interior_count()
            ),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainSpec::Interval { length } => (vec![0.0], vec![*length]),
            DomainSpec::Box { lengths } => (vec![0.0; lengths.len()], lengths.clone()),
            DomainSpec::Ball { radius, dim } => (vec![-radius; *dim], vec![*radius; *dim]),
            DomainSpec::Mask(m) => (
                vec![0.0, 0.0],
                vec![m.width as f64 * m.cell, m.height as f64 * m.cell],
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            DomainSpec::Interval { length } => *length,
            DomainSpec::Box { lengths } => lengths.iter().map(|a| a * a).sum::<f64>().sqrt(),
            DomainSpec::Ball { radius, .. } => 2.0 * radius,
            DomainSpec::Mask(m) => {
                let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
                for j in 0..m.height {
                    for i in 0..m.width {
                        if m.is_set(i, j) {
                            lo = [lo[0].min(i), lo[1].min(j)];
                            hi = [hi[0].max(i + 1), hi[1].max(j + 1)];
                        }
                    }
                }
                let dx = (hi[0] - lo[0]) as f64 * m.cell;
                let dy = (hi[1] - lo[1]) as f64 * m.cell;
                dx.hypot(dy)
            }
        }
    }

    /// Open-set membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Interval { length } => x[0] > 0.0 && x[0] < *length,
            DomainSpec::Box { lengths } => lengths.iter().zip(x).all(|(&a, &xi)| xi > 0.0 && xi < a),
            DomainSpec::Ball { radius, .. } => x.iter().map(|v| v * v).sum::<f64>() < radius * radius,
            DomainSpec::Mask(m) => {
                if x[0] < 0.0 || x[1] < 0.0 {
                    return false;
                }
                let i = (x[0] / m.cell).floor() as usize;
                let j = (x[1] / m.cell).floor() as usize;
                m.is_set(i, j)
            }
        }
    }

    /// Midpoints of the lattice cells of edge `h` whose midpoint lies in the
    /// domain. Supported for dimensions up to 3.
    pub fn cell_midpoints(&self, h: f64) -> Result<Vec<Vec<f64>>> {
        positive("resolution", h)?;
        let n = self.dimension();
        if n > 3 {
            return Err(Error::Unsupported(format!(
                "cell quadrature in dimension {n}; use the analytic path"
            )));
        }
        let (lo, hi) = self.bounding_box();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / h).ceil() as usize)
            .collect();
        let total: usize = counts.iter().product();
        let mut out = Vec::new();
        let mut point = vec![0.0; n];
        for flat in 0..total {
            let mut rem = flat;
            for axis in 0..n {
                let idx = rem % counts[axis];
                rem /= counts[axis];
                point[axis] = lo[axis] + (idx as f64 + 0.5) * h;
            }
            if self.contains(&point) {
                out.push(point.clone());
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(out)
    }
}

/// Volume, centroid and moment of inertia of `domain`.
///
/// The cell path counts a cell as interior iff its midpoint is inside, so
/// `V = #cells h^n`; each cell's second moment is integrated exactly
/// (`h^n (|x_c - a|^2 + n h^2/12)`), which makes the result exact for mask
/// domains sampled at their own pixel size.
pub fn measure(domain: &DomainSpec, resolution: Resolution) -> Result<GeometrySummary> {
    domain.validate()?;
    let n = domain.dimension();
    let nf = n as f64;
    let (volume, centroid, inertia, tol_quad) = match (domain, resolution) {
        (DomainSpec::Interval { length }, Resolution::Analytic) => {
            (*length, vec![length / 2.0], length.powi(3) / 12.0, 0.0)
        }
        (DomainSpec::Box { lengths }, Resolution::Analytic) => {
            let v: f64 = lengths.iter().product();
            let i = v * lengths.iter().map(|a| a * a / 12.0).sum::<f64>();
            (v, lengths.iter().map(|a| a / 2.0).collect(), i, 0.0)
        }
        (DomainSpec::Ball { radius, dim }, Resolution::Analytic) => {
            let v = unit_ball_volume(*dim)? * radius.powi(*dim as i32);
            (v, vec![0.0; *dim], nf / (nf + 2.0) * v * radius * radius, 0.0)
        }
        (DomainSpec::Mask(_), Resolution::Analytic) => {
            return Err(Error::Unsupported(
                "analytic measure of a mask domain; pass a cell resolution".into(),
            ))
        }
        (_, Resolution::Cell(h)) => {
            let cells = domain.cell_midpoints(h)?;
            let w = h.powi(n as i32);
            let volume = cells.len() as f64 * w;
            let mut centroid = vec![0.0; n];
            for c in &cells {
                for (acc, x) in centroid.iter_mut().zip(c) {
                    *acc += x;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= cells.len() as f64);
            let inertia = second_moment_of_cells(&cells, h, &centroid);
            let diam = domain.diameter();
            (volume, centroid, inertia, 5.0 * h * diam * diam * volume)
        }
    };
    Ok(GeometrySummary {
        dim: n,
        volume,
        centroid,
        inertia,
        rearranged_radius: rearranged_radius(n, volume)?,
        tol_quad,
    })
}

/// `int |x - a|^2 dx` over the cell approximation of `domain` at edge `h`.
pub fn second_moment_about(domain: &DomainSpec, h: f64, a: &[f64]) -> Result<f64> {
    if a.len() != domain.dimension() {
        return Err(Error::invalid("center", "dimension mismatch"));
    }
    let cells = domain.cell_midpoints(h)?;
    Ok(second_moment_of_cells(&cells, h, a))
}

fn second_moment_of_cells(cells: &[Vec<f64>], h: f64, a: &[f64]) -> f64 {
    let n = a.len();
    let w = h.powi(n as i32);
    let self_term = n as f64 * h * h / 12.0;
    cells
        .iter()
        .map(|c| {
            let d2: f64 = c.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum();
            (d2 + self_term) * w
        })
        .sum()
}
