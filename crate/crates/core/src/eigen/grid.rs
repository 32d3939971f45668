use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Lattice nodes of spacing `h` lying strictly inside a domain.
///
/// Node `(i, j)` of the lattice sits at `origin + (i h, j h)`. Interval, box
/// and ball lattices are aligned so that `0` is a node (box faces then carry
/// the Dirichlet nodes when `h` divides the edge lengths); mask lattices are
/// cell-centered so that `h = cell` puts one node at every pixel center.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    dim: usize,
    h: f64,
    origin: [f64; 2],
    shape: [usize; 2],
    interior: Vec<usize>,
    label: String,
}

impl GridDomain {
    /// Discretizes `domain` (dimension 1 or 2) at spacing `h`.
    pub fn from_domain(domain: &DomainSpec, h: f64) -> Result<Self> {
        domain.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("h", format!("{h} is not positive")));
        }
        let dim = domain.dimension();
        if dim > 2 {
            return Err(Error::Unsupported(format!(
                "eigensolves in dimension {dim}"
            )));
        }
        let offset = match domain {
            DomainSpec::Mask(_) => 0.5,
            _ => 0.0,
        };
        let eps = 1e-9 * h;
        let inside = |x: &[f64]| -> bool {
            match domain {
                DomainSpec::Interval { length } => x[0] > eps && x[0] < length - eps,
                DomainSpec::Box { lengths } => lengths
                    .iter()
                    .zip(x)
                    .all(|(&a, &xi)| xi > eps && xi < a - eps),
                DomainSpec::Ball { radius, .. } => {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt() < radius - eps
                }
                DomainSpec::Mask(_) => domain.contains(x),
            }
        };
        let (lo, hi) = domain.bounding_box();
        let mut start = [0i64; 2];
        let mut shape = [1usize; 2];
        for axis in 0..dim {
            let first = ((lo[axis] / h) - offset).floor() as i64;
            let last = ((hi[axis] / h) - offset).ceil() as i64;
            start[axis] = first;
            shape[axis] = (last - first + 1) as usize;
        }
        let origin = [
            (start[0] as f64 + offset) * h,
            if dim == 2 {
                (start[1] as f64 + offset) * h
            } else {
                0.0
            },
        ];
        let mut mask = vec![false; shape[0] * shape[1]];
        let mut x = [0.0; 2];
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                x[0] = origin[0] + i as f64 * h;
                x[1] = origin[1] + j as f64 * h;
                mask[j * shape[0] + i] = inside(&x[..dim]);
            }
        }
        Self::from_mask(dim, h, origin, shape, &mask, domain.label())
    }

    /// Builds a grid from an explicit lattice mask (`mask[j * nx + i]`),
    /// trimming empty border rows and columns.
    pub fn from_mask(
        dim: usize,
        h: f64,
        origin: [f64; 2],
        shape: [usize; 2],
        mask: &[bool],
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("grid dimension {dim}")));
        }
        if dim == 1 && shape[1] != 1 {
            return Err(Error::invalid("shape", "1-d grids have a single row"));
        }
        if mask.len() != shape[0] * shape[1] {
            return Err(Error::invalid("mask", "length does not match shape"));
        }
        let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                if mask[j * shape[0] + i] {
                    lo = [lo[0].min(i), lo[1].min(j)];
                    hi = [hi[0].max(i), hi[1].max(j)];
                }
            }
        }
        if lo[0] == usize::MAX {
            return Err(Error::EmptyDomain);
        }
        let new_shape = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1];
        let mut interior = Vec::new();
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                if mask[j * shape[0] + i] {
                    interior.push((j - lo[1]) * new_shape[0] + (i - lo[0]));
                }
            }
        }
        Ok(GridDomain {
            dim,
            h,
            origin: [origin[0] + lo[0] as f64 * h, origin[1] + lo[1] as f64 * h],
            shape: new_shape,
            interior,
            label: label.into(),
        })
    }

    /// Every node of an `nx` (by `ny`) lattice is interior.
    pub fn full_lattice(dim: usize, h: f64, origin: [f64; 2], shape: [usize; 2]) -> Result<Self> {
        let mask = vec![true; shape[0] * shape[1]];
        Self::from_mask(dim, h, origin, shape, &mask, format!("lattice{shape:?}"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Flat lattice indices (`j * nx + i`) of the interior nodes, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// `h^n`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// `#nodes * h^n`.
    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.cell_volume()
    }

    /// Coordinates of interior node `k` (second entry is 0 in 1-d).
    pub fn coords(&self, k: usize) -> [f64; 2] {
        let flat = self.interior[k];
        let (i, j) = (flat % self.shape[0], flat / self.shape[0]);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    pub fn centroid(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for k in 0..self.len() {
            let x = self.coords(k);
            c[0] += x[0];
            c[1] += x[1];
        }
        let n = self.len() as f64;
        [c[0] / n, c[1] / n]
    }

    /// Position of each lattice node in the interior list, or `None`.
    pub fn lattice_lookup(&self) -> Vec<Option<usize>> {
        let mut lookup = vec![None; self.shape[0] * self.shape[1]];
        for (k, &flat) in self.interior.iter().enumerate() {
            lookup[flat] = Some(k);
        }
        lookup
    }

    /// Interior neighbours of node `k` along the lattice axes.
    pub fn neighbors(&self, k: usize, lookup: &[Option<usize>]) -> Vec<usize> {
        let flat = self.interior[k];
        let (nx, ny) = (self.shape[0], self.shape[1]);
        let (i, j) = (flat % nx, flat / nx);
        let mut out = Vec::with_capacity(4);
        let mut push = |ii: usize, jj: usize| {
            if let Some(idx) = lookup[jj * nx + ii] {
                out.push(idx);
            }
        };
        if i > 0 {
            push(i - 1, j);
        }
        if i + 1 < nx {
            push(i + 1, j);
        }
        if self.dim == 2 {
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < ny {
                push(i, j + 1);
            }
        }
        out
    }

    /// Whether the interior nodes form one axis-connected component.
    pub fn is_connected(&self) -> bool {
        let lookup = self.lattice_lookup();
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = stack.pop() {
            for nb in self.neighbors(k, &lookup) {
                if !seen[nb] {
                    seen[nb] = true;
                    count += 1;
                    stack.push(nb);
                }
            }
        }
        count == self.len()
    }

    /// Whether `other`'s nodes are a subset of this grid's nodes.
    pub fn contains_grid(&self, other: &GridDomain) -> bool {
        if self.dim != other.dim || (self.h - other.h).abs() > 1e-12 * self.h {
            return false;
        }
        let lookup = self.lattice_lookup();
        (0..other.len()).all(|k| {
            let x = other.coords(k);
            let fi = ((x[0] - self.origin[0]) / self.h).round();
            let fj = ((x[1] - self.origin[1]) / self.h).round();
            if fi < 0.0 || fj < 0.0 {
                return false;
            }
            let (i, j) = (fi as usize, fj as usize);
            i < self.shape[0] && j < self.shape[1] && lookup[j * self.shape[0] + i].is_some()
        })
    }
}
