//! Dirichlet eigenvalues of `(-Delta)^l` on gridded domains.

pub mod bessel;
mod grid;
pub mod lanczos;
mod operator;
mod reference;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::GridDomain;
pub use lanczos::LanczosOptions;
pub use operator::{apply_polyharmonic, PolyharmonicOperator};
pub use reference::{beam_roots, clamped_beam_ghost_point, reference_spectrum, ReferenceShape};

/// Problems with at most this many unknowns are solved densely.
pub const DENSE_LIMIT: usize = 800;

/// Ascending eigenvalues of one discrete (or extrapolated) problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub domain: String,
    pub l: usize,
    pub h: f64,
    pub values: Vec<f64>,
    pub extrapolated: bool,
    #[serde(default)]
    pub error_estimates: Vec<f64>,
    /// Eigenvectors, normalized so that `sum u^2 h^n = 1`.
    #[serde(skip)]
    pub vectors: Option<Vec<Vec<f64>>>,
    #[serde(skip)]
    pub grid: Option<GridDomain>,
}

/// Compares the serialized fields; vectors and grid are ignored.
impl PartialEq for Spectrum {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.l == other.l
            && self.h == other.h
            && self.values == other.values
            && self.extrapolated == other.extrapolated
            && self.error_estimates == other.error_estimates
    }
}

impl Spectrum {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// `(value, multiplicity)` groups of values within `rel_tol` of each other.
    pub fn multiplicities(&self, rel_tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match out.last_mut() {
                Some((first, m)) if (v - *first).abs() <= rel_tol * first.abs() => *m += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    /// Mean of the first `k` values.
    pub fn mean_of_first(&self, k: usize) -> f64 {
        self.values[..k].iter().sum::<f64>() / k as f64
    }

    /// Eigenvectors together with their grid, or an error if absent.
    pub fn eigenvectors(&self) -> Result<(&[Vec<f64>], &GridDomain)> {
        match (&self.vectors, &self.grid) {
            (Some(v), Some(g)) => Ok((v, g)),
            _ => Err(Error::invalid("spectrum", "no eigenvectors were computed")),
        }
    }
}

/// The `count` smallest eigenvalues of the zero-extension discretization of
/// `(-Delta)^l` on `grid`.
///
/// Up to [`DENSE_LIMIT`] unknowns the operator is assembled and reduced
/// densely (Householder tridiagonalization plus implicit QL); larger
/// problems go through the matrix-free filtered block Lanczos solver.
pub fn smallest_eigenvalues(
    grid: &GridDomain,
    l: usize,
    count: usize,
    want_vectors: bool,
) -> Result<Spectrum> {
    smallest_eigenvalues_with(grid, l, count, want_vectors, &LanczosOptions::default())
}

pub fn smallest_eigenvalues_with(
    grid: &GridDomain,
    l: usize,
    count: usize,
    want_vectors: bool,
    opts: &LanczosOptions,
) -> Result<Spectrum> {
    if l == 0 {
        return Err(Error::invalid("l", "operator order must be at least 1"));
    }
    let n = grid.len();
    if count == 0 || count > n {
        return Err(Error::invalid(
            "count",
            format!("{count} eigenvalues requested but the grid has {n} interior nodes"),
        ));
    }
    let op = PolyharmonicOperator::new(grid, l);
    let (values, vectors) = if n <= DENSE_LIMIT {
        let eig = SymmetricEigen::new(op.assemble());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order[..count].iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors: Vec<Vec<f64>> = if want_vectors {
            order[..count]
                .iter()
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect()
        } else {
            Vec::new()
        };
        (values, vectors)
    } else {
        let pairs = lanczos::smallest_eigenpairs(
            n,
            |x: &[f64], y: &mut [f64]| op.apply(x, y),
            op.spectral_upper_bound(),
            count,
            opts,
        )?;
        (pairs.values, pairs.vectors)
    };
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NoConvergence {
            iterations: 0,
            converged: 0,
            requested: count,
            max_residual: f64::NAN,
        });
    }
    let scale = grid.cell_volume().sqrt().recip();
    let vectors = want_vectors.then(|| {
        vectors
            .into_iter()
            .map(|v| v.into_iter().map(|x| x * scale).collect())
            .collect()
    });
    Ok(Spectrum {
        domain: grid.label().to_string(),
        l,
        h: grid.h(),
        values,
        extrapolated: false,
        error_estimates: Vec::new(),
        vectors,
        grid: want_vectors.then(|| grid.clone()),
    })
}

/// Default Richardson order: 2 for the second-order scheme on smooth
/// interval/box problems with `l = 1`, 1 otherwise.
pub fn default_extrapolation_order(l: usize, boundary_aligned: bool) -> f64 {
    if l == 1 && boundary_aligned {
        2.0
    } else {
        1.0
    }
}

/// `(2^p fine - coarse) / (2^p - 1)` per index, with `|ext - fine|` as the
/// error estimate.
pub fn richardson_extrapolate(coarse: &Spectrum, fine: &Spectrum, order: f64) -> Result<Spectrum> {
    if coarse.l != fine.l || coarse.domain != fine.domain {
        return Err(Error::Mismatch(format!(
            "cannot extrapolate {} (l={}) against {} (l={})",
            coarse.domain, coarse.l, fine.domain, fine.l
        )));
    }
    if (fine.h * 2.0 - coarse.h).abs() > 1e-9 * coarse.h {
        return Err(Error::Mismatch(format!(
            "fine spacing {} is not half of coarse spacing {}",
            fine.h, coarse.h
        )));
    }
    if !(order > 0.0) {
        return Err(Error::invalid("order", "must be positive"));
    }
    let count = coarse.count().min(fine.count());
    let w = 2f64.powf(order);
    let values: Vec<f64> = (0..count)
        .map(|i| (w * fine.values[i] - coarse.values[i]) / (w - 1.0))
        .collect();
    let error_estimates = values
        .iter()
        .zip(&fine.values)
        .map(|(e, f)| (e - f).abs())
        .collect();
    Ok(Spectrum {
        domain: fine.domain.clone(),
        l: fine.l,
        h: fine.h,
        values,
        extrapolated: true,
        error_estimates,
        vectors: None,
        grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use std::f64::consts::PI;

    fn interval(len: f64, n: usize) -> GridDomain {
        GridDomain::from_domain(&DomainSpec::Interval { length: len }, len / n as f64).unwrap()
    }

    #[test]
    fn unit_interval_h200() {
        let s = smallest_eigenvalues(&interval(1.0, 200), 1, 5, false).unwrap();
        let h: f64 = 1.0 / 200.0;
        for (k, v) in s.values.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            // the discrete values are exactly (4/h^2) sin^2(k pi h / 2)
            let discrete = 4.0 / (h * h) * (((k + 1) as f64) * PI * h / 2.0).sin().powi(2);
            assert!((v - discrete).abs() < 1e-9 * discrete);
            if k < 4 {
                assert!((v - exact).abs() / exact < 5e-4, "k={} {v}", k + 1);
            }
        }
    }

    #[test]
    fn extrapolated_interval_is_very_accurate() {
        let c = smallest_eigenvalues(&interval(1.0, 100), 1, 3, false).unwrap();
        let f = smallest_eigenvalues(&interval(1.0, 200), 1, 3, false).unwrap();
        let e = richardson_extrapolate(&c, &f, 2.0).unwrap();
        assert!(e.extrapolated);
        assert!((e.values[0] - PI * PI).abs() / (PI * PI) < 1e-5);
        assert!(e.error_estimates.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn extrapolating_identical_spectra_is_identity() {
        let s = Spectrum {
            domain: "d".into(),
            l: 1,
            h: 0.1,
            values: vec![1.0, 2.0],
            extrapolated: false,
            error_estimates: vec![],
            vectors: None,
            grid: None,
        };
        let mut fine = s.clone();
        fine.h = 0.05;
        let e = richardson_extrapolate(&s, &fine, 2.0).unwrap();
        assert_eq!(e.values, s.values);
        let mut wrong = fine.clone();
        wrong.h = 0.07;
        assert!(richardson_extrapolate(&s, &wrong, 2.0).is_err());
        wrong = fine.clone();
        wrong.l = 2;
        assert!(richardson_extrapolate(&s, &wrong, 1.0).is_err());
    }

    #[test]
    fn too_many_eigenvalues_rejected() {
        assert!(smallest_eigenvalues(&interval(1.0, 4), 1, 4, false).is_err());
        assert!(smallest_eigenvalues(&interval(1.0, 4), 0, 1, false).is_err());
    }

    #[test]
    fn dense_and_lanczos_agree() {
        let g = GridDomain::from_domain(&DomainSpec::Ball { radius: 1.0, dim: 2 }, 1.0 / 14.0)
            .unwrap();
        assert!(g.len() <= DENSE_LIMIT);
        let dense = smallest_eigenvalues(&g, 1, 8, true).unwrap();
        let op = PolyharmonicOperator::new(&g, 1);
        let lz = lanczos::smallest_eigenpairs(
            g.len(),
            |x: &[f64], y: &mut [f64]| op.apply(x, y),
            op.spectral_upper_bound(),
            8,
            &LanczosOptions::default(),
        )
        .unwrap();
        for (a, b) in dense.values.iter().zip(&lz.values) {
            assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn multiplicity_groups() {
        let s = Spectrum {
            domain: "d".into(),
            l: 1,
            h: 0.1,
            values: vec![1.0, 2.0, 2.0 + 1e-12, 3.0],
            extrapolated: false,
            error_estimates: vec![],
            vectors: None,
            grid: None,
        };
        assert_eq!(s.multiplicities(1e-9), vec![(1.0, 1), (2.0, 2), (3.0, 1)]);
    }
}
