use nalgebra::DMatrix;

use super::grid::GridDomain;

/// Matrix-free `(-Delta_h)^l` with clamped (zero-extension) boundary data.
///
/// A grid function on the interior nodes is extended by zero to the lattice
/// padded by `l` nodes on every side, the `(2n+1)`-point second-difference
/// Laplacian is applied `l` times, and the result is restricted back to the
/// interior. The induced matrix is `P L^l P^T` for the full-lattice `L`, so
/// it is symmetric positive definite.
#[derive(Debug, Clone)]
pub struct PolyharmonicOperator {
    order: usize,
    dim: usize,
    inv_h2: f64,
    padded: [usize; 2],
    /// Padded-lattice position of each interior node.
    slots: Vec<usize>,
}

impl PolyharmonicOperator {
    pub fn new(grid: &GridDomain, order: usize) -> Self {
        assert!(order >= 1, "operator order must be positive");
        let dim = grid.dim();
        let [nx, ny] = grid.shape();
        let pad = order;
        let padded = if dim == 1 {
            [nx + 2 * pad, 1]
        } else {
            [nx + 2 * pad, ny + 2 * pad]
        };
        let slots = grid
            .interior()
            .iter()
            .map(|&flat| {
                let (i, j) = (flat % nx, flat / nx);
                if dim == 1 {
                    i + pad
                } else {
                    (j + pad) * padded[0] + i + pad
                }
            })
            .collect();
        let h = grid.h();
        PolyharmonicOperator {
            order,
            dim,
            inv_h2: 1.0 / (h * h),
            padded,
            slots,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Gershgorin bound `(4n/h^2)^l` on the largest eigenvalue.
    pub fn spectral_upper_bound(&self) -> f64 {
        (4.0 * self.dim as f64 * self.inv_h2).powi(self.order as i32)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.len());
        assert_eq!(y.len(), self.len());
        let size = self.padded[0] * self.padded[1];
        let mut cur = vec![0.0; size];
        let mut next = vec![0.0; size];
        for (&slot, &v) in self.slots.iter().zip(x) {
            cur[slot] = v;
        }
        for _ in 0..self.order {
            self.laplacian(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        for (out, &slot) in y.iter_mut().zip(&self.slots) {
            *out = cur[slot];
        }
    }

    /// Convenience wrapper returning a fresh vector.
    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        y
    }

    fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        let s = self.inv_h2;
        let nx = self.padded[0];
        if self.dim == 1 {
            for i in 0..nx {
                let left = if i > 0 { u[i - 1] } else { 0.0 };
                let right = if i + 1 < nx { u[i + 1] } else { 0.0 };
                out[i] = (2.0 * u[i] - left - right) * s;
            }
            return;
        }
        let ny = self.padded[1];
        for j in 0..ny {
            let row = j * nx;
            for i in 0..nx {
                let p = row + i;
                let mut acc = 4.0 * u[p];
                if i > 0 {
                    acc -= u[p - 1];
                }
                if i + 1 < nx {
                    acc -= u[p + 1];
                }
                if j > 0 {
                    acc -= u[p - nx];
                }
                if j + 1 < ny {
                    acc -= u[p + nx];
                }
                out[p] = acc * s;
            }
        }
    }

    /// Dense matrix of the operator, column by column.
    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            m.column_mut(j).copy_from_slice(&col);
        }
        // exact symmetry; the stencil is symmetric but summation order is not
        let t = m.transpose();
        (m + t) * 0.5
    }
}

/// `y = A x` for the operator of order `l` on `grid`.
pub fn apply_polyharmonic(v: &[f64], grid: &GridDomain, l: usize) -> Vec<f64> {
    PolyharmonicOperator::new(grid, l).apply_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_interval(n: usize) -> GridDomain {
        GridDomain::from_domain(&DomainSpec::Interval { length: 1.0 }, 1.0 / n as f64).unwrap()
    }

    #[test]
    fn discrete_sines_are_eigenvectors_for_l1() {
        let n = 50;
        let g = unit_interval(n);
        let h = g.h();
        for j in 1..=4 {
            let v: Vec<f64> = (0..g.len())
                .map(|k| (j as f64 * PI * g.coords(k)[0]).sin())
                .collect();
            let av = apply_polyharmonic(&v, &g, 1);
            let lam = 4.0 / (h * h) * (j as f64 * PI * h / 2.0).sin().powi(2);
            for (a, b) in av.iter().zip(&v) {
                assert!((a - lam * b).abs() < 1e-9 * lam);
            }
        }
    }

    #[test]
    fn second_order_is_not_square_of_first() {
        // zero extension clamps both u and u' at the ends, unlike squaring
        let g = unit_interval(40);
        let a1 = PolyharmonicOperator::new(&g, 1).assemble();
        let a2 = PolyharmonicOperator::new(&g, 2).assemble();
        let sq = &a1 * &a1;
        assert!((&a2 - &sq).norm() > 1.0);
        let l1 = a1.symmetric_eigenvalues().min();
        let l2 = a2.symmetric_eigenvalues().min();
        assert!(l2 > l1 * l1);
    }

    #[test]
    fn operator_is_symmetric() {
        let g = GridDomain::from_domain(&DomainSpec::Ball { radius: 1.0, dim: 2 }, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in 1..=3 {
            let op = PolyharmonicOperator::new(&g, l);
            let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let av = op.apply_vec(&v);
            let aw = op.apply_vec(&w);
            let lhs: f64 = av.iter().zip(&w).map(|(a, b)| a * b).sum();
            let rhs: f64 = v.iter().zip(&aw).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
        }
    }

    #[test]
    fn gershgorin_bound_holds() {
        let g = GridDomain::from_domain(&DomainSpec::Box { lengths: vec![1.0, 0.7] }, 0.1).unwrap();
        let op = PolyharmonicOperator::new(&g, 2);
        let max = op.assemble().symmetric_eigenvalues().max();
        assert!(max <= op.spectral_upper_bound());
    }
}
