//! Smallest eigenpairs of a symmetric positive definite operator given only
//! as a matrix-vector product.
//!
//! The method is a block Lanczos iteration with full reorthogonalization,
//! run on a Chebyshev polynomial of the operator that damps the interval
//! `[a, lambda_max]` and amplifies everything below the cutoff `a`. Ritz
//! pairs are extracted by Rayleigh-Ritz against the operator itself, so the
//! returned eigenvalues are Rayleigh quotients `<u, A u>` of the returned
//! vectors. When the basis reaches its size cap the iteration thick-restarts
//! from the wanted Ritz vectors and tightens `a`.
//!
//! A block of width `b` keeps up to `b` copies of a repeated eigenvalue;
//! single-vector Krylov spaces only recover extra copies through rounding.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub block_size: usize,
    /// Target relative eigenvalue error.
    pub tol: f64,
    /// Basis size that triggers a restart; derived from `count` when `None`.
    pub max_basis: Option<usize>,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            block_size: 4,
            tol: 1e-9,
            max_basis: None,
            max_restarts: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Euclidean-normalized eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// `||A u - lambda u||` per pair.
    pub residuals: Vec<f64>,
    /// Number of operator applications spent.
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes `w` against `basis` (two Gram-Schmidt passes) and
/// normalizes it, returning the norm of the orthogonal part. `None` means
/// `w` lay numerically in the span.
fn orthonormalize_against(w: &mut [f64], basis: &[Vec<f64>]) -> Option<f64> {
    let before = norm(w);
    if before == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
    let after = norm(w);
    if after <= 1e-10 * before {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= after);
    Some(after)
}

struct Counted<'a, F> {
    apply: &'a F,
    calls: usize,
}

impl<F: Fn(&[f64], &mut [f64])> Counted<'_, F> {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.calls += 1;
        (self.apply)(x, y)
    }
}

/// Chebyshev filter `T_d(2(A - c)/(U - a))` with `c = (a + U)/2`, applied
/// with the three-term recurrence. The result is only used as a direction,
/// so the recurrence is rescaled whenever it grows large.
fn chebyshev_filter<F: Fn(&[f64], &mut [f64])>(
    op: &mut Counted<'_, F>,
    x: &[f64],
    cutoff: f64,
    upper: f64,
    degree: usize,
) -> Vec<f64> {
    let c = 0.5 * (cutoff + upper);
    let e = 0.5 * (upper - cutoff);
    let n = x.len();
    let mut ax = vec![0.0; n];
    let mut prev = x.to_vec();
    op.apply(&prev, &mut ax);
    let mut cur: Vec<f64> = ax.iter().zip(&prev).map(|(a, p)| (a - c * p) / e).collect();
    for _ in 1..degree {
        op.apply(&cur, &mut ax);
        let next: Vec<f64> = ax
            .iter()
            .zip(&cur)
            .zip(&prev)
            .map(|((a, y), p)| 2.0 * (a - c * y) / e - p)
            .collect();
        prev = cur;
        cur = next;
        let scale = norm(&cur);
        if scale > 1e100 {
            cur.iter_mut().for_each(|v| *v /= scale);
            prev.iter_mut().for_each(|v| *v /= scale);
        }
    }
    cur
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Ritz values from a short single-vector Lanczos run; by interlacing the
/// `i`-th is an upper bound on the `i`-th eigenvalue.
fn ritz_estimates<F: Fn(&[f64], &mut [f64])>(
    op: &mut Counted<'_, F>,
    n: usize,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = vec![random_unit(rng, n)];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    for _ in 0..steps {
        let q = basis.last().unwrap();
        op.apply(q, &mut w);
        let a = dot(&w, q);
        alpha.push(a);
        if basis.len() == steps {
            break;
        }
        match orthonormalize_against(&mut w, &basis) {
            Some(b) => beta.push(b),
            None => break,
        }
        basis.push(w.clone());
    }
    let m = alpha.len().min(beta.len() + 1);
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let mut vals: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// The `count` smallest eigenpairs of the operator `apply` of dimension `n`
/// whose spectrum lies in `(0, upper]`.
pub fn smallest_eigenpairs<F>(
    n: usize,
    apply: F,
    upper: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<EigenPairs>
where
    F: Fn(&[f64], &mut [f64]),
{
    if count == 0 || count > n {
        return Err(Error::invalid(
            "count",
            format!("{count} eigenpairs requested from an operator of size {n}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut op = Counted {
        apply: &apply,
        calls: 0,
    };
    let b = opts.block_size.clamp(1, n);
    let keep = (count + (count / 4).max(b)).min(n);
    let max_basis = opts
        .max_basis
        .unwrap_or_else(|| (4 * keep + 4 * b).max(120))
        .max(keep + 2 * b)
        .min(n);

    let est = ritz_estimates(&mut op, n, (2 * keep).max(30).min(n), &mut rng);
    let mut cutoff = est[(keep - 1).min(est.len() - 1)].min(0.5 * upper);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut block: Vec<Vec<f64>> = (0..b).map(|_| random_unit(&mut rng, n)).collect();
    let mut restarts = 0;
    loop {
        let mut last_residual;
        let mut converged_count;
        let degree = ((2.0 / (cutoff / upper).sqrt()).ceil() as usize).clamp(2, 300);
        // expand until the basis is full
        loop {
            let mut added = 0;
            for x in &block {
                let mut y = chebyshev_filter(&mut op, x, cutoff, upper, degree);
                let mut ok = orthonormalize_against(&mut y, &basis).is_some();
                let mut tries = 0;
                while !ok && tries < 3 {
                    y = random_unit(&mut rng, n);
                    ok = orthonormalize_against(&mut y, &basis).is_some();
                    tries += 1;
                }
                if !ok {
                    continue;
                }
                let mut ay = vec![0.0; n];
                op.apply(&y, &mut ay);
                basis.push(y);
                images.push(ay);
                added += 1;
                if basis.len() == n {
                    break;
                }
            }

            let (theta, coeffs) = rayleigh_ritz(&basis, &images);
            let m = basis.len();
            let wanted = count.min(m);
            let mut residuals = Vec::with_capacity(wanted);
            let mut all_converged = wanted == count;
            converged_count = 0;
            let floor = 1e4 * f64::EPSILON * upper;
            for i in 0..wanted {
                let r = ritz_residual(&basis, &images, &coeffs, i, theta[i]);
                let gap = spectral_gap(&theta, i);
                let err = r.min(r * r / gap);
                let ok = err <= opts.tol * theta[i] && r <= (1e-6 * theta[i]).max(floor);
                if ok {
                    converged_count += 1;
                } else {
                    all_converged = false;
                }
                residuals.push(r);
            }
            last_residual = residuals
                .iter()
                .zip(&theta)
                .map(|(r, t)| r / t)
                .fold(0.0, f64::max);

            if all_converged || m == n {
                let vectors: Vec<Vec<f64>> =
                    (0..count).map(|i| combine(&basis, &coeffs, i)).collect();
                let residuals = (0..count)
                    .map(|i| ritz_residual(&basis, &images, &coeffs, i, theta[i]))
                    .collect();
                return Ok(EigenPairs {
                    values: theta[..count].to_vec(),
                    vectors,
                    residuals,
                    matvecs: op.calls,
                });
            }
            if added == 0 || m + b > max_basis {
                // thick restart from the wanted Ritz vectors
                let kept = keep.min(m);
                let new_basis: Vec<Vec<f64>> =
                    (0..kept).map(|i| combine(&basis, &coeffs, i)).collect();
                let new_images: Vec<Vec<f64>> =
                    (0..kept).map(|i| combine(&images, &coeffs, i)).collect();
                cutoff = theta[kept - 1].min(cutoff);
                block = (0..kept)
                    .filter(|&i| i >= converged_count)
                    .take(b)
                    .map(|i| new_basis[i].clone())
                    .collect();
                while block.len() < b {
                    block.push(random_unit(&mut rng, n));
                }
                basis = new_basis;
                images = new_images;
                break;
            }
            block = basis[m - added..].to_vec();
        }
        restarts += 1;
        if restarts > opts.max_restarts {
            return Err(Error::NoConvergence {
                iterations: op.calls,
                converged: converged_count,
                requested: count,
                max_residual: last_residual,
            });
        }
    }
}

/// Eigen-decomposition of `V^T A V`, ascending, ties kept in basis order.
fn rayleigh_ritz(basis: &[Vec<f64>], images: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let m = basis.len();
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let coeffs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (theta, coeffs)
}

fn combine(columns: &[Vec<f64>], coeffs: &DMatrix<f64>, i: usize) -> Vec<f64> {
    let mut out = vec![0.0; columns[0].len()];
    for (j, col) in columns.iter().enumerate() {
        axpy(coeffs[(j, i)], col, &mut out);
    }
    out
}

fn ritz_residual(
    basis: &[Vec<f64>],
    images: &[Vec<f64>],
    coeffs: &DMatrix<f64>,
    i: usize,
    theta: f64,
) -> f64 {
    let mut r = vec![0.0; basis[0].len()];
    for j in 0..basis.len() {
        let s = coeffs[(j, i)];
        for ((ri, a), v) in r.iter_mut().zip(&images[j]).zip(&basis[j]) {
            *ri += s * (a - theta * v);
        }
    }
    norm(&r)
}

/// Distance from `theta[i]` to the nearest Ritz value outside its cluster.
fn spectral_gap(theta: &[f64], i: usize) -> f64 {
    let t = theta[i];
    let tight = 1e-8 * t.abs();
    theta
        .iter()
        .filter(|&&o| (o - t).abs() > tight)
        .map(|&o| (o - t).abs())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(d: &[f64]) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for ((yi, xi), di) in y.iter_mut().zip(x).zip(d) {
                *yi = di * xi;
            }
        }
    }

    #[test]
    fn recovers_diagonal_spectrum_with_multiplicity() {
        let mut d: Vec<f64> = (0..400).map(|i| 1.0 + i as f64 * 0.5).collect();
        d[7] = d[3]; // double eigenvalue
        d[9] = d[3]; // triple
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        let res = smallest_eigenpairs(400, diag_op(&d), 200.0, 10, &LanczosOptions::default())
            .unwrap();
        for (got, want) in res.values.iter().zip(&sorted) {
            assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_count() {
        let d = vec![1.0; 5];
        assert!(smallest_eigenpairs(5, diag_op(&d), 1.0, 6, &LanczosOptions::default()).is_err());
        assert!(smallest_eigenpairs(5, diag_op(&d), 1.0, 0, &LanczosOptions::default()).is_err());
    }

    #[test]
    fn vectors_are_orthonormal() {
        let d: Vec<f64> = (0..300).map(|i| ((i * 37) % 300) as f64 + 1.0).collect();
        let res =
            smallest_eigenpairs(300, diag_op(&d), 300.0, 6, &LanczosOptions::default()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let g = dot(&res.vectors[i], &res.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10);
            }
        }
    }
}
