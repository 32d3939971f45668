//! Bessel functions of the first kind of integer order and their zeros.

/// `J_m(x)` for `x >= 0`, by Miller's backward recurrence normalized with
/// `J_0 + 2 sum_k J_{2k} = 1`.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j expects x >= 0");
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let top = m.max(x as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1} (unnormalized)
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
        if k - 1 == m {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
    }
    norm += cur;
    wanted / norm
}

/// Power series `sum (-1)^j (x/2)^(2j+m) / (j! (j+m)!)`; accurate for
/// moderate `x` only.
pub fn bessel_j_series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let mut sum = term;
    for j in 1..200 {
        term *= -half * half / (j as f64 * (j + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive zeros of `J_m` below `limit`, ascending.
pub fn bessel_zeros_below(m: usize, limit: f64) -> Vec<f64> {
    let step = 0.25;
    let mut x = (m as f64).max(step);
    let mut prev = bessel_j(m, x);
    let mut zeros = Vec::new();
    while x < limit {
        let nx = (x + step).min(limit);
        let v = bessel_j(m, nx);
        if v == 0.0 {
            zeros.push(nx);
        } else if (v < 0.0) != (prev < 0.0) && prev != 0.0 {
            zeros.push(bisect(|t| bessel_j(m, t), x, nx));
        }
        prev = v;
        x = nx;
    }
    zeros
}

/// The first `count` zeros of `J_m`.
pub fn bessel_zeros(m: usize, count: usize) -> Vec<f64> {
    // j_{m,k} < m + (k + m/2 + 1) pi is a loose upper bound
    let limit = m as f64 + (count as f64 + 0.5 * m as f64 + 1.0) * std::f64::consts::PI;
    let mut z = bessel_zeros_below(m, limit);
    z.truncate(count);
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt`; the trapezoid rule
    /// is spectrally accurate for this periodic integrand.
    fn bessel_integral(m: usize, x: f64) -> f64 {
        let n = 400;
        let mut s = 0.0;
        for i in 0..=n {
            let t = PI * i as f64 / n as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * (m as f64 * t - x * t.sin()).cos();
        }
        s / n as f64
    }

    #[test]
    fn recurrence_matches_integral_representation() {
        for m in 0..12 {
            for &x in &[0.1, 1.0, 2.5, 7.3, 15.0, 33.3, 60.0] {
                let a = bessel_j(m, x);
                let b = bessel_integral(m, x);
                assert!((a - b).abs() < 1e-12, "m={m} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn series_agrees_for_small_arguments() {
        for m in 0..6 {
            for &x in &[0.0, 0.3, 1.7, 4.0] {
                assert!((bessel_j(m, x) - bessel_j_series(m, x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn known_zeros() {
        let j0 = bessel_zeros(0, 3);
        assert!((j0[0] - 2.404_825_557_695_773).abs() < 1e-12);
        assert!((j0[1] - 5.520_078_110_286_311).abs() < 1e-12);
        assert!((j0[2] - 8.653_727_912_911_013).abs() < 1e-12);
        let j1 = bessel_zeros(1, 2);
        assert!((j1[0] - 3.831_705_970_207_512).abs() < 1e-12);
        assert!((j1[1] - 7.015_586_669_815_619).abs() < 1e-12);
        let j5 = bessel_zeros(5, 1);
        assert!((j5[0] - 8.771_483_815_959_954).abs() < 1e-11);
    }
}
