//! The one-dimensional moment lemma behind the poly-Laplacian bound, its
//! fuzzing oracle, and the auxiliary function `F(t)` whose monotonicity
//! closes the argument.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::ln_rising_even_product;
use crate::error::{Error, Result};
use crate::geometry::ln_unit_ball_volume;

/// Relative slack when checking chord slopes against `eta`, to absorb the
/// rounding in breakpoint/value arithmetic.
const SLOPE_RTOL: f64 = 1e-12;

/// Non-increasing piecewise-linear `psi(s) >= 0` on `[0, s_m]`, zero beyond.
///
/// If the last value is positive the profile jumps to zero at `s_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    eta: f64,
}

impl RadialProfile {
    /// Profile whose chord slopes must all lie in `[-eta, 0]`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", "must be positive and finite"));
        }
        let p = Self::from_samples(breakpoints, values)?;
        let steepest = p.steepest_slope();
        if steepest > eta * (1.0 + SLOPE_RTOL) {
            return Err(Error::invalid(
                "values",
                format!("chord slope -{steepest} is steeper than -eta = -{eta}"),
            ));
        }
        Ok(RadialProfile { eta, ..p })
    }

    /// Profile with no prescribed slope bound; `eta` is set to the steepest
    /// chord (zero for a single point).
    pub fn from_samples(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::invalid(
                "breakpoints",
                "need as many breakpoints as values, and at least one",
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("breakpoints", "must start at 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || !breakpoints.iter().all(|s| s.is_finite()) {
            return Err(Error::invalid("breakpoints", "must be finite and strictly ascending"));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("values", "must be finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("values", "must be non-increasing"));
        }
        let mut p = RadialProfile {
            breakpoints,
            values,
            eta: 0.0,
        };
        p.eta = p.steepest_slope();
        Ok(p)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn psi0(&self) -> f64 {
        self.values[0]
    }

    pub fn support(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Largest `|slope|` over all chords.
    pub fn steepest_slope(&self) -> f64 {
        self.chord_slopes().fold(0.0, |m, s| m.max(-s))
    }

    pub fn chord_slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| (v[1] - v[0]) / (s[1] - s[0]))
    }

    pub fn value_at(&self, s: f64) -> f64 {
        if s < 0.0 || s > self.support() {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= s);
        if i == self.breakpoints.len() {
            return *self.values.last().unwrap();
        }
        let (a, c) = (self.breakpoints[i - 1], self.breakpoints[i]);
        let (va, vc) = (self.values[i - 1], self.values[i]);
        va + (vc - va) * (s - a) / (c - a)
    }

    /// `sup { s : psi(s) > t }` for `t >= 0`, or 0 if the set is empty.
    pub fn superlevel_radius(&self, t: f64) -> f64 {
        let v = &self.values;
        // values are non-increasing, so {psi > t} is an initial segment
        let last = v.partition_point(|&x| x > t);
        if last == 0 {
            return 0.0;
        }
        if last == v.len() {
            return self.support();
        }
        let (a, c) = (self.breakpoints[last - 1], self.breakpoints[last]);
        a + (c - a) * (v[last - 1] - t) / (v[last - 1] - v[last])
    }

    /// `int_0^inf s^q psi(s) ds` for `q > -1`, exact per linear segment.
    ///
    /// On `[a, a+w]` with `psi = v0 - d (s-a)/w` the integral is
    /// `v0 I0 - (d/w) I1`, `I0 = int s^q`, `I1 = int s^q (s-a)`; the power
    /// differences go through `expm1`/`ln_1p` so short steep segments keep
    /// full relative accuracy.
    pub fn moment(&self, q: f64) -> f64 {
        let mut total = 0.0;
        for (s, v) in self.breakpoints.windows(2).zip(self.values.windows(2)) {
            let (a, w) = (s[0], s[1] - s[0]);
            let i0 = pow_diff(a, w, q + 1.0) / (q + 1.0);
            let i1 = pow_diff(a, w, q + 2.0) / (q + 2.0) - a * i0;
            total += v[0] * i0 - (v[0] - v[1]) / w * i1;
        }
        total
    }
}

/// `(a + w)^r - a^r` for `a >= 0`, `w > 0`.
fn pow_diff(a: f64, w: f64, r: f64) -> f64 {
    if a == 0.0 {
        w.powf(r)
    } else {
        a.powf(r) * (r * (w / a).ln_1p()).exp_m1()
    }
}

/// Inputs of the moment lemma: exponent `b >= 1`, order `l`, zeroth moment
/// `A`, `psi(0)` and the slope bound `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaInputs {
    pub b: f64,
    pub l: usize,
    pub a: f64,
    pub psi0: f64,
    pub eta: f64,
}

impl LemmaInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 1.0 && self.b.is_finite()) {
            return Err(Error::invalid("b", format!("{} is below 1", self.b)));
        }
        if self.l == 0 {
            return Err(Error::invalid("l", "must be at least 1"));
        }
        for (field, v) in [("A", self.a), ("psi0", self.psi0), ("eta", self.eta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("{v} is not positive")));
            }
        }
        Ok(())
    }
}

/// Lower bound on `A_l = int s^(b+2l-1) psi` in terms of `A = int s^(b-1) psi`,
/// `psi(0)` and `eta`:
///
/// `1/(b+2l) [ (bA)^((b+2l)/b) psi0^(-2l/b)
///   + sum_{p=1}^{l} (l+1-p) (bA)^((b+2(l-p))/b) psi0^((2pb-2(l-p))/b)
///     / (6^p b(b+2)...(b+2p-2) eta^(2p)) ]`.
pub fn lemma1_rhs(x: &LemmaInputs) -> Result<f64> {
    x.validate()?;
    let b = x.b;
    let l = x.l as f64;
    let ln_ba = (b * x.a).ln();
    let ln_psi = x.psi0.ln();
    let lead = ((b + 2.0 * l) / b * ln_ba - 2.0 * l / b * ln_psi).exp();
    let tail: f64 = (1..=x.l)
        .map(|p| {
            let pf = p as f64;
            let lp = l - pf;
            (((l + 1.0 - pf).ln())
                + (b + 2.0 * lp) / b * ln_ba
                + (2.0 * pf * b - 2.0 * lp) / b * ln_psi
                - pf * 6f64.ln()
                - ln_rising_even_product(b, p)
                - 2.0 * pf * x.eta.ln())
            .exp()
        })
        .sum();
    Ok((lead + tail) / (b + 2.0 * l))
}

/// The `l = 1` form written out directly:
/// `1/(b+2) [ (bA)^((b+2)/b) psi0^(-2/b) + A psi0^2 / (6 eta^2) ]`.
pub fn base_case_rhs(b: f64, a: f64, psi0: f64, eta: f64) -> Result<f64> {
    LemmaInputs { b, l: 1, a, psi0, eta }.validate()?;
    let lead = (b * a).powf((b + 2.0) / b) * psi0.powf(-2.0 / b);
    Ok((lead + a * psi0 * psi0 / (6.0 * eta * eta)) / (b + 2.0))
}

/// `(A, A_l) = (int s^(b-1) psi, int s^(b+2l-1) psi)`.
pub fn moment_integrals(profile: &RadialProfile, b: f64, l: usize) -> Result<(f64, f64)> {
    if !(b >= 1.0) {
        return Err(Error::invalid("b", format!("{b} is below 1")));
    }
    Ok((
        profile.moment(b - 1.0),
        profile.moment(b + 2.0 * l as f64 - 1.0),
    ))
}

/// Deterministic random admissible profile: `pieces` linear segments on
/// `[0, support]` with random interior breakpoints, slopes in `[-eta, 0]`,
/// starting at `psi0` and ending exactly at zero.
pub fn sample_admissible_profile(
    seed: u64,
    eta: f64,
    psi0: f64,
    support: f64,
    pieces: usize,
) -> Result<RadialProfile> {
    if pieces == 0 {
        return Err(Error::invalid("pieces", "must be at least 1"));
    }
    for (field, v) in [("eta", eta), ("psi0", psi0), ("support", support)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(field, format!("{v} is not positive")));
        }
    }
    let reach = eta * support;
    if psi0 > reach {
        return Err(Error::invalid(
            "psi0",
            format!("psi0 = {psi0} cannot drop to 0 within {support} at slope {eta}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen::<f64>() * support).collect();
    cuts.sort_by(f64::total_cmp);
    let mut breaks = Vec::with_capacity(pieces + 1);
    breaks.push(0.0);
    for c in cuts {
        if c > *breaks.last().unwrap() && c < support {
            breaks.push(c);
        }
    }
    breaks.push(support);
    let widths: Vec<f64> = breaks.windows(2).map(|w| w[1] - w[0]).collect();

    let mut slopes: Vec<f64> = widths.iter().map(|_| rng.gen::<f64>() * eta).collect();
    let drop: f64 = slopes.iter().zip(&widths).map(|(s, w)| s * w).sum();
    if drop < psi0 {
        // move every slope toward eta by the same fraction
        let theta = (psi0 - drop) / (reach - drop);
        for s in &mut slopes {
            *s += (eta - *s) * theta;
        }
    } else if drop > 0.0 {
        for s in &mut slopes {
            *s *= psi0 / drop;
        }
    }
    for s in &mut slopes {
        *s = s.clamp(0.0, eta);
    }

    let mut values = Vec::with_capacity(breaks.len());
    let mut v = psi0;
    values.push(v);
    for (s, w) in slopes.iter().zip(&widths) {
        v = (v - s * w).max(0.0);
        values.push(v);
    }
    *values.last_mut().unwrap() = 0.0;
    RadialProfile::new(breaks, values, eta)
}

/// Settings for a fuzz campaign over the radial moment inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seeds: u64,
    pub first_seed: u64,
    pub b_grid: Vec<f64>,
    pub l_max: usize,
    /// Fixed slope bound; drawn per seed from `[0.1, 10]` when absent.
    pub eta: Option<f64>,
    pub max_pieces: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seeds: 1000,
            first_seed: 0,
            b_grid: vec![1.0, 1.5, 2.0, 3.0, 5.0],
            l_max: 4,
            eta: None,
            max_pieces: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzCase {
    pub seed: u64,
    pub b: f64,
    pub l: usize,
    pub a: f64,
    pub a_l: f64,
    pub rhs: f64,
}

impl FuzzCase {
    pub fn ratio(&self) -> f64 {
        self.a_l / self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub cases: usize,
    pub violations: Vec<FuzzCase>,
    /// Case with the smallest `A_l / rhs`.
    pub tightest: Option<FuzzCase>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn fuzz_seed(seed: u64, cfg: &FuzzConfig) -> Result<Vec<FuzzCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let eta = cfg.eta.unwrap_or_else(|| 10f64.powf(rng.gen_range(-1.0..1.0)));
    let support = rng.gen_range(0.2..5.0);
    let psi0 = eta * support * rng.gen_range(0.01..1.0);
    let pieces = rng.gen_range(1..=cfg.max_pieces.max(1));
    let profile = sample_admissible_profile(seed, eta, psi0, support, pieces)?;
    let mut out = Vec::new();
    for &b in &cfg.b_grid {
        for l in 1..=cfg.l_max {
            let (a, a_l) = moment_integrals(&profile, b, l)?;
            let rhs = lemma1_rhs(&LemmaInputs {
                b,
                l,
                a,
                psi0,
                eta,
            })?;
            out.push(FuzzCase {
                seed,
                b,
                l,
                a,
                a_l,
                rhs,
            });
        }
    }
    Ok(out)
}

/// Checks `A_l >= lemma1_rhs` with no tolerance on `cfg.seeds` profiles
/// for every `(b, l)` in the grid. Seeds run in parallel; results are
/// merged in seed order.
pub fn lemma1_fuzz(cfg: &FuzzConfig) -> Result<FuzzReport> {
    if cfg.b_grid.iter().any(|&b| !(b >= 1.0)) {
        return Err(Error::invalid("b_grid", "every b must be at least 1"));
    }
    if cfg.l_max == 0 {
        return Err(Error::invalid("l_max", "must be at least 1"));
    }
    let per_seed: Vec<Vec<FuzzCase>> = (cfg.first_seed..cfg.first_seed + cfg.seeds)
        .into_par_iter()
        .map(|s| fuzz_seed(s, cfg))
        .collect::<Result<_>>()?;
    let mut cases = 0;
    let mut violations = Vec::new();
    let mut tightest: Option<FuzzCase> = None;
    for case in per_seed.into_iter().flatten() {
        cases += 1;
        if case.a_l < case.rhs {
            violations.push(case.clone());
        }
        if tightest.as_ref().map_or(true, |t| case.ratio() < t.ratio()) {
            tightest = Some(case);
        }
    }
    Ok(FuzzReport {
        config: cfg.clone(),
        cases,
        violations,
        tightest,
    })
}

/// Parameters of `F(t)`; `t` must lie in `(0, (2 pi)^-n V]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FProfileInputs {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub volume: f64,
    pub eta: f64,
    pub t: f64,
}

/// `(2 pi)^-n V`, the largest admissible `t`.
pub fn f_profile_t_max(n: usize, volume: f64) -> f64 {
    (volume.ln() - n as f64 * (2.0 * PI).ln()).exp()
}

/// `2 (2 pi)^-n sqrt(V I)`, the gradient bound on the Fourier-side density.
pub fn physical_eta(n: usize, volume: f64, inertia: f64) -> f64 {
    2.0 * (0.5 * (volume.ln() + inertia.ln()) - n as f64 * (2.0 * PI).ln()).exp()
}

/// `(2 pi)^-n B_n^(-1/n) V^((n+1)/n)`: the smallest `physical_eta` any
/// domain of volume `V` can have.
pub fn eta_floor(n: usize, volume: f64) -> Result<f64> {
    let nf = n as f64;
    let ln_b = ln_unit_ball_volume(n)?;
    Ok((-nf * (2.0 * PI).ln() - ln_b / nf + (nf + 1.0) / nf * volume.ln()).exp())
}

fn validate_f(x: &FProfileInputs) -> Result<()> {
    if x.n == 0 || x.l == 0 || x.k == 0 {
        return Err(Error::invalid("n/l/k", "must all be at least 1"));
    }
    if !(x.volume > 0.0 && x.volume.is_finite()) {
        return Err(Error::invalid("V", "must be positive"));
    }
    if !(x.eta > 0.0 && x.eta.is_finite()) {
        return Err(Error::invalid("eta", "must be positive"));
    }
    let t_max = f_profile_t_max(x.n, x.volume);
    if !(x.t > 0.0 && x.t <= t_max * (1.0 + 1e-12)) {
        return Err(Error::invalid("t", format!("{} is outside (0, {t_max}]", x.t)));
    }
    Ok(())
}

/// `F(t) = nB_n/(n+2l) (k/B_n)^((n+2l)/n) t^(-2l/n)
///   + nB_n/(n+2l) sum_p (l+1-p) / (6^p n...(n+2p-2) eta^(2p))
///     (k/B_n)^((n+2l-2p)/n) t^((2pn+2p-2l)/n)`.
pub fn f_profile(x: &FProfileInputs) -> Result<f64> {
    validate_f(x)?;
    let n = x.n as f64;
    let l = x.l as f64;
    let ln_b = ln_unit_ball_volume(x.n)?;
    let ln_kb = (x.k as f64).ln() - ln_b;
    let ln_t = x.t.ln();
    let ln_pref = n.ln() + ln_b - (n + 2.0 * l).ln();
    let lead = (ln_pref + (n + 2.0 * l) / n * ln_kb - 2.0 * l / n * ln_t).exp();
    let tail: f64 = (1..=x.l)
        .map(|p| {
            let pf = p as f64;
            (ln_pref + (l + 1.0 - pf).ln()
                - pf * 6f64.ln()
                - ln_rising_even_product(n, p)
                - 2.0 * pf * x.eta.ln()
                + (n + 2.0 * l - 2.0 * pf) / n * ln_kb
                + (2.0 * pf * n + 2.0 * pf - 2.0 * l) / n * ln_t)
                .exp()
        })
        .sum();
    Ok(lead + tail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanVerdict {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub eta: f64,
    pub eta_floor: f64,
    pub samples: usize,
    pub strictly_decreasing: bool,
    /// First consecutive pair `(t_i, t_{i+1})` with `F(t_{i+1}) >= F(t_i)`.
    pub first_violation: Option<(f64, f64)>,
}

/// Evaluates `F` at `samples` log-spaced points spanning eight decades up
/// to `(2 pi)^-n V` and reports whether it is strictly decreasing.
pub fn f_profile_scan(
    n: usize,
    l: usize,
    k: usize,
    volume: f64,
    eta: f64,
    samples: usize,
) -> Result<ScanVerdict> {
    if samples < 2 {
        return Err(Error::invalid("samples", "need at least 2"));
    }
    let t_max = f_profile_t_max(n, volume);
    let ts: Vec<f64> = (0..samples)
        .map(|i| {
            if i + 1 == samples {
                t_max
            } else {
                t_max * 10f64.powf(-8.0 * (1.0 - i as f64 / (samples - 1) as f64))
            }
        })
        .collect();
    let values: Vec<f64> = ts
        .iter()
        .map(|&t| {
            f_profile(&FProfileInputs {
                n,
                l,
                k,
                volume,
                eta,
                t,
            })
        })
        .collect::<Result<_>>()?;
    let first_violation = values
        .windows(2)
        .position(|w| !(w[1] < w[0]))
        .map(|i| (ts[i], ts[i + 1]));
    Ok(ScanVerdict {
        n,
        l,
        k,
        eta,
        eta_floor: eta_floor(n, volume)?,
        samples,
        strictly_decreasing: first_violation.is_none(),
        first_violation,
    })
}
