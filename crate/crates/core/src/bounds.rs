//! Closed-form lower bounds and Weyl-type asymptotics for Dirichlet
//! eigenvalues of `(-Delta)^l`.
//!
//! Powers such as `(B_n V)^(2l/n)` and `k^(2l/n)` are accumulated in log
//! space so large `n`, `l` and `k` neither overflow nor underflow.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inertia_floor, ln_unit_ball_volume};

/// Inputs shared by every bound: dimension, operator order, volume,
/// moment of inertia and eigenvalue index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub l: usize,
    pub volume: f64,
    pub inertia: f64,
    pub k: usize,
}

impl BoundInputs {
    pub fn new(n: usize, l: usize, volume: f64, inertia: f64, k: usize) -> Result<Self> {
        let inputs = BoundInputs {
            n,
            l,
            volume,
            inertia,
            k,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "dimension must be at least 1"));
        }
        if self.l == 0 {
            return Err(Error::invalid("l", "operator order must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k", "eigenvalue index must be at least 1"));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(Error::invalid("V", format!("{} is not positive", self.volume)));
        }
        if !(self.inertia > 0.0 && self.inertia.is_finite()) {
            return Err(Error::invalid("I", format!("{} is not positive", self.inertia)));
        }
        Ok(())
    }

    /// False when `I` is below the ball's inertia for this volume, i.e. no
    /// domain has these `(V, I)`. Bounds still evaluate; reports flag it.
    pub fn inertia_is_feasible(&self) -> bool {
        match inertia_floor(self.n, self.volume) {
            Ok(floor) => self.inertia >= floor * (1.0 - 1e-12),
            Err(_) => false,
        }
    }

    pub fn with_k(self, k: usize) -> Self {
        BoundInputs { k, ..self }
    }

    fn ln_bnv(&self) -> f64 {
        ln_unit_ball_volume(self.n).expect("validated dimension") + self.volume.ln()
    }

    /// `ln[(2 pi)^(2q) / (B_n V)^(2q/n) * k^(2q/n)]`.
    fn ln_weyl_power(&self, q: usize) -> f64 {
        let qf = q as f64;
        let nf = self.n as f64;
        2.0 * qf * (2.0 * PI).ln() - (2.0 * qf / nf) * self.ln_bnv()
            + (2.0 * qf / nf) * (self.k as f64).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Lower bound on `(1/k) sum_{j<=k} lambda_j`.
    AverageOfFirstK,
    /// Lower bound on `lambda_k` itself.
    IndividualKth,
    /// Leading asymptotic term, not a bound.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub kind: BoundKind,
}

fn checked(inputs: &BoundInputs) -> Result<()> {
    inputs.validate()
}

fn require_membrane(inputs: &BoundInputs, what: &str) -> Result<()> {
    if inputs.l != 1 {
        return Err(Error::invalid(
            "l",
            format!("{what} applies to l = 1 only, got l = {}", inputs.l),
        ));
    }
    Ok(())
}

/// Weyl-type leading term `(2 pi)^(2l) / (B_n V)^(2l/n) k^(2l/n)`; the
/// averaged form carries the extra factor `n/(n+2l)`.
pub fn asymptotic_leading(inputs: &BoundInputs, average: bool) -> Result<BoundValue> {
    checked(inputs)?;
    let mut value = inputs.ln_weyl_power(inputs.l).exp();
    if average {
        value *= inputs.n as f64 / (inputs.n + 2 * inputs.l) as f64;
    }
    Ok(BoundValue {
        value,
        kind: BoundKind::Asymptotic,
    })
}

/// `n/(n+2l) (2 pi)^(2l) / (B_n V)^(2l/n) k^(2l/n)`, the Berezin-Li-Yau
/// bound for `l = 1` and the Levine-Protter bound in general.
pub fn classical_average_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    let value = asymptotic_leading(inputs, true)?.value;
    Ok(BoundValue {
        value,
        kind: BoundKind::AverageOfFirstK,
    })
}

/// Individual-eigenvalue consequence of the classical average bound: the
/// same right-hand side, since `lambda_k` dominates the mean of the first
/// `k` eigenvalues.
pub fn individual_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    let value = classical_average_bound(inputs)?.value;
    Ok(BoundValue {
        value,
        kind: BoundKind::IndividualKth,
    })
}

/// `4 pi^2 / (B_n V)^(2/n) k^(2/n)`; proven for tiling domains and
/// conjectured for all bounded domains.
pub fn polya_tiling_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    checked(inputs)?;
    require_membrane(inputs, "the Polya bound")?;
    Ok(BoundValue {
        value: inputs.ln_weyl_power(1).exp(),
        kind: BoundKind::IndividualKth,
    })
}

/// Berezin-Li-Yau plus the Melas correction `V / (24 (n+2) I)`.
pub fn melas_average(inputs: &BoundInputs) -> Result<BoundValue> {
    checked(inputs)?;
    require_membrane(inputs, "the Melas bound")?;
    let base = classical_average_bound(inputs)?.value;
    let correction = inputs.volume / (24.0 * (inputs.n + 2) as f64 * inputs.inertia);
    Ok(BoundValue {
        value: base + correction,
        kind: BoundKind::AverageOfFirstK,
    })
}

/// `ln[n (n+2) ... (n+2p-2)]`, a product of exactly `p` factors.
pub(crate) fn ln_rising_even_product(start: f64, p: usize) -> f64 {
    (0..p).map(|i| (start + 2.0 * i as f64).ln()).sum()
}

/// The `l` lower-order terms that the poly-Laplacian bound adds to the
/// classical average bound:
///
/// `n/(n+2l) sum_{p=1}^{l} (l+1-p) / (24^p n(n+2)...(n+2p-2))
///   (2 pi)^(2(l-p)) / (B_n V)^(2(l-p)/n) (V/I)^p k^(2(l-p)/n)`.
pub fn theorem1_correction(inputs: &BoundInputs) -> Result<f64> {
    checked(inputs)?;
    let n = inputs.n as f64;
    let l = inputs.l;
    let ln_ratio = (inputs.volume / inputs.inertia).ln();
    let prefactor = n / (n + 2.0 * l as f64);
    let sum: f64 = (1..=l)
        .map(|p| {
            let pf = p as f64;
            let ln_term = ((l + 1 - p) as f64).ln()
                - pf * 24f64.ln()
                - ln_rising_even_product(n, p)
                + inputs.ln_weyl_power(l - p)
                + pf * ln_ratio;
            ln_term.exp()
        })
        .sum();
    Ok(prefactor * sum)
}

/// Lower bound on `(1/k) sum_{j<=k} lambda_j` for `(-Delta)^l`: the
/// classical average bound plus [`theorem1_correction`]. For `l = 1` it
/// coincides with [`melas_average`].
pub fn theorem1_average(inputs: &BoundInputs) -> Result<BoundValue> {
    let base = classical_average_bound(inputs)?.value;
    Ok(BoundValue {
        value: base + theorem1_correction(inputs)?,
        kind: BoundKind::AverageOfFirstK,
    })
}

/// `B_n^(4/n) / (2 pi)^2`; below `1/2` in every dimension.
pub fn gamma_constant_ratio(n: usize) -> Result<f64> {
    let ln_b = ln_unit_ball_volume(n)?;
    Ok((4.0 / n as f64 * ln_b - 2.0 * (2.0 * PI).ln()).exp())
}

/// Every bound that applies to `inputs`, by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub inputs: BoundInputs,
    pub inertia_feasible: bool,
    pub asymptotic_individual: f64,
    pub asymptotic_average: f64,
    pub classical: f64,
    pub individual: f64,
    pub theorem1: f64,
    pub melas: Option<f64>,
    pub polya: Option<f64>,
}

pub fn evaluate_all(inputs: &BoundInputs) -> Result<BoundTable> {
    let membrane = inputs.l == 1;
    Ok(BoundTable {
        inputs: *inputs,
        inertia_feasible: inputs.inertia_is_feasible(),
        asymptotic_individual: asymptotic_leading(inputs, false)?.value,
        asymptotic_average: asymptotic_leading(inputs, true)?.value,
        classical: classical_average_bound(inputs)?.value,
        individual: individual_bound(inputs)?.value,
        theorem1: theorem1_average(inputs)?.value,
        melas: if membrane {
            Some(melas_average(inputs)?.value)
        } else {
            None
        },
        polya: if membrane {
            Some(polya_tiling_bound(inputs)?.value)
        } else {
            None
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bi(n: usize, l: usize, v: f64, i: f64, k: usize) -> BoundInputs {
        BoundInputs::new(n, l, v, i, k).unwrap()
    }

    #[test]
    fn asymptotic_examples() {
        let iv = bi(1, 1, PI, PI.powi(3) / 12.0, 5);
        assert_relative_eq!(asymptotic_leading(&iv, false).unwrap().value, 25.0, max_relative = 1e-13);
        let plate = bi(2, 2, PI, PI / 2.0, 1);
        assert_relative_eq!(asymptotic_leading(&plate, true).unwrap().value, 16.0 / 3.0, max_relative = 1e-13);
        let disk = bi(2, 1, PI, PI / 2.0, 1);
        assert_relative_eq!(asymptotic_leading(&disk, false).unwrap().value, 4.0, max_relative = 1e-13);
    }

    #[test]
    fn classical_and_individual_examples() {
        let iv = bi(1, 1, PI, PI.powi(3) / 12.0, 3);
        assert_relative_eq!(classical_average_bound(&iv).unwrap().value, 3.0, max_relative = 1e-13);
        let ind = individual_bound(&iv).unwrap();
        assert_eq!(ind.kind, BoundKind::IndividualKth);
        assert!(ind.value <= 9.0);

        let beam = bi(1, 2, 1.0, 1.0 / 12.0, 1);
        assert_relative_eq!(individual_bound(&beam).unwrap().value, PI.powi(4) / 5.0, max_relative = 1e-13);

        let disk2 = bi(2, 1, PI, PI / 2.0, 2);
        assert_relative_eq!(individual_bound(&disk2).unwrap().value, 4.0, max_relative = 1e-13);
        let disk1 = disk2.with_k(1);
        assert_relative_eq!(classical_average_bound(&disk1).unwrap().value, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn polya_examples() {
        assert_relative_eq!(polya_tiling_bound(&bi(1, 1, PI, 1.0, 4)).unwrap().value, 16.0, max_relative = 1e-13);
        assert_relative_eq!(polya_tiling_bound(&bi(2, 1, 1.0, 1.0 / 6.0, 1)).unwrap().value, 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(polya_tiling_bound(&bi(2, 1, PI, PI / 2.0, 1)).unwrap().value, 4.0, max_relative = 1e-13);
        assert!(polya_tiling_bound(&bi(2, 2, PI, PI / 2.0, 1)).is_err());
    }

    #[test]
    fn melas_examples() {
        let iv = bi(1, 1, PI, PI.powi(3) / 12.0, 1);
        let want = 1.0 / 3.0 + 1.0 / (6.0 * PI * PI);
        assert_relative_eq!(melas_average(&iv).unwrap().value, want, max_relative = 1e-13);
        assert_relative_eq!(want, 0.350_22, max_relative = 1e-5);
        let disk = bi(2, 1, PI, PI / 2.0, 1);
        assert_relative_eq!(melas_average(&disk).unwrap().value, 2.0 + 2.0 / 96.0, max_relative = 1e-13);
        assert!(melas_average(&bi(2, 3, PI, PI / 2.0, 1)).is_err());
    }

    #[test]
    fn theorem1_beam_example() {
        // (1/5)[pi^4 + (2/24) pi^2 12 + 12^2 / (24^2 * 1 * 3)]
        let beam = bi(1, 2, 1.0, 1.0 / 12.0, 1);
        let want = (PI.powi(4) + PI * PI + 1.0 / 12.0) / 5.0;
        assert_relative_eq!(theorem1_average(&beam).unwrap().value, want, max_relative = 1e-13);
        assert_relative_eq!(want, 21.472, max_relative = 1e-4);
    }

    #[test]
    fn theorem1_decomposes() {
        let x = bi(3, 4, 2.5, 1.7, 11);
        let t = theorem1_average(&x).unwrap().value;
        let c = classical_average_bound(&x).unwrap().value;
        assert_relative_eq!(t - c, theorem1_correction(&x).unwrap(), max_relative = 1e-12);
        assert!(t > c);
    }

    #[test]
    fn invalid_inputs() {
        assert!(BoundInputs::new(0, 1, 1.0, 1.0, 1).is_err());
        assert!(BoundInputs::new(1, 0, 1.0, 1.0, 1).is_err());
        assert!(BoundInputs::new(1, 1, 0.0, 1.0, 1).is_err());
        assert!(BoundInputs::new(1, 1, 1.0, -1.0, 1).is_err());
        assert!(BoundInputs::new(1, 1, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn infeasible_inertia_is_flagged_not_rejected() {
        let x = bi(2, 1, PI, 0.1, 1);
        assert!(!x.inertia_is_feasible());
        assert!(theorem1_average(&x).is_ok());
        assert!(bi(2, 1, PI, PI / 2.0, 1).inertia_is_feasible());
    }

    #[test]
    fn large_parameters_stay_finite() {
        let x = bi(40, 10, 1e-3, 1e-5, 1_000_000);
        let t = theorem1_average(&x).unwrap().value;
        assert!(t.is_finite() && t > 0.0);
    }

    #[test]
    fn rising_product_has_p_factors() {
        assert_relative_eq!(ln_rising_even_product(3.0, 1).exp(), 3.0);
        assert_relative_eq!(ln_rising_even_product(3.0, 3).exp(), 3.0 * 5.0 * 7.0, max_relative = 1e-14);
        assert_eq!(ln_rising_even_product(3.0, 0), 0.0);
    }

    fn feasible() -> impl Strategy<Value = BoundInputs> {
        (1usize..=10, 1usize..=6, 1e-2f64..1e2, 1.0f64..20.0, 1usize..=10_000).prop_map(
            |(n, l, v, slack, k)| {
                let i = inertia_floor(n, v).unwrap() * slack;
                BoundInputs::new(n, l, v, i, k).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn membrane_case_is_melas(x in feasible()) {
            let x = BoundInputs { l: 1, ..x };
            let t = theorem1_average(&x).unwrap().value;
            let m = melas_average(&x).unwrap().value;
            prop_assert!((t - m).abs() <= 1e-12 * m);
        }

        #[test]
        fn improved_exceeds_classical(x in feasible()) {
            prop_assert!(theorem1_average(&x).unwrap().value > classical_average_bound(&x).unwrap().value);
        }

        #[test]
        fn increasing_in_k(x in feasible()) {
            let next = x.with_k(x.k + 1);
            prop_assert!(classical_average_bound(&next).unwrap().value > classical_average_bound(&x).unwrap().value);
            prop_assert!(theorem1_average(&next).unwrap().value > theorem1_average(&x).unwrap().value);
        }

        #[test]
        fn dilation_scales_by_minus_2l(x in feasible(), c in 0.1f64..10.0) {
            let n = x.n as i32;
            let y = BoundInputs { volume: x.volume * c.powi(n), inertia: x.inertia * c.powi(n + 2), ..x };
            let f = c.powi(-2 * x.l as i32);
            let pairs = [
                (theorem1_average(&x).unwrap().value, theorem1_average(&y).unwrap().value),
                (classical_average_bound(&x).unwrap().value, classical_average_bound(&y).unwrap().value),
                (asymptotic_leading(&x, false).unwrap().value, asymptotic_leading(&y, false).unwrap().value),
            ];
            for (a, b) in pairs {
                prop_assert!((b - a * f).abs() <= 1e-12 * a * f);
            }
        }
    }

    #[test]
    fn gamma_constant_below_half() {
        for n in 1..=50 {
            assert!(gamma_constant_ratio(n).unwrap() < 0.5, "n={n}");
        }
    }
}
