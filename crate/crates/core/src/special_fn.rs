//! Log-gamma and the optimal real Khinchine constants.
//!
//! For Rademacher sums the optimal lower constant is
//!
//! ```text
//! A_p = 2^(1/2 - 1/p)                     for 0 < p <= p0
//! A_p = sqrt(2) * (Gamma((p+1)/2) / sqrt(pi))^(1/p)   for p0 < p <= 2
//! ```
//!
//! where `p0 ~ 1.8474` is the unique crossover of the two expressions. For
//! `p <= 2` the upper constant `B_p` equals 1.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128, n = 15.
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162_4e-6,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "ln_gamma",
            value: x,
            domain: "(0, inf)",
        });
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Which closed form produced an optimal Khinchine constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KhinchineBranch {
    PowerOfTwo,
    GammaFormula,
}

/// The lower Khinchine constant `A_p` together with the branch it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KhinchineConstant {
    pub p: f64,
    pub value: f64,
    pub branch: KhinchineBranch,
}

impl KhinchineConstant {
    /// `log2` of the constant; exact arithmetic on the power-of-two branch.
    pub fn log2(&self) -> f64 {
        match self.branch {
            KhinchineBranch::PowerOfTwo => 0.5 - 1.0 / self.p,
            KhinchineBranch::GammaFormula => gamma_branch_ln(self.p) / LN_2,
        }
    }
}

/// `ln(2^(1/2 - 1/p))`.
pub fn power_branch_ln(p: f64) -> f64 {
    (0.5 - 1.0 / p) * LN_2
}

/// `ln(sqrt(2) * (Gamma((p+1)/2) / sqrt(pi))^(1/p))`.
pub fn gamma_branch_ln(p: f64) -> f64 {
    0.5 * LN_2 + (ln_gamma_pos(0.5 * (p + 1.0)) - 0.5 * PI.ln()) / p
}

/// Gamma branch minus power-of-two branch. Positive on `(0, p0)`, negative on
/// `(p0, 2)`; both branches equal 1 at `p = 2`.
pub fn branch_difference(p: f64) -> f64 {
    gamma_branch_ln(p).exp() - power_branch_ln(p).exp()
}

/// The crossover exponent `p0` of the two branches, bracketed in `[1.8, 1.9]`.
///
/// Computed once by bisection and memoized.
pub fn haagerup_crossover() -> f64 {
    static P0: OnceLock<f64> = OnceLock::new();
    *P0.get_or_init(|| {
        let (mut lo, mut hi) = (1.8_f64, 1.9_f64);
        let f_lo = branch_difference(lo);
        debug_assert!(f_lo > 0.0 && branch_difference(hi) < 0.0);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if (branch_difference(mid) > 0.0) == (f_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Optimal lower Khinchine constant `A_p` for `0 < p <= 2`.
#[allow(non_snake_case)]
pub fn khinchine_A(p: f64) -> Result<KhinchineConstant> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::Domain {
            what: "khinchine_A",
            value: p,
            domain: "(0, 2]",
        });
    }
    let (ln_value, branch) = if p <= haagerup_crossover() {
        (power_branch_ln(p), KhinchineBranch::PowerOfTwo)
    } else {
        (gamma_branch_ln(p), KhinchineBranch::GammaFormula)
    };
    Ok(KhinchineConstant {
        p,
        value: ln_value.exp(),
        branch,
    })
}

/// Upper Khinchine constant `B_p`; equal to 1 for `0 < p <= 2`.
///
/// Exponents above 2 are rejected rather than extended.
#[allow(non_snake_case)]
pub fn khinchine_B(p: f64) -> Result<f64> {
    if p > 2.0 {
        return Err(Error::OutOfScope(format!(
            "khinchine_B is only provided for 0 < p <= 2 (got {p})"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::Domain {
            what: "khinchine_B",
            value: p,
            domain: "(0, 2]",
        });
    }
    Ok(1.0)
}

/// The Rademacher-tensor constant `A_{2,r} = B_2 / A_r = 1 / A_r`, `1 <= r <= 2`.
#[allow(non_snake_case)]
pub fn khinchine_A2r(r: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::Domain {
            what: "khinchine_A2r",
            value: r,
            domain: "[1, 2]",
        });
    }
    Ok(1.0 / khinchine_A(r)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: shift upwards with the recurrence, then apply the
    // Stirling series with Bernoulli terms through z^-11.
    fn ln_gamma_stirling(x: f64) -> f64 {
        let mut z = x;
        let mut shift = 0.0;
        while z < 30.0 {
            shift += z.ln();
            z += 1.0;
        }
        let z2 = z * z;
        let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
            - 1.0 / (1680.0 * z * z2 * z2 * z2)
            + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2)
            - 691.0 / (360360.0 * z * z2 * z2 * z2 * z2 * z2);
        (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - shift
    }

    #[test]
    fn ln_gamma_trivial_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(ln_gamma(2.0).unwrap().abs() < 1e-15);
        let half = ln_gamma(0.5).unwrap();
        assert!((half - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((half - 0.572_364_942_924_700_1).abs() < 1e-14);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn ln_gamma_matches_high_precision_values() {
        // Reference values from a 30-digit evaluation.
        let cases = [
            (10.0 / 7.0, -0.120_952_040_632_571_04),
            (1.5, -0.120_782_237_635_245_22),
            (2.5, 0.284_682_870_472_919_16),
            (7.3, 7.147_892_523_022_249),
            (19.5, 37.861_086_508_961_097),
            (0.7, 0.260_867_246_531_666_5),
        ];
        for (x, expect) in cases {
            let got = ln_gamma(x).unwrap();
            // relative error of Gamma = |exp(got - expect) - 1|
            assert!((got - expect).abs() < 1e-13, "x={x}: {got} vs {expect}");
        }
    }

    #[test]
    fn ln_gamma_agrees_with_stirling_oracle() {
        let mut x = 0.5;
        while x <= 20.0 {
            let diff = ln_gamma(x).unwrap() - ln_gamma_stirling(x);
            assert!(diff.abs() < 1e-13, "x={x}: diff {diff}");
            x += 0.037;
        }
    }

    #[test]
    fn ln_gamma_recurrence() {
        let mut x = 0.5;
        while x <= 10.0 {
            let lhs = ln_gamma(x + 1.0).unwrap();
            let rhs = x.ln() + ln_gamma(x).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "x={x}");
            x += 0.01;
        }
    }

    #[test]
    fn ln_gamma_rejects_nonpositive() {
        assert!(matches!(ln_gamma(0.0), Err(Error::Domain { .. })));
        assert!(matches!(ln_gamma(-1.5), Err(Error::Domain { .. })));
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn khinchine_a_examples() {
        let a = khinchine_A(4.0 / 3.0).unwrap();
        assert_eq!(a.branch, KhinchineBranch::PowerOfTwo);
        assert!((a.value - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((a.value - 0.8409).abs() < 1e-4);

        let a2 = khinchine_A(2.0).unwrap();
        assert_eq!(a2.branch, KhinchineBranch::GammaFormula);
        assert!((a2.value - 1.0).abs() < 1e-14);

        let a = khinchine_A(26.0 / 14.0).unwrap();
        assert_eq!(a.branch, KhinchineBranch::GammaFormula);
        assert!((a.value - 0.9736).abs() < 5e-5);
        assert!((a.value - 0.973_603_697_721_353_6).abs() < 1e-13);
    }

    #[test]
    fn khinchine_a_domain() {
        assert!(khinchine_A(0.0).is_err());
        assert!(khinchine_A(2.0 + 1e-12).is_err());
        assert!(khinchine_A(-1.0).is_err());
    }

    #[test]
    fn khinchine_a_bounded_and_monotone_on_grid() {
        let mut prev = 0.0;
        for k in 1..=2000 {
            let p = k as f64 * 1e-3;
            let a = khinchine_A(p).unwrap();
            assert!(a.value > 0.0 && a.value <= 1.0 + 1e-15, "p={p}");
            assert!(a.value >= prev - 1e-15, "p={p} not monotone");
            assert_eq!(
                a.branch == KhinchineBranch::PowerOfTwo,
                p <= haagerup_crossover()
            );
            prev = a.value;
        }
    }

    #[test]
    fn crossover_is_bracketed_and_continuous() {
        let p0 = haagerup_crossover();
        assert!(p0 > 1.84 && p0 < 1.85);
        assert!((p0 - 1.847_416_336_076_342).abs() < 1e-10);
        let pow = power_branch_ln(p0).exp();
        let gam = gamma_branch_ln(p0).exp();
        assert!(((pow - gam) / pow).abs() < 1e-12);
        assert!(branch_difference(1.5) > 0.0);
        assert!(branch_difference(1.9) < 0.0);
    }

    #[test]
    fn a2r_examples_and_reciprocity() {
        assert!((khinchine_A2r(4.0 / 3.0).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((khinchine_A2r(4.0 / 3.0).unwrap() - 1.1892).abs() < 1e-4);
        assert!((khinchine_A2r(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((khinchine_A2r(26.0 / 14.0).unwrap() - 1.0 / 0.9736).abs() < 1e-4);
        let mut r = 1.0;
        while r <= 2.0 {
            let prod = khinchine_A2r(r).unwrap() * khinchine_A(r).unwrap().value;
            assert!((prod - 1.0).abs() < 1e-14);
            assert!(khinchine_A2r(r).unwrap() >= 1.0);
            r += 0.01;
        }
        assert!(khinchine_A2r(0.99).is_err());
        assert!(khinchine_A2r(2.01).is_err());
    }

    #[test]
    fn b_is_one_and_rejects_above_two() {
        for p in [2.0, 4.0 / 3.0, 1.0, 0.3] {
            assert_eq!(khinchine_B(p).unwrap(), 1.0);
        }
        assert!(matches!(khinchine_B(2.5), Err(Error::OutOfScope(_))));
        assert!(khinchine_B(0.0).is_err());
    }

    #[test]
    fn crossover_is_race_free() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(haagerup_crossover))
            .collect();
        let vals: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] == w[1]));
    }
}
