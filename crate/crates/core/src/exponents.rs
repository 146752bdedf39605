//! Interpolation exponents of the Blei-type mixed-norm inequality and the
//! Bohnenblust-Hille exponent `2m/(m+1)`.
//!
//! The formulas are generic over the scalar so the same code runs on `f64`
//! and on exact rationals; identities are tested in the latter.

use num_traits::{Num, ToPrimitive};

use crate::error::{Error, Result};
use crate::Rational;

/// Exponents `(q, s1, s2)` with `s1, s2 >= 1` and `q > max(s1, s2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleiParams<T> {
    q: T,
    s1: T,
    s2: T,
}

/// Argument order for [`blei_f`]: `S1S2` evaluates `f(s1, s2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    S1S2,
    S2S1,
}

impl<T> BleiParams<T>
where
    T: Num + Copy + PartialOrd + ToPrimitive,
{
    pub fn new(q: T, s1: T, s2: T) -> Result<Self> {
        let one = T::one();
        if s1 < one || s2 < one {
            return Err(Error::Hypothesis(format!(
                "s1 = {}, s2 = {} must both be >= 1",
                show(s1),
                show(s2)
            )));
        }
        let max = if s1 > s2 { s1 } else { s2 };
        if !(q > max) {
            return Err(Error::Hypothesis(format!(
                "q = {} must exceed max(s1, s2) = {}",
                show(q),
                show(max)
            )));
        }
        Ok(Self { q, s1, s2 })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn s1(&self) -> T {
        self.s1
    }

    pub fn s2(&self) -> T {
        self.s2
    }

    /// `w(x, y) = (q^2 (x + y) - 2 q x y) / (q^2 - x y)`.
    pub fn w_at(&self, x: T, y: T) -> T {
        let q = self.q;
        let two = T::one() + T::one();
        (q * q * (x + y) - two * q * x * y) / (q * q - x * y)
    }

    /// `f(x, y) = (q^2 x - q x y) / (q^2 (x + y) - 2 q x y)`.
    pub fn f_at(&self, x: T, y: T) -> T {
        let q = self.q;
        let two = T::one() + T::one();
        (q * q * x - q * x * y) / (q * q * (x + y) - two * q * x * y)
    }

    pub fn w(&self) -> T {
        self.w_at(self.s1, self.s2)
    }

    pub fn f(&self, order: Order) -> T {
        match order {
            Order::S1S2 => self.f_at(self.s1, self.s2),
            Order::S2S1 => self.f_at(self.s2, self.s1),
        }
    }
}

fn show<T: ToPrimitive>(x: T) -> String {
    x.to_f64().map_or_else(|| "?".into(), |v| v.to_string())
}

pub fn blei_w<T>(params: &BleiParams<T>) -> T
where
    T: Num + Copy + PartialOrd + ToPrimitive,
{
    params.w()
}

pub fn blei_f<T>(params: &BleiParams<T>, order: Order) -> T
where
    T: Num + Copy + PartialOrd + ToPrimitive,
{
    params.f(order)
}

/// `2m / (m + 1)` as an exact rational.
pub fn bh_exponent_exact(m: u32) -> Result<Rational> {
    if m == 0 {
        return Err(Error::Domain {
            what: "bh_exponent",
            value: 0.0,
            domain: "m >= 1",
        });
    }
    Ok(Rational::new(2 * m as i64, m as i64 + 1))
}

/// The Bohnenblust-Hille exponent `2m / (m + 1)`.
pub fn bh_exponent(m: u32) -> Result<f64> {
    Ok(to_f64(bh_exponent_exact(m)?))
}

/// `s2(m) = (2m - 4) / (m - 1)`, the exponent of the `m - 2` block in the
/// two-step recurrence. Equal to `bh_exponent(m - 2)`.
pub fn s2_exact(m: u32) -> Result<Rational> {
    if m < 3 {
        return Err(Error::Domain {
            what: "s2_of",
            value: m as f64,
            domain: "m >= 3",
        });
    }
    Ok(Rational::new(2 * m as i64 - 4, m as i64 - 1))
}

pub fn s2_of(m: u32) -> Result<f64> {
    Ok(to_f64(s2_exact(m)?))
}

pub(crate) fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
