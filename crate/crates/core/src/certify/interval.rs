//! Closed intervals with outward rounding.
//!
//! Basic operations are correctly rounded in IEEE 754, so a one-ulp nudge
//! of each endpoint encloses the exact result. `exp` and `ln` come from the
//! platform libm, which is accurate to within one ulp on supported targets;
//! those results are nudged by two ulps.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_down())
}

fn up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return domain(format!("empty interval [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn outward(lo: f64, hi: f64, ulps: u32) -> Self {
        Self { lo: down(lo, ulps), hi: up(hi, ulps) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn split(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }

    pub fn exp(self) -> Self {
        Self::outward(self.lo.exp(), self.hi.exp(), 2).clamp_nonneg()
    }

    pub fn ln(self) -> Result<Self> {
        if !(self.lo > 0.0) {
            return domain(format!("log of interval [{}, {}] touching 0", self.lo, self.hi));
        }
        Ok(Self::outward(self.lo.ln(), self.hi.ln(), 2))
    }

    /// `b^self` for a positive constant base, as `exp(self · ln b)`.
    pub fn pow_base(self, base: f64) -> Result<Self> {
        Ok((self * Interval::point(base).ln()?).exp())
    }

    pub fn recip(self) -> Result<Self> {
        Interval::point(1.0) / self
    }

    pub fn scale(self, k: f64) -> Self {
        self * Interval::point(k)
    }

    fn clamp_nonneg(self) -> Self {
        Self { lo: self.lo.max(0.0), hi: self.hi }
    }

    fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs.contains_zero() {
            return domain(format!("division by interval [{}, {}] containing 0", rhs.lo, rhs.hi));
        }
        let c = [self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi];
        Ok(Self::outward(min4(c), max4(c), 1))
    }
}

fn min4(c: [f64; 4]) -> f64 {
    c.into_iter().fold(f64::INFINITY, f64::min)
}

fn max4(c: [f64; 4]) -> f64 {
    c.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Self) -> Self {
        Self::outward(self.lo + rhs.lo, self.hi + rhs.hi, 1)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Self) -> Self {
        Self::outward(self.lo - rhs.hi, self.hi - rhs.lo, 1)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Self) -> Self {
        let c = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        Self::outward(min4(c), max4(c), 1)
    }
}

/// Division by an interval containing zero yields an error.
impl Div for Interval {
    type Output = Result<Interval>;
    fn div(self, rhs: Self) -> Result<Interval> {
        self.try_div(rhs)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}
