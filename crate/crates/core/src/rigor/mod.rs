//! Certified real arithmetic.
//!
//! [`Enclosure`] is the binary64 interval type every analytic routine
//! returns. [`Dyadic`] is a slower big-integer interval used to recheck
//! borderline inequalities. Formulas that must run in both are written
//! against the [`Rigorous`] trait.

mod enclosure;
pub mod dyadic;
pub mod fixed;
pub mod round;
pub mod special;

use std::ops::{Add, Div, Mul, Neg, Sub};

pub use dyadic::Dyadic;
pub use enclosure::Enclosure;
pub use fixed::FixedSum;
pub use special::{bessel_j1, const_zeta32_squared, e1};

/// Interval arithmetic sufficient for the closed-form moment bounds.
pub trait Rigorous:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;
    fn ratio(p: i64, q: i64) -> Self;
    fn from_enclosure(e: &Enclosure) -> Self;
    fn pi() -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    /// `E1` of a positive interval.
    fn e1(&self) -> Self;
    /// `[-B, B]` with `B` the upper endpoint of `bound`.
    fn symmetric(bound: &Self) -> Self;
    fn hull(&self, other: &Self) -> Self;
    fn lower(&self) -> Self;
    fn upper(&self) -> Self;
    fn lo_f64(&self) -> f64;
    fn hi_f64(&self) -> f64;
    fn is_positive(&self) -> bool;

    fn from_u64(n: u64) -> Self {
        Self::from_int(i64::try_from(n).expect("integer out of range"))
    }
}

impl Rigorous for Enclosure {
    fn from_int(n: i64) -> Self {
        Enclosure::from_int(n)
    }
    fn ratio(p: i64, q: i64) -> Self {
        Enclosure::ratio(p, q)
    }
    fn from_enclosure(e: &Enclosure) -> Self {
        *e
    }
    fn pi() -> Self {
        Enclosure::new(std::f64::consts::PI, std::f64::consts::PI.next_up())
    }
    fn sqrt(&self) -> Self {
        Enclosure::sqrt(self)
    }
    fn exp(&self) -> Self {
        Enclosure::exp(self)
    }
    fn ln(&self) -> Self {
        Enclosure::ln(self)
    }
    fn e1(&self) -> Self {
        // E1 is decreasing.
        let a = special::e1(self.hi()).expect("E1 of a non-positive enclosure");
        let b = special::e1(self.lo()).expect("E1 of a non-positive enclosure");
        Enclosure::new(a.lo(), b.hi())
    }
    fn symmetric(bound: &Self) -> Self {
        Enclosure::symmetric(*bound)
    }
    fn hull(&self, other: &Self) -> Self {
        Enclosure::hull(self, other)
    }
    fn lower(&self) -> Self {
        Enclosure::lower(self)
    }
    fn upper(&self) -> Self {
        Enclosure::upper(self)
    }
    fn lo_f64(&self) -> f64 {
        self.lo()
    }
    fn hi_f64(&self) -> f64 {
        self.hi()
    }
    fn is_positive(&self) -> bool {
        Enclosure::is_positive(self)
    }
}

impl Rigorous for Dyadic {
    fn from_int(n: i64) -> Self {
        Dyadic::from_int(n)
    }
    fn ratio(p: i64, q: i64) -> Self {
        Dyadic::ratio(p, q)
    }
    fn from_enclosure(e: &Enclosure) -> Self {
        Dyadic::from_enclosure(e)
    }
    fn pi() -> Self {
        Dyadic::pi()
    }
    fn sqrt(&self) -> Self {
        Dyadic::sqrt(self)
    }
    fn exp(&self) -> Self {
        Dyadic::exp(self)
    }
    fn ln(&self) -> Self {
        Dyadic::ln(self)
    }
    fn e1(&self) -> Self {
        Dyadic::e1(self)
    }
    fn symmetric(bound: &Self) -> Self {
        Dyadic::symmetric(bound)
    }
    fn hull(&self, other: &Self) -> Self {
        Dyadic::hull(self, other)
    }
    fn lower(&self) -> Self {
        Dyadic::lower(self)
    }
    fn upper(&self) -> Self {
        Dyadic::upper(self)
    }
    fn lo_f64(&self) -> f64 {
        Dyadic::lo_f64(self)
    }
    fn hi_f64(&self) -> f64 {
        Dyadic::hi_f64(self)
    }
    fn is_positive(&self) -> bool {
        Dyadic::is_positive(self)
    }
}
