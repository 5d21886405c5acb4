use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::round::*;

/// A closed interval `[lo, hi]` of binary64 numbers that is guaranteed to
/// contain the real quantity it stands for.
///
/// All arithmetic rounds the lower endpoint down and the upper endpoint up, so
/// containment is preserved through any chain of operations. The `O_1(B)`
/// notation of analytic estimates ("some number of absolute value at most B")
/// maps to [`Enclosure::symmetric`].
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Enclosure {
    pub const ZERO: Enclosure = Enclosure { lo: 0.0, hi: 0.0 };
    pub const ONE: Enclosure = Enclosure { lo: 1.0, hi: 1.0 };

    /// Builds `[lo, hi]`.
    ///
    /// Panics if the endpoints are not finite or are out of order.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo.is_finite() && hi.is_finite(), "non-finite enclosure [{lo}, {hi}]");
        assert!(lo <= hi, "reversed enclosure [{lo}, {hi}]");
        Enclosure { lo, hi }
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        (lo.is_finite() && hi.is_finite() && lo <= hi).then_some(Enclosure { lo, hi })
    }

    /// The exact binary64 value `x`.
    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    pub fn from_int(n: i64) -> Self {
        let x = n as f64;
        if x as i128 == n as i128 {
            Self::point(x)
        } else {
            Self::new(x.next_down(), x.next_up())
        }
    }

    pub fn from_u64(n: u64) -> Self {
        let x = n as f64;
        if x as u128 == n as u128 {
            Self::point(x)
        } else {
            Self::new(x.next_down(), x.next_up())
        }
    }

    /// Encloses `p / q`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::from_int(p) / Self::from_int(q)
    }

    /// `value ± radius`, used for externally supplied decimal data.
    pub fn around(value: f64, radius: f64) -> Self {
        let r = radius.abs();
        Self::new(sub_down(value, r), add_up(value, r))
    }

    /// `[-B, B]` where `B` is the upper endpoint of `bound`.
    pub fn symmetric(bound: Enclosure) -> Self {
        let b = bound.hi.max(0.0);
        Self::new(-b, b)
    }

    pub fn symmetric_f64(b: f64) -> Self {
        let b = b.abs();
        Self::new(-b, b)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_sign_negative() == self.hi.is_sign_negative() {
            self.lo + (self.hi - self.lo) / 2.0
        } else {
            (self.lo + self.hi) / 2.0
        }
    }

    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Upper bound on the distance from the midpoint to either endpoint.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    /// Upper bound on `|x|` over the enclosure.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on `|x|` over the enclosure.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        other.encloses(self)
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        Self::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    /// The point enclosure of the upper endpoint.
    pub fn upper(&self) -> Enclosure {
        Self::point(self.hi)
    }

    pub fn lower(&self) -> Enclosure {
        Self::point(self.lo)
    }

    pub fn abs(&self) -> Enclosure {
        Enclosure { lo: self.mig(), hi: self.mag() }
    }

    pub fn sqr(&self) -> Enclosure {
        let a = self.mig();
        let b = self.mag();
        Enclosure { lo: mul_down(a, a), hi: mul_up(b, b) }
    }

    pub fn recip(&self) -> Enclosure {
        assert!(!self.contains(0.0), "reciprocal of an enclosure containing zero");
        Enclosure { lo: div_down(1.0, self.hi), hi: div_up(1.0, self.lo) }
    }

    pub fn sqrt(&self) -> Enclosure {
        assert!(self.hi >= 0.0, "sqrt of a negative enclosure");
        Enclosure { lo: sqrt_down(self.lo.max(0.0)), hi: sqrt_up(self.hi) }
    }

    pub fn exp(&self) -> Enclosure {
        let lo = libm_down(self.lo.exp()).max(0.0);
        let hi = libm_up(self.hi.exp());
        assert!(hi.is_finite(), "exp overflow");
        Enclosure { lo, hi }
    }

    pub fn ln(&self) -> Enclosure {
        assert!(self.lo > 0.0, "ln of a non-positive enclosure");
        Enclosure { lo: libm_down(self.lo.ln()), hi: libm_up(self.hi.ln()) }
    }

    /// Integer power by repeated squaring on enclosures.
    pub fn powi(&self, mut e: u32) -> Enclosure {
        let mut base = *self;
        let mut acc = Enclosure::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    /// `cos` over the enclosure, from the midpoint value and the Lipschitz
    /// bound `|cos x - cos y| <= |x - y|`.
    pub fn cos(&self) -> Enclosure {
        Self::lipschitz_trig(self.mid().cos(), self.rad())
    }

    pub fn sin(&self) -> Enclosure {
        Self::lipschitz_trig(self.mid().sin(), self.rad())
    }

    fn lipschitz_trig(v: f64, rad: f64) -> Enclosure {
        // Absolute libm slack: a couple of ulps of a value bounded by one.
        let slack = add_up(rad, 4.0 * f64::EPSILON);
        Enclosure { lo: sub_down(v, slack).max(-1.0), hi: add_up(v, slack).min(1.0) }
    }

    /// Scales by an exactly representable power of two.
    pub fn scale_pow2(&self, k: i32) -> Enclosure {
        let s = 2f64.powi(k);
        Enclosure { lo: mul_down(self.lo, s), hi: mul_up(self.hi, s) }
    }

    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn min(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: Enclosure) -> Enclosure {
        Enclosure { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: Enclosure) -> Enclosure {
        Enclosure { lo: sub_down(self.lo, rhs.hi), hi: sub_up(self.hi, rhs.lo) }
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: Enclosure) -> Enclosure {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        if a >= 0.0 && c >= 0.0 {
            return Enclosure { lo: mul_down(a, c), hi: mul_up(b, d) };
        }
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Enclosure { lo, hi }
    }
}

impl Div for Enclosure {
    type Output = Enclosure;
    fn div(self, rhs: Enclosure) -> Enclosure {
        assert!(!rhs.contains(0.0), "division by an enclosure containing zero");
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_down(a, c).min(div_down(a, d)).min(div_down(b, c)).min(div_down(b, d));
        let hi = div_up(a, c).max(div_up(a, d)).max(div_up(b, c)).max(div_up(b, d));
        Enclosure { lo, hi }
    }
}

impl Mul<f64> for Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: f64) -> Enclosure {
        self * Enclosure::point(rhs)
    }
}

impl std::iter::Sum for Enclosure {
    fn sum<I: Iterator<Item = Enclosure>>(iter: I) -> Enclosure {
        iter.fold(Enclosure::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_times_three_contains_one() {
        let third = Enclosure::ratio(1, 3);
        assert!(third.width() > 0.0);
        assert!((third * Enclosure::from_int(3)).contains(1.0));
    }

    #[test]
    fn mixed_sign_products() {
        let a = Enclosure::new(-2.0, 3.0);
        let b = Enclosure::new(-1.0, 4.0);
        assert_eq!(a * b, Enclosure::new(-8.0, 12.0));
    }

    #[test]
    fn symmetric_uses_upper_endpoint() {
        let e = Enclosure::symmetric(Enclosure::new(0.5, 0.75));
        assert_eq!(e, Enclosure::new(-0.75, 0.75));
    }

    #[test]
    fn transcendental_containment() {
        let one = Enclosure::ONE;
        assert!(one.exp().contains(std::f64::consts::E));
        assert!(Enclosure::from_int(2).ln().contains(std::f64::consts::LN_2));
        assert!(Enclosure::ZERO.cos().contains(1.0));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Enclosure::ratio(7, 5);
        let p = x.powi(5);
        let q = x * x * x * x * x;
        assert!(p.intersects(&q));
        assert!(p.contains(5.37824));
    }

    #[test]
    #[should_panic]
    fn reversed_endpoints_panic() {
        let _ = Enclosure::new(1.0, 0.0);
    }
}
