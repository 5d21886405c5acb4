//! Arbitrary-precision fixed-point intervals.
//!
//! A [`Dyadic`] holds two big integers `lo, hi` standing for `lo / 2^PREC`
//! and `hi / 2^PREC`. Additions are exact; products and quotients are
//! rounded outward onto the `2^-PREC` grid. Transcendental functions are
//! series with explicit remainder bounds, so nothing depends on the platform
//! libm. This is the arithmetic of the audit mode and of the mid-range Bessel
//! evaluation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Enclosure;

/// Fractional bits of the fixed-point grid.
pub const PREC: u32 = 320;

#[derive(Clone, PartialEq, Eq)]
pub struct Dyadic {
    lo: BigInt,
    hi: BigInt,
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo_f64(), self.hi_f64())
    }
}

fn floor_shr(n: &BigInt, k: u32) -> BigInt {
    n.div_floor(&(BigInt::one() << k))
}

fn ceil_shr(n: &BigInt, k: u32) -> BigInt {
    -((-n).div_floor(&(BigInt::one() << k)))
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// Exact `f64` value of `n * 2^-PREC` rounded toward `-inf` or `+inf`.
fn scaled_to_f64(n: &BigInt, up: bool) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let bits = n.bits() as i64;
    let shift = (bits - 53).max(0);
    let q = if up { ceil_shr(n, shift as u32) } else { floor_shr(n, shift as u32) };
    // |q| <= 2^53 so the conversion is exact.
    let m = q.to_i64().expect("mantissa fits in i64") as f64;
    let e = shift - PREC as i64;
    let v = m * 2f64.powi(e as i32);
    if v.is_finite() {
        v
    } else if up {
        f64::MAX
    } else {
        -f64::MAX
    }
}

/// Exact scaled representation of a binary64 value, rounded outward when the
/// value has bits below the grid.
fn f64_to_scaled(x: f64, up: bool) -> BigInt {
    assert!(x.is_finite());
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let m = BigInt::from(mant) * sign;
    let shift = e + PREC as i64;
    if shift >= 0 {
        m << shift as u32
    } else if up {
        ceil_shr(&m, (-shift) as u32)
    } else {
        floor_shr(&m, (-shift) as u32)
    }
}

impl Dyadic {
    fn raw(lo: BigInt, hi: BigInt) -> Self {
        debug_assert!(lo <= hi);
        Dyadic { lo, hi }
    }

    pub fn zero() -> Self {
        Self::raw(BigInt::zero(), BigInt::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        let v = BigInt::from(n) << PREC;
        Self::raw(v.clone(), v)
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        let v = n << PREC;
        Self::raw(v.clone(), v)
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0);
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let num = BigInt::from(p) << PREC;
        let den = BigInt::from(q);
        Self::raw(num.div_floor(&den), ceil_div(&num, &den))
    }

    pub fn from_f64(x: f64) -> Self {
        Self::raw(f64_to_scaled(x, false), f64_to_scaled(x, true))
    }

    pub fn from_enclosure(e: &Enclosure) -> Self {
        Self::raw(f64_to_scaled(e.lo(), false), f64_to_scaled(e.hi(), true))
    }

    /// Parses a decimal literal `d.ddd` into `[floor, ceil]` of its value.
    pub fn from_decimal(s: &str) -> Self {
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        let digits: String = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().expect("decimal literal");
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        let scaled = num << PREC;
        Self::raw(scaled.div_floor(&den), ceil_div(&scaled, &den))
    }

    /// `[floor(s) - 10^-digits, ceil(s) + 10^-digits]` for a literal known to
    /// `digits` decimal places.
    pub fn from_truncated_decimal(s: &str, digits: u32) -> Self {
        let v = Self::from_decimal(s);
        let ulp = Self::raw(BigInt::zero(), ceil_div(&(BigInt::one() << PREC), &BigInt::from(10u32).pow(digits)));
        v + Self::symmetric(&ulp)
    }

    pub fn symmetric(bound: &Dyadic) -> Self {
        let b = bound.hi.clone().max(BigInt::zero());
        Self::raw(-b.clone(), b)
    }

    pub fn lo_f64(&self) -> f64 {
        scaled_to_f64(&self.lo, false)
    }

    pub fn hi_f64(&self) -> f64 {
        scaled_to_f64(&self.hi, true)
    }

    pub fn to_enclosure(&self) -> Enclosure {
        Enclosure::new(self.lo_f64(), self.hi_f64())
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let lo = f64_to_scaled(x, false);
        let hi = f64_to_scaled(x, true);
        self.lo <= lo && hi <= self.hi
    }

    /// Width as a binary64 upper bound.
    pub fn width_f64(&self) -> f64 {
        scaled_to_f64(&(&self.hi - &self.lo), true)
    }

    pub fn upper(&self) -> Dyadic {
        Self::raw(self.hi.clone(), self.hi.clone())
    }

    pub fn lower(&self) -> Dyadic {
        Self::raw(self.lo.clone(), self.lo.clone())
    }

    pub fn hull(&self, other: &Dyadic) -> Dyadic {
        Self::raw(self.lo.clone().min(other.lo.clone()), self.hi.clone().max(other.hi.clone()))
    }

    pub fn mag(&self) -> Dyadic {
        let m = self.lo.abs().max(self.hi.abs());
        Self::raw(m.clone(), m)
    }

    fn mul_scaled(a: &BigInt, b: &BigInt, up: bool) -> BigInt {
        let p = a * b;
        if up {
            ceil_shr(&p, PREC)
        } else {
            floor_shr(&p, PREC)
        }
    }

    fn div_scaled(a: &BigInt, b: &BigInt, up: bool) -> BigInt {
        let num = a << PREC;
        if up {
            ceil_div(&num, b)
        } else {
            num.div_floor(b)
        }
    }

    pub fn sqr(&self) -> Dyadic {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = self.lo.abs().max(self.hi.abs());
            Self::raw(BigInt::zero(), Self::mul_scaled(&m, &m, true))
        } else {
            let (a, b) = if self.lo.is_negative() {
                (self.hi.abs(), self.lo.abs())
            } else {
                (self.lo.clone(), self.hi.clone())
            };
            Self::raw(Self::mul_scaled(&a, &a, false), Self::mul_scaled(&b, &b, true))
        }
    }

    pub fn sqrt(&self) -> Dyadic {
        assert!(!self.hi.is_negative(), "sqrt of a negative interval");
        let lo = self.lo.clone().max(BigInt::zero()) << PREC;
        let hi = &self.hi << PREC;
        let lo_root = lo.sqrt();
        let mut hi_root = hi.sqrt();
        if &hi_root * &hi_root < hi {
            hi_root += 1;
        }
        Self::raw(lo_root, hi_root)
    }

    /// Integer part of the midpoint.
    pub fn floor_mid(&self) -> BigInt {
        floor_shr(&(&self.lo + &self.hi), PREC + 1)
    }

    pub fn floor_lo(&self) -> BigInt {
        floor_shr(&self.lo, PREC)
    }

    pub fn ceil_hi(&self) -> BigInt {
        ceil_shr(&self.hi, PREC)
    }

    /// Multiplies by `2^k` (k may be negative), rounding outward.
    pub fn scale_pow2(&self, k: i32) -> Dyadic {
        if k >= 0 {
            Self::raw(&self.lo << k as u32, &self.hi << k as u32)
        } else {
            let s = (-k) as u32;
            Self::raw(floor_shr(&self.lo, s), ceil_shr(&self.hi, s))
        }
    }

    pub fn pi() -> Dyadic {
        static PI: OnceLock<Dyadic> = OnceLock::new();
        PI.get_or_init(|| {
            // Machin: pi = 16 atan(1/5) - 4 atan(1/239).
            let a = atan_inv(5);
            let b = atan_inv(239);
            a.scale_pow2(4) - b.scale_pow2(2)
        })
        .clone()
    }

    pub fn ln2() -> Dyadic {
        static LN2: OnceLock<Dyadic> = OnceLock::new();
        LN2.get_or_init(|| atanh_series(&Dyadic::ratio(1, 3)).scale_pow2(1)).clone()
    }

    pub fn euler_gamma() -> Dyadic {
        static GAMMA: OnceLock<Dyadic> = OnceLock::new();
        GAMMA
            .get_or_init(|| {
                Dyadic::from_truncated_decimal(
                    "0.577215664901532860606512090082402431042159335939923598805767234884867726777664670936947063",
                    90,
                )
            })
            .clone()
    }

    pub fn exp(&self) -> Dyadic {
        let lo = exp_point(&self.lower());
        let hi = exp_point(&self.upper());
        Self::raw(lo.lo, hi.hi)
    }

    pub fn ln(&self) -> Dyadic {
        assert!(self.lo.is_positive(), "ln of a non-positive interval");
        let lo = ln_point(&self.lower());
        let hi = ln_point(&self.upper());
        Self::raw(lo.lo, hi.hi)
    }

    /// Exponential integral `E1` on a positive interval. Uses the convergent
    /// power series, valid for every argument; cancellation is absorbed by
    /// the working precision for arguments up to a few dozen.
    pub fn e1(&self) -> Dyadic {
        assert!(self.lo.is_positive(), "E1 of a non-positive interval");
        assert!(self.hi_f64() <= 80.0, "E1 series used beyond its precision range");
        // E1 is decreasing.
        let at_hi = e1_point(&self.upper());
        let at_lo = e1_point(&self.lower());
        Self::raw(at_hi.lo, at_lo.hi)
    }

    /// Bessel `J1` from its power series with an alternating-remainder bound.
    pub fn bessel_j1(&self) -> Dyadic {
        let half = self.scale_pow2(-1);
        let q = half.sqr();
        let mut term = half.clone();
        let mut sum = term.clone();
        let mut k: i64 = 0;
        let tol = Dyadic::raw(BigInt::zero(), BigInt::one() << 8);
        loop {
            k += 1;
            term = -(term * q.clone()) / Dyadic::from_int(k * (k + 1));
            // Terms decrease in magnitude once (x/2)^2 < k (k+1).
            let decreasing = q.hi_f64() < ((k + 1) * (k + 2)) as f64;
            if decreasing && mag_le(&term, &tol) {
                sum = sum + Dyadic::symmetric(&term.mag());
                break;
            }
            sum = sum + term.clone();
            assert!(k < 10_000, "J1 series did not converge");
        }
        sum
    }
}

fn mag_le(a: &Dyadic, b: &Dyadic) -> bool {
    a.lo.abs().max(a.hi.abs()) <= b.hi
}

fn atan_inv(q: i64) -> Dyadic {
    // atan(1/q) = sum (-1)^k / ((2k+1) q^(2k+1)), alternating and decreasing.
    let x = Dyadic::ratio(1, q);
    let x2 = x.sqr();
    let mut power = x.clone();
    let mut sum = Dyadic::zero();
    let tol = Dyadic::raw(BigInt::zero(), BigInt::one() << 4);
    let mut k: i64 = 0;
    loop {
        let term = power.clone() / Dyadic::from_int(2 * k + 1);
        if mag_le(&term, &tol) {
            return sum + Dyadic::symmetric(&term.mag());
        }
        sum = if k % 2 == 0 { sum + term } else { sum - term };
        power = power * x2.clone();
        k += 1;
    }
}

/// `atanh(z) = z + z^3/3 + ...` for `|z| <= 1/2`, with geometric remainder.
fn atanh_series(z: &Dyadic) -> Dyadic {
    let z2 = z.sqr();
    let mut power = z.clone();
    let mut sum = Dyadic::zero();
    let tol = Dyadic::raw(BigInt::zero(), BigInt::one() << 4);
    let mut k: i64 = 0;
    loop {
        let term = power.clone() / Dyadic::from_int(2 * k + 1);
        if mag_le(&term, &tol) {
            // Remaining terms are bounded by |term| / (1 - z^2) <= 4/3 |term|.
            let rem = term.mag() * Dyadic::ratio(4, 3);
            return sum + Dyadic::symmetric(&rem);
        }
        sum = sum + term;
        power = power * z2.clone();
        k += 1;
    }
}

fn exp_point(x: &Dyadic) -> Dyadic {
    // Reduce to |y| <= 2^-8, Taylor-sum, then square back.
    let mag = x.lo.abs().max(x.hi.abs());
    let mut k: u32 = 0;
    while (&mag >> k) > (BigInt::one() << (PREC - 8)) {
        k += 1;
    }
    let y = x.scale_pow2(-(k as i32));
    let mut term = Dyadic::one();
    let mut sum = Dyadic::one();
    let tol = Dyadic::raw(BigInt::zero(), BigInt::one() << 4);
    let mut n: i64 = 0;
    loop {
        n += 1;
        term = term * y.clone() / Dyadic::from_int(n);
        if mag_le(&term, &tol) {
            // |y| <= 1/2: the tail after this term is at most twice its size.
            let rem = term.mag().scale_pow2(1);
            sum = sum + Dyadic::symmetric(&rem);
            break;
        }
        sum = sum + term.clone();
    }
    for _ in 0..k {
        sum = sum.sqr();
    }
    sum
}

fn ln_point(x: &Dyadic) -> Dyadic {
    // x = 2^e r with r in [1/2, 1); ln r = 2 atanh((r-1)/(r+1)).
    let v = x.lo.clone();
    assert!(v.is_positive());
    let e = v.bits() as i64 - PREC as i64;
    let r = x.scale_pow2(-(e as i32));
    let z = (r.clone() - Dyadic::one()) / (r + Dyadic::one());
    let ln_r = atanh_series(&z).scale_pow2(1);
    ln_r + Dyadic::ln2() * Dyadic::from_int(e)
}

fn e1_point(x: &Dyadic) -> Dyadic {
    // E1(x) = -gamma - ln x + sum_{n>=1} (-1)^(n+1) x^n / (n n!).
    let mut power = Dyadic::one();
    let mut sum = Dyadic::zero();
    let tol = Dyadic::raw(BigInt::zero(), BigInt::one() << 4);
    let xf = x.hi_f64();
    let mut n: i64 = 0;
    loop {
        n += 1;
        power = power * x.clone() / Dyadic::from_int(n);
        let term = power.clone() / Dyadic::from_int(n);
        if (n as f64) > xf + 1.0 && mag_le(&term, &tol) {
            sum = sum + Dyadic::symmetric(&term.mag());
            break;
        }
        sum = if n % 2 == 1 { sum + term } else { sum - term };
    }
    sum - Dyadic::euler_gamma() - x.ln()
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        Dyadic::raw(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        Dyadic::raw(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic::raw(-self.hi, -self.lo)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        let cands = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = cands.iter().map(|(a, b)| Dyadic::mul_scaled(a, b, false)).min().unwrap();
        let hi = cands.iter().map(|(a, b)| Dyadic::mul_scaled(a, b, true)).max().unwrap();
        Dyadic::raw(lo, hi)
    }
}

impl Div for Dyadic {
    type Output = Dyadic;
    fn div(self, rhs: Dyadic) -> Dyadic {
        assert!(
            rhs.lo.sign() == rhs.hi.sign() && rhs.lo.sign() != Sign::NoSign,
            "division by an interval containing zero"
        );
        let cands = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = cands.iter().map(|(a, b)| Dyadic::div_scaled(a, b, false)).min().unwrap();
        let hi = cands.iter().map(|(a, b)| Dyadic::div_scaled(a, b, true)).max().unwrap();
        Dyadic::raw(lo, hi)
    }
}
