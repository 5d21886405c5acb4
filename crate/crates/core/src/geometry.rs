//! Genus gating for `X0+(N)` and `Xns+(N)`, class numbers, and the explicit
//! bound on the number of rational points.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::rigor::Enclosure;

/// Number of reduced primitive forms `ax² + bxy + cy²` of discriminant `d`.
pub fn class_number(d: i64) -> Result<u64> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::Parameter(format!("{d} is not a negative discriminant")));
    }
    let n = -d;
    let mut h = 0;
    // Reduced: |b| ≤ a ≤ c, hence 3a² ≤ |d|.
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            let num = b * b + n;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    Ok(h)
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
fn legendre(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let mut r = 1u128;
    let mut base = a as u128;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    if r == 1 { 1 } else { -1 }
}

/// Genus of `X0(p)` from `1 + μ/12 − ν2/4 − ν3/3 − ν∞/2`.
pub fn genus_x0(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Composite(p));
    }
    let (nu2, nu3) = match p {
        2 => (1, 0),
        3 => (0, 1),
        _ => (1 + legendre(-1, p), 1 + legendre(-3, p)),
    };
    // Two cusps, so 12g = 12 + (p + 1) − 3ν2 − 4ν3 − 12.
    let twelve_g = p as i64 + 1 - 3 * nu2 - 4 * nu3;
    debug_assert_eq!(twelve_g % 12, 0);
    Ok((twelve_g / 12) as u64)
}

/// Genus of `X0+(p) = X0(p)/w_p`.
///
/// Riemann–Hurwitz for the double cover gives `g+ = (g + 1)/2 − ν/4` with
/// `ν = h(−4p) + h(−p)` fixed points when `p ≡ 3 mod 4` and `ν = h(−4p)`
/// otherwise, `h` counting primitive forms.
pub fn genus_x0plus(p: u64) -> Result<u64> {
    let g = genus_x0(p)?;
    if g == 0 {
        return Ok(0);
    }
    let n = p as i64;
    let mut nu = class_number(-4 * n)?;
    if p % 4 == 3 {
        nu += class_number(-n)?;
    }
    let four_g_plus = 2 * (g + 1) - nu;
    debug_assert_eq!(four_g_plus % 4, 0);
    Ok(four_g_plus / 4)
}

/// Genus of `Xns+(p)`, equal to `dim S_2(Γ0(p²))^{+,new}` by Chen's isogeny.
pub fn genus_xnsplus(p: u64, dimensions: &BTreeMap<u64, u64>) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Composite(p));
    }
    dimensions
        .get(&p)
        .copied()
        .ok_or_else(|| Error::InsufficientData(format!("no dimension of S_2(Γ0({p}²))^(+,new) in the table")))
}

/// `κ_p = 1 + (p − 1)/((p − 2) log p)`.
pub fn kappa(p: u64) -> Result<Enclosure> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Parameter(format!("κ_p needs a prime p ≥ 3, got {p}")));
    }
    let pe = Enclosure::from_u64(p);
    Ok(Enclosure::ONE + (pe - Enclosure::ONE) / ((pe - Enclosure::from_int(2)) * pe.ln()))
}

/// `16g³ + 15g² − 16g + 10`.
pub fn genus_polynomial(g: u64) -> u64 {
    16 * g * g * g + 15 * g * g + 10 - 16 * g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointBoundInput {
    /// A prime of good reduction, at least 3.
    pub p: u64,
    pub genus: u64,
    /// `#X(F_p)`.
    pub fp_count: u64,
    /// `∏ n_v`.
    pub nv_product: u64,
}

/// Largest integer strictly below `κ_p (∏ n_v) #X(F_p) (16g³ + 15g² − 16g + 10)`.
pub fn point_count_bound(input: &PointBoundInput) -> Result<u64> {
    if input.genus < 2 {
        return Err(Error::Parameter(format!("genus {} is below 2", input.genus)));
    }
    if input.nv_product == 0 {
        return Err(Error::Parameter("∏ n_v must be at least 1".into()));
    }
    let k = kappa(input.p)?;
    let rest = input
        .nv_product
        .checked_mul(input.fp_count)
        .and_then(|x| x.checked_mul(genus_polynomial(input.genus)))
        .filter(|&x| x < 1 << 53)
        .ok_or_else(|| Error::Parameter("point bound overflows".into()))?;
    let b = (k * Enclosure::from_u64(rest)).hi();
    Ok((b.ceil() as u64).saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_class_numbers() {
        assert_eq!(class_number(-3).unwrap(), 1);
        assert_eq!(class_number(-4).unwrap(), 1);
        assert_eq!(class_number(-23).unwrap(), 3);
        assert_eq!(class_number(-268).unwrap(), 3);
        assert!(class_number(-5).is_err());
        assert!(class_number(4).is_err());
    }

    #[test]
    fn x0_genera() {
        assert_eq!(genus_x0(11).unwrap(), 1);
        assert_eq!(genus_x0(23).unwrap(), 2);
        assert_eq!(genus_x0(67).unwrap(), 5);
        assert_eq!(genus_x0plus(23).unwrap(), 0);
        assert_eq!(genus_x0plus(67).unwrap(), 2);
    }

    #[test]
    fn point_bound_example() {
        assert_eq!(genus_polynomial(2), 166);
        let input = PointBoundInput { p: 5, genus: 2, fp_count: 8, nv_product: 1 };
        assert_eq!(point_count_bound(&input).unwrap(), 2428);
        assert!(point_count_bound(&PointBoundInput { nv_product: 0, ..input }).is_err());
        assert!(kappa(2).is_err());
    }
}
