//! Directed rounding of the basic IEEE operations without touching the
//! floating-point environment.
//!
//! Each operation is evaluated in round-to-nearest and the exact residual is
//! recovered with an error-free transformation (TwoSum or FMA). The residual's
//! sign tells on which side of the rounded result the exact value lies, so the
//! result is moved by one ulp only when it has to be. Nothing here depends on
//! thread-local rounding state.

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn nudge_down(v: f64, residual: f64) -> f64 {
    if residual < 0.0 {
        v.next_down()
    } else {
        v
    }
}

#[inline]
fn nudge_up(v: f64, residual: f64) -> f64 {
    if residual > 0.0 {
        v.next_up()
    } else {
        v
    }
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    nudge_down(s, e)
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    nudge_up(s, e)
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

// The FMA residual is exact unless the product underflows; tiny products are
// widened unconditionally to stay safe in the subnormal range.
const TINY: f64 = 1e-290;

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if p.abs() < TINY && a != 0.0 && b != 0.0 {
        return p.next_down();
    }
    nudge_down(p, a.mul_add(b, -p))
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if p.abs() < TINY && a != 0.0 && b != 0.0 {
        return p.next_up();
    }
    nudge_up(p, a.mul_add(b, -p))
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    if q.abs() < TINY && a != 0.0 {
        return q.next_down();
    }
    // a - q*b is exact; the exact quotient exceeds q iff the residual has the sign of b.
    let r = (-q).mul_add(b, a);
    let residual = if b > 0.0 { r } else { -r };
    nudge_down(q, residual)
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    if q.abs() < TINY && a != 0.0 {
        return q.next_up();
    }
    let r = (-q).mul_add(b, a);
    let residual = if b > 0.0 { r } else { -r };
    nudge_up(q, residual)
}

#[inline]
pub fn sqrt_down(x: f64) -> f64 {
    let s = x.sqrt();
    nudge_down(s, (-s).mul_add(s, x)).max(0.0)
}

#[inline]
pub fn sqrt_up(x: f64) -> f64 {
    let s = x.sqrt();
    nudge_up(s, (-s).mul_add(s, x))
}

/// Ulps of slack granted to results of `exp`, `ln`, `cos` and `sin` from the
/// platform libm, which is faithful but not correctly rounded.
pub const LIBM_ULPS: u32 = 2;

#[inline]
pub fn libm_down(v: f64) -> f64 {
    let mut r = v;
    for _ in 0..LIBM_ULPS {
        r = r.next_down();
    }
    r
}

#[inline]
pub fn libm_up(v: f64) -> f64 {
    let mut r = v;
    for _ in 0..LIBM_ULPS {
        r = r.next_up();
    }
    r
}
