//! Certified `E1`, `J1` and `ζ(3/2)²` in binary64 enclosure arithmetic.

use std::sync::OnceLock;

use super::{Dyadic, Enclosure};
use crate::error::{Error, Result};

fn euler_gamma() -> Enclosure {
    const G: f64 = 0.577_215_664_901_532_9;
    Enclosure::new(G.next_down(), G.next_up())
}

fn pi() -> Enclosure {
    Enclosure::new(std::f64::consts::PI, std::f64::consts::PI.next_up())
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn e1(x: f64) -> Result<Enclosure> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("E1 needs a positive finite argument, got {x}")));
    }
    if x <= 6.0 {
        Ok(e1_series(x))
    } else if x <= 700.0 {
        Ok(e1_continued_fraction(x))
    } else {
        Ok(Enclosure::new(0.0, f64::MIN_POSITIVE))
    }
}

// -γ - ln x + Σ (-1)^{n+1} x^n / (n n!)
fn e1_series(x: f64) -> Enclosure {
    let xe = Enclosure::point(x);
    let mut power = Enclosure::ONE;
    let mut sum = Enclosure::ZERO;
    let mut n: u32 = 0;
    loop {
        n += 1;
        power = power * xe / Enclosure::from_u64(n as u64);
        let term = power / Enclosure::from_u64(n as u64);
        // Past n > x the terms decrease, so the first omitted one bounds the rest.
        if n as f64 > x + 1.0 && term.hi() < 1e-19 {
            sum = sum + Enclosure::symmetric(term);
            break;
        }
        sum = if n % 2 == 1 { sum + term } else { sum - term };
    }
    sum - euler_gamma() - xe.ln()
}

// e^x E1(x) = 1/(x+ 1/(1+ 1/(x+ 2/(1+ 2/(x+ ...))))). Successive
// approximants of this Stieltjes fraction bracket the value.
fn e1_continued_fraction(x: f64) -> Enclosure {
    let xe = Enclosure::point(x);
    let approximant = |depth: u32, stop_after_x: bool| -> Enclosure {
        // u_k = k/(1 + v_k), v_k = k/(x + u_{k+1}); F = 1/(x + u_1).
        let mut u;
        let mut v;
        let mut k = depth;
        if stop_after_x {
            v = Enclosure::ZERO;
        } else {
            v = Enclosure::from_u64(k as u64) / xe;
        }
        loop {
            u = Enclosure::from_u64(k as u64) / (Enclosure::ONE + v);
            k -= 1;
            if k == 0 {
                break;
            }
            v = Enclosure::from_u64(k as u64) / (xe + u);
        }
        Enclosure::ONE / (xe + u)
    };
    let mut depth = 8;
    loop {
        let a = approximant(depth, true);
        let b = approximant(depth, false);
        let hull = a.hull(&b);
        if hull.width() <= 1e-16 * hull.lo() || depth >= 4096 {
            return hull * Enclosure::point(-x).exp();
        }
        depth *= 2;
    }
}

/// Bessel function `J1(x)`. The result always lies within `[-|x|/2, |x|/2]`.
pub fn bessel_j1(x: f64) -> Enclosure {
    assert!(x.is_finite(), "J1 of a non-finite argument");
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x == 0.0 {
        return Enclosure::ZERO;
    }
    let raw = if x <= 8.0 {
        j1_series(x)
    } else if x < 25.0 {
        Dyadic::from_f64(x).bessel_j1().to_enclosure()
    } else {
        j1_hankel(x)
    };
    let half = x / 2.0;
    let cap = Enclosure::new(-half, half);
    raw.intersect(&cap).expect("J1 enclosure disjoint from [-x/2, x/2]")
}

fn j1_series(x: f64) -> Enclosure {
    let half = Enclosure::point(x) * Enclosure::point(0.5);
    let q = half.sqr();
    let mut term = half;
    let mut sum = term;
    let mut k: u64 = 0;
    loop {
        k += 1;
        term = -(term * q) / Enclosure::from_u64(k * (k + 1));
        let decreasing = q.hi() < ((k + 1) * (k + 2)) as f64;
        if decreasing && term.mag() < 1e-19 {
            return sum + Enclosure::symmetric(term.abs());
        }
        sum = sum + term;
    }
}

// Hankel expansion with the first-neglected-term remainder, valid for ν = 1
// once at least one term of each series is kept.
fn j1_hankel(x: f64) -> Enclosure {
    let xe = Enclosure::point(x);
    let mut b = Enclosure::ONE; // a_k(1) / x^k
    let mut p = Enclosure::ZERO;
    let mut q = Enclosure::ZERO;
    let mut k: u64 = 0;
    loop {
        // Add b_k into P (k even) or Q (k odd) with sign (-1)^{floor(k/2)}.
        let signed = if (k / 2) % 2 == 0 { b } else { -b };
        let is_p = k % 2 == 0;
        if k >= 2 && b.mag() < 1e-20 {
            // b_k and b_{k+1} are the first neglected terms of the two series.
            let next = b * Enclosure::from_int(4 - (2 * k as i64 + 1).pow(2))
                / (Enclosure::from_u64(8 * (k + 1)) * xe);
            let (rp, rq) = if is_p { (b, next) } else { (next, b) };
            p = p + Enclosure::symmetric(rp.abs());
            q = q + Enclosure::symmetric(rq.abs());
            break;
        }
        if is_p {
            p = p + signed;
        } else {
            q = q + signed;
        }
        k += 1;
        assert!(k < (4.0 * x) as u64 + 8, "Hankel expansion did not reach tolerance");
        b = b * Enclosure::from_int(4 - (2 * k as i64 - 1).pow(2))
            / (Enclosure::from_u64(8 * k) * xe);
    }
    let chi = xe - pi() * Enclosure::point(0.75);
    let pref = (Enclosure::point(2.0) / (pi() * xe)).sqrt();
    pref * (p * chi.cos() - q * chi.sin())
}

/// `ζ(3/2)²`, the value of `Σ_{c≥1} τ(c) c^{-3/2}`.
pub fn const_zeta32_squared() -> Enclosure {
    static CELL: OnceLock<Enclosure> = OnceLock::new();
    *CELL.get_or_init(|| {
        const N: u64 = 20_000;
        let mut sum = Enclosure::ZERO;
        for n in (1..N).rev() {
            let ne = Enclosure::from_u64(n);
            sum = sum + (ne * ne.sqrt()).recip();
        }
        // Convexity of t^{-3/2}: trapezoid below, midpoint above.
        let ne = Enclosure::from_u64(N);
        let lower = Enclosure::point(2.0) / ne.sqrt() + (ne * ne.sqrt()).recip() * Enclosure::point(0.5);
        let upper = Enclosure::point(2.0) / (ne - Enclosure::point(0.5)).sqrt();
        let tail = Enclosure::new(lower.lo(), upper.hi());
        (sum + tail).sqr()
    })
}
