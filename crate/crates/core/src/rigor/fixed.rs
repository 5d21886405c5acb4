//! Exact fixed-point accumulation of enclosure endpoints.
//!
//! Each endpoint is rounded outward onto the grid `2^-FRAC` once, after
//! which additions are exact integer operations. The total therefore does
//! not depend on summation order or on how a sum is split across workers.

use super::Enclosure;

pub const FRAC: i32 = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FixedSum {
    lo: i128,
    hi: i128,
}

fn to_grid(x: f64, up: bool) -> i128 {
    let y = x * 2f64.powi(FRAC);
    assert!(y.abs() < 2f64.powi(120), "value {x} out of fixed-point range");
    let r = if up { y.ceil() } else { y.floor() };
    r as i128
}

fn from_grid(n: i128, up: bool) -> f64 {
    let mut v = n as f64;
    if up && (v as i128) < n {
        v = v.next_up();
    }
    if !up && (v as i128) > n {
        v = v.next_down();
    }
    v * 2f64.powi(-FRAC)
}

impl FixedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, e: Enclosure) {
        self.lo = self.lo.checked_add(to_grid(e.lo(), false)).expect("fixed-point overflow");
        self.hi = self.hi.checked_add(to_grid(e.hi(), true)).expect("fixed-point overflow");
    }

    /// Adds `[-b, b]` where `b` is the upper endpoint of `bound`.
    pub fn add_symmetric(&mut self, bound: Enclosure) {
        self.add(Enclosure::symmetric(bound));
    }

    pub fn merge(&mut self, other: &FixedSum) {
        self.lo = self.lo.checked_add(other.lo).expect("fixed-point overflow");
        self.hi = self.hi.checked_add(other.hi).expect("fixed-point overflow");
    }

    pub fn to_enclosure(&self) -> Enclosure {
        Enclosure::new(from_grid(self.lo, false), from_grid(self.hi, true))
    }
}

impl std::iter::Sum<Enclosure> for FixedSum {
    fn sum<I: Iterator<Item = Enclosure>>(iter: I) -> Self {
        let mut s = FixedSum::new();
        for e in iter {
            s.add(e);
        }
        s
    }
}
