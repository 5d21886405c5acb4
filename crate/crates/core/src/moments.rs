//! Twisted first moments of `L'(f, 1)` and `L(f, 1)` over Fricke eigenspaces.
//!
//! The normalized moment at level `M` is
//!
//! ```text
//! <a_m, L'>_M^+ / 4π = E1(2πm/√M) − 2π√m ( Σ_{M|c} S(c)/c + Σ_{(d,M)=1} T(d)/(d√M) )
//! ```
//!
//! with `S(c)` and `T(d)` the Kloosterman–Bessel sums of [`scal_numeric`] and
//! [`tcal_numeric`]. Closed-form bounds come in two strengths: the first
//! estimate uses the Weil bound everywhere, the improved one replaces it by a
//! Pólya–Vinogradov bound for the `d`-sum at small `d`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, divisor_count, f_weight, g_weight_in, KloostermanRow};
use crate::error::{Error, Result};
use crate::rigor::{bessel_j1, Enclosure, FixedSum, Rigorous};

/// Smallest level for which the improved estimates are valid.
pub const IMPROVED_FLOOR: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn epsilon(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// `L'(f, 1)` (derivative) or `L(f, 1)` (value).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    Derivative,
    Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Full,
    New,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    First,
    Improved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    BoundFirst,
    BoundImproved,
    Numeric,
}

impl From<BoundMode> for EstimateMode {
    fn from(m: BoundMode) -> Self {
        match m {
            BoundMode::First => EstimateMode::BoundFirst,
            BoundMode::Improved => EstimateMode::BoundImproved,
        }
    }
}

/// Which moment to estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub m: u64,
    /// The level `M`, equal to `N` or `N²`.
    pub level: u64,
    /// The prime `N`.
    pub prime: u64,
    pub sign: Sign,
    pub weight: Weight,
    pub space: Space,
}

impl MomentQuery {
    /// Validates `M = N` or `M = N²` with `N` prime and `(m, N) = 1`.
    pub fn new(m: u64, level: u64, sign: Sign, weight: Weight, space: Space) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("twist index m must be positive".into()));
        }
        let prime = if arith::is_prime(level) {
            level
        } else {
            let r = (level as f64).sqrt().round() as u64;
            if r * r == level && arith::is_prime(r) {
                r
            } else {
                return Err(Error::Parameter(format!("level {level} is neither a prime nor the square of one")));
            }
        };
        if m % prime == 0 {
            return Err(Error::Parameter(format!("m = {m} is not prime to N = {prime}")));
        }
        if space == Space::New && level == prime {
            // Prime level has no oldforms in weight 2.
            return Self::new(m, level, sign, weight, Space::Full);
        }
        Ok(MomentQuery { m, level, prime, sign, weight, space })
    }

    /// `<a_m, L'>_M^+` over the full space.
    pub fn plus(m: u64, level: u64) -> Result<Self> {
        Self::new(m, level, Sign::Plus, Weight::Derivative, Space::Full)
    }

    /// `<a_m, L>_N^-`.
    pub fn minus(m: u64, level: u64) -> Result<Self> {
        Self::new(m, level, Sign::Minus, Weight::Value, Space::Full)
    }

    /// `<a_m, L'>_{N²}^{+,new}`.
    pub fn square_new(m: u64, prime: u64) -> Result<Self> {
        Self::new(m, prime * prime, Sign::Plus, Weight::Derivative, Space::New)
    }

    fn require_supported_m(&self) -> Result<()> {
        if self.m == 1 || self.m == 2 {
            Ok(())
        } else {
            Err(Error::UnsupportedTwist(self.m))
        }
    }
}

/// An enclosure of a normalized moment with its breakdown.
///
/// `normalized ⊆ main_term + Σ corrections + [−error_radius, error_radius]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub normalized: Enclosure,
    pub main_term: Enclosure,
    pub corrections: Vec<(String, Enclosure)>,
    pub error_radius: f64,
    pub mode: EstimateMode,
}

/// A moment estimate in an arbitrary rigorous arithmetic.
#[derive(Clone, Debug)]
pub struct Parts<R> {
    pub main: R,
    pub corrections: Vec<(&'static str, R)>,
    /// Nonnegative; only its upper endpoint is used.
    pub radius: R,
}

impl<R: Rigorous> Parts<R> {
    pub fn total(&self) -> R {
        let mut t = self.main.clone();
        for (_, c) in &self.corrections {
            t = t + c.clone();
        }
        t + R::symmetric(&self.radius)
    }

    /// Everything except the main term.
    fn deviation(&self) -> R {
        let mut t = R::symmetric(&self.radius);
        for (_, c) in &self.corrections {
            t = t + c.clone();
        }
        t
    }
}

impl Parts<Enclosure> {
    fn into_estimate(self, mode: EstimateMode) -> MomentEstimate {
        MomentEstimate {
            normalized: self.total(),
            main_term: self.main,
            corrections: self.corrections.into_iter().map(|(n, c)| (n.to_string(), c)).collect(),
            error_radius: self.radius.hi(),
            mode,
        }
    }
}

fn two_pi<R: Rigorous>() -> R {
    R::pi() * R::from_int(2)
}

/// Weil-bound constants `(C_S, C_T)` with `2π√m |Σ S(c)/c| ≤ C_S/M` and
/// `2π√m |Σ T(d)/(d√M)| ≤ C_T/√M`.
fn first_constants<R: Rigorous>(m: u64) -> (R, R) {
    if m == 2 {
        (R::from_int(213), R::from_int(97))
    } else {
        let mg = R::from_u64(m) * g_weight_in::<R>(m);
        (R::from_int(86) * mg.clone(), R::from_int(43) * mg)
    }
}

/// Radii of the two Weil-bound sums: `(C_S/M, C_T/√M)`.
pub fn first_radii_in<R: Rigorous>(m: u64, level: u64) -> (R, R) {
    let (cs, ct) = first_constants::<R>(m);
    let ml = R::from_u64(level);
    (cs / ml.clone(), ct / ml.sqrt())
}

/// The symmetric enclosures of `2π√m Σ S(c)/c` and `2π√m Σ T(d)/(d√M)`.
pub fn sum_bounds_first(query: &MomentQuery) -> Result<(Enclosure, Enclosure)> {
    query.require_supported_m()?;
    let (s, t) = first_radii_in::<Enclosure>(query.m, query.level);
    Ok((Enclosure::symmetric(s), Enclosure::symmetric(t)))
}

/// `|S(c)| ≤ 2√(mM) τ(c/M) f((m,c))/√c`, refined for `m = 2`, `c` even.
pub fn scal_bound(c: u64, query: &MomentQuery) -> Result<Enclosure> {
    let mm = query.level;
    if c == 0 || c % mm != 0 {
        return Err(Error::Parameter(format!("c = {c} is not a positive multiple of M = {mm}")));
    }
    let tau = Enclosure::from_u64(divisor_count(c / mm));
    let sqrt_m_level = Enclosure::from_u64(mm).sqrt();
    let sqrt_c = Enclosure::from_u64(c).sqrt();
    let b = if query.m == 2 && c % 2 == 0 {
        (Enclosure::point(2.0).sqrt() + Enclosure::point(2.0)) * sqrt_m_level * tau / sqrt_c
    } else {
        let g = num_integer::gcd(query.m, c);
        Enclosure::point(2.0) * (Enclosure::from_u64(query.m) * Enclosure::from_u64(mm)).sqrt() * tau * f_weight(g)
            / sqrt_c
    };
    Ok(Enclosure::symmetric(b))
}

/// `|T(d)| ≤ τ(d) √m f((m,d))/√d`, refined for `m = 2`, `d` even.
pub fn tcal_bound(d: u64, query: &MomentQuery) -> Result<Enclosure> {
    if d == 0 || num_integer::gcd(d, query.level) != 1 {
        return Err(Error::Parameter(format!("d = {d} is not prime to M = {}", query.level)));
    }
    let tau = Enclosure::from_u64(divisor_count(d));
    let sqrt_d = Enclosure::from_u64(d).sqrt();
    let b = if query.m == 2 && d % 2 == 0 {
        (Enclosure::ONE + Enclosure::point(2.0).sqrt().recip()) * tau / sqrt_d
    } else {
        let g = num_integer::gcd(query.m, d);
        tau * Enclosure::from_u64(query.m).sqrt() * f_weight(g) / sqrt_d
    };
    Ok(Enclosure::symmetric(b))
}

/// `|Σ_{n=K}^{K'} S(m, nk; d)| ≤ (4d/π²)(log d + 1.5)`.
pub fn pv_partial_bound(d: u64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Parameter("the partial-sum bound needs d ≥ 2".into()));
    }
    let de = Enclosure::from_u64(d);
    let pi = <Enclosure as Rigorous>::pi();
    let b = Enclosure::point(4.0) * de / pi.sqr() * (de.ln() + Enclosure::point(1.5));
    Ok(b.hi())
}

/// Crossover `D*` between the Pólya–Vinogradov and Weil bounds for the
/// `d`-sum: the floor of the midpoint of `M / (6.25 E1(2π/√M)²)`.
pub fn cutoff_f(level: u64) -> Result<u64> {
    if level < IMPROVED_FLOOR {
        return Err(Error::Regime { what: "the improved estimates", level, floor: IMPROVED_FLOOR });
    }
    let ml = Enclosure::from_u64(level);
    let e = (two_pi::<Enclosure>() / ml.sqrt()).e1();
    let v = ml / (Enclosure::point(6.25) * e.sqr());
    Ok(v.mid().floor() as u64)
}

/// Cut `n₀ = ⌊3√M/π⌋` between the main and remainder parts of `T(d)`.
pub fn t_main_cut(level: u64) -> u64 {
    let v = Enclosure::point(3.0) * Enclosure::from_u64(level).sqrt() / <Enclosure as Rigorous>::pi();
    v.lo().floor() as u64
}

/// Checks that `t ↦ J1(4π√(mt)/(d√M)) E1(2πt/√M)/√t` is positive and
/// decreasing on `[1, n₀]` for every `d ≥ 2`. This holds while the Bessel
/// argument stays below the first zero of `J2` and of `J1`; returns the
/// largest argument reached.
pub fn monotonicity_window(m: u64, level: u64) -> Result<f64> {
    let n0 = t_main_cut(level);
    let x = Enclosure::point(4.0) * <Enclosure as Rigorous>::pi() * (Enclosure::from_u64(m * n0)).sqrt()
        / (Enclosure::point(2.0) * Enclosure::from_u64(level).sqrt());
    // j_{1,1} = 3.8317...
    if x.hi() < 3.83 {
        Ok(x.hi())
    } else {
        Err(Error::Regime { what: "the monotone window of the T_M split", level, floor: IMPROVED_FLOOR })
    }
}

/// Integer parameters of the improved estimate, computed once in binary64 so
/// that every arithmetic evaluates the same inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovedParams {
    pub cutoff: u64,
    pub n0: u64,
}

impl ImprovedParams {
    pub fn for_level(m: u64, level: u64) -> Result<Self> {
        let cutoff = cutoff_f(level)?;
        monotonicity_window(m, level)?;
        Ok(ImprovedParams { cutoff, n0: t_main_cut(level) })
    }
}

/// `∫_t^∞ E1(u) du = e^{-t} − t E1(t)`.
fn e1_integral<R: Rigorous>(t: &R) -> R {
    (-t.clone()).exp() - t.clone() * t.e1()
}

/// The certified constant `K_m` with `2π√m T(1)/√M ∈ [0.8πm, K_m]/√M`.
/// It is `2πm`, which exceeds `6.3√m` for `m = 2`.
pub fn t1_upper_constant(m: u64) -> Enclosure {
    two_pi::<Enclosure>() * Enclosure::from_u64(m)
}

/// Closed-form bound for `<a_m, L'>_M^+ / 4π`.
pub fn plus_parts<R: Rigorous>(m: u64, level: u64, mode: BoundMode, params: Option<ImprovedParams>) -> Parts<R> {
    let ml = R::from_u64(level);
    let sqrt_ml = ml.sqrt();
    let main = (two_pi::<R>() * R::from_u64(m) / sqrt_ml.clone()).e1();
    let (rs, rt) = first_radii_in::<R>(m, level);
    match mode {
        BoundMode::First => Parts { main, corrections: Vec::new(), radius: rs + rt },
        BoundMode::Improved => {
            let p = params.expect("improved mode needs its parameters");
            let mr = R::from_u64(m);
            let pi = R::pi();
            // 2π√m T(1)/√M with 0.4√m ≤ T(1) ≤ √m.
            let t1_lo = R::ratio(4, 5) * pi.clone() * mr.clone() / sqrt_ml.clone();
            let t1_hi = two_pi::<R>() * mr.clone() / sqrt_ml.clone();
            let t1 = t1_lo.lower().hull(&t1_hi.upper());

            let f = R::from_u64(p.cutoff);
            let lf = f.ln();
            let e1_first = (two_pi::<R>() / sqrt_ml.clone()).e1();
            let pv = R::from_int(8) * mr.clone() / ml.clone()
                * e1_first
                * (lf.clone() * lf.clone() + R::from_int(3) * lf.clone() + R::from_int(1));
            let weil_const = if m == 2 {
                R::from_int(8) * pi.clone() * (R::from_int(2) - R::from_int(1) / R::from_int(2).sqrt())
            } else {
                R::from_int(4) * pi.clone()
            };
            let weil = weil_const * (lf + R::from_int(4)) / (ml.clone() * f).sqrt();
            let lambda = if m == 2 { R::from_int(97) } else { R::from_int(43) };
            // One term of slack in n₀ covers the even-n sub-sum when m = 2.
            let t0 = two_pi::<R>() * R::from_u64(p.n0.saturating_sub(1)) / sqrt_ml.clone();
            let far = lambda * e1_integral(&t0) / sqrt_ml;

            Parts { main, corrections: vec![("t1_term", -t1)], radius: rs + pv + weil + far }
        }
    }
}

/// Closed-form bound for `<a_m, L>_N^- / 4π`.
pub fn minus_parts<R: Rigorous>(m: u64, level: u64) -> Parts<R> {
    let sqrt_ml = R::from_u64(level).sqrt();
    let main = (-(two_pi::<R>() * R::from_u64(m) / sqrt_ml)).exp();
    let (rs, rt) = first_radii_in::<R>(m, level);
    Parts { main, corrections: Vec::new(), radius: rs + rt }
}

/// Closed-form bound for `<a_m, L'>_{N²}^{+,new} / 4π` via the old/new
/// decomposition.
pub fn square_new_parts<R: Rigorous>(
    m: u64,
    prime: u64,
    mode: BoundMode,
    params_big: Option<ImprovedParams>,
    params_small: Option<ImprovedParams>,
) -> Parts<R> {
    let big = plus_parts::<R>(m, prime * prime, mode, params_big);
    let small_mode = if params_small.is_some() { mode } else { BoundMode::First };
    let small = plus_parts::<R>(m, prime, small_mode, params_small);
    let minus = minus_parts::<R>(m, prime);
    let nm1 = R::from_u64(prime - 1);
    let half_ln = R::from_u64(prime).ln() / R::from_int(2);

    let main = big.main.clone() - small.main.clone() / nm1.clone() - half_ln.clone() * minus.main.clone() / nm1.clone();
    let mut corrections = big.corrections.clone();
    corrections.push(("oldform_plus", -(small.deviation() / nm1.clone())));
    corrections.push(("oldform_minus", -(half_ln * minus.deviation() / nm1)));
    Parts { main, corrections, radius: big.radius }
}

fn improved_params(m: u64, level: u64, mode: BoundMode) -> Result<Option<ImprovedParams>> {
    match mode {
        BoundMode::First => Ok(None),
        BoundMode::Improved => ImprovedParams::for_level(m, level).map(Some),
    }
}

/// Closed-form enclosure of `<a_m, L'>_M^+ / 4π`.
pub fn moment_plus_bound(query: &MomentQuery, mode: BoundMode) -> Result<MomentEstimate> {
    query.require_supported_m()?;
    if query.sign != Sign::Plus || query.weight != Weight::Derivative {
        return Err(Error::Parameter("moment_plus_bound needs sign +1 and the derivative weight".into()));
    }
    if query.space == Space::New {
        return moment_square_new_bound(query.m, query.prime, mode);
    }
    let params = improved_params(query.m, query.level, mode)?;
    Ok(plus_parts::<Enclosure>(query.m, query.level, mode, params).into_estimate(mode.into()))
}

/// Closed-form enclosure of `<a_m, L>_N^- / 4π`.
pub fn moment_minus_bound(m: u64, prime: u64) -> Result<MomentEstimate> {
    let q = MomentQuery::minus(m, prime)?;
    q.require_supported_m()?;
    if q.level != q.prime {
        return Err(Error::Parameter("the minus moment is only bounded at prime level".into()));
    }
    Ok(minus_parts::<Enclosure>(m, prime).into_estimate(EstimateMode::BoundFirst))
}

/// Parameters for both levels of the new-space bound. The old-space terms at
/// level `N` use the improved estimate only when `N` itself is in range.
pub fn square_new_params(m: u64, prime: u64, mode: BoundMode) -> Result<(Option<ImprovedParams>, Option<ImprovedParams>)> {
    let big = improved_params(m, prime * prime, mode)?;
    let small = if mode == BoundMode::Improved && prime >= IMPROVED_FLOOR {
        Some(ImprovedParams::for_level(m, prime)?)
    } else {
        None
    };
    Ok((big, small))
}

/// Closed-form enclosure of `<a_m, L'>_{N²}^{+,new} / 4π`.
pub fn moment_square_new_bound(m: u64, prime: u64, mode: BoundMode) -> Result<MomentEstimate> {
    let q = MomentQuery::square_new(m, prime)?;
    q.require_supported_m()?;
    let (big, small) = square_new_params(m, prime, mode)?;
    Ok(square_new_parts::<Enclosure>(m, prime, mode, big, small).into_estimate(mode.into()))
}

// ---------------------------------------------------------------------------
// Numeric evaluation

/// Truncations of the numeric double sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    /// Largest `c` (a multiple of `M`) summed explicitly.
    pub c_max: u64,
    /// Largest `d` summed explicitly.
    pub d_max: u64,
    /// Inner sums stop once the weight falls below this value.
    pub weight_floor: f64,
}

impl TailParams {
    pub fn default_for(level: u64) -> Self {
        let d_max = match cutoff_f(level) {
            Ok(f) => 10_000u64.max(2 * f),
            Err(_) => 10_000,
        };
        TailParams { c_max: 200 * level, d_max, weight_floor: 1e-18 }
    }

    pub fn doubled(&self) -> Self {
        TailParams { c_max: 2 * self.c_max, d_max: 2 * self.d_max, weight_floor: self.weight_floor }
    }
}

/// Explicit outer terms beyond which the per-term Weil bounds are summed
/// exactly; the rest is closed analytically. Fixing it keeps refinement
/// nested.
pub const OUTER_HORIZON: u64 = 1 << 21;

/// Work budget for [`moment_numeric`] in Kloosterman summands.
pub const NUMERIC_BUDGET: f64 = 2e11;

fn weight_at(weight: Weight, y: Enclosure) -> Enclosure {
    match weight {
        Weight::Derivative => Rigorous::e1(&y),
        Weight::Value => (-y).exp(),
    }
}

/// `∫_t^∞ w(u) du` for the weight `w`.
fn weight_integral(weight: Weight, t: Enclosure) -> Enclosure {
    match weight {
        Weight::Derivative => e1_integral(&t),
        Weight::Value => (-t).exp(),
    }
}

fn j1_enclosure(x: Enclosure) -> Enclosure {
    // |J1'| ≤ 1/2.
    let centre = bessel_j1(x.mid());
    centre + Enclosure::symmetric(Enclosure::point(x.rad()) * Enclosure::point(0.5))
}

/// Precomputed inner-sum data shared by every `c` and `d`.
struct Inner {
    m: u64,
    level: u64,
    weight: Weight,
    n0: usize,
    /// `w(2πn/√M)/√n` for `n = 1..=n0`.
    wn: Vec<Enclosure>,
    /// `4π√(mn)` for `n = 1..=n0`.
    arg: Vec<Enclosure>,
    /// `∫` of the weight beyond `n0`, times `√M/2π`.
    tail_mass: Enclosure,
}

impl Inner {
    fn new(m: u64, level: u64, weight: Weight, floor: f64) -> Self {
        let sqrt_ml = Enclosure::from_u64(level).sqrt();
        let step = two_pi::<Enclosure>() / sqrt_ml;
        let mut n0 = 0usize;
        let mut wn = Vec::new();
        let mut arg = Vec::new();
        let four_pi_sqrt_m = Enclosure::point(4.0) * <Enclosure as Rigorous>::pi() * Enclosure::from_u64(m).sqrt();
        loop {
            let n = n0 as u64 + 1;
            let w = weight_at(weight, step * Enclosure::from_u64(n));
            if w.hi() < floor {
                break;
            }
            let sn = Enclosure::from_u64(n).sqrt();
            wn.push(w / sn);
            arg.push(four_pi_sqrt_m * sn);
            n0 += 1;
        }
        let t0 = step * Enclosure::from_u64(n0 as u64);
        let tail_mass = weight_integral(weight, t0) * sqrt_ml / two_pi::<Enclosure>();
        Inner { m, level, weight, n0, wn, arg, tail_mass }
    }

    /// `Σ_{n≥1} S_n/√n J1(4π√(mn)/q) w(2πn/√M)` for Kloosterman values
    /// `S_n` with `|S_n| ≤ weil`, `q` the Bessel denominator.
    fn sum(&self, s: &[Enclosure], q: Enclosure, weil: Enclosure) -> Enclosure {
        let mut acc = Enclosure::ZERO;
        for ((sn, arg), w) in s[..self.n0].iter().zip(&self.arg).zip(&self.wn) {
            acc = acc + *sn * j1_enclosure(*arg / q) * *w;
        }
        // Tail: |S_n| ≤ weil, |J1(x)| ≤ x/2 and Σ_{n>n0} w ≤ tail_mass.
        let per = weil * Enclosure::point(2.0) * <Enclosure as Rigorous>::pi() * Enclosure::from_u64(self.m).sqrt() / q;
        acc + Enclosure::symmetric(per * self.tail_mass)
    }
}

fn check_c(c: u64, level: u64) -> Result<()> {
    if c == 0 || c % level != 0 {
        return Err(Error::Parameter(format!("c = {c} is not a positive multiple of M = {level}")));
    }
    Ok(())
}

/// Weil bound `(m,n,c)^{1/2} τ(c) √c ≤ √m τ(c) √c`.
fn weil_bound(m: u64, c: u64) -> Enclosure {
    Enclosure::from_u64(m).sqrt() * Enclosure::from_u64(divisor_count(c)) * Enclosure::from_u64(c).sqrt()
}

fn scal_with(inner: &Inner, c: u64) -> Enclosure {
    let row = KloostermanRow::new(inner.m, 1, c);
    let s = row.values(inner.n0);
    inner.sum(&s, Enclosure::from_u64(c), weil_bound(inner.m, c))
}

fn tcal_with(inner: &Inner, d: u64) -> Enclosure {
    let mult = arith::mod_inverse(inner.level % d.max(1), d).expect("d prime to M");
    let row = KloostermanRow::new(inner.m, mult, d);
    let s = row.values(inner.n0);
    let q = Enclosure::from_u64(d) * Enclosure::from_u64(inner.level).sqrt();
    inner.sum(&s, q, weil_bound(inner.m, d))
}

/// Numeric enclosure of `S(c)` with the inner sum closed by its tail bound.
/// `n_budget` caps the explicit inner terms.
pub fn scal_numeric(c: u64, query: &MomentQuery, n_budget: usize) -> Result<Enclosure> {
    check_c(c, query.level)?;
    let mut inner = Inner::new(query.m, query.level, query.weight, 1e-18);
    truncate_inner(&mut inner, n_budget);
    let v = scal_with(&inner, c);
    Ok(v.intersect(&scal_bound(c, query)?).unwrap_or(v))
}

/// Numeric enclosure of `T(d)`.
pub fn tcal_numeric(d: u64, query: &MomentQuery, n_budget: usize) -> Result<Enclosure> {
    if d == 0 || num_integer::gcd(d, query.level) != 1 {
        return Err(Error::Parameter(format!("d = {d} is not prime to M = {}", query.level)));
    }
    let mut inner = Inner::new(query.m, query.level, query.weight, 1e-18);
    truncate_inner(&mut inner, n_budget);
    let v = tcal_with(&inner, d);
    Ok(v.intersect(&tcal_bound(d, query)?).unwrap_or(v))
}

fn truncate_inner(inner: &mut Inner, n_budget: usize) {
    if n_budget < inner.n0 {
        let sqrt_ml = Enclosure::from_u64(inner.level).sqrt();
        let t0 = two_pi::<Enclosure>() / sqrt_ml * Enclosure::from_u64(n_budget as u64);
        inner.n0 = n_budget;
        inner.wn.truncate(n_budget);
        inner.arg.truncate(n_budget);
        inner.tail_mass = weight_integral(inner.weight, t0) * sqrt_ml / two_pi::<Enclosure>();
    }
}

fn tau_tail_at_horizon() -> Enclosure {
    static CELL: OnceLock<Enclosure> = OnceLock::new();
    *CELL.get_or_init(|| arith::tau_tail_bound(OUTER_HORIZON))
}

fn tau_table() -> &'static [u32] {
    static CELL: OnceLock<Vec<u32>> = OnceLock::new();
    CELL.get_or_init(|| arith::divisor_count_table(OUTER_HORIZON as usize))
}

/// One outer sum: explicit terms `1..=k_max`, then exact per-term bounds to
/// the horizon, then the closed tail `lead · Σ_{k>H} τ(k) k^{-3/2}`.
///
/// `term(k)` returns `None` when index `k` does not occur in the sum.
/// `bound(k)` is the per-term bound and `lead` the constant with
/// `bound(k) ≤ lead τ(k) k^{-3/2}`.
fn outer_sum<T, B>(k_max: u64, term: T, bound: B, lead: Enclosure) -> FixedSum
where
    T: Fn(u64) -> Option<Enclosure> + Sync,
    B: Fn(u64) -> Option<Enclosure> + Sync,
{
    let explicit: FixedSum = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let mut s = FixedSum::new();
            if let (Some(v), Some(b)) = (term(k), bound(k)) {
                let cap = Enclosure::symmetric(b);
                let clamped = v.intersect(&cap).expect("numeric term outside its Weil bound");
                s.add(clamped);
            }
            s
        })
        .reduce(FixedSum::new, |mut a, b| {
            a.merge(&b);
            a
        });
    let mut total = explicit;
    for k in k_max + 1..=OUTER_HORIZON {
        if let Some(b) = bound(k) {
            total.add_symmetric(b);
        }
    }
    total.add_symmetric(lead * tau_tail_at_horizon());
    total
}

/// Numeric enclosure of the moment by direct summation of the trace formula.
pub fn moment_numeric(query: &MomentQuery, tail: &TailParams) -> Result<MomentEstimate> {
    if query.space == Space::New {
        return moment_numeric_new(query, tail);
    }
    let m = query.m;
    let level = query.level;
    let k_max = tail.c_max / level;
    if k_max > OUTER_HORIZON || tail.d_max > OUTER_HORIZON || k_max == 0 || tail.d_max == 0 {
        return Err(Error::Parameter(format!(
            "truncations must satisfy M ≤ c_max ≤ {OUTER_HORIZON}·M and 1 ≤ d_max ≤ {OUTER_HORIZON}"
        )));
    }
    let inner = Inner::new(m, level, query.weight, tail.weight_floor);
    let work = inner.n0 as f64 * ((level as f64) * (k_max as f64).powi(2) / 4.0 + (tail.d_max as f64).powi(2) / 4.0);
    if work > NUMERIC_BUDGET {
        let partial = if query.sign == Sign::Plus && query.weight == Weight::Derivative {
            moment_plus_bound(query, BoundMode::First).ok().map(|e| e.normalized)
        } else {
            moment_minus_bound(m, query.prime).ok().map(|e| e.normalized)
        };
        return Err(Error::Budget { reason: format!("about {work:.1e} Kloosterman summands requested"), partial });
    }

    let ml = Enclosure::from_u64(level);
    let sqrt_ml = ml.sqrt();
    let mr = Enclosure::from_u64(m);
    let two_pi_sqrt_m = two_pi::<Enclosure>() * mr.sqrt();
    let four_pi_m = Enclosure::point(2.0) * two_pi::<Enclosure>() * mr;
    let main = weight_at(query.weight, two_pi::<Enclosure>() * mr / sqrt_ml);

    // 2π√m Σ_{M|c} S(c)/c, c = kM.
    let c_part = outer_sum(
        k_max,
        |k| {
            let c = k * level;
            Some(two_pi_sqrt_m * scal_with(&inner, c) / Enclosure::from_u64(c))
        },
        |k| {
            let g = num_integer::gcd(m, k * level);
            let kk = Enclosure::from_u64(k);
            Some(four_pi_m * f_weight(g) * Enclosure::from_u64(tau_table()[k as usize] as u64) / (ml * kk * kk.sqrt()))
        },
        four_pi_m * f_weight(m) / ml,
    );

    // 2π√m Σ_{(d,M)=1} T(d)/(d√M).
    let d_part = outer_sum(
        tail.d_max,
        |d| {
            if num_integer::gcd(d, level) != 1 {
                return None;
            }
            Some(two_pi_sqrt_m * tcal_with(&inner, d) / (Enclosure::from_u64(d) * sqrt_ml))
        },
        |d| {
            if num_integer::gcd(d, level) != 1 {
                return None;
            }
            let g = num_integer::gcd(m, d);
            let dd = Enclosure::from_u64(d);
            Some(
                two_pi::<Enclosure>() * mr * f_weight(g) * Enclosure::from_u64(tau_table()[d as usize] as u64)
                    / (sqrt_ml * dd * dd.sqrt()),
            )
        },
        two_pi::<Enclosure>() * mr * f_weight(m) / sqrt_ml,
    );

    let c_enc = c_part.to_enclosure();
    let d_enc = d_part.to_enclosure();
    let eps = Enclosure::from_int(query.sign.epsilon());
    let normalized = main - c_enc - eps * d_enc;
    Ok(MomentEstimate {
        normalized,
        main_term: main,
        corrections: vec![("c_sum".into(), -c_enc), ("d_sum".into(), -(eps * d_enc))],
        error_radius: 0.0,
        mode: EstimateMode::Numeric,
    })
}

fn moment_numeric_new(query: &MomentQuery, tail: &TailParams) -> Result<MomentEstimate> {
    let n = query.prime;
    let big = moment_numeric(&MomentQuery::plus(query.m, n * n)?, tail)?;
    let small_tail = TailParams { c_max: tail.c_max / n, ..*tail };
    let small = moment_numeric(&MomentQuery::plus(query.m, n)?, &small_tail)?;
    let minus = moment_numeric(&MomentQuery::minus(query.m, n)?, &small_tail)?;
    let nm1 = Enclosure::from_u64(n - 1);
    let half_ln = Enclosure::from_u64(n).ln() * Enclosure::point(0.5);
    let old_plus = -(small.normalized / nm1);
    let old_minus = -(half_ln * minus.normalized / nm1);
    Ok(MomentEstimate {
        normalized: big.normalized + old_plus + old_minus,
        main_term: big.main_term,
        corrections: big
            .corrections
            .into_iter()
            .chain([("oldform_plus".to_string(), old_plus), ("oldform_minus".to_string(), old_minus)])
            .collect(),
        error_radius: 0.0,
        mode: EstimateMode::Numeric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_validation() {
        assert!(MomentQuery::plus(1, 389).is_ok());
        assert!(MomentQuery::plus(1, 47 * 47).is_ok());
        assert!(MomentQuery::plus(1, 390).is_err());
        assert!(MomentQuery::plus(2, 2).is_err());
        let q = MomentQuery::new(1, 389, Sign::Plus, Weight::Derivative, Space::New).unwrap();
        assert_eq!(q.space, Space::Full);
    }

    #[test]
    fn unsupported_twist() {
        let q = MomentQuery::plus(3, 389).unwrap();
        assert!(matches!(moment_plus_bound(&q, BoundMode::First), Err(Error::UnsupportedTwist(3))));
    }

    #[test]
    fn first_radius_closed_form() {
        for &level in &[389u64, 1009, 9973] {
            let q = MomentQuery::plus(1, level).unwrap();
            let est = moment_plus_bound(&q, BoundMode::First).unwrap();
            let expect = 86.0 / level as f64 + 43.0 / (level as f64).sqrt();
            assert!((est.error_radius - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn improved_needs_regime() {
        let q = MomentQuery::plus(1, 997).unwrap();
        assert!(matches!(moment_plus_bound(&q, BoundMode::Improved), Err(Error::Regime { .. })));
        assert!(cutoff_f(999).is_err());
    }

    #[test]
    fn pv_bound_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((pv_partial_bound(2).unwrap() - 8.0 / pi2 * (2f64.ln() + 1.5)).abs() < 1e-13);
        assert!((pv_partial_bound(10).unwrap() - 40.0 / pi2 * (10f64.ln() + 1.5)).abs() < 1e-12);
        assert!(pv_partial_bound(1).is_err());
    }

    #[test]
    fn square_new_collapses_to_main_without_radii() {
        let p = square_new_parts::<Enclosure>(1, 101, BoundMode::First, None, None);
        let n = 101f64;
        let e1 = |x: f64| crate::rigor::e1(x).unwrap().mid();
        let tau = std::f64::consts::TAU;
        let expect = e1(tau / n) - e1(tau / n.sqrt()) / (n - 1.0) - n.ln() * (-tau / n.sqrt()).exp() / (2.0 * (n - 1.0));
        assert!((p.main.mid() - expect).abs() < 1e-12);
    }
}
