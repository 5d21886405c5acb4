//! Certification of the positivity and ratio conditions over prime levels.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primes_in};
use crate::error::{Error, Result};
use crate::moments::{self, BoundMode, ImprovedParams, Parts};
use crate::rigor::{Dyadic, Enclosure, Rigorous};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// `<a_1, L'> > 0`.
    A1Positive,
    /// `<a_2, L'> > 0`.
    A2Positive,
    /// `<a_2, L'> / <a_1, L'> ∈ (0, 1)`.
    RatioInUnitInterval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `M = N`, the curve `X0+(N)`.
    X0plus,
    /// `M = N²`, new part, the curve `Xns+(N)`.
    Xnsplus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub kind: ConditionKind,
    pub family: Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticVerdict {
    HoldsAnalytically,
    NeedsSmallLevelCheck,
}

/// Enclosures of the two normalized moments at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelBounds {
    pub prime: u64,
    pub a1: Enclosure,
    pub a2: Option<Enclosure>,
}

/// Smallest prime at which a bound mode applies to a family.
pub fn regime_floor(family: Family, mode: BoundMode) -> u64 {
    match (family, mode) {
        (_, BoundMode::First) => 2,
        (Family::X0plus, BoundMode::Improved) => moments::IMPROVED_FLOOR,
        // N² ≥ 1000.
        (Family::Xnsplus, BoundMode::Improved) => 32,
    }
}

fn parts_in<R: Rigorous>(m: u64, family: Family, mode: BoundMode, prime: u64) -> Result<Parts<R>> {
    match family {
        Family::X0plus => {
            let params = match mode {
                BoundMode::First => None,
                BoundMode::Improved => Some(ImprovedParams::for_level(m, prime)?),
            };
            Ok(moments::plus_parts::<R>(m, prime, mode, params))
        }
        Family::Xnsplus => {
            let (big, small) = moments::square_new_params(m, prime, mode)?;
            Ok(moments::square_new_parts::<R>(m, prime, mode, big, small))
        }
    }
}

fn moment_in<R: Rigorous>(m: u64, family: Family, mode: BoundMode, prime: u64) -> Result<Option<R>> {
    if m > 1 && prime % m == 0 {
        // (m, N) = 1 fails; the moment is not covered by the estimates.
        return Ok(None);
    }
    Ok(Some(parts_in::<R>(m, family, mode, prime)?.total()))
}

/// The decisive inequality, evaluated in the arithmetic `R`.
pub fn decide_in<R: Rigorous>(kind: ConditionKind, family: Family, mode: BoundMode, prime: u64) -> Result<bool> {
    let a1 = || moment_in::<R>(1, family, mode, prime);
    let a2 = || moment_in::<R>(2, family, mode, prime);
    Ok(match kind {
        ConditionKind::A1Positive => a1()?.is_some_and(|a| a.is_positive()),
        ConditionKind::A2Positive => a2()?.is_some_and(|a| a.is_positive()),
        ConditionKind::RatioInUnitInterval => match (a1()?, a2()?) {
            // a2/a1 ⊂ (0, 1) ⇔ a1 > 0, a2 > 0 and sup a2 < inf a1.
            (Some(a1), Some(a2)) => {
                a1.is_positive() && a2.is_positive() && (a1.lower() - a2.upper()).is_positive()
            }
            _ => false,
        },
    })
}

fn check_prime(prime: u64) -> Result<()> {
    if is_prime(prime) {
        Ok(())
    } else {
        Err(Error::Composite(prime))
    }
}

/// Whether `condition` certifies at the prime `prime`.
pub fn certify_at(condition: Condition, mode: BoundMode, prime: u64) -> Result<Verdict> {
    check_prime(prime)?;
    if prime < regime_floor(condition.family, mode) {
        return Err(Error::Regime { what: "the improved estimates", level: prime, floor: regime_floor(condition.family, mode) });
    }
    let ok = decide_in::<Enclosure>(condition.kind, condition.family, mode, prime)?;
    Ok(if ok { Verdict::Certified } else { Verdict::Inconclusive })
}

/// Reruns the decisive inequality in big-integer interval arithmetic.
pub fn certify_at_audit(condition: Condition, mode: BoundMode, prime: u64) -> Result<Verdict> {
    check_prime(prime)?;
    let ok = decide_in::<Dyadic>(condition.kind, condition.family, mode, prime)?;
    Ok(if ok { Verdict::Certified } else { Verdict::Inconclusive })
}

/// Both moment enclosures at a level, for reports and plots.
pub fn level_bounds(family: Family, mode: BoundMode, prime: u64) -> Result<LevelBounds> {
    let a1 = moment_in::<Enclosure>(1, family, mode, prime)?.expect("m = 1 is prime to every level");
    let a2 = moment_in::<Enclosure>(2, family, mode, prime)?;
    Ok(LevelBounds { prime, a1, a2 })
}

/// Stated thresholds of the threshold table and of the improved estimates.
pub fn reference_threshold(condition: Condition, mode: BoundMode) -> Option<u64> {
    use ConditionKind::*;
    use Family::*;
    match (condition.family, condition.kind, mode) {
        (X0plus, A1Positive, BoundMode::First) => Some(1213),
        (X0plus, A2Positive, BoundMode::First) => Some(5437),
        (X0plus, RatioInUnitInterval, BoundMode::First) => Some(45341),
        (Xnsplus, A1Positive, BoundMode::First) => Some(47),
        (Xnsplus, A2Positive, BoundMode::First) => Some(97),
        (Xnsplus, RatioInUnitInterval, BoundMode::First) => Some(269),
        (X0plus, RatioInUnitInterval, BoundMode::Improved) => Some(8641),
        (Xnsplus, A2Positive, BoundMode::Improved) => Some(71),
        (Xnsplus, RatioInUnitInterval, BoundMode::Improved) => Some(151),
        _ => None,
    }
}

/// Relative tolerance on the minimal certified prime.
pub const THRESHOLD_TOLERANCE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: u64,
    pub certified_at_reference: bool,
    pub within_tolerance: bool,
    /// Set when either check fails.
    pub discrepancy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub condition: Condition,
    pub bound_mode: BoundMode,
    pub range: (u64, u64),
    /// Least scanned prime from which every scanned prime certifies.
    pub min_certified_prime: Option<u64>,
    pub last_inconclusive: Option<u64>,
    pub verdicts: BTreeMap<u64, Verdict>,
    pub comparison: Option<Comparison>,
    #[serde(skip)]
    pub runtime_ms: u128,
}

fn compare(condition: Condition, mode: BoundMode, min: Option<u64>, verdicts: &BTreeMap<u64, Verdict>, n_max: u64) -> Option<Comparison> {
    let reference = reference_threshold(condition, mode)?;
    if reference > n_max {
        return None;
    }
    let at_ref = match verdicts.get(&reference) {
        Some(v) => *v == Verdict::Certified,
        None => certify_at(condition, mode, reference).ok() == Some(Verdict::Certified),
    };
    let within = min.is_some_and(|p| (p as f64 - reference as f64).abs() <= THRESHOLD_TOLERANCE * reference as f64);
    let mut notes = Vec::new();
    if !at_ref {
        notes.push(format!("does not certify at the reference prime {reference}"));
    }
    if !within {
        match min {
            Some(p) => notes.push(format!("minimal certified prime {p} differs from {reference} by more than 1%")),
            None => notes.push("no certified tail in the scanned range".to_string()),
        }
    }
    Some(Comparison {
        reference,
        certified_at_reference: at_ref,
        within_tolerance: within,
        discrepancy: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// Scans all primes from the regime floor to `n_max`.
pub fn scan(condition: Condition, mode: BoundMode, n_max: u64) -> Result<ThresholdReport> {
    scan_range(condition, mode, regime_floor(condition.family, mode), n_max)
}

pub fn scan_range(condition: Condition, mode: BoundMode, start: u64, n_max: u64) -> Result<ThresholdReport> {
    let start = start.max(regime_floor(condition.family, mode));
    if n_max < start {
        return Err(Error::Parameter(format!("scan range [{start}, {n_max}] is empty")));
    }
    let t = Instant::now();
    let primes = primes_in(start, n_max);
    let results: Vec<(u64, Verdict)> = primes
        .par_iter()
        .map(|&p| {
            let ok = decide_in::<Enclosure>(condition.kind, condition.family, mode, p).unwrap_or(false);
            (p, if ok { Verdict::Certified } else { Verdict::Inconclusive })
        })
        .collect();
    let verdicts: BTreeMap<u64, Verdict> = results.into_iter().collect();
    let last_inconclusive = verdicts.iter().rev().find(|(_, v)| **v == Verdict::Inconclusive).map(|(p, _)| *p);
    let min_certified_prime = match last_inconclusive {
        None => verdicts.keys().next().copied(),
        Some(bad) => verdicts.range(bad + 1..).next().map(|(p, _)| *p),
    };
    let comparison = compare(condition, mode, min_certified_prime, &verdicts, n_max);
    Ok(ThresholdReport {
        condition,
        bound_mode: mode,
        range: (start, n_max),
        min_certified_prime,
        last_inconclusive,
        verdicts,
        comparison,
        runtime_ms: t.elapsed().as_millis(),
    })
}

/// Both analytic conditions together: `<a_1, L'> > 0` and the ratio in `(0, 1)`.
pub fn theorem2_analytic_verdict(prime: u64, family: Family, mode: BoundMode) -> Result<AnalyticVerdict> {
    let a1 = certify_at(Condition { kind: ConditionKind::A1Positive, family }, mode, prime)?;
    let ratio = certify_at(Condition { kind: ConditionKind::RatioInUnitInterval, family }, mode, prime)?;
    Ok(if a1 == Verdict::Certified && ratio == Verdict::Certified {
        AnalyticVerdict::HoldsAnalytically
    } else {
        AnalyticVerdict::NeedsSmallLevelCheck
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(kind: ConditionKind, family: Family) -> Condition {
        Condition { kind, family }
    }

    #[test]
    fn composite_rejected() {
        let c = cond(ConditionKind::A1Positive, Family::X0plus);
        assert!(matches!(certify_at(c, BoundMode::First, 1211), Err(Error::Composite(1211))));
    }

    #[test]
    fn a1_crossover() {
        let c = cond(ConditionKind::A1Positive, Family::X0plus);
        assert_eq!(certify_at(c, BoundMode::First, 1213).unwrap(), Verdict::Certified);
        assert_eq!(certify_at(c, BoundMode::First, 1201).unwrap(), Verdict::Inconclusive);
    }

    #[test]
    fn audit_agrees_at_reference_primes() {
        for (kind, family, p) in [
            (ConditionKind::A1Positive, Family::X0plus, 1213),
            (ConditionKind::RatioInUnitInterval, Family::Xnsplus, 269),
        ] {
            let c = cond(kind, family);
            assert_eq!(certify_at_audit(c, BoundMode::First, p).unwrap(), Verdict::Certified);
        }
    }

    #[test]
    fn small_level_needs_check() {
        assert_eq!(
            theorem2_analytic_verdict(101, Family::X0plus, BoundMode::First).unwrap(),
            AnalyticVerdict::NeedsSmallLevelCheck
        );
    }
}
