//! Central values `L'(f,1)` and `L(f,1)` from q-expansions, nonvanishing
//! certificates and the per-level verdict.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::divisor_count;
use crate::data::{CurveRecord, RawNewform};
use crate::error::{Error, Result};
use crate::rigor::{Dyadic, Enclosure, FixedSum, Rigorous};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    FullList,
    PrimeList,
}

/// One embedding of a weight-2 newform.
#[derive(Clone, Debug, PartialEq)]
pub struct NewformRecord {
    pub label: String,
    pub level: u64,
    /// Eigenvalue of the Fricke involution.
    pub fricke_sign: i8,
    pub orbit_size: u32,
    /// `a_1, ..., a_T`.
    pub coefficients: Vec<Enclosure>,
    pub coefficient_source: CoefficientSource,
    pub(crate) raw: Option<RawNewform>,
}

impl NewformRecord {
    pub fn new(label: &str, level: u64, fricke_sign: i8, orbit_size: u32, coefficients: Vec<Enclosure>) -> Result<Self> {
        if fricke_sign != 1 && fricke_sign != -1 {
            return Err(Error::Parameter(format!("fricke_sign {fricke_sign} is not ±1")));
        }
        if orbit_size == 0 || level == 0 {
            return Err(Error::Parameter("level and orbit size must be positive".into()));
        }
        if coefficients.first().is_none_or(|a| !a.contains(1.0)) {
            return Err(Error::Parameter("not normalised: a_1 != 1".into()));
        }
        Ok(NewformRecord {
            label: label.to_string(),
            level,
            fricke_sign,
            orbit_size,
            coefficients,
            coefficient_source: CoefficientSource::FullList,
            raw: None,
        })
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len()
    }
}

/// `a_1..a_target` from the prime eigenvalues by Hecke multiplicativity.
pub fn expand_coefficients(ap: &BTreeMap<u64, Enclosure>, level: u64, target: u64) -> Result<Vec<Enclosure>> {
    let t = target as usize;
    let mut spf = vec![0u64; t + 1];
    for i in 2..=t {
        if spf[i] == 0 {
            for j in (i..=t).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u64;
                }
            }
        }
    }
    let mut a = vec![Enclosure::ZERO; t + 1];
    if t >= 1 {
        a[1] = Enclosure::ONE;
    }
    for n in 2..=t {
        let p = spf[n] as usize;
        let mut q = n;
        let mut pk = 1;
        while q % p == 0 {
            q /= p;
            pk *= p;
        }
        a[n] = if q > 1 {
            a[pk] * a[q]
        } else if pk == p {
            *ap.get(&(p as u64)).ok_or(Error::MissingCoefficient(p as u64))?
        } else {
            let prev = a[pk / p];
            if level % p as u64 == 0 {
                a[p] * prev
            } else {
                a[p] * prev - Enclosure::from_u64(p as u64) * a[pk / p / p]
            }
        };
    }
    Ok(a.split_off(1.min(a.len())))
}

/// Default minimum truncation `⌈8√M⌉`.
pub fn minimum_truncation(level: u64) -> usize {
    (8.0 * (level as f64).sqrt()).ceil() as usize
}

/// Terms beyond this index have weight below `e^{-50}` and go into the tail.
fn weight_horizon(level: u64) -> usize {
    (50.0 * (level as f64).sqrt() / (2.0 * std::f64::consts::PI)).floor() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kernel {
    /// `E1(2πn/√M)`, for `L'(f,1)`.
    E1,
    /// `e^{-2πn/√M}`, for `L(f,1)`.
    Exp,
}

/// `2 Σ_{n>T} |a_n|/n · w(n)` bounded with `|a_n| ≤ τ(n)√n ≤ 2n` and
/// `E1(y) ≤ e^{-y}/y`, summed as a geometric series.
fn tail_bound_in<R: Rigorous>(kernel: Kernel, level: u64, t: usize) -> R {
    let sq = R::from_u64(level).sqrt();
    let two_pi = R::pi() * R::from_int(2);
    let r = (-(two_pi.clone() / sq.clone())).exp();
    let t1 = R::from_u64(t as u64 + 1);
    let r_t1 = (-(two_pi.clone() * t1.clone() / sq.clone())).exp();
    let one_minus_r = R::from_int(1) - r;
    match kernel {
        // 2 Σ 2n/n · e^{-y}/y with y = 2πn/√M.
        Kernel::E1 => (R::from_int(4) * sq / (two_pi * t1) * r_t1 / one_minus_r).upper(),
        Kernel::Exp => (R::from_int(4) * r_t1 / one_minus_r).upper(),
    }
}

fn deligne_clamp(n: usize, a: &Enclosure) -> Result<Enclosure> {
    let b = Enclosure::from_u64(divisor_count(n as u64)) * Enclosure::from_u64(n as u64).sqrt();
    a.intersect(&Enclosure::symmetric(b))
        .ok_or_else(|| Error::Domain(format!("a_{n} = {a} violates |a_n| <= tau(n) sqrt(n)")))
}

/// Terms `2 a_n/n · w(n)` for `n ≤ T'` and the tail bound at `T'`, where `T'`
/// is `t` capped at the weight horizon.
fn central_terms_in<R: Rigorous>(record: &NewformRecord, kernel: Kernel, t: usize) -> Result<(Vec<R>, R)> {
    if t > record.coefficients.len() {
        return Err(Error::InsufficientData(format!(
            "{}: truncation {t} exceeds the {} stored coefficients",
            record.label,
            record.coefficients.len()
        )));
    }
    let t_eff = t.min(weight_horizon(record.level)).max(1);
    let sq = R::from_u64(record.level).sqrt();
    let two_pi = R::pi() * R::from_int(2);
    let mut terms = Vec::with_capacity(t_eff);
    for n in 1..=t_eff {
        let a = deligne_clamp(n, &record.coefficients[n - 1])?;
        let y = two_pi.clone() * R::from_u64(n as u64) / sq.clone();
        let w = match kernel {
            Kernel::E1 => y.e1(),
            Kernel::Exp => (-y).exp(),
        };
        terms.push(R::from_int(2) * R::from_enclosure(&a) * w / R::from_u64(n as u64));
    }
    Ok((terms, tail_bound_in::<R>(kernel, record.level, t_eff)))
}

/// Exact fixed-point accumulation, so that raising `t` only ever trades
/// tail mass for terms that lie inside it.
fn central_value(record: &NewformRecord, kernel: Kernel, t: usize) -> Result<(Enclosure, Enclosure)> {
    let (terms, tail) = central_terms_in::<Enclosure>(record, kernel, t)?;
    let mut acc: FixedSum = terms.into_iter().sum();
    acc.add_symmetric(tail);
    Ok((acc.to_enclosure(), Enclosure::new(0.0, tail.hi())))
}

fn central_value_audit(record: &NewformRecord, kernel: Kernel, t: usize) -> Result<Dyadic> {
    let (terms, tail) = central_terms_in::<Dyadic>(record, kernel, t)?;
    let sum = terms.into_iter().fold(Dyadic::from_int(0), |a, b| a + b);
    Ok(sum + Dyadic::symmetric(&tail))
}

fn check_truncation(record: &NewformRecord, t: usize) -> Result<()> {
    let min = minimum_truncation(record.level);
    if t < min {
        return Err(Error::Parameter(format!("truncation {t} is below the minimum {min} for level {}", record.level)));
    }
    Ok(())
}

fn require_sign(record: &NewformRecord, sign: i8) -> Result<()> {
    if record.fricke_sign != sign {
        return Err(Error::Parameter(format!(
            "{} has Fricke sign {}, expected {sign}",
            record.label, record.fricke_sign
        )));
    }
    Ok(())
}

/// `L'(f,1) = 2 Σ a_n/n E1(2πn/√M)` for a Fricke sign +1 form.
pub fn lprime_at_1(record: &NewformRecord, t: usize) -> Result<Enclosure> {
    require_sign(record, 1)?;
    check_truncation(record, t)?;
    Ok(central_value(record, Kernel::E1, t)?.0)
}

/// [`lprime_at_1`] in 320-bit interval arithmetic.
pub fn lprime_at_1_audit(record: &NewformRecord, t: usize) -> Result<Dyadic> {
    require_sign(record, 1)?;
    check_truncation(record, t)?;
    central_value_audit(record, Kernel::E1, t)
}

/// `L(f,1) = 2 Σ a_n/n e^{-2πn/√M}` for a Fricke sign −1 form.
pub fn l_at_1(record: &NewformRecord, t: usize) -> Result<Enclosure> {
    require_sign(record, -1)?;
    check_truncation(record, t)?;
    Ok(central_value(record, Kernel::Exp, t)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonvanishingVerdict {
    Nonzero,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonvanishingCertificate {
    pub label: String,
    /// `L'(f,1)` for Fricke sign +1, `L(f,1)` for −1.
    pub value: Enclosure,
    pub verdict: NonvanishingVerdict,
    pub truncation: usize,
    pub tail_bound: Enclosure,
}

/// Raises the truncation from the minimum by doubling, up to `budget`
/// coefficients, until the enclosure leaves zero.
pub fn certify_nonvanishing(record: &NewformRecord, budget: usize) -> Result<NonvanishingCertificate> {
    let kernel = if record.fricke_sign == 1 { Kernel::E1 } else { Kernel::Exp };
    let cap = budget.min(record.coefficients.len()).max(1);
    let mut t = minimum_truncation(record.level).min(cap);
    loop {
        let (value, tail_bound) = central_value(record, kernel, t)?;
        let nonzero = !value.contains(0.0);
        if nonzero || t >= cap {
            return Ok(NonvanishingCertificate {
                label: record.label.clone(),
                value,
                verdict: if nonzero { NonvanishingVerdict::Nonzero } else { NonvanishingVerdict::Inconclusive },
                truncation: t,
                tail_bound,
            });
        }
        t = (2 * t).min(cap);
    }
}

/// Rechecks a certificate's verdict in 320-bit arithmetic.
pub fn audit_certificate(record: &NewformRecord, cert: &NonvanishingCertificate) -> Result<NonvanishingVerdict> {
    let kernel = if record.fricke_sign == 1 { Kernel::E1 } else { Kernel::Exp };
    let v = central_value_audit(record, kernel, cert.truncation)?;
    Ok(if v.contains_zero() { NonvanishingVerdict::Inconclusive } else { NonvanishingVerdict::Nonzero })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem2Verdict {
    Theorem2Holds,
    /// Fewer than two forms certified; nothing is claimed to vanish.
    FailsToCertify,
    InsufficientData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelVerdict {
    pub level: u64,
    pub verdict: Theorem2Verdict,
    /// Total orbit size over certified orbits.
    pub certified_dimension: u64,
    pub plus_dimension: u64,
    /// Sorted by label.
    pub certificates: Vec<NonvanishingCertificate>,
}

/// Verdict at level `M` from records covering the Fricke +1 new subspace of
/// dimension `plus_dimension`, one embedding per Galois orbit.
pub fn level_verdict(level: u64, records: &[NewformRecord], plus_dimension: u64, budget: usize) -> Result<LevelVerdict> {
    let mut plus: Vec<&NewformRecord> = records.iter().filter(|r| r.level == level && r.fricke_sign == 1).collect();
    plus.sort_by(|a, b| a.label.cmp(&b.label));
    let covered: u64 = plus.iter().map(|r| r.orbit_size as u64).sum();
    if covered != plus_dimension {
        return Ok(LevelVerdict {
            level,
            verdict: Theorem2Verdict::InsufficientData,
            certified_dimension: 0,
            plus_dimension,
            certificates: Vec::new(),
        });
    }
    let certificates = plus
        .par_iter()
        .map(|r| certify_nonvanishing(r, budget))
        .collect::<Result<Vec<_>>>()?;
    let certified_dimension: u64 = plus
        .iter()
        .zip(&certificates)
        .filter(|(_, c)| c.verdict == NonvanishingVerdict::Nonzero)
        .map(|(r, _)| r.orbit_size as u64)
        .sum();
    let verdict = if certified_dimension >= 2 { Theorem2Verdict::Theorem2Holds } else { Theorem2Verdict::FailsToCertify };
    Ok(LevelVerdict { level, verdict, certified_dimension, plus_dimension, certificates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionVerdict {
    Excluded,
    NotExcluded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub level: u64,
    pub curve: String,
    /// `L'(E,1)/‖f_E‖²`.
    pub ratio: Enclosure,
    pub moment_lower: Enclosure,
    pub verdict: ExclusionVerdict,
}

/// Whether one rank-one curve can carry the whole moment `<a_1, L'>` at its
/// level. `moment_lower` is a lower bound for that moment itself, that is
/// `4π` times the normalized moment.
pub fn single_curve_exclusion(level: u64, curve: &CurveRecord, moment_lower: Enclosure) -> Result<Exclusion> {
    if curve.conductor != level {
        return Err(Error::Parameter(format!("{} has conductor {}, not {level}", curve.label, curve.conductor)));
    }
    let norm = curve
        .petersson_norm
        .ok_or_else(|| Error::InsufficientData(format!("{}: missing Petersson norm", curve.label)))?;
    let lp = curve
        .lprime_value
        .ok_or_else(|| Error::InsufficientData(format!("{}: missing L'(E,1)", curve.label)))?;
    let ratio = lp / norm;
    let verdict = if ratio.hi() < moment_lower.lo() { ExclusionVerdict::Excluded } else { ExclusionVerdict::NotExcluded };
    Ok(Exclusion { level, curve: curve.label.clone(), ratio, moment_lower, verdict })
}
