use std::time::Instant;

use nvcert::arith::{g_weight, primes_in};
use nvcert::error::Error;
use nvcert::moments::*;
use nvcert::rigor::{e1, Enclosure};

const PI: f64 = std::f64::consts::PI;

#[test]
fn scal_bound_examples() {
    let q = MomentQuery::plus(1, 389).unwrap();
    let b = scal_bound(389, &q).unwrap();
    assert!(b.contains(2.0) && b.contains(-2.0) && b.hi() < 2.0 + 1e-12);
    let q2 = MomentQuery::plus(2, 389).unwrap();
    let b = scal_bound(2 * 389, &q2).unwrap();
    // τ(c/M) = τ(2) = 2 multiplies the refined constant.
    let want = 2.0 * (2f64.sqrt() + 2.0) * 389f64.sqrt() / (2.0 * 389.0f64).sqrt();
    assert!(b.contains(want) && b.hi() < want + 1e-12);
    let mut last = f64::INFINITY;
    for k in [1u64, 2, 3, 5, 7, 11] {
        // τ(k) = 2 for the primes; compare along equal divisor counts.
        let v = scal_bound(k * 389, &q).unwrap().hi() / nvcert::arith::divisor_count(k) as f64;
        assert!(v < last);
        last = v;
    }
    assert!(matches!(scal_bound(390, &q), Err(Error::Parameter(_))));
}

#[test]
fn tcal_examples() {
    for m in [1u64, 2] {
        let q = MomentQuery::plus(m, 389).unwrap();
        let t1 = tcal_numeric(1, &q, 10_000).unwrap();
        let sm = (m as f64).sqrt();
        assert!(t1.lo() >= 0.4 * sm && t1.hi() <= sm, "m = {m}: T(1) = {t1:?}");
    }
    let q2 = MomentQuery::plus(2, 389).unwrap();
    let b = tcal_bound(2, &q2).unwrap();
    let want = (1.0 + 1.0 / 2f64.sqrt()) * 2.0 / 2f64.sqrt();
    assert!(b.contains(want) && b.hi() < want + 1e-12);
    assert!(tcal_bound(389, &q2).is_err());
}

#[test]
fn numeric_terms_stay_inside_weil_bounds() {
    let q = MomentQuery::plus(1, 389).unwrap();
    for c in [389u64, 778, 3890] {
        let s = scal_numeric(c, &q, 10_000).unwrap();
        assert!(scal_bound(c, &q).unwrap().encloses(&s), "c = {c}");
    }
    for d in [2u64, 3, 10] {
        let t = tcal_numeric(d, &q, 10_000).unwrap();
        assert!(tcal_bound(d, &q).unwrap().encloses(&t), "d = {d}");
    }
}

#[test]
fn scal_numeric_agrees_with_more_terms() {
    let q = MomentQuery::plus(1, 389).unwrap();
    for c in [389u64, 1167] {
        let a = scal_numeric(c, &q, 10_000).unwrap();
        let b = scal_numeric(c, &q, 1_000_000).unwrap();
        assert!(a.intersects(&b), "c = {c}: {a:?} {b:?}");
    }
    let a = tcal_numeric(3, &q, 10_000).unwrap();
    let b = tcal_numeric(3, &q, 1_000_000).unwrap();
    assert!(a.intersects(&b));
}

#[test]
fn first_sum_radii() {
    let q = MomentQuery::plus(1, 10_007).unwrap();
    let (s, t) = sum_bounds_first(&q).unwrap();
    assert!(s.contains(86.0 / 10_007.0) && s.hi() < 86.0 / 10_007.0 * (1.0 + 1e-12));
    assert!(t.contains(43.0 / 10_007f64.sqrt()));
    let q2 = MomentQuery::plus(2, 10_007).unwrap();
    let (s2, t2) = sum_bounds_first(&q2).unwrap();
    assert!(s2.contains(213.0 / 10_007.0) && t2.contains(97.0 / 10_007f64.sqrt()));
    let (s4, t4) = sum_bounds_first(&MomentQuery::plus(1, 40_009).unwrap()).unwrap();
    assert!((s.hi() / s4.hi() - 40_009.0 / 10_007.0).abs() < 1e-9);
    assert!((t.hi() / t4.hi() - (40_009.0f64 / 10_007.0).sqrt()).abs() < 1e-9);
}

#[test]
fn pv_and_cutoff() {
    assert!((pv_partial_bound(2).unwrap() - 8.0 / (PI * PI) * (2f64.ln() + 1.5)).abs() < 1e-12);
    assert!((pv_partial_bound(10).unwrap() - 40.0 / (PI * PI) * (10f64.ln() + 1.5)).abs() < 1e-12);
    assert!(pv_partial_bound(1).is_err());
    let e = e1(2.0 * PI / 100.0).unwrap();
    let lo = 1e4 / (6.25 * e.hi() * e.hi());
    let hi = 1e4 / (6.25 * e.lo() * e.lo());
    let f = cutoff_f(10_000).unwrap() as f64;
    assert!(f <= hi && f + 1.0 > lo);
    assert!(matches!(cutoff_f(999), Err(Error::Regime { .. })));
    let ps = primes_in(1000, 100_000);
    let fs: Vec<u64> = ps.iter().map(|&p| cutoff_f(p).unwrap()).collect();
    assert!(fs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn threshold_levels_of_the_plus_bound() {
    let at = |p, mode| moment_plus_bound(&MomentQuery::plus(1, p).unwrap(), mode).unwrap().normalized;
    assert!(at(1213, BoundMode::First).is_positive());
    assert!(!at(1201, BoundMode::First).is_positive());
    assert!(at(8641, BoundMode::Improved).is_positive());
}

#[test]
fn improved_is_tighter_than_first() {
    for p in [1009u64, 8641, 45341] {
        for m in [1u64, 2] {
            let q = MomentQuery::plus(m, p).unwrap();
            let a = moment_plus_bound(&q, BoundMode::First).unwrap();
            let b = moment_plus_bound(&q, BoundMode::Improved).unwrap();
            assert!(b.normalized.width() < a.normalized.width(), "m = {m}, p = {p}");
            assert!(b.corrections.iter().any(|(n, _)| n == "t1_term"));
        }
    }
}

#[test]
fn radius_composition_is_exact() {
    for (m, p) in [(1u64, 389u64), (1, 9973), (2, 1009)] {
        let e = moment_plus_bound(&MomentQuery::plus(m, p).unwrap(), BoundMode::First).unwrap();
        let (cs, ct) = if m == 2 { (213.0, 97.0) } else { (86.0 * g_weight(1).mid(), 43.0 * g_weight(1).mid()) };
        let want = cs / p as f64 + ct / (p as f64).sqrt();
        assert!((e.error_radius - want).abs() < 1e-14 * want.max(1.0), "{} vs {}", e.error_radius, want);
        let main = e1(2.0 * PI * m as f64 / (p as f64).sqrt()).unwrap();
        assert!(e.main_term.intersects(&main));
    }
}

#[test]
fn minus_moment() {
    let e = moment_minus_bound(1, 10_007).unwrap();
    assert!((e.main_term.mid() - (-2.0 * PI / 10_007f64.sqrt()).exp()).abs() < 1e-12);
    assert!((e.main_term.mid() - 0.939).abs() < 1e-3);
    assert!((e.error_radius - (86.0 / 10_007.0 + 43.0 / 10_007f64.sqrt())).abs() < 1e-12);
    let far = moment_minus_bound(1, 1_000_003).unwrap();
    assert!(far.normalized.width() < e.normalized.width() && far.normalized.contains(1.0 - 6e-3));
}

#[test]
fn square_new_examples() {
    assert!(moment_square_new_bound(1, 47, BoundMode::First).unwrap().normalized.is_positive());
    assert!(moment_square_new_bound(2, 97, BoundMode::First).unwrap().normalized.is_positive());
    let e = moment_square_new_bound(1, 101, BoundMode::First).unwrap();
    let names: Vec<_> = e.corrections.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["oldform_plus", "oldform_minus"]);
    let n = 101f64;
    let main = e1(2.0 * PI / n).unwrap().mid()
        - e1(2.0 * PI / n.sqrt()).unwrap().mid() / (n - 1.0)
        - n.ln() * (-2.0 * PI / n.sqrt()).exp() / (2.0 * (n - 1.0));
    let total_main = e.main_term + e.corrections.iter().fold(Enclosure::ZERO, |a, (_, c)| a + Enclosure::point(c.mid()));
    assert!((total_main.mid() - main).abs() < 1e-9, "{} vs {main}", total_main.mid());
}

#[test]
fn unsupported_and_invalid_queries() {
    assert!(matches!(
        moment_plus_bound(&MomentQuery::plus(3, 389).unwrap(), BoundMode::First),
        Err(Error::UnsupportedTwist(3))
    ));
    assert!(MomentQuery::plus(1, 390).is_err());
    assert!(MomentQuery::plus(389, 389).is_err());
    assert!(matches!(
        moment_plus_bound(&MomentQuery::plus(1, 389).unwrap(), BoundMode::Improved),
        Err(Error::Regime { .. })
    ));
}

fn check_level(p: u64) {
    let q = MomentQuery::plus(1, p).unwrap();
    let t = Instant::now();
    let tail = TailParams::default_for(p);
    let a = moment_numeric(&q, &tail).unwrap();
    let elapsed = t.elapsed();
    let b = moment_numeric(&q, &tail.doubled()).unwrap();
    let bound = moment_plus_bound(&q, BoundMode::First).unwrap();
    assert!(bound.normalized.encloses(&a.normalized), "M = {p}: {a:?} not in {bound:?}");
    assert!(a.normalized.encloses(&b.normalized), "M = {p}: {b:?} not in {a:?}");
    assert!(elapsed.as_secs() < 120, "M = {p} took {elapsed:?}");
    if p >= 1000 {
        let improved = moment_plus_bound(&q, BoundMode::Improved).unwrap();
        assert!(improved.normalized.intersects(&a.normalized));
    }
}

#[test]
fn numeric_inside_bound_389() {
    check_level(389);
}

#[test]
fn numeric_inside_bound_433() {
    check_level(433);
}

#[test]
fn numeric_inside_bound_1009() {
    check_level(1009);
}

#[test]
fn numeric_at_37_matches_the_single_form() {
    // S_2(37)^+ is spanned by the newform of 37a, so 4π<a_1, L'> = L'(37a,1)/‖f‖².
    let q = MomentQuery::plus(1, 37).unwrap();
    let e = moment_numeric(&q, &TailParams::default_for(37)).unwrap();
    let scaled = e.normalized * (4.0 * PI);
    assert!(scaled.contains(0.305_999_773_834 / 0.371_754_147_510_696));
}

#[test]
fn budget_exhaustion_reports_partial_enclosure() {
    let q = MomentQuery::plus(1, 389).unwrap();
    let tail = TailParams { c_max: 389 * 1_000_000, d_max: 2_000_000, weight_floor: 1e-18 };
    match moment_numeric(&q, &tail) {
        Err(Error::Budget { partial: Some(p), .. }) => assert!(p.width() > 0.0),
        other => panic!("{other:?}"),
    }
}
