use nvcert::arith::primes_in;
use nvcert::data::{bundled_data_dir, load_ns_dimensions, load_x0plus_genera};
use nvcert::error::Error;
use nvcert::geometry::*;

/// Unoptimised count over all `a`, `b` with `b² − 4ac = d`.
fn class_number_oracle(d: i64) -> u64 {
    let n = -d;
    let mut h = 0;
    for a in 1..=n {
        for b in -a..=a {
            if (b * b + n) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b + n) / (4 * a);
            let reduced = b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c));
            let g = gcd(gcd(a, b.abs()), c);
            if reduced && g == 1 {
                h += 1;
            }
        }
    }
    h
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn class_numbers_match_double_loop() {
    for d in (-10_000i64..0).filter(|d| d.rem_euclid(4) <= 1) {
        if d > -2000 || d % 97 == 0 {
            assert_eq!(class_number(d).unwrap(), class_number_oracle(d), "D = {d}");
        }
    }
}

#[test]
fn x0plus_genus_matches_database_for_primes_below_500() {
    let table = load_x0plus_genera(bundled_data_dir().join("x0plus_genera.jsonl")).unwrap();
    let primes = primes_in(2, 499);
    assert_eq!(primes.len(), table.len());
    for p in primes {
        assert_eq!(genus_x0plus(p).unwrap(), table[&p], "p = {p}");
    }
}

#[test]
fn genus_examples() {
    assert_eq!(genus_x0plus(23).unwrap(), 0);
    assert_eq!(genus_x0plus(67).unwrap(), 2);
    assert!(matches!(genus_x0plus(91), Err(Error::Composite(91))));
    let dims = load_ns_dimensions(bundled_data_dir().join("ns_dimensions.jsonl")).unwrap();
    assert_eq!(genus_xnsplus(13, &dims).unwrap(), 3);
    assert!(matches!(genus_xnsplus(53, &dims), Err(Error::InsufficientData(_))));
}

/// `(p² − 10p + 23 + 6(−1/p) + 4(−3/p))/24` for primes `p ≥ 5`.
fn xns_genus_closed_form(p: i64) -> i64 {
    let chi4 = if p % 4 == 1 { 1 } else { -1 };
    let chi3 = if p % 3 == 1 { 1 } else { -1 };
    (p * p - 10 * p + 23 + 6 * chi4 + 4 * chi3) / 24
}

#[test]
fn dimension_table_agrees_with_closed_form() {
    let dims = load_ns_dimensions(bundled_data_dir().join("ns_dimensions.jsonl")).unwrap();
    for (&p, &d) in dims.range(5..) {
        assert_eq!(d as i64, xns_genus_closed_form(p as i64), "p = {p}");
    }
}

#[test]
fn kappa_values() {
    let k3 = kappa(3).unwrap();
    assert!(k3.contains(1.0 + 2.0 / 3f64.ln()));
    assert!((k3.mid() - 2.82048).abs() < 1e-5);
    assert!(k3.width() < 1e-14);
    assert!(kappa(2).is_err());
    let ps = primes_in(5, 5000);
    for w in ps.windows(2) {
        let (a, b) = (kappa(w[0]).unwrap(), kappa(w[1]).unwrap());
        assert!(b.hi() < a.lo() && b.lo() > 1.0, "{} {}", w[0], w[1]);
    }
}

#[test]
fn point_bound_examples_and_monotonicity() {
    assert_eq!(genus_polynomial(2), 166);
    let base = PointBoundInput { p: 5, genus: 2, fp_count: 8, nv_product: 1 };
    assert_eq!(point_count_bound(&base).unwrap(), 2428);
    assert!(point_count_bound(&PointBoundInput { nv_product: 0, ..base }).is_err());
    assert!(point_count_bound(&PointBoundInput { genus: 1, ..base }).is_err());
    assert!(point_count_bound(&PointBoundInput { p: 2, ..base }).is_err());
    let b = |g, fp, nv| point_count_bound(&PointBoundInput { p: 7, genus: g, fp_count: fp, nv_product: nv }).unwrap();
    for g in 2..6 {
        for fp in 0..6 {
            for nv in 1..4 {
                assert!(b(g, fp, nv) <= b(g + 1, fp, nv));
                assert!(b(g, fp, nv) <= b(g, fp + 1, nv));
                assert!(b(g, fp, nv) <= b(g, fp, nv + 1));
            }
        }
    }
}
