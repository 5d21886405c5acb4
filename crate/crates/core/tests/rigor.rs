use nvcert::rigor::{const_zeta32_squared, Dyadic, Enclosure};
use proptest::prelude::*;

fn enc() -> impl Strategy<Value = (f64, f64)> {
    (-1e3f64..1e3, 0.0f64..10.0).prop_map(|(a, w)| (a, a + w))
}

proptest! {
    #[test]
    fn arithmetic_widens_monotonically((a, b) in enc(), (c, d) in enc(), t in 0.0f64..1.0, u in 0.0f64..1.0) {
        let x = Enclosure::new(a, b);
        let y = Enclosure::new(c, d);
        let xs = Enclosure::point(a + t * (b - a));
        let ys = Enclosure::point(c + u * (d - c));
        prop_assert!((x + y).encloses(&(xs + ys)));
        prop_assert!((x - y).encloses(&(xs - ys)));
        prop_assert!((x * y).encloses(&(xs * ys)));
        if !y.contains(0.0) {
            prop_assert!((x / y).encloses(&(xs / ys)));
        }
        prop_assert!(x.sqr().encloses(&xs.sqr()));
        prop_assert!(x.abs().encloses(&xs.abs()));
    }

    #[test]
    fn elementary_functions_contain_point_values(x in 1e-6f64..50.0) {
        let e = Enclosure::point(x);
        prop_assert!(e.sqrt().contains(x.sqrt()));
        prop_assert!(e.ln().contains(x.ln()));
        let ex = (x / 10.0).exp();
        prop_assert!(Enclosure::point(x / 10.0).exp().contains(ex));
        prop_assert!(e.cos().contains(x.cos()) && e.sin().contains(x.sin()));
    }

    #[test]
    fn dyadic_refines_binary64(p in -10_000i64..10_000, q in 1i64..10_000) {
        let d = Dyadic::ratio(p, q);
        let e = Enclosure::ratio(p, q);
        prop_assert!(d.to_enclosure().is_subset_of(&e) || e.encloses(&d.to_enclosure()));
        prop_assert!(d.width_f64() <= e.width());
    }
}

#[test]
fn zeta_squared() {
    let z = const_zeta32_squared();
    assert!(z.contains(6.824_504_962_419_627));
    assert!(z.lo() >= 6.8 && z.hi() <= 6.9);
    assert!((z * Enclosure::point(4.0 * std::f64::consts::PI)).hi() <= 86.0);
    assert!(z.width() < 1e-9);
}

#[test]
fn constructors() {
    assert!(Enclosure::try_new(2.0, 1.0).is_none());
    assert!(Enclosure::try_new(f64::NAN, 1.0).is_none());
    let r = Enclosure::ratio(1, 3);
    assert!(r.lo() < r.hi() && r.lo().next_up() >= r.hi() && r.contains(1.0 / 3.0));
    assert!(Enclosure::from_u64((1 << 53) + 1).width() > 0.0);
    assert_eq!(Enclosure::from_u64(1 << 20).width(), 0.0);
}
