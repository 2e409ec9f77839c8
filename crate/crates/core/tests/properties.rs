use std::sync::Arc;

use calabi_core::action::flux_along;
use calabi_core::analysis::{check_main_theorem, check_sandwich, convex_hull, cross, hull_contains};
use calabi_core::orbits::birkhoff;
use calabi_core::{
    find_periodic_orbits, invariants, parse_map, pt, ActionField, AreaMap, HypothesisValues, SearchParams, Status,
};
use proptest::prelude::*;

fn field(src: &str) -> ActionField {
    ActionField::standard(Arc::new(parse_map(src).unwrap())).unwrap()
}

/// A twist followed by a small bump twist inside the unit annulus.
fn bumped(a1: f64, a0: f64, cx: f64, cy: f64, amp: f64) -> String {
    format!("compose(twist({a1}, {a0}), bump_twist(({cx}, {cy}), 0.2, {amp}*bump(r))) on annulus[0, 1]")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lift_commutes_with_deck_translation(
        a1 in 0.1f64..2.0, a0 in -0.5f64..0.5, cx in 0.3f64..0.7, cy in 0.0f64..1.0, amp in -0.3f64..0.3,
        x in 0.0f64..1.0, y in -2.0f64..2.0, n in -3i32..3,
    ) {
        let m = parse_map(&bumped(a1, a0, cx, cy, amp)).unwrap();
        let p = m.lift(&pt(x, y)).unwrap();
        let q = m.lift(&pt(x, y + f64::from(n))).unwrap();
        prop_assert!((q.x - p.x).abs() < 1e-12);
        prop_assert!((q.y - p.y - f64::from(n)).abs() < 1e-9);
    }

    #[test]
    fn closed_form_maps_preserve_area(
        a1 in 0.1f64..2.0, a0 in -0.5f64..0.5, cx in 0.3f64..0.7, cy in 0.0f64..1.0, amp in -0.3f64..0.3,
        x in 0.0f64..1.0, y in 0.0f64..1.0,
    ) {
        let m = parse_map(&bumped(a1, a0, cx, cy, amp)).unwrap();
        let (_, j) = m.lift_jac(&pt(x, y)).unwrap();
        prop_assert!((j.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn twist_action_and_flux_match_closed_form(
        a1 in 0.1f64..2.0, a0 in -1.0f64..1.0, lo in -1.0f64..0.0, width in 0.2f64..2.0, s in 0.0f64..1.0, y in 0.0f64..1.0,
    ) {
        let hi = lo + width;
        let src = format!("twist({a1}, {a0}) on annulus[{lo}, {hi}]");
        let g = field(&src);
        let x = lo + s * width;
        // g(x) = a1 x²/2 + C with g on the outer boundary equal to a1 hi + a0.
        let want = a1 * x * x / 2.0 + a1 * hi + a0 - a1 * hi * hi / 2.0;
        prop_assert!((g.value(&pt(x, y)).unwrap() - want).abs() < 1e-9);
        let f = flux_along(g.map().as_ref(), y, 1e-12).unwrap().flux;
        let want = a1 * (hi * hi - lo * lo) / 2.0 + a0 * width;
        prop_assert!((f - want).abs() < 1e-9);
    }

    #[test]
    fn rotation_birkhoff_is_exact(c in -0.9f64..0.9, x in 0.0f64..1.0, y in 0.0f64..1.0, n in 2usize..200) {
        let g = field(&format!("rotation({c}) on annulus[0, 1]"));
        let b = birkhoff(&g, &pt(x, y), n).unwrap();
        prop_assert!((b.rho_estimate - c).abs() < 1e-12);
        prop_assert!((b.action_average - c).abs() < 1e-12);
    }

    #[test]
    fn hull_contains_every_point(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..60)) {
        let hull = convex_hull(&pts);
        for &p in &pts {
            prop_assert!(hull_contains(&hull, p, 1e-9));
        }
        let n = hull.len();
        if n >= 3 {
            for i in 0..n {
                prop_assert!(cross(hull[i], hull[(i + 1) % n], hull[(i + 2) % n]) > 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn verdicts_survive_recheck(a1 in 0.3f64..1.5, a0 in -0.3f64..0.3, k_max in 1u32..5) {
        let g = field(&format!("twist({a1}, {a0}) on annulus[0, 1]"));
        let atlas = find_periodic_orbits(&g, &SearchParams { k_max, grid: 12, m_range: None }).unwrap().orbits;
        let values = HypothesisValues::from_report(&invariants(&g, 1e-10).unwrap()).unwrap();
        let mut all = check_main_theorem(values, &atlas, &[0.0, 0.5, 2.0], 1e-6);
        all.push(check_sandwich(values, &atlas, 1e-6));
        for v in &all {
            prop_assert!(v.recheck(&atlas), "{}", v.check);
            if v.status == Status::WitnessFound {
                for w in v.witnesses.iter().flatten() {
                    prop_assert!(w.slack >= -v.tol);
                }
            }
        }
    }

    #[test]
    fn orbit_points_are_periodic(a1 in 0.3f64..1.5, a0 in -0.3f64..0.3, amp in -0.2f64..0.2) {
        let g = field(&bumped(a1, a0, 0.5, 0.5, amp));
        let atlas = find_periodic_orbits(&g, &SearchParams { k_max: 3, grid: 12, m_range: None }).unwrap().orbits;
        for o in &atlas {
            let m = g.map();
            let mut p = o.points[0];
            for _ in 0..o.k {
                p = m.lift(&p).unwrap();
            }
            prop_assert!((p.x - o.points[0].x).abs() < 1e-8);
            prop_assert!((p.y - o.points[0].y - o.m as f64).abs() < 1e-8);
        }
    }
}
