use std::sync::Arc;

use super::*;
use crate::mapdef::{parse_map, MapDefinition};

fn field(src: &str) -> ActionField {
    ActionField::standard(Arc::new(parse_map(src).unwrap())).unwrap()
}

fn search(f: &ActionField, k_max: u32, grid: u32) -> SearchOutcome {
    find_periodic_orbits(f, &SearchParams { k_max, grid, m_range: None }).unwrap()
}

/// All `(k, m, x)` with `a1 x + a0 = m / k`, `gcd(k, m) = 1`, `x` in the chart.
fn twist_oracle(a1: f64, a0: f64, lo: f64, hi: f64, k_max: u32) -> Vec<(u32, i64, f64)> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for m in -100i64..=100 {
            if num_integer_gcd(k as i64, m) != 1 {
                continue;
            }
            let x = (m as f64 / k as f64 - a0) / a1;
            if x >= lo - 1e-12 && x <= hi + 1e-12 {
                out.push((k, m, x));
            }
        }
    }
    out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    out
}

fn num_integer_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[test]
fn twist_families_up_to_period_three() {
    let f = field("twist(1, 0) on annulus[0, 1]");
    let out = search(&f, 3, 16);
    let got: Vec<(u32, i64, f64, bool)> = out.orbits.iter().map(|o| (o.k, o.m, o.points[0].x, o.continuum)).collect();
    let xs: Vec<f64> = got.iter().map(|g| g.2).collect();
    assert_eq!(got.len(), 5, "{got:?}");
    for (x, want) in xs.iter().zip([0.0, 1.0, 0.5, 1.0 / 3.0, 2.0 / 3.0]) {
        assert!((x - want).abs() < 1e-12, "{got:?}");
    }
    assert!(got.iter().all(|g| g.3));
    let half = out.orbits.iter().find(|o| o.k == 2).unwrap();
    assert_eq!(half.rotation_number(), Ratio::new(1, 2));
    assert!((half.mean_action - 0.625).abs() < 1e-12);
}

#[test]
fn twist_matches_analytic_solution_set() {
    for (a1, a0, lo, hi) in [(1.0, 0.0, 0.0, 1.0), (0.6, 0.15, -1.0, 1.0)] {
        let src = format!("twist({a1}, {a0}) on annulus[{lo}, {hi}]");
        let out = search(&field(&src), 5, 16);
        let got: Vec<(u32, i64, f64)> = out.orbits.iter().map(|o| (o.k, o.m, o.points[0].x)).collect();
        let want = twist_oracle(a1, a0, lo, hi, 5);
        assert_eq!(got.len(), want.len(), "{src}: {got:?} vs {want:?}");
        for (g, w) in got.iter().zip(&want) {
            assert_eq!((g.0, g.1), (w.0, w.1));
            assert!((g.2 - w.2).abs() < 1e-8);
        }
    }
}

#[test]
fn irrational_rotation_has_no_periodic_orbits() {
    let f = ActionField::standard(Arc::new(MapDefinition::rotation(1.0 / 2f64.sqrt()))).unwrap();
    assert!(search(&f, 12, 8).orbits.is_empty());
}

#[test]
fn identity_is_one_fixed_family() {
    let f = ActionField::standard(Arc::new(MapDefinition::identity(Chart::annulus(0.0, 1.0).unwrap()))).unwrap();
    let out = search(&f, 1, 16);
    assert_eq!(out.orbits.len(), 1);
    assert!(out.orbits[0].continuum);
    assert_eq!(out.orbits[0].rho, Ratio::from_integer(0));
}

#[test]
fn birkhoff_on_twist() {
    let f = field("twist(1, 0) on annulus[0, 1]");
    let s = birkhoff(&f, &pt(0.3, 0.7), 1000).unwrap();
    assert!((s.rho_estimate - 0.3).abs() < 1e-12);
    assert!((s.action_average - 0.545).abs() < 1e-12);
    assert!(s.tail_gap < 1e-12);
}

#[test]
fn birkhoff_on_rotation() {
    let f = ActionField::standard(Arc::new(MapDefinition::rotation(0.37))).unwrap();
    for n in [2, 10, 333] {
        let s = birkhoff(&f, &pt(0.1, 0.2), n).unwrap();
        assert!((s.rho_estimate - 0.37).abs() < 1e-13);
        assert!(s.tail_gap < 1e-13);
    }
}

#[test]
fn orbit_averages_do_not_depend_on_the_start() {
    let f = field("compose(twist(1, 0), bump_twist((0.5, 0.5), 0.3, 0.2*bump(r))) on annulus[0, 1]");
    let out = search(&f, 2, 12);
    for o in &out.orbits {
        let base = f.mean_over(&o.points).unwrap();
        let mut rotated = o.points.clone();
        for _ in 0..o.points.len() {
            rotated.rotate_left(1);
            assert!((f.mean_over(&rotated).unwrap() - base).abs() < 1e-12);
        }
    }
}

#[test]
fn winding_window_bounds() {
    assert_eq!(winding_window(3, 0.0, 1.0), (-1, 4));
    assert_eq!(winding_window(2, 0.25, 0.25), (0, 1));
}
