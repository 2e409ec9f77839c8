//! Periodic orbits on the universal cover and Birkhoff averages.

mod cluster;

use std::collections::BTreeMap;

use nalgebra::Vector2;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::action::{ActionChain, ActionField};
use crate::error::{Error, Result};
use crate::mapdef::{detect_boundary_rotations, AreaMap};
use crate::surface::{pt, wrap01, Chart, Mat2, Point, CHART_SLACK};

const NEWTON_MAX: usize = 40;
const MAX_HALVINGS: usize = 12;
/// Iterations allowed without halving the best residual before giving up.
const STALL_LIMIT: usize = 8;
const STEP_TOL: f64 = 1e-12;
const CERTIFY_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-6;

/// A periodic orbit `{p₀, …, p_{k−1}}` with `f̃ᵏ(p̃₀) = p̃₀ + (0, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    /// Orbit points in forward order, angles reduced to `[0, 1)`, starting
    /// at the lexicographically smallest point.
    pub points: Vec<Point>,
    pub k: u32,
    pub m: i64,
    pub rho: Ratio<i64>,
    pub mean_action: f64,
    pub residual: f64,
    /// Representative of a connected family of periodic orbits.
    pub continuum: bool,
}

impl PeriodicOrbit {
    pub fn rotation_number(&self) -> Ratio<i64> {
        self.rho
    }

    pub fn rho_f64(&self) -> f64 {
        self.m as f64 / self.k as f64
    }
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub k_max: u32,
    pub grid: u32,
    /// Restricts windings; the boundary-derived range is always applied too.
    pub m_range: Option<(i64, i64)>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { k_max: 12, grid: 64, m_range: None }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub orbits: Vec<PeriodicOrbit>,
    pub seeds: usize,
    /// Newton runs that did not converge to a certified orbit.
    pub dropped: usize,
}

/// Per-(k, m) winding window from the boundary rotation numbers.
pub fn winding_window(k: u32, theta_lo: f64, theta_hi: f64) -> (i64, i64) {
    let (a, b) = (theta_lo.min(theta_hi), theta_lo.max(theta_hi));
    ((k as f64 * a - 1.0).ceil() as i64, (k as f64 * b + 1.0).floor() as i64)
}

/// Cover iterate `f̃ᵏ(p)` and the accumulated Jacobian.
fn iterate_jac(map: &dyn AreaMap, p: &Point, k: u32) -> Result<(Point, Mat2)> {
    let mut q = *p;
    let mut j = Mat2::identity();
    for _ in 0..k {
        let (q2, j2) = map.lift_jac(&q)?;
        q = q2;
        j = j2 * j;
    }
    Ok((q, j))
}

pub fn iterate(map: &dyn AreaMap, p: &Point, k: u32) -> Result<Point> {
    let mut q = *p;
    for _ in 0..k {
        q = map.lift(&q)?;
    }
    Ok(q)
}

fn residual(map: &dyn AreaMap, p: &Point, k: u32, m: i64) -> Result<Vector2<f64>> {
    Ok(iterate(map, p, k)? - p - pt(0.0, m as f64))
}

/// Newton's method on `G(p) = f̃ᵏ(p) − p − (0, m)` with a pseudo-inverse
/// step and step halving whenever the residual grows. Gives up when no
/// halved step helps or the residual stalls.
fn newton(map: &dyn AreaMap, chart: &Chart, seed: Point, k: u32, m: i64) -> Option<Point> {
    let shift = pt(0.0, m as f64);
    let mut p = seed;
    let (q, mut dg) = iterate_jac(map, &p, k).ok()?;
    let mut g = q - p - shift;
    let mut best = g.norm();
    let mut stalled = 0;
    for _ in 0..NEWTON_MAX {
        dg -= Mat2::identity();
        let step = -dg.pseudo_inverse(1e-12).ok()? * g;
        if !step.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = p + step * scale;
            if chart.contains(&cand) {
                let cand = chart.clamp(cand);
                if let Ok((q, j)) = iterate_jac(map, &cand, k) {
                    let g2 = q - cand - shift;
                    if g2.norm() <= g.norm() {
                        accepted = Some((cand, g2, j));
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        let (cand, g2, j) = accepted?;
        let moved = (cand - p).norm();
        p = cand;
        g = g2;
        dg = j;
        if moved < STEP_TOL || g.norm() < 1e-14 {
            return (g.norm() < CERTIFY_TOL).then_some(p);
        }
        if g.norm() < 0.5 * best {
            best = g.norm();
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                break;
            }
        }
    }
    (g.norm() < CERTIFY_TOL).then_some(p)
}

/// Smallest period `d | k` with `f̃^d(p) = p + (0, m d / k)`.
fn primitive(map: &dyn AreaMap, p: &Point, k: u32, m: i64) -> Result<(u32, i64)> {
    for d in 1..k {
        if k % d != 0 || (m * d as i64) % k as i64 != 0 {
            continue;
        }
        let md = m * d as i64 / k as i64;
        if residual(map, p, d, md)?.norm() < CERTIFY_TOL {
            return Ok((d, md));
        }
    }
    Ok((k, m))
}

fn lex_less(a: &Point, b: &Point) -> bool {
    if (a.x - b.x).abs() > 1e-9 {
        a.x < b.x
    } else {
        a.y < b.y
    }
}

/// Orbit points from `p` in forward order, rotated to start at the
/// lexicographically smallest point.
fn orbit_points(map: &dyn AreaMap, p: &Point, k: u32) -> Result<Vec<Point>> {
    let mut pts = Vec::with_capacity(k as usize);
    let mut q = *p;
    for _ in 0..k {
        pts.push(pt(q.x, wrap01(q.y)));
        q = map.lift(&q)?;
    }
    let start = (0..pts.len()).fold(0, |best, i| if lex_less(&pts[i], &pts[best]) { i } else { best });
    pts.rotate_left(start);
    Ok(pts)
}

/// Fresh forward-iteration check of every orbit point.
fn certify(map: &dyn AreaMap, points: &[Point], k: u32, m: i64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(residual(map, p, k, m)?.norm());
    }
    Ok(worst)
}

struct Candidate {
    k: u32,
    m: i64,
    points: Vec<Point>,
    residual: f64,
}

fn seeds(chart: &Chart, grid: u32) -> Vec<Point> {
    let (lo, hi) = chart.radial_range();
    let n = grid as usize;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            out.push(pt(x, (j as f64 + 0.5) / n as f64));
        }
    }
    out
}

/// Searches for periodic orbits with period up to `k_max`.
///
/// For every seed of a `grid x grid` lattice and every period, Newton runs
/// for the windings nearest the seed's own displacement (within the allowed
/// window). Converged orbits are reduced to their primitive period,
/// certified by forward iteration, deduplicated, and families that fill a
/// curve are collapsed to one representative flagged `continuum`.
pub fn find_periodic_orbits(field: &ActionField, params: &SearchParams) -> Result<SearchOutcome> {
    if params.k_max < 1 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    if params.grid < 8 {
        return Err(Error::InvalidInput("grid must be at least 8".into()));
    }
    let map = field.map().as_ref();
    let chart = map.chart();
    let b = detect_boundary_rotations(map)?;
    let seed_pts = seeds(&chart, params.grid);

    let per_seed: Vec<(Vec<Candidate>, usize)> = seed_pts
        .par_iter()
        .map(|seed| {
            let mut found = Vec::new();
            let mut dropped = 0;
            let mut q = *seed;
            for k in 1..=params.k_max {
                q = match map.lift(&q) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                let disp = q.y - seed.y;
                let (mut lo, mut hi) = winding_window(k, b.theta_lower, b.theta_upper);
                if let Some((a, c)) = params.m_range {
                    lo = lo.max(a);
                    hi = hi.min(c);
                }
                let mut ms = vec![disp.floor() as i64, disp.ceil() as i64];
                ms.dedup();
                for m in ms.into_iter().filter(|m| (lo..=hi).contains(m)) {
                    match solve(map, &chart, *seed, k, m) {
                        Some(c) => found.push(c),
                        None => dropped += 1,
                    }
                }
            }
            (found, dropped)
        })
        .collect();

    let dropped = per_seed.iter().map(|s| s.1).sum();
    let mut groups: BTreeMap<(u32, i64), Vec<Candidate>> = BTreeMap::new();
    for c in per_seed.into_iter().flat_map(|s| s.0) {
        groups.entry((c.k, c.m)).or_default().push(c);
    }

    let (lo, hi) = chart.radial_range();
    let spacing = ((hi - lo) / params.grid as f64).max(1.0 / params.grid as f64);
    let mut orbits = Vec::new();
    for ((k, m), mut cands) in groups {
        cands.sort_by(|a, b| cmp_points(&a.points[0], &b.points[0]));
        let unique = cluster::dedup(cands.into_iter().map(|c| (c.points, c.residual)).collect(), DEDUP_TOL);
        for fam in cluster::families(unique, 2.0 * spacing, 2.0 / params.grid as f64) {
            let mean_action = field.mean_over(&fam.points)?;
            orbits.push(PeriodicOrbit {
                rho: Ratio::new(m, k as i64),
                points: fam.points,
                k,
                m,
                mean_action,
                residual: fam.residual,
                continuum: fam.continuum,
            });
        }
    }
    orbits.sort_by(|a, b| {
        (a.k, a.m).cmp(&(b.k, b.m)).then_with(|| cmp_points(&a.points[0], &b.points[0]))
    });
    Ok(SearchOutcome { orbits, seeds: seed_pts.len(), dropped })
}

fn cmp_points(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

fn solve(map: &dyn AreaMap, chart: &Chart, seed: Point, k: u32, m: i64) -> Option<Candidate> {
    let p = newton(map, chart, seed, k, m)?;
    if !chart.contains(&p) {
        return None;
    }
    let (k2, m2) = primitive(map, &p, k, m).ok()?;
    let points = orbit_points(map, &p, k2).ok()?;
    let res = certify(map, &points, k2, m2).ok()?;
    if res >= CERTIFY_TOL || points.iter().any(|q| q.x < chart.radial_range().0 - CHART_SLACK) {
        return None;
    }
    Some(Candidate { k: k2, m: m2, points, residual: res })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirkhoffSample {
    pub start: Point,
    pub n: usize,
    pub rho_estimate: f64,
    pub action_average: f64,
    /// `|ρ_N − ρ_{N/2}|`.
    pub tail_gap: f64,
}

/// Iterates the lift `n` times from `start`, averaging the angular
/// displacement and the action.
pub fn birkhoff(field: &ActionField, start: &Point, n: usize) -> Result<BirkhoffSample> {
    if n < 2 {
        return Err(Error::InvalidInput("Birkhoff averages need N >= 2".into()));
    }
    let map = field.map().as_ref();
    let mut p = *start;
    let mut sum = 0.0;
    let mut half = f64::NAN;
    let mut chain = ActionChain::new(field);
    for i in 0..n {
        if i == n / 2 {
            half = (p.y - start.y) / (n / 2) as f64;
        }
        sum += chain.value(&p)?;
        p = map.lift(&p)?;
    }
    let rho = (p.y - start.y) / n as f64;
    Ok(BirkhoffSample { start: *start, n, rho_estimate: rho, action_average: sum / n as f64, tail_gap: (rho - half).abs() })
}

/// Rotation estimate only, skipping the action evaluations.
pub fn birkhoff_rotation(map: &dyn AreaMap, start: &Point, n: usize) -> Result<f64> {
    let q = iterate(map, start, n as u32)?;
    Ok((q.y - start.y) / n as f64)
}

/// `n` starting points drawn uniformly with respect to the chart's area
/// measure, reproducible from `seed`.
pub fn random_starts(chart: &Chart, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = chart.radial_range();
    (0..n)
        .map(|_| {
            let (u, y): (f64, f64) = (rng.gen(), rng.gen());
            let s = if chart.is_disk() { u.sqrt() } else { lo + (hi - lo) * u };
            pt(s, y)
        })
        .collect()
}

/// Birkhoff samples from `starts`, evaluated in parallel; the output order
/// follows `starts`.
pub fn birkhoff_samples(field: &ActionField, starts: &[Point], n: usize) -> Result<Vec<BirkhoffSample>> {
    starts.par_iter().map(|p| birkhoff(field, p, n)).collect()
}

#[cfg(test)]
mod tests;
