//! Deduplication of converged orbits and grouping into connected families.

use std::collections::HashMap;

use crate::surface::{wrap_half, Point};

fn dist(a: &Point, b: &Point) -> f64 {
    (a.x - b.x).hypot(wrap_half(a.y - b.y))
}

/// Uniform grid over the cylinder for neighbour queries.
struct SpatialHash {
    cell: f64,
    wrap: i64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialHash {
    /// Cells are at least `cell` wide and tile the circle exactly.
    fn new(cell: f64) -> Self {
        let wrap = (1.0 / cell).floor().clamp(1.0, 1e7) as i64;
        Self { cell: 1.0 / wrap as f64, wrap, cells: HashMap::new() }
    }

    fn key(&self, p: &Point) -> (i64, i64) {
        let y = p.y - p.y.floor();
        ((p.x / self.cell).floor() as i64, ((y / self.cell).floor() as i64).rem_euclid(self.wrap))
    }

    fn insert(&mut self, p: &Point, id: usize) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(id);
    }

    fn near(&self, p: &Point) -> impl Iterator<Item = usize> + '_ {
        let (kx, ky) = self.key(p);
        let wrap = self.wrap;
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                self.cells.get(&(kx + dx, (ky + dy).rem_euclid(wrap))).into_iter().flatten().copied()
            })
        })
    }
}

/// Drops orbits having a point within `tol` of an already kept orbit.
pub(super) fn dedup(orbits: Vec<(Vec<Point>, f64)>, tol: f64) -> Vec<(Vec<Point>, f64)> {
    let mut hash = SpatialHash::new(tol);
    let mut kept: Vec<(Vec<Point>, f64)> = Vec::new();
    for (pts, res) in orbits {
        let dup = pts.iter().any(|p| hash.near(p).any(|id| kept[id].0.iter().any(|q| dist(p, q) < tol)));
        if dup {
            continue;
        }
        let id = kept.len();
        for p in &pts {
            hash.insert(p, id);
        }
        kept.push((pts, res));
    }
    kept
}

pub(super) struct Family {
    pub points: Vec<Point>,
    pub residual: f64,
    pub continuum: bool,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Links orbits with points closer than `link`. A linked group of at least
/// three orbits, or of two whose points leave no angular gap wider than
/// `gap`, is a continuum and is reported once; everything else is kept.
pub(super) fn families(orbits: Vec<(Vec<Point>, f64)>, link: f64, gap: f64) -> Vec<Family> {
    let n = orbits.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut hash = SpatialHash::new(link);
    for (id, (pts, _)) in orbits.iter().enumerate() {
        for p in pts {
            let near: Vec<usize> = hash.near(p).collect();
            for other in near {
                if other != id && orbits[other].0.iter().any(|q| dist(p, q) < link) {
                    let (a, b) = (find(&mut parent, id), find(&mut parent, other));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
            hash.insert(p, id);
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        members[r].push(i);
    }
    let mut out = Vec::new();
    let mut orbits: Vec<Option<(Vec<Point>, f64)>> = orbits.into_iter().map(Some).collect();
    for group in members.into_iter().filter(|g| !g.is_empty()) {
        let continuum = group.len() >= 3 || (group.len() == 2 && max_gap(group.iter().flat_map(|&i| orbits[i].as_ref().unwrap().0.iter())) < gap);
        if continuum {
            let (points, residual) = orbits[group[0]].take().unwrap();
            out.push(Family { points, residual, continuum: true });
        } else {
            for i in group {
                let (points, residual) = orbits[i].take().unwrap();
                out.push(Family { points, residual, continuum: false });
            }
        }
    }
    out
}

/// Largest gap between the angular coordinates, on the circle.
fn max_gap<'a>(pts: impl Iterator<Item = &'a Point>) -> f64 {
    let mut ys: Vec<f64> = pts.map(|p| p.y - p.y.floor()).collect();
    if ys.is_empty() {
        return 1.0;
    }
    ys.sort_by(f64::total_cmp);
    let mut g = ys[0] + 1.0 - ys[ys.len() - 1];
    for w in ys.windows(2) {
        g = g.max(w[1] - w[0]);
    }
    g
}
