/// Counterclockwise convex hull by the monotone-chain method. Collinear
/// boundary points are dropped; duplicates collapse.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

/// Twice the signed area of the triangle `o, a, b`.
pub fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Whether `p` is inside or on a counterclockwise hull, up to `eps`.
pub fn hull_contains(hull: &[(f64, f64)], p: (f64, f64), eps: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => (hull[0].0 - p.0).hypot(hull[0].1 - p.1) <= eps,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let len = (b.0 - a.0).hypot(b.1 - a.1);
            let t = ((p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1)) / (len * len);
            cross(a, b, p).abs() / len <= eps && (-eps..=1.0 + eps).contains(&t)
        }
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= -eps),
    }
}
