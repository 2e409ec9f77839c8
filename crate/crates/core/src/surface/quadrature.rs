//! Adaptive Gauss-Kronrod quadrature (G7/K15) in one and two dimensions.
//!
//! Both routines are globally adaptive: the cell with the largest error
//! estimate is bisected until the summed estimate drops below `tol` or the
//! subdivision budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1], positive half, descending; the last is 0.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default subdivision budget for line integrals.
pub const MAX_INTERVALS_1D: usize = 4000;
/// Default subdivision budget for area integrals.
pub const MAX_CELLS_2D: usize = 6000;

/// The 15 nodes with their Kronrod weight and (possibly zero) Gauss weight.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], wg);
        out[14 - i] = (XGK[i], WGK[i], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Debug, Clone, Copy)]
struct Cell<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    value: f64,
    error: f64,
    split: usize,
}

impl<const D: usize> PartialEq for Cell<D> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<const D: usize> Eq for Cell<D> {}
impl<const D: usize> PartialOrd for Cell<D> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize> Ord for Cell<D> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (mut k, mut g) = (0.0, 0.0);
    for (x, wk, wg) in rule() {
        let v = f(c + h * x)?;
        k += wk * v;
        g += wg * v;
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Tensor Kronrod rule on a cell. The error is estimated separately for
/// each axis from the Gauss rule along that axis, scaled as in QUADPACK
/// but never above the raw difference; the returned axis is the one to
/// bisect.
fn gk15_2d<F>(f: &mut F, lo: [f64; 2], hi: [f64; 2], span: [f64; 2]) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let cx = 0.5 * (lo[0] + hi[0]);
    let hx = 0.5 * (hi[0] - lo[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    let hy = 0.5 * (hi[1] - lo[1]);
    let nodes = rule();
    let mut vals = [[0.0; 15]; 15];
    let (mut k, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for (i, &(xi, wki, wgi)) in nodes.iter().enumerate() {
        let x = cx + hx * xi;
        for (j, &(yj, wkj, wgj)) in nodes.iter().enumerate() {
            let v = f(x, cy + hy * yj)?;
            vals[i][j] = v;
            k += wki * wkj * v;
            dx += (wki - wgi) * wkj * v;
            dy += wki * (wkj - wgj) * v;
        }
    }
    let mean = k / 4.0;
    let mut resasc = 0.0;
    for (i, &(_, wki, _)) in nodes.iter().enumerate() {
        for (j, &(_, wkj, _)) in nodes.iter().enumerate() {
            resasc += wki * wkj * (vals[i][j] - mean).abs();
        }
    }
    let scale = (hx * hy).abs();
    let resasc = resasc * scale;
    let scaled = |d: f64| {
        let d = (d * scale).abs();
        if resasc > 0.0 && d > 0.0 {
            (resasc * (200.0 * d / resasc).powf(1.5)).min(d)
        } else {
            d
        }
    };
    let (ex, ey) = (scaled(dx), scaled(dy));
    // Comparable errors: bisect the longer side (relative to the domain) to
    // keep cells from turning into slivers.
    let axis = if ex.max(ey) < 2.0 * ex.min(ey) { usize::from(hy * span[0] > hx * span[1]) } else { usize::from(ey > ex) };
    Ok((k * hx * hy, ex + ey, axis))
}

/// Integrates `f` over `[a, b]` with absolute error estimate at most `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_budget(f, a, b, tol, MAX_INTERVALS_1D)
}

pub fn integrate_with_budget<F>(mut f: F, a: f64, b: f64, tol: f64, budget: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let min_width = (b - a).abs() * 1e-13;
    let (value, error) = gk15(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Cell { lo: [a], hi: [b], value, error, split: 0 });
    let (mut total, mut total_err) = (value, error);
    let mut frozen_err = 0.0;
    let mut frozen = Vec::new();
    let mut intervals = 1;
    while total_err + frozen_err > tol.max(64.0 * f64::EPSILON * total.abs()) {
        let Some(cell) = heap.pop() else { break };
        if (cell.hi[0] - cell.lo[0]).abs() < min_width {
            frozen_err += cell.error;
            total_err -= cell.error;
            frozen.push(cell);
            continue;
        }
        if intervals >= budget {
            return Err(Error::NonConvergence {
                estimate: total_err + frozen_err,
                tol,
                intervals,
            });
        }
        let mid = 0.5 * (cell.lo[0] + cell.hi[0]);
        let (v1, e1) = gk15(&mut f, cell.lo[0], mid)?;
        let (v2, e2) = gk15(&mut f, mid, cell.hi[0])?;
        total += v1 + v2 - cell.value;
        total_err += e1 + e2 - cell.error;
        heap.push(Cell { lo: cell.lo, hi: [mid], value: v1, error: e1, split: 0 });
        heap.push(Cell { lo: [mid], hi: cell.hi, value: v2, error: e2, split: 0 });
        intervals += 1;
    }
    if frozen_err > tol {
        return Err(Error::NonConvergence { estimate: frozen_err, tol, intervals });
    }
    // Re-sum from the cells to shed the drift of the running total.
    Ok(heap.into_iter().chain(frozen).map(|c| c.value).sum())
}

/// Integrates `f` over the rectangle `[x0, x1] x [y0, y1]`.
pub fn integrate_2d<F>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    integrate_2d_with_budget(f, x, y, tol, MAX_CELLS_2D)
}

pub fn integrate_2d_with_budget<F>(
    mut f: F,
    x: (f64, f64),
    y: (f64, f64),
    tol: f64,
    budget: usize,
) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if x.0 == x.1 || y.0 == y.1 {
        return Ok(0.0);
    }
    let min_width = [(x.1 - x.0).abs() * 1e-9, (y.1 - y.0).abs() * 1e-9];
    let lo = [x.0, y.0];
    let span = [(x.1 - x.0).abs(), (y.1 - y.0).abs()];
    let hi = [x.1, y.1];
    let (value, error, split) = gk15_2d(&mut f, lo, hi, span)?;
    let mut heap = BinaryHeap::new();
    heap.push(Cell { lo, hi, value, error, split });
    let (mut total, mut total_err) = (value, error);
    let mut frozen = Vec::new();
    let mut frozen_err = 0.0;
    let mut cells = 1;
    while total_err + frozen_err > tol.max(64.0 * f64::EPSILON * total.abs()) {
        let Some(cell) = heap.pop() else { break };
        let ax = cell.split;
        if (cell.hi[ax] - cell.lo[ax]).abs() < min_width[ax] {
            frozen_err += cell.error;
            total_err -= cell.error;
            frozen.push(cell);
            continue;
        }
        if cells + 1 > budget {
            return Err(Error::NonConvergence {
                estimate: total_err + frozen_err,
                tol,
                intervals: cells,
            });
        }
        let mid = 0.5 * (cell.lo[ax] + cell.hi[ax]);
        let (mut hi_a, mut lo_b) = (cell.hi, cell.lo);
        hi_a[ax] = mid;
        lo_b[ax] = mid;
        total -= cell.value;
        total_err -= cell.error;
        for (qlo, qhi) in [(cell.lo, hi_a), (lo_b, cell.hi)] {
            let (v, e, split) = gk15_2d(&mut f, qlo, qhi, span)?;
            total += v;
            total_err += e;
            heap.push(Cell { lo: qlo, hi: qhi, value: v, error: e, split });
        }
        cells += 1;
    }
    if frozen_err > tol {
        return Err(Error::NonConvergence { estimate: frozen_err, tol, intervals: cells });
    }
    let resummed: f64 = heap.into_iter().chain(frozen).map(|c| c.value).sum();
    Ok(resummed)
}
