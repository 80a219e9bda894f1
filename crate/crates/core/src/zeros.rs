//! Zeros of `b(λ)`: degeneracy test, real-axis scan, disk counts by the argument
//! principle, and growth-order fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::ScatteringProblem;
use crate::scattering::coefficients;

/// Ratio `max|b| / (1 + max|a|)` below which `b` is declared identically zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;
/// Refinement target for real zeros, relative to the scan scale.
pub const REFINE_TOL: f64 = 1e-10;
/// Largest accepted residual for a reported zero, relative to the scan scale.
pub const ACCEPT_TOL: f64 = 1e-8;
pub const MAX_MULTIPLICITY: u32 = 4;

/// An analytic function of the coupling constant.
pub trait EntireFunction: Sync {
    fn eval(&self, z: Complex64) -> Result<Complex64>;
}

impl<F> EntireFunction for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self(z))
    }
}

/// `λ ↦ b(λ)` for a fixed problem.
#[derive(Debug, Clone, Copy)]
pub struct WronskianB<'a>(pub &'a ScatteringProblem);

impl EntireFunction for WronskianB<'_> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        coefficients(self.0, z).map(|c| c.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub lambda: Complex64,
    pub multiplicity: u32,
    pub residual: f64,
    /// The local winding exceeded [`MAX_MULTIPLICITY`].
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroReport {
    pub zeros: Vec<Zero>,
    pub identically_zero: bool,
    pub scan_range: String,
    /// `max(1, max |b|)` over the scan grid; residuals are judged against it.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    pub log_max_modulus: Vec<f64>,
    pub count_exponent: f64,
    pub growth_exponent: f64,
    /// Larger of the two root-mean-square residuals of the log–log fits.
    pub fit_residual: f64,
}

/// Outcome of the argument principle on one circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Winding {
    pub count: i64,
    pub defect: f64,
    pub nodes: usize,
    pub max_modulus: f64,
}

/// Theorem-level dichotomy made numerical: `max|b| ≤ 1e-9 (1 + max|a|)` over 64
/// real points in `[-10, 10]` and 16 points on the circle `|λ| = 5`.
pub fn identically_zero(problem: &ScatteringProblem) -> Result<bool> {
    let mut pts: Vec<Complex64> = (0..64).map(|i| Complex64::new(-10.0 + 20.0 * i as f64 / 63.0, 0.0)).collect();
    pts.extend((0..16).map(|k| Complex64::from_polar(5.0, 2.0 * PI * (k as f64 + 0.5) / 16.0)));
    let vals = pts.par_iter().map(|&z| coefficients(problem, z)).collect::<Result<Vec<_>>>()?;
    let max_b = vals.iter().map(|c| c.b.norm()).fold(0.0, f64::max);
    let max_a = vals.iter().map(|c| c.a.norm()).fold(0.0, f64::max);
    Ok(max_b <= DEGENERACY_THRESHOLD * (1.0 + max_a))
}

/// Real zeros of `b` in `[lo, hi]`.
///
/// Sign changes on the grid are refined by safeguarded secant steps; interior
/// local minima of `|b|` without a sign change are polished by golden-section
/// search and kept when they reach the acceptance tolerance (even-order zeros).
/// Multiplicities come from the winding number on a small circle around each zero.
pub fn real_zero_scan(problem: &ScatteringProblem, lo: f64, hi: f64, grid_points: usize) -> Result<ZeroReport> {
    if !problem.has_real_reference() {
        return Err(Error::RequiresRealification);
    }
    if grid_points < 2 || !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidArgument("zero scan needs lo < hi and at least 2 grid points".into()));
    }
    let scan_range = format!("[{lo}, {hi}] with {grid_points} grid points");
    if identically_zero(problem)? {
        return Ok(ZeroReport { zeros: Vec::new(), identically_zero: true, scan_range, scale: 0.0 });
    }
    let f = WronskianB(problem);
    let real_b = |x: f64| f.eval(Complex64::new(x, 0.0)).map(|z| z.re);

    let mut grid: Vec<f64> = (0..grid_points).map(|i| lo + (hi - lo) * i as f64 / (grid_points - 1) as f64).collect();
    if lo < 0.0 && hi > 0.0 {
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let vals = grid.par_iter().map(|&x| real_b(x)).collect::<Result<Vec<f64>>>()?;
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let spacing = (hi - lo) / (grid_points - 1) as f64;

    let mut found: Vec<(f64, f64)> = Vec::new();
    for (i, (&x, &v)) in grid.iter().zip(&vals).enumerate() {
        if v == 0.0 {
            found.push((x, 0.0));
            continue;
        }
        if i + 1 < grid.len() {
            let (x1, v1) = (grid[i + 1], vals[i + 1]);
            if v1 != 0.0 && v.signum() != v1.signum() {
                found.push(refine_bracket(&real_b, (x, v), (x1, v1), scale)?);
            }
        }
        if i > 0 && i + 1 < grid.len() {
            let (vl, vr) = (vals[i - 1], vals[i + 1]);
            let same_sign = vl.signum() == v.signum() && vr.signum() == v.signum();
            if same_sign && v.abs() <= vl.abs() && v.abs() <= vr.abs() {
                let (xm, vm) = golden_min(&real_b, grid[i - 1], grid[i + 1])?;
                if vm.abs() <= ACCEPT_TOL * scale {
                    found.push((xm, vm.abs()));
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found.dedup_by(|b, a| (a.0 - b.0).abs() <= 1e-9 * spacing.max(a.0.abs()));

    let mut zeros = Vec::with_capacity(found.len());
    for (k, &(x, residual)) in found.iter().enumerate() {
        let mut gap = spacing;
        if k > 0 {
            gap = gap.min(x - found[k - 1].0);
        }
        if k + 1 < found.len() {
            gap = gap.min(found[k + 1].0 - x);
        }
        let radius = 0.25 * gap;
        let w = winding_number(&f, Complex64::new(x, 0.0), radius, 32)?;
        let raw = w.count.max(1) as u32;
        zeros.push(Zero {
            lambda: Complex64::new(x, 0.0),
            multiplicity: raw.min(MAX_MULTIPLICITY),
            residual,
            capped: raw > MAX_MULTIPLICITY,
        });
    }
    zeros.sort_by(|a, b| a.lambda.norm().total_cmp(&b.lambda.norm()));
    Ok(ZeroReport { zeros, identically_zero: false, scan_range, scale })
}

fn refine_bracket<F>(f: &F, mut a: (f64, f64), mut b: (f64, f64), scale: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    // Illinois variant of regula falsi, with bisection whenever the secant stalls
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b.0 - a.0;
        let mut x = (a.0 * b.1 - b.0 * a.1) / (b.1 - a.1);
        if !(x > a.0 && x < b.0) {
            x = 0.5 * (a.0 + b.0);
        }
        let v = f(x)?;
        if v == 0.0 || v.abs() <= REFINE_TOL * scale * 1e-2 {
            return Ok((x, v.abs()));
        }
        if v.signum() == a.1.signum() {
            a = (x, v);
            if side == -1 {
                b.1 *= 0.5;
            }
            side = -1;
        } else {
            b = (x, v);
            if side == 1 {
                a.1 *= 0.5;
            }
            side = 1;
        }
        if b.0 - a.0 > 0.7 * width {
            // force progress
            let m = 0.5 * (a.0 + b.0);
            let vm = f(m)?;
            if vm == 0.0 {
                return Ok((m, 0.0));
            }
            if vm.signum() == a.1.signum() {
                a = (m, vm);
            } else {
                b = (m, vm);
            }
            side = 0;
        }
        if b.0 - a.0 <= 4.0 * f64::EPSILON * a.0.abs().max(b.0.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    // true function values at the bracket ends (Illinois scaled the stored ones)
    let (fa, fb) = (f(a.0)?.abs(), f(b.0)?.abs());
    Ok(if fa <= fb { (a.0, fa) } else { (b.0, fb) })
}

fn golden_min<F>(f: &F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?.abs(), f(d)?.abs());
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?.abs();
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Winding number of `f` around the circle `|λ - center| = radius`.
///
/// Starts from `nodes` equally spaced points (angle 0 and π included) and bisects
/// every arc whose phase increment reaches π/2. Arcs shorter than `1e-6 · radius`
/// that still need refinement signal a zero on the contour.
pub fn winding_number<F: EntireFunction + ?Sized>(
    f: &F,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<Winding> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument("contour radius must be positive".into()));
    }
    let mut n0 = nodes.max(8);
    n0 += n0 % 2;
    let mut last_defect = 0.0;
    for _ in 0..4 {
        let w = winding_once(f, center, radius, n0)?;
        if w.defect < 0.25 {
            return Ok(w);
        }
        last_defect = w.defect;
        n0 *= 2;
    }
    Err(Error::WindingUnresolved { radius, defect: last_defect })
}

fn winding_once<F: EntireFunction + ?Sized>(f: &F, center: Complex64, radius: f64, n0: usize) -> Result<Winding> {
    let at = |theta: f64| center + Complex64::from_polar(radius, theta);
    let thetas: Vec<f64> = (0..n0).map(|k| 2.0 * PI * k as f64 / n0 as f64).collect();
    let vals = thetas.par_iter().map(|&t| f.eval(at(t))).collect::<Result<Vec<_>>>()?;
    let collision = || Error::ContourCollision { radius };
    if vals.iter().any(|v| *v == Complex64::new(0.0, 0.0) || !v.is_finite()) {
        return Err(collision());
    }
    let min_arc = 1e-6;
    let mut max_modulus = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut evaluated = n0;
    let mut pending: Vec<(f64, Complex64, f64, Complex64)> = (0..n0)
        .map(|k| {
            let next = (k + 1) % n0;
            let t1 = if next == 0 { 2.0 * PI } else { thetas[next] };
            (thetas[k], vals[k], t1, vals[next])
        })
        .collect();
    let mut total = 0.0;
    while !pending.is_empty() {
        let mut split = Vec::new();
        for arc in pending {
            let inc = (arc.3 / arc.1).arg();
            if inc.abs() < 0.5 * PI {
                total += inc;
            } else {
                if (arc.2 - arc.0) < min_arc {
                    return Err(collision());
                }
                split.push(arc);
            }
        }
        let mids = split.par_iter().map(|a| f.eval(at(0.5 * (a.0 + a.2)))).collect::<Result<Vec<_>>>()?;
        evaluated += mids.len();
        pending = Vec::with_capacity(2 * split.len());
        for (a, m) in split.into_iter().zip(mids) {
            if m == Complex64::new(0.0, 0.0) || !m.is_finite() {
                return Err(collision());
            }
            max_modulus = max_modulus.max(m.norm());
            let tm = 0.5 * (a.0 + a.2);
            pending.push((a.0, a.1, tm, m));
            pending.push((tm, m, a.2, a.3));
        }
    }
    let w = total / (2.0 * PI);
    let count = w.round() as i64;
    Ok(Winding { count, defect: (w - count as f64).abs(), nodes: evaluated, max_modulus })
}

/// Number of zeros of `b` in `|λ| ≤ r`, counted with multiplicity.
pub fn disk_zero_count(problem: &ScatteringProblem, r: f64, nodes: usize) -> Result<usize> {
    if identically_zero(problem)? {
        return Err(Error::Degenerate);
    }
    disk_zero_count_of(&WronskianB(problem), r, nodes)
}

pub fn disk_zero_count_of<F: EntireFunction + ?Sized>(f: &F, r: f64, nodes: usize) -> Result<usize> {
    let w = winding_number(f, Complex64::new(0.0, 0.0), r, nodes)?;
    usize::try_from(w.count).map_err(|_| Error::WindingUnresolved { radius: r, defect: w.defect })
}

/// Default starting node count for a circle of radius `r` around the origin;
/// functions of order ½ rotate roughly `√r` times.
pub fn default_nodes(r: f64) -> usize {
    (8.0 * r.sqrt()).ceil().max(64.0) as usize
}

/// Growth fit of `b` over circles of the given radii.
pub fn order_fit(problem: &ScatteringProblem, radii: &[f64]) -> Result<GrowthFit> {
    if identically_zero(problem)? {
        return Err(Error::Degenerate);
    }
    order_fit_of(&WronskianB(problem), radii)
}

/// `growth_exponent` is the slope of `ln ln max|f|` against `ln r`;
/// `count_exponent` the slope of `ln N(r)` against `ln r` (radii with `N = 0` are skipped).
pub fn order_fit_of<F: EntireFunction + ?Sized>(f: &F, radii: &[f64]) -> Result<GrowthFit> {
    if radii.len() < 4 {
        return Err(Error::InvalidArgument("order fit needs at least 4 radii".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radii must be positive and strictly increasing".into()));
    }
    let mut counts = Vec::with_capacity(radii.len());
    let mut log_max_modulus = Vec::with_capacity(radii.len());
    for &r in radii {
        let w = winding_number(f, Complex64::new(0.0, 0.0), r, default_nodes(r))?;
        counts.push(usize::try_from(w.count).map_err(|_| Error::WindingUnresolved { radius: r, defect: w.defect })?);
        log_max_modulus.push(w.max_modulus.ln());
    }
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    if log_max_modulus.iter().any(|m| *m <= 0.0) {
        return Err(Error::InvalidArgument(
            "max modulus must exceed 1 on every circle for a log-log growth fit".into(),
        ));
    }
    let llm: Vec<f64> = log_max_modulus.iter().map(|m| m.ln()).collect();
    let (growth_exponent, growth_res) = slope(&lr, &llm);
    let pairs: Vec<(f64, f64)> =
        lr.iter().zip(&counts).filter(|(_, &n)| n > 0).map(|(&x, &n)| (x, (n as f64).ln())).collect();
    let (count_exponent, count_res) = if pairs.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        slope(&xs, &ys)
    } else {
        (0.0, 0.0)
    };
    Ok(GrowthFit {
        radii: radii.to_vec(),
        counts,
        log_max_modulus,
        count_exponent,
        growth_exponent,
        fit_residual: growth_res.max(count_res),
    })
}

/// Least-squares slope and root-mean-square residual.
fn slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let s = sxy / sxx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - my - s * (a - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (s, rms)
}
