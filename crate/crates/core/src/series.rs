//! Power series of `a(λ)` and `b(λ)` from the Volterra equation
//! `u_λ(x) = u0(x) + λ ∫_0^x K(x,t) u_λ(t) dt`, with
//! `K(x,t) = [u0(x) v0(t) - v0(x) u0(t)] V(t)`.
//!
//! The simplex integrals are never formed directly. With `φ_0 = u0` and
//! `φ_n(x) = ∫_0^x K(x,t) φ_{n-1}(t) dt`,
//!
//! ```text
//! φ_n(x) = u0(x) A_n(x) - v0(x) B_n(x),
//! A_n(x) = ∫_0^x v0 V φ_{n-1},   B_n(x) = ∫_0^x u0 V φ_{n-1},
//! ```
//!
//! so every order costs one cumulative quadrature pass, and the coefficients are
//! `a_n = A_n(1)`, `b_n = -B_n(1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ScatteringProblem;
use crate::quadrature::ChebyshevPanel;
use crate::scattering::{Coefficients, Method};

/// Safety factor applied to the grid maximum in [`m_constant`].
pub const M_INFLATION: f64 = 1.01;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 16;

/// A series evaluation is flagged unusable above this certified error
/// (relative to `max(1, |a|, |b|)`).
pub const USABLE_ERR: f64 = 1e-6;

const M_GRID: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Panels per unit length; every breakpoint of `Q` and `V` is a panel edge.
    pub panels: usize,
    /// Chebyshev–Lobatto order on each panel.
    pub order: usize,
    /// Accepted quadrature error relative to the coefficient bound.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { panels: 8, order: 16, tol: 1e-8 }
    }
}

/// Truncated expansions with everything needed to certify an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub a_coeffs: Vec<Complex64>,
    pub b_coeffs: Vec<Complex64>,
    pub a_quad_err: Vec<f64>,
    pub b_quad_err: Vec<f64>,
    pub m_bound: f64,
    /// `sup |v0|` on the grid, inflated like `m_bound`; enters the bound for `a_n`.
    pub v0_sup: f64,
    pub l1_norm: f64,
    /// Indices whose coefficients exceed the factorial bound (expected empty).
    pub bound_violations: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvaluation {
    pub coefficients: Coefficients,
    pub a_err: f64,
    pub b_err: f64,
    pub usable: bool,
}

impl SeriesExpansion {
    pub fn order(&self) -> usize {
        self.b_coeffs.len() - 1
    }

    /// `M^{n+1} ‖V‖^n / (n! (n-1)^{n-1})`, with `0^0 = 1`.
    pub fn b_bound(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        log_term(self.m_bound, self.l1_norm, 1.0, n).exp()
    }

    /// `sup|v0| M^n ‖V‖^n / (n! (n-1)^{n-1})`.
    pub fn a_bound(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        self.b_bound(n) * self.v0_sup / self.m_bound
    }

    /// Bounds on `Σ_{n>N} |a_n| r^n` and `Σ_{n>N} |b_n| r^n`.
    pub fn tail_bound(&self, abs_lambda: f64) -> (f64, f64) {
        let b_tail = factorial_tail(self.m_bound, self.l1_norm, abs_lambda, self.order() + 1);
        (b_tail * self.v0_sup / self.m_bound, b_tail)
    }
}

/// `ln( M^{n+1} (‖V‖ r)^n / (n! (n-1)^{n-1}) )`.
fn log_term(m: f64, l1: f64, r: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut log_fact = 0.0;
    for k in 2..=n {
        log_fact += (k as f64).ln();
    }
    let power = if n > 1 { (nf - 1.0) * (nf - 1.0).ln() } else { 0.0 };
    (nf + 1.0) * m.ln() + nf * (l1 * r).ln() - log_fact - power
}

fn factorial_tail(m: f64, l1: f64, r: f64, from: usize) -> f64 {
    if l1 == 0.0 || r == 0.0 {
        return 0.0;
    }
    let mut log_t = log_term(m, l1, r, from);
    let mut sum = 0.0;
    let mut n = from;
    loop {
        let t = log_t.exp();
        sum += t;
        let nf = n as f64;
        // ratio t_{n+1}/t_n
        let prev_power = if n > 1 { (nf - 1.0) * (nf - 1.0).ln() } else { 0.0 };
        let log_ratio = (m * l1 * r).ln() - (nf + 1.0).ln() - (nf * nf.ln() - prev_power);
        if (log_ratio < -0.7 && t <= 1e-18 * sum) || n > 1_000_000 || !sum.is_finite() {
            break;
        }
        log_t += log_ratio;
        n += 1;
    }
    sum
}

/// `K(x, t)`; requires `0 ≤ t ≤ x ≤ 1` and a spike-free `V`.
pub fn kernel(problem: &ScatteringProblem, x: f64, t: f64) -> Result<Complex64> {
    if problem.perturbation().has_spikes() {
        return Err(Error::MeasureUnsupported);
    }
    if !(0.0 <= t && t <= x && x <= 1.0) {
        return Err(Error::InvalidArgument(format!("kernel needs 0 <= t <= x <= 1, got x = {x}, t = {t}")));
    }
    if x == t {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let st = problem.reference_states_at(&[t, x])?;
    let ((ut, vt), (ux, vx)) = (st[0], st[1]);
    Ok((ux[0] * vt[0] - vx[0] * ut[0]) * problem.perturbation().value(t))
}

/// Grid bound `M` with `|u0| ≤ M` and `|u0(s)v0(t) - v0(s)u0(t)| ≤ M |s - t|`
/// on `[0, 1]`, inflated by [`M_INFLATION`].
pub fn m_constant(problem: &ScatteringProblem) -> Result<f64> {
    Ok(reference_sups(problem)?.0)
}

fn reference_sups(problem: &ScatteringProblem) -> Result<(f64, f64)> {
    let xs: Vec<f64> = (0..M_GRID).map(|i| i as f64 / (M_GRID - 1) as f64).collect();
    let st = problem.reference_states_at(&xs)?;
    let u: Vec<Complex64> = st.iter().map(|(u, _)| u[0]).collect();
    let v: Vec<Complex64> = st.iter().map(|(_, v)| v[0]).collect();
    let u_sup = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let v_sup = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // on the diagonal the difference quotient tends to |W[u0, v0]| = 1
    let mut k_sup: f64 = 1.0;
    for i in 0..xs.len() {
        for j in 0..i {
            let g = u[i] * v[j] - v[i] * u[j];
            k_sup = k_sup.max(g.norm() / (xs[i] - xs[j]));
        }
    }
    Ok((M_INFLATION * u_sup.max(k_sup), M_INFLATION * v_sup))
}

/// Coefficients `a_0..a_N`, `b_0..b_N` with quadrature error estimates from a
/// second pass on twice as many panels.
pub fn series_coefficients(problem: &ScatteringProblem, order: usize, quad: QuadratureSpec) -> Result<SeriesExpansion> {
    if problem.perturbation().has_spikes() {
        return Err(Error::MeasureUnsupported);
    }
    if order == 0 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    if quad.panels == 0 || quad.order < 2 || quad.tol.is_nan() || quad.tol <= 0.0 {
        return Err(Error::InvalidArgument("quadrature spec needs panels >= 1, order >= 2, tol > 0".into()));
    }
    let (coarse_a, coarse_b) = nested_passes(problem, order, quad.panels, quad.order)?;
    let (a_coeffs, b_coeffs) = nested_passes(problem, order, 2 * quad.panels, quad.order)?;
    let (m_bound, v0_sup) = reference_sups(problem)?;
    let quad_err = |fine: &[Complex64], coarse: &[Complex64]| -> Vec<f64> {
        fine.iter().zip(coarse).map(|(f, c)| (f - c).norm() + 4.0 * f64::EPSILON * f.norm()).collect()
    };
    let a_quad_err = quad_err(&a_coeffs, &coarse_a);
    let b_quad_err = quad_err(&b_coeffs, &coarse_b);
    let mut exp = SeriesExpansion {
        a_coeffs,
        b_coeffs,
        a_quad_err,
        b_quad_err,
        m_bound,
        v0_sup,
        l1_norm: problem.perturbation().l1_norm(),
        bound_violations: Vec::new(),
    };
    for n in 1..=order {
        let (ba, bb) = (exp.a_bound(n), exp.b_bound(n));
        let estimate = exp.a_quad_err[n].max(exp.b_quad_err[n]);
        if estimate > quad.tol * ba.max(bb).max(f64::MIN_POSITIVE) && estimate > 1e-14 {
            return Err(Error::Precision { index: n, estimate });
        }
        let over = |c: Complex64, e: f64, bound: f64| c.norm() > bound * (1.0 + 1e-9) + e;
        if over(exp.a_coeffs[n], exp.a_quad_err[n], ba) || over(exp.b_coeffs[n], exp.b_quad_err[n], bb) {
            exp.bound_violations.push(n);
        }
    }
    Ok(exp)
}

fn nested_passes(
    problem: &ScatteringProblem,
    order: usize,
    panels_per_unit: usize,
    cheb_order: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let v = problem.perturbation();
    let mut edges: Vec<f64> = problem.background().breakpoints();
    edges.extend(v.breakpoints());
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let panel = ChebyshevPanel::new(cheb_order);
    let width = panel.len();
    let mut spans = Vec::new();
    for w in edges.windows(2) {
        let pieces = ((w[1] - w[0]) * panels_per_unit as f64).ceil().max(1.0) as usize;
        for i in 0..pieces {
            let lo = w[0] + (w[1] - w[0]) * i as f64 / pieces as f64;
            let hi = if i + 1 == pieces { w[1] } else { w[0] + (w[1] - w[0]) * (i + 1) as f64 / pieces as f64 };
            spans.push((lo, hi));
        }
    }
    let mut xs = Vec::with_capacity(spans.len() * width);
    let mut vvals = Vec::with_capacity(spans.len() * width);
    for &(lo, hi) in &spans {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let seg = v.segment_at(mid);
        for &t in &panel.nodes {
            let x = (mid + half * t).clamp(lo, hi);
            xs.push(x);
            vvals.push(seg.value(x));
        }
    }
    let st = problem.reference_states_at(&xs)?;
    let u: Vec<Complex64> = st.iter().map(|(u, _)| u[0]).collect();
    let w0: Vec<Complex64> = st.iter().map(|(_, v)| v[0]).collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut a_coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut b_coeffs = vec![zero];
    let mut phi = u.clone();
    let mut ga = vec![zero; width];
    let mut gb = vec![zero; width];
    for _ in 1..=order {
        let (mut a_run, mut b_run) = (zero, zero);
        let mut next = vec![zero; xs.len()];
        for (p, &(lo, hi)) in spans.iter().enumerate() {
            let half = 0.5 * (hi - lo);
            let base = p * width;
            for j in 0..width {
                let k = base + j;
                let vp = vvals[k] * phi[k];
                ga[j] = w0[k] * vp;
                gb[j] = u[k] * vp;
            }
            for (i, row) in panel.integration.iter().enumerate() {
                let (mut ia, mut ib) = (zero, zero);
                for j in 0..width {
                    ia += ga[j] * row[j];
                    ib += gb[j] * row[j];
                }
                let (ai, bi) = (a_run + ia * half, b_run + ib * half);
                let k = base + i;
                next[k] = u[k] * ai - w0[k] * bi;
                if i + 1 == width {
                    a_run = ai;
                    b_run = bi;
                }
            }
        }
        a_coeffs.push(a_run);
        b_coeffs.push(-b_run);
        phi = next;
    }
    Ok((a_coeffs, b_coeffs))
}

/// `Σ a_n λ^n`, `Σ b_n λ^n` with a certified error (quadrature error accumulation,
/// factorial tail bound and a rounding allowance).
pub fn evaluate_series(exp: &SeriesExpansion, lambda: Complex64) -> SeriesEvaluation {
    let zero = Complex64::new(0.0, 0.0);
    if lambda == zero {
        return SeriesEvaluation {
            coefficients: Coefficients {
                a: Complex64::new(1.0, 0.0),
                b: zero,
                lambda,
                method: Method::Series,
                err: 0.0,
            },
            a_err: 0.0,
            b_err: 0.0,
            usable: true,
        };
    }
    let r = lambda.norm();
    let horner = |c: &[Complex64]| c.iter().rev().fold(zero, |acc, &x| acc * lambda + x);
    let weighted = |e: &[f64]| e.iter().rev().fold(0.0, |acc, &x| acc * r + x);
    let abs_c: Vec<f64> = exp.a_coeffs.iter().map(|z| z.norm()).collect();
    let abs_b: Vec<f64> = exp.b_coeffs.iter().map(|z| z.norm()).collect();
    let rounding = 2.0 * f64::EPSILON * (exp.order() as f64 + 2.0);
    let a = horner(&exp.a_coeffs);
    let b = horner(&exp.b_coeffs);
    let (a_tail, b_tail) = exp.tail_bound(r);
    let a_err = weighted(&exp.a_quad_err) + a_tail + rounding * weighted(&abs_c);
    let b_err = weighted(&exp.b_quad_err) + b_tail + rounding * weighted(&abs_b);
    let err = a_err.max(b_err);
    let usable = err.is_finite() && err <= USABLE_ERR * 1f64.max(a.norm()).max(b.norm());
    SeriesEvaluation { coefficients: Coefficients { a, b, lambda, method: Method::Series, err }, a_err, b_err, usable }
}
