//! Self-adjoint operators `H_λ u = -u'' + (Q + λV) u` on `[0, 1]` with the
//! boundary conditions that `u0` itself satisfies, negative-eigenvalue counts by
//! Prüfer oscillation, and tent-function minimax witnesses.
//!
//! Prüfer convention: `u = ρ sin φ`, `u' = ρ cos φ`, so `φ' = cos²φ - q sin²φ`
//! with `q = Q + λV`. Boundary conditions `cos θ u + sin θ u' = 0` start the
//! phase at `φ(0) = -θ0 mod π ∈ [0, π)`; the `n`-th eigenvalue is where
//! `φ(1) = β + nπ` with `β = -θ1 mod π` taken in `(0, π]`. Integrating at
//! energy zero therefore counts the negative eigenvalues directly.
//!
//! Spikes act as form perturbations `λ w |u(p)|²`: the boundary condition at 0
//! applies before a spike sitting at 0 and the one at 1 after a spike at 1, which
//! matches the convention used for `b(λ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::Equation;
use crate::poly;
use crate::potential::PotentialSpec;
use crate::problem::ScatteringProblem;
use crate::quadrature::gauss_legendre;

/// Phase distance to an eigenvalue condition treated as a hit.
pub const PHASE_TOL: f64 = 1e-6;

/// Smallest tent half-width tried by [`tent_witness`].
pub const MIN_TENT_EPSILON: f64 = 1.0 / (1u64 << 20) as f64;

const MAX_CANDIDATES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryAngles {
    pub theta0: f64,
    pub theta1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCount {
    /// Number of eigenvalues strictly below zero.
    pub count: usize,
    /// Zero itself is an eigenvalue within [`PHASE_TOL`].
    pub zero_is_eigenvalue: bool,
    /// Prüfer phase at `x = 1+`.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TentWitness {
    pub centers: Vec<f64>,
    pub epsilon: f64,
    pub rayleigh_values: Vec<f64>,
}

fn angle_mod_pi(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// `θ ∈ [0, π)` with `cos θ u + sin θ u' = 0` for the unit-normalised pair.
fn boundary_angle(u: f64, du: f64) -> f64 {
    let n = u.hypot(du);
    angle_mod_pi((-u / n).atan2(du / n))
}

pub fn boundary_angles(problem: &ScatteringProblem) -> Result<BoundaryAngles> {
    if !problem.has_real_reference() {
        return Err(Error::RequiresRealification);
    }
    let r = problem.reference();
    Ok(BoundaryAngles {
        theta0: boundary_angle(r.u0_at_0[0].re, r.u0_at_0[1].re),
        theta1: boundary_angle(r.u0_at_1[0].re, r.u0_at_1[1].re),
    })
}

/// Prüfer phase at `1+` for real `λ`, and the target `β ∈ (0, π]`.
fn prufer_phase(problem: &ScatteringProblem, lambda: f64, angles: BoundaryAngles) -> Result<(f64, f64)> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("coupling constant must be finite".into()));
    }
    let v = problem.perturbation();
    let smooth_v = PotentialSpec::new(v.segments().to_vec(), Vec::new())?;
    let eq = Equation::new(problem.background(), &smooth_v, problem.tolerances());
    let lam = Complex64::new(lambda, 0.0);

    let mut phi = angle_mod_pi(-angles.theta0);
    let mut state = [Complex64::new(phi.sin(), 0.0), Complex64::new(phi.cos(), 0.0)];
    let mut raw = phi;

    let jump = |phi: &mut f64, raw: &mut f64, state: &mut [Complex64; 2], w: f64| {
        if state[0].re == 0.0 {
            return;
        }
        state[1] += lam * w * state[0];
        let k = (*phi / PI).floor();
        *raw = state[0].re.atan2(state[1].re);
        *phi = k * PI + angle_mod_pi(*raw);
    };

    for s in v.spikes().iter().filter(|s| s.position == 0.0) {
        jump(&mut phi, &mut raw, &mut state, s.weight);
    }

    let mut knots: Vec<f64> = problem.background().breakpoints();
    knots.extend(v.breakpoints());
    knots.extend(v.spikes().iter().map(|s| s.position));
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let bound = |p: &PotentialSpec| {
            let seg = p.segment_at(mid);
            let c = poly::taylor_shift(&seg.coeffs, a - seg.lo());
            c.iter().enumerate().map(|(j, x)| x.abs() * (b - a).powi(j as i32)).sum::<f64>()
        };
        let qmax = bound(problem.background()) + lambda.abs() * bound(&smooth_v);
        let h_max = 0.25 * PI / (1.0 + qmax);
        let steps = ((b - a) / h_max).ceil().max(1.0) as usize;
        for i in 0..steps {
            let x0 = a + (b - a) * i as f64 / steps as f64;
            let x1 = if i + 1 == steps { b } else { a + (b - a) * (i + 1) as f64 / steps as f64 };
            let out = eq.propagate_between(lam, x0, x1, state)?.state;
            // keep the pair well scaled; the phase only depends on the direction
            let n = out[0].norm().max(out[1].norm());
            state = [out[0] / n, out[1] / n];
            let next = state[0].re.atan2(state[1].re);
            let mut d = next - raw;
            if d > PI {
                d -= 2.0 * PI;
            } else if d <= -PI {
                d += 2.0 * PI;
            }
            phi += d;
            raw = next;
        }
        for s in v.spikes().iter().filter(|s| s.position == b) {
            jump(&mut phi, &mut raw, &mut state, s.weight);
        }
    }
    let mut beta = angle_mod_pi(-angles.theta1);
    if beta == 0.0 {
        beta = PI;
    }
    Ok((phi, beta))
}

/// Number of negative eigenvalues of `H_λ` with the `θ` boundary conditions.
pub fn negative_eigenvalue_count(
    problem: &ScatteringProblem,
    lambda: f64,
    angles: BoundaryAngles,
) -> Result<EigenCount> {
    let (phase, beta) = prufer_phase(problem, lambda, angles)?;
    let d = (phase - beta) / PI;
    let nearest = d.round();
    let zero_is_eigenvalue = nearest >= 0.0 && (phase - beta - nearest * PI).abs() <= PHASE_TOL;
    let count = if zero_is_eigenvalue { nearest as usize } else { d.ceil().max(0.0) as usize };
    Ok(EigenCount { count, zero_is_eigenvalue, phase })
}

/// Whether zero is an eigenvalue of `H_λ`, i.e. `b(λ) = 0`.
pub fn zero_eigen_check(problem: &ScatteringProblem, lambda: f64, angles: BoundaryAngles) -> Result<bool> {
    negative_eigenvalue_count(problem, lambda, angles).map(|c| c.zero_is_eigenvalue)
}

/// `φ_ε(x) = √(3/2) ε^{-3/2} (ε - |x|)₊`, normalised in `L²`.
pub fn tent(x: f64, epsilon: f64) -> f64 {
    let d = epsilon - x.abs();
    if d <= 0.0 {
        0.0
    } else {
        (1.5f64).sqrt() * epsilon.powf(-1.5) * d
    }
}

/// `∫ (φ'² + (Q + λV) φ²)` for the tent centred at `center`, spikes included as
/// `λ w φ(p)²`.
pub fn rayleigh_quotient(problem: &ScatteringProblem, lambda: f64, center: f64, epsilon: f64) -> f64 {
    let (lo, hi) = (center - epsilon, center + epsilon);
    let mut knots = vec![lo, center, hi];
    knots.extend(problem.background().breakpoints().into_iter().filter(|&x| x > lo && x < hi));
    knots.extend(problem.perturbation().breakpoints().into_iter().filter(|&x| x > lo && x < hi));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let (nodes, weights) = gauss_legendre(12);
    let mut potential = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let qs = problem.background().segment_at(mid);
        let vs = problem.perturbation().segment_at(mid);
        for (t, wt) in nodes.iter().zip(&weights) {
            let x = mid + half * t;
            let phi = tent(x - center, epsilon);
            potential += wt * half * (qs.value(x) + lambda * vs.value(x)) * phi * phi;
        }
    }
    let spikes: f64 = problem
        .perturbation()
        .spikes()
        .iter()
        .map(|s| lambda * s.weight * tent(s.position - center, epsilon).powi(2))
        .sum();
    3.0 / (epsilon * epsilon) + potential + spikes
}

/// Searches for `count` tents with disjoint supports in `(0, 1)` and negative
/// Rayleigh quotients, halving `ε` from ¼ down to 2⁻²⁰. At each `ε` the
/// candidates are ordered by quotient and taken greedily.
pub fn tent_witness(problem: &ScatteringProblem, lambda: f64, count: usize) -> Result<TentWitness> {
    if count == 0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument("witness needs a positive tent count and finite coupling".into()));
    }
    let mut epsilon = 0.25;
    while epsilon >= MIN_TENT_EPSILON {
        if 2.0 * epsilon * count as f64 <= 1.0 {
            let span = 1.0 - 2.0 * epsilon;
            let n = ((span / (0.5 * epsilon)).floor() as usize + 1).min(MAX_CANDIDATES);
            let mut cands: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let c = if n == 1 { 0.5 } else { epsilon + span * i as f64 / (n - 1) as f64 };
                    (c, rayleigh_quotient(problem, lambda, c, epsilon))
                })
                .filter(|(_, r)| *r < 0.0)
                .collect();
            cands.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
            let mut chosen: Vec<(f64, f64)> = Vec::with_capacity(count);
            for (c, r) in cands {
                if chosen.iter().all(|(d, _)| (c - d).abs() >= 2.0 * epsilon) {
                    chosen.push((c, r));
                    if chosen.len() == count {
                        break;
                    }
                }
            }
            if chosen.len() == count {
                chosen.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (centers, rayleigh_values) = chosen.into_iter().unzip();
                return Ok(TentWitness { centers, epsilon, rayleigh_values });
            }
        }
        epsilon *= 0.5;
    }
    Err(Error::NoWitness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::build_problem;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn example_two() -> ScatteringProblem {
        build_problem(PotentialSpec::constant(-PI * PI), PotentialSpec::constant(-1.0), [c(0.0, 0.0), c(PI, 0.0)])
            .unwrap()
    }

    #[test]
    fn angle_examples() {
        let a = boundary_angles(&example_two()).unwrap();
        assert!(a.theta0.abs() < 1e-15);
        assert!(a.theta1.abs() < 1e-12 || (a.theta1 - PI).abs() < 1e-12);
        let free = build_problem(PotentialSpec::zero(), PotentialSpec::zero(), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = boundary_angles(&free).unwrap();
        assert!((a.theta0 - PI / 2.0).abs() < 1e-15 && (a.theta1 - PI / 2.0).abs() < 1e-15);
        // (u, u') = (1, 1)
        assert!((boundary_angle(1.0, 1.0) - 0.75 * PI).abs() < 1e-15);
        let complex =
            build_problem(PotentialSpec::constant(-1.0), PotentialSpec::zero(), [c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(boundary_angles(&complex).unwrap_err(), Error::RequiresRealification);
    }

    #[test]
    fn example_two_counts() {
        let p = example_two();
        let a = boundary_angles(&p).unwrap();
        let pi2 = PI * PI;
        let at = |l: f64| negative_eigenvalue_count(&p, l, a).unwrap();
        assert_eq!(at(0.0).count, 0);
        assert!(at(0.0).zero_is_eigenvalue);
        assert_eq!(at(5.0 * pi2).count, 2);
        assert!(!at(5.0 * pi2).zero_is_eigenvalue);
        assert_eq!(at(-pi2).count, 0);
        assert_eq!(at(35.0 * pi2).count, 5);
        assert!(at(35.0 * pi2).zero_is_eigenvalue);
        assert!(zero_eigen_check(&p, 3.0 * pi2, a).unwrap());
    }

    #[test]
    fn neumann_free_problem() {
        let p = build_problem(PotentialSpec::zero(), PotentialSpec::zero(), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = boundary_angles(&p).unwrap();
        for l in [-100.0, 0.0, 50.0] {
            let n = negative_eigenvalue_count(&p, l, a).unwrap();
            assert_eq!(n.count, 0);
            assert!(n.zero_is_eigenvalue);
        }
    }

    #[test]
    fn tent_is_normalised() {
        let (nodes, weights) = gauss_legendre(8);
        for eps in [0.25, 0.01, 1e-5] {
            // integrate φ² over (-ε, 0) and (0, ε); each half is a quadratic
            let half: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(t, w)| {
                    let x = 0.5 * eps * (t + 1.0);
                    w * 0.5 * eps * tent(x, eps).powi(2)
                })
                .sum();
            assert!((2.0 * half - 1.0).abs() < 1e-12, "eps = {eps}");
        }
    }

    #[test]
    fn no_witness_without_negative_form() {
        let p = build_problem(PotentialSpec::zero(), PotentialSpec::zero(), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(tent_witness(&p, -1e4, 3).unwrap_err(), Error::NoWitness);
        let chi =
            build_problem(PotentialSpec::zero(), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(tent_witness(&chi, 0.0, 1).unwrap_err(), Error::NoWitness);
    }

    #[test]
    fn witness_for_large_negative_coupling() {
        let p = build_problem(PotentialSpec::zero(), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w = tent_witness(&p, -1e4, 5).unwrap();
        assert_eq!(w.centers.len(), 5);
        assert!(w.rayleigh_values.iter().all(|r| *r < 0.0));
        assert!(w.centers.windows(2).all(|c| c[1] - c[0] >= 2.0 * w.epsilon));
        // 3/ε² - 10⁴ for a tent inside the support
        assert!((w.rayleigh_values[0] - (3.0 / (w.epsilon * w.epsilon) - 1e4)).abs() < 1e-8);
    }
}
