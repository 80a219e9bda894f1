//! The coefficients `a(λ)`, `b(λ)` of `u_λ = a u0 + b v0` right of the support,
//! traveling-wave amplitudes and the reflection probability.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::State;
use crate::problem::{wronskian, ScatteringProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ode,
    Series,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ode => "ode",
            Method::Series => "series",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub lambda: Complex64,
    pub method: Method,
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionResult {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// `|β/α|²`
    pub reflection: f64,
    /// `|α|² - |β|² - 1`
    pub flux_defect: f64,
}

/// `a(λ)` and `b(λ)` from the state of `u_λ` at `x = 1+`.
///
/// `b = W[u0, u_λ]` and `a = -W[v0, u_λ]`, both evaluated with the reference
/// data at `x = 1`.
pub fn coefficients(problem: &ScatteringProblem, lambda: Complex64) -> Result<Coefficients> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(Coefficients {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            lambda,
            method: Method::Ode,
            err: 0.0,
        });
    }
    let r = problem.reference();
    let out = problem.equation().propagate(lambda, r.u0_at_0)?;
    let (b, a) = coefficients_from_state(problem, out.state);
    let scale = |s: State| s[0].norm() + s[1].norm();
    let err = out.err_estimate * scale(r.u0_at_1).max(scale(r.v0_at_1));
    Ok(Coefficients { a, b, lambda, method: Method::Ode, err })
}

/// `(b, a)` for a state of `u_λ` at `1+`.
pub(crate) fn coefficients_from_state(problem: &ScatteringProblem, state: State) -> (Complex64, Complex64) {
    let r = problem.reference();
    (wronskian(r.u0_at_1, state), -wronskian(r.v0_at_1, state))
}

/// `b(λ)` alone.
pub fn b_value(problem: &ScatteringProblem, lambda: Complex64) -> Result<Complex64> {
    coefficients(problem, lambda).map(|c| c.b)
}

/// Traveling-wave decomposition `u_λ = α u0 + β conj(u0)` right of the support.
pub fn reflection(problem: &ScatteringProblem, lambda: f64) -> Result<ReflectionResult> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("coupling constant must be finite".into()));
    }
    let r = problem.reference();
    let u0 = r.u0_at_0;
    let u0bar = [u0[0].conj(), u0[1].conj()];
    let flux = wronskian(u0, u0bar);
    let scale = u0[0].norm_sqr() + u0[1].norm_sqr();
    if flux.norm() <= 1e-12 * scale {
        return Err(Error::NoTravelingBasis);
    }
    let lam = Complex64::new(lambda, 0.0);
    let state = if lambda == 0.0 { r.u0_at_1 } else { problem.equation().propagate(lam, u0)?.state };
    let u1 = r.u0_at_1;
    let u1bar = [u1[0].conj(), u1[1].conj()];
    // W[u0, conj u0] is constant in x; use the value at 1 for consistency with the state
    let flux1 = wronskian(u1, u1bar);
    let beta = wronskian(u1, state) / flux1;
    let alpha = wronskian(u1bar, state) / wronskian(u1bar, u1);
    let reflection = (beta / alpha).norm_sqr();
    let flux_defect = alpha.norm_sqr() - beta.norm_sqr() - 1.0;
    Ok(ReflectionResult { alpha, beta, reflection, flux_defect })
}

/// Replaces `u0` by its real part, or by its imaginary part when the real part vanishes.
pub fn realify(problem: &ScatteringProblem) -> Result<ScatteringProblem> {
    let u = problem.u0_init();
    if u.iter().all(|z| z.im == 0.0) {
        return Ok(problem.clone());
    }
    let re = [Complex64::new(u[0].re, 0.0), Complex64::new(u[1].re, 0.0)];
    let im = [Complex64::new(u[0].im, 0.0), Complex64::new(u[1].im, 0.0)];
    let zero = Complex64::new(0.0, 0.0);
    let pick = if re.iter().any(|z| *z != zero) { re } else { im };
    problem.with_u0(pick)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::problem::build_problem;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_coupling() {
        let p = build_problem(PotentialSpec::constant(-2.0), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        let k = coefficients(&p, c(0.0, 0.0)).unwrap();
        assert_eq!((k.a, k.b, k.err), (c(1.0, 0.0), c(0.0, 0.0), 0.0));
        let r = reflection(&p, 0.0).unwrap();
        assert_eq!(r.reflection, 0.0);
        assert!((r.alpha - 1.0).norm() < 1e-15 && r.beta.norm() < 1e-15);
    }

    #[test]
    fn free_barrier_closed_form() {
        let p = build_problem(PotentialSpec::zero(), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let k = coefficients(&p, c(4.0, 0.0)).unwrap();
        let (ch, sh) = (2f64.cosh(), 2f64.sinh());
        assert!((k.b - c(-2.0 * sh, 0.0)).norm() < 1e-13);
        assert!((k.a - c(ch - 2.0 * sh, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn realify_rules() {
        let zero = PotentialSpec::zero();
        let p = build_problem(PotentialSpec::constant(-1.0), zero.clone(), [c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(realify(&p).unwrap().u0_init(), [c(1.0, 0.0), c(0.0, 0.0)]);
        let p = build_problem(PotentialSpec::constant(-1.0), zero.clone(), [c(0.0, 1.0), c(0.0, 3.0)]).unwrap();
        assert_eq!(realify(&p).unwrap().u0_init(), [c(1.0, 0.0), c(3.0, 0.0)]);
        let p = build_problem(PotentialSpec::constant(-1.0), zero, [c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(realify(&p).unwrap(), p);
    }

    #[test]
    fn real_reference_has_no_traveling_basis() {
        let p = build_problem(PotentialSpec::zero(), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(reflection(&p, 1.0).unwrap_err(), Error::NoTravelingBasis);
    }
}
