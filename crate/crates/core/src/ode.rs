//! Propagation of `(u, u')` for `-u'' + (Q + λV) u = 0` across `[0, 1]`.
//!
//! Pieces where both potentials are constant are crossed with the closed-form
//! `cosh`/`sinh` propagator. Polynomial pieces use an adaptive explicit Taylor
//! stepper: the coefficients obey `(n+1)(n+2) c_{n+2} = Σ_j q_j c_{n-j}`, so the
//! order is raised until the series tail falls below the working precision and
//! the step is shrunk only when that fails. Spikes `w δ(x - p)` are applied on
//! arrival at `p` from the left as the jump `u'(p+) = u'(p-) + λ w u(p)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::potential::PotentialSpec;

/// `(u, u')` at one abscissa.
pub type State = [Complex64; 2];

const MAX_ORDER: usize = 64;

/// Solver tolerance block shared by every operation on a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative accuracy requested from the ODE integrator.
    pub ode_rtol: f64,
    /// Allowed deviation of the reference Wronskian from one.
    pub wronskian: f64,
    /// Upper bound on a single Taylor step.
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ode_rtol: 1e-10, wronskian: 1e-10, max_step: 0.125 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.ode_rtol) && ok(self.wronskian) && ok(self.max_step) {
            Ok(())
        } else {
            Err(Error::InvalidProblem("tolerances must be positive and finite".into()))
        }
    }
}

/// Map of `(u(0), u'(0))` to `(u(1+), u'(1+))` at one coupling value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[Complex64; 2]; 2],
    pub lambda: Complex64,
    pub err_estimate: f64,
}

impl TransferMatrix {
    pub fn identity(lambda: Complex64) -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        TransferMatrix { entries: [[one, zero], [zero, one]], lambda, err_estimate: 0.0 }
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, s: State) -> State {
        let m = &self.entries;
        [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]]
    }

    /// `self` after `first`.
    pub fn after(&self, first: &TransferMatrix) -> TransferMatrix {
        let (a, b) = (&self.entries, &first.entries);
        let mut entries = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        TransferMatrix { entries, lambda: self.lambda, err_estimate: self.err_estimate + first.err_estimate }
    }
}

/// `u` is continuous across a spike; `u'` jumps by `λ w u`.
pub fn apply_delta(state: State, lambda: Complex64, weight: f64) -> State {
    [state[0], state[1] + lambda * weight * state[0]]
}

/// A state together with an absolute error estimate for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagated {
    pub state: State,
    pub err_estimate: f64,
}

/// The equation `-u'' + (Q + λV) u = 0` on `[0, 1]` for fixed potentials.
#[derive(Debug, Clone, Copy)]
pub struct Equation<'a> {
    background: &'a PotentialSpec,
    perturbation: &'a PotentialSpec,
    tolerances: Tolerances,
}

impl<'a> Equation<'a> {
    pub fn new(background: &'a PotentialSpec, perturbation: &'a PotentialSpec, tolerances: Tolerances) -> Self {
        Equation { background, perturbation, tolerances }
    }

    pub fn with_tolerances(self, tolerances: Tolerances) -> Self {
        Equation { tolerances, ..self }
    }

    pub fn background(&self) -> &'a PotentialSpec {
        self.background
    }

    pub fn perturbation(&self) -> &'a PotentialSpec {
        self.perturbation
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    /// `Q(x) + λ V(x)` for the absolutely continuous parts.
    pub fn coefficient(&self, lambda: Complex64, x: f64) -> Complex64 {
        self.background.value(x) + lambda * self.perturbation.value(x)
    }

    /// `(u(0-), u'(0-))` to `(u(1+), u'(1+))`.
    pub fn propagate(&self, lambda: Complex64, init: State) -> Result<Propagated> {
        let mut cols = [init];
        let err = self.advance_columns(lambda, 0.0, 1.0, true, &mut cols)?;
        Ok(Propagated { state: cols[0], err_estimate: err[0] })
    }

    /// Propagates a state given at `from+` to `to+`. Spikes in `(from, to]` are applied.
    pub fn propagate_between(&self, lambda: Complex64, from: f64, to: f64, state: State) -> Result<Propagated> {
        let mut cols = [state];
        let err = self.advance_columns(lambda, from, to, false, &mut cols)?;
        Ok(Propagated { state: cols[0], err_estimate: err[0] })
    }

    /// States at `x+` for each abscissa of the ascending list `xs`, starting from `init` at `0-`.
    pub fn states_at(&self, lambda: Complex64, init: State, xs: &[f64]) -> Result<Vec<State>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut cols = [init];
        let mut here = 0.0;
        let mut fresh = true;
        for &x in xs {
            if !(0.0..=1.0).contains(&x) || x < here {
                return Err(Error::InvalidArgument(format!("abscissae must be ascending in [0, 1], got {x}")));
            }
            self.advance_columns(lambda, here, x, fresh, &mut cols)?;
            fresh = false;
            here = x;
            out.push(cols[0]);
        }
        Ok(out)
    }

    pub fn transfer_matrix(&self, lambda: Complex64) -> Result<TransferMatrix> {
        self.transfer_between(lambda, 0.0, 1.0, true)
    }

    /// Transfer matrix from `from` to `to+`; `include_start_spike` decides whether a
    /// spike sitting exactly at `from` is crossed.
    pub fn transfer_between(
        &self,
        lambda: Complex64,
        from: f64,
        to: f64,
        include_start_spike: bool,
    ) -> Result<TransferMatrix> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut cols = [[one, zero], [zero, one]];
        let err = self.advance_columns(lambda, from, to, include_start_spike, &mut cols)?;
        Ok(TransferMatrix {
            entries: [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]],
            lambda,
            err_estimate: err[0].max(err[1]),
        })
    }

    fn advance_columns<const N: usize>(
        &self,
        lambda: Complex64,
        from: f64,
        to: f64,
        include_start_spike: bool,
        cols: &mut [State; N],
    ) -> Result<[f64; N]> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::InvalidArgument("coupling constant must be finite".into()));
        }
        let mut err = [0.0; N];
        let spikes = self.perturbation.spikes();
        if include_start_spike {
            for s in spikes.iter().filter(|s| s.position == from) {
                for c in cols.iter_mut() {
                    *c = apply_delta(*c, lambda, s.weight);
                }
            }
        }
        if to <= from {
            return Ok(err);
        }

        let mut knots: Vec<f64> = self
            .background
            .breakpoints()
            .into_iter()
            .chain(self.perturbation.breakpoints())
            .chain(spikes.iter().map(|s| s.position))
            .filter(|&x| x > from && x < to)
            .collect();
        knots.push(from);
        knots.push(to);
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let qs = self.background.segment_at(mid);
            let vs = self.perturbation.segment_at(mid);
            let qc = poly::taylor_shift(&qs.coeffs, a - qs.lo());
            let vc = poly::taylor_shift(&vs.coeffs, a - vs.lo());
            let degree = qc.len().max(vc.len());
            let mut q: Vec<Complex64> = (0..degree)
                .map(|j| {
                    let qj = qc.get(j).copied().unwrap_or(0.0);
                    let vj = vc.get(j).copied().unwrap_or(0.0);
                    Complex64::new(qj, 0.0) + lambda * vj
                })
                .collect();
            while q.len() > 1 && q[q.len() - 1] == Complex64::new(0.0, 0.0) {
                q.pop();
            }
            if q.is_empty() {
                q.push(Complex64::new(0.0, 0.0));
            }

            if q.len() == 1 {
                constant_piece(q[0], b - a, cols, &mut err);
            } else {
                taylor_piece(&q, a, b - a, self.tolerances, cols, &mut err)?;
            }
            for s in spikes.iter().filter(|s| s.position == b) {
                for c in cols.iter_mut() {
                    *c = apply_delta(*c, lambda, s.weight);
                }
            }
            for (k, c) in cols.iter().enumerate() {
                if !(c[0].is_finite() && c[1].is_finite()) {
                    return Err(Error::IntegrationFailure {
                        abscissa: b,
                        reason: format!("solution overflowed (column {k})"),
                    });
                }
            }
        }
        Ok(err)
    }
}

fn norm(s: &State) -> f64 {
    s[0].norm().max(s[1].norm())
}

/// Closed form for constant `q` over length `len`:
/// `[[cosh(σL), sinh(σL)/σ], [σ sinh(σL), cosh(σL)]]` with `σ² = q`.
fn constant_piece<const N: usize>(q: Complex64, len: f64, cols: &mut [State; N], err: &mut [f64; N]) {
    let z = q * len * len;
    let (c, s_over, s_times) = if z.norm() < 0.5 {
        // even series in σ; no branch choice needed
        let (mut even, mut odd) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..20 {
            even += term;
            let next = term / (2.0 * n as f64 + 1.0);
            odd += next;
            term = next * z / (2.0 * n as f64 + 2.0);
        }
        (even, odd * len, odd * q * len)
    } else {
        let sigma = q.sqrt();
        let arg = sigma * len;
        let sh = arg.sinh();
        (arg.cosh(), sh / sigma, sigma * sh)
    };
    let amp = c.norm() + s_over.norm() + s_times.norm();
    for (col, e) in cols.iter_mut().zip(err.iter_mut()) {
        let n_in = norm(col);
        *col = [c * col[0] + s_over * col[1], s_times * col[0] + c * col[1]];
        *e = *e * amp + 4.0 * f64::EPSILON * amp * n_in;
    }
}

fn taylor_piece<const N: usize>(
    q: &[Complex64],
    start: f64,
    len: f64,
    tol: Tolerances,
    cols: &mut [State; N],
    err: &mut [f64; N],
) -> Result<()> {
    // bound of |q| on the piece
    let qmax: f64 = q.iter().enumerate().map(|(j, c)| c.norm() * len.powi(j as i32)).sum();
    let kappa = qmax.sqrt();
    let target = (tol.ode_rtol * 1e-6).max(0.25 * f64::EPSILON);
    let h_floor = len * 1e-12;
    let mut pos = 0.0;
    let mut h_try = tol.max_step;
    if kappa > 0.0 {
        h_try = h_try.min(2.0 / kappa);
    }
    while pos < len {
        let mut h = h_try.min(len - pos);
        let local = poly::taylor_shift_complex(q, pos);
        loop {
            match taylor_step(&local, h, cols, target) {
                Some((next, local_err)) => {
                    for ((c, e), (n, le)) in cols.iter_mut().zip(err.iter_mut()).zip(next.iter().zip(local_err)) {
                        let growth = norm(n) / norm(c).max(f64::MIN_POSITIVE);
                        *e = *e * growth.max(1.0) + le;
                        *c = *n;
                    }
                    break;
                }
                None => {
                    h *= 0.5;
                    if h < h_floor {
                        return Err(Error::IntegrationFailure {
                            abscissa: start + pos,
                            reason: "step size underflow".into(),
                        });
                    }
                }
            }
        }
        pos = if len - pos <= h { len } else { pos + h };
    }
    Ok(())
}

/// One Taylor step of length `h`; `None` when the series tail does not drop below
/// `target` relative to the largest term within `MAX_ORDER` terms.
fn taylor_step<const N: usize>(
    q: &[Complex64],
    h: f64,
    cols: &[State; N],
    target: f64,
) -> Option<([State; N], [f64; N])> {
    let deg = q.len() - 1;
    let window = deg + 2;
    let qh: Vec<Complex64> = q.iter().enumerate().map(|(j, c)| c * h.powi(j as i32 + 2)).collect();
    let mut out = [[Complex64::new(0.0, 0.0); 2]; N];
    let mut errs = [0.0; N];
    let mut d = [Complex64::new(0.0, 0.0); MAX_ORDER + 1];
    for (k, col) in cols.iter().enumerate() {
        d[0] = col[0];
        d[1] = col[1] * h;
        let mut u = d[0] + d[1];
        let mut du = d[1];
        let mut biggest = d[0].norm().max(d[1].norm());
        let mut abs_sum = d[0].norm() + d[1].norm();
        let mut converged = false;
        for n in 2..=MAX_ORDER {
            let m = n - 2;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, qj) in qh.iter().enumerate().take(m + 1) {
                acc += qj * d[m - j];
            }
            d[n] = acc / ((n - 1) * n) as f64;
            u += d[n];
            du += d[n] * n as f64;
            let mag = d[n].norm();
            biggest = biggest.max(mag);
            abs_sum += mag * n as f64;
            if n > window {
                let tail: f64 = (n + 1 - window..=n).map(|i| d[i].norm() * i as f64).sum();
                if tail <= target * biggest {
                    errs[k] = tail + 4.0 * f64::EPSILON * abs_sum;
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return None;
        }
        out[k] = [u, du / h];
        // derivative error scales like 1/h relative to the scaled series
        errs[k] = errs[k].max(errs[k] / h);
    }
    Some((out, errs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Segment, Spike};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_jump() {
        let s = apply_delta([c(1.0, 0.0), c(0.0, 0.0)], c(2.0, 0.0), 3.0);
        assert_eq!(s, [c(1.0, 0.0), c(6.0, 0.0)]);
        let s = apply_delta([c(0.0, 0.0), c(5.0, 0.0)], c(-7.0, 1.0), 0.3);
        assert_eq!(s, [c(0.0, 0.0), c(5.0, 0.0)]);
    }

    #[test]
    fn free_zero_energy_is_shear() {
        let zero = PotentialSpec::zero();
        let eq = Equation::new(&zero, &zero, Tolerances::default());
        let m = eq.transfer_matrix(c(3.0, -1.0)).unwrap();
        assert_eq!(m.entries, [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    }

    #[test]
    fn constant_barrier_closed_form() {
        let zero = PotentialSpec::zero();
        let chi = PotentialSpec::constant(1.0);
        let eq = Equation::new(&zero, &chi, Tolerances::default());
        let m = eq.transfer_matrix(c(4.0, 0.0)).unwrap();
        let (ch, sh) = (2f64.cosh(), 2f64.sinh());
        let want = [[ch, sh / 2.0], [2.0 * sh, ch]];
        for (got, want) in m.entries.iter().flatten().zip(want.iter().flatten()) {
            assert!((got - c(*want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_matches_closed_form_when_split_as_polynomial() {
        // Q = -3 written as a degree-one polynomial with zero slope is still constant;
        // force the Taylor path with Q = -3 + 1e-300 x (numerically constant).
        let q_poly = PotentialSpec::polynomial(vec![-3.0, 1e-300]);
        let q_const = PotentialSpec::constant(-3.0);
        let v = PotentialSpec::polynomial(vec![0.5]);
        let lam = c(1.5, 0.7);
        let a = Equation::new(&q_poly, &v, Tolerances::default()).transfer_matrix(lam).unwrap();
        let b = Equation::new(&q_const, &v, Tolerances::default()).transfer_matrix(lam).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.entries[i][j] - b.entries[i][j]).norm() < 1e-13, "{:?} {:?}", a, b);
            }
        }
    }

    #[test]
    fn airy_like_equation_keeps_unit_determinant() {
        let q = PotentialSpec::polynomial(vec![-2.0, 5.0, -3.0]);
        let v = PotentialSpec::polynomial(vec![1.0, -2.0]);
        let eq = Equation::new(&q, &v, Tolerances::default());
        for lam in [c(0.0, 0.0), c(37.0, 0.0), c(-60.0, 25.0)] {
            let m = eq.transfer_matrix(lam).unwrap();
            assert!((m.det() - 1.0).norm() < 1e-11, "det {:?}", m.det());
        }
    }

    #[test]
    fn spike_at_start_and_end() {
        let q = PotentialSpec::constant(-1.0);
        let v = PotentialSpec::zero()
            .with_spikes(vec![Spike { position: 0.0, weight: 1.0 }, Spike { position: 1.0, weight: -1.0 }])
            .unwrap();
        let eq = Equation::new(&q, &v, Tolerances::default());
        let lam = c(1.0, 0.0);
        let out = eq.propagate(lam, [c(1.0, 0.0), c(0.0, 1.0)]).unwrap().state;
        // hand computation: jump at 0, free rotation, jump at 1
        let (cs, sn) = (1f64.cos(), 1f64.sin());
        let d0 = c(1.0, 1.0);
        let u1 = c(cs, 0.0) + d0 * sn;
        let du1 = c(-sn, 0.0) + d0 * cs - lam * u1;
        assert!((out[0] - u1).norm() < 1e-14);
        assert!((out[1] - du1).norm() < 1e-14);
    }

    #[test]
    fn states_at_reports_post_spike_values() {
        let q = PotentialSpec::zero();
        let v = PotentialSpec::new(vec![Segment::new(0.0, 1.0, vec![0.0])], vec![Spike { position: 0.5, weight: 2.0 }])
            .unwrap();
        let eq = Equation::new(&q, &v, Tolerances::default());
        let xs = [0.25, 0.5, 1.0];
        let st = eq.states_at(c(1.0, 0.0), [c(1.0, 0.0), c(0.0, 0.0)], &xs).unwrap();
        assert_eq!(st[1], [c(1.0, 0.0), c(2.0, 0.0)]);
        assert!((st[2][0] - c(2.0, 0.0)).norm() < 1e-15);
    }
}
