//! Validated problem instances: potentials, reference solutions `u0`, `v0` and
//! the solver tolerances.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{Equation, State, Tolerances};
use crate::potential::PotentialSpec;

/// `W[f, g] = f' g - f g'` from the two states at one abscissa.
pub fn wronskian(f: State, g: State) -> Complex64 {
    f[1] * g[0] - f[0] * g[1]
}

/// Initial data `(v0(0), v0'(0))` with `W[u0, v0] = 1`.
///
/// The constraint `u0'(0) v0(0) - u0(0) v0'(0) = 1` is one linear equation in two
/// unknowns; the minimal-norm solution is `conj(a) / |a|^2` with `a = (u0', -u0)`.
pub fn v0_from_u0(u0_init: State) -> Result<State> {
    let a = [u0_init[1], -u0_init[0]];
    let n2 = a[0].norm_sqr() + a[1].norm_sqr();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(Error::InvalidProblem("u0 initial data must be nonzero and finite".into()));
    }
    Ok([a[0].conj() / n2, a[1].conj() / n2])
}

/// Boundary data of the reference pair at both ends of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceData {
    pub u0_at_0: State,
    pub u0_at_1: State,
    pub v0_at_0: State,
    pub v0_at_1: State,
    /// Wavenumber `k` when `Q ≡ -k²` and `u0 ∝ e^{ikx}`.
    pub wavenumber: Option<f64>,
}

/// Immutable bundle of `Q`, `V`, reference data and tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringProblem {
    background: PotentialSpec,
    perturbation: PotentialSpec,
    reference: ReferenceData,
    tolerances: Tolerances,
}

/// Builds a problem with default tolerances.
pub fn build_problem(
    background: PotentialSpec,
    perturbation: PotentialSpec,
    u0_init: State,
) -> Result<ScatteringProblem> {
    ScatteringProblem::new(background, perturbation, u0_init, Tolerances::default())
}

impl ScatteringProblem {
    pub fn new(
        background: PotentialSpec,
        perturbation: PotentialSpec,
        u0_init: State,
        tolerances: Tolerances,
    ) -> Result<Self> {
        let v0_init = v0_from_u0(u0_init)?;
        Self::with_reference_pair(background, perturbation, u0_init, v0_init, tolerances)
    }

    /// Like [`ScatteringProblem::new`] but with an explicit `v0`; it must satisfy `W[u0, v0] = 1`.
    pub fn with_reference_pair(
        background: PotentialSpec,
        perturbation: PotentialSpec,
        u0_init: State,
        v0_init: State,
        tolerances: Tolerances,
    ) -> Result<Self> {
        tolerances.validate()?;
        if background.has_spikes() {
            return Err(Error::UnsupportedBackground);
        }
        if u0_init.iter().any(|z| !z.is_finite()) || u0_init.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidProblem("u0 initial data must be nonzero and finite".into()));
        }
        let w0 = wronskian(u0_init, v0_init);
        if (w0 - 1.0).norm() > tolerances.wronskian {
            return Err(Error::InvalidProblem(format!("W[u0, v0](0) = {w0} is not 1")));
        }

        let eq = Equation::new(&background, &perturbation, tolerances);
        let zero = Complex64::new(0.0, 0.0);
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let us = eq.states_at(zero, u0_init, &xs)?;
        let vs = eq.states_at(zero, v0_init, &xs)?;
        for ((x, u), v) in xs.iter().zip(&us).zip(&vs) {
            let w = wronskian(*u, *v);
            if (w - 1.0).norm() > tolerances.wronskian {
                return Err(Error::InvalidProblem(format!("Wronskian drifted to {w} at x = {x}")));
            }
        }

        let wavenumber = traveling_wavenumber(&background, u0_init);
        let reference =
            ReferenceData { u0_at_0: u0_init, u0_at_1: us[4], v0_at_0: v0_init, v0_at_1: vs[4], wavenumber };
        Ok(ScatteringProblem { background, perturbation, reference, tolerances })
    }

    /// Same potentials and tolerances, new `u0` (and a rebuilt `v0`).
    pub fn with_u0(&self, u0_init: State) -> Result<Self> {
        Self::new(self.background.clone(), self.perturbation.clone(), u0_init, self.tolerances)
    }

    pub fn with_tolerances(&self, tolerances: Tolerances) -> Result<Self> {
        Self::with_reference_pair(
            self.background.clone(),
            self.perturbation.clone(),
            self.reference.u0_at_0,
            self.reference.v0_at_0,
            tolerances,
        )
    }

    /// Replaces `v0` by `v0 + c u0`, which keeps `W[u0, v0] = 1`.
    pub fn with_shifted_v0(&self, c: Complex64) -> Result<Self> {
        let (u, v) = (self.reference.u0_at_0, self.reference.v0_at_0);
        Self::with_reference_pair(
            self.background.clone(),
            self.perturbation.clone(),
            u,
            [v[0] + c * u[0], v[1] + c * u[1]],
            self.tolerances,
        )
    }

    pub fn equation(&self) -> Equation<'_> {
        Equation::new(&self.background, &self.perturbation, self.tolerances)
    }

    pub fn background(&self) -> &PotentialSpec {
        &self.background
    }

    pub fn perturbation(&self) -> &PotentialSpec {
        &self.perturbation
    }

    pub fn reference(&self) -> &ReferenceData {
        &self.reference
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn u0_init(&self) -> State {
        self.reference.u0_at_0
    }

    /// `u0` and `v0` have real initial data, hence are real on `[0, 1]`.
    pub fn has_real_reference(&self) -> bool {
        let r = &self.reference;
        r.u0_at_0.iter().chain(&r.v0_at_0).all(|z| z.im == 0.0)
    }

    /// `(u0, v0)` states at ascending abscissae in `[0, 1]` (values after spikes, which
    /// do not act at `λ = 0`).
    pub fn reference_states_at(&self, xs: &[f64]) -> Result<Vec<(State, State)>> {
        let eq = self.equation();
        let zero = Complex64::new(0.0, 0.0);
        let us = eq.states_at(zero, self.reference.u0_at_0, xs)?;
        let vs = eq.states_at(zero, self.reference.v0_at_0, xs)?;
        Ok(us.into_iter().zip(vs).collect())
    }
}

fn traveling_wavenumber(background: &PotentialSpec, u0: State) -> Option<f64> {
    let [seg] = background.segments() else { return None };
    let c = seg.constant_value()?;
    if c >= 0.0 || u0[0] == Complex64::new(0.0, 0.0) {
        return None;
    }
    let k = (-c).sqrt();
    let ratio = u0[1] / u0[0];
    let scale = k.max(1.0);
    if (ratio - Complex64::new(0.0, k)).norm() <= 1e-12 * scale {
        Some(k)
    } else if (ratio + Complex64::new(0.0, k)).norm() <= 1e-12 * scale {
        Some(-k)
    } else {
        None
    }
}
