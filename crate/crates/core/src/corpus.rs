//! Bundled test problems. Every entry is small enough that the truncated series
//! at order 16 certifies `|λ| ≤ 20`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::potential::{PotentialSpec, Segment, Spike};
use crate::problem::{build_problem, ScatteringProblem};

/// Seed for the sampled-noise perturbation.
pub const NOISE_SEED: u64 = 0x5eed_0b5e;

const NOISE_PIECES: usize = 16;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn build(q: PotentialSpec, v: PotentialSpec, u0: [Complex64; 2]) -> ScatteringProblem {
    build_problem(q, v, u0).expect("bundled problem is valid")
}

/// `Q = -k²`, `u0 = e^{ikx}`, `V = δ_0 - δ_1`. Here `b` vanishes identically when
/// `k` is a multiple of π.
pub fn example1(k: f64) -> ScatteringProblem {
    let v = PotentialSpec::zero()
        .with_spikes(vec![Spike { position: 0.0, weight: 1.0 }, Spike { position: 1.0, weight: -1.0 }])
        .expect("valid spikes");
    build(PotentialSpec::constant(-k * k), v, [c(1.0, 0.0), c(0.0, k)])
}

/// `Q = -π²`, `V = -1`, `u0 = sin πx`: `b(λ) = -(π²/κ) sin κ` with `κ² = λ + π²`.
pub fn example2() -> ScatteringProblem {
    build(PotentialSpec::constant(-PI * PI), PotentialSpec::constant(-1.0), [c(0.0, 0.0), c(PI, 0.0)])
}

/// `Q = 0`, `V = 1`, `u0 = 1`: `b(λ) = -√λ sinh √λ`.
pub fn free_chi() -> ScatteringProblem {
    build(PotentialSpec::zero(), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, 0.0)])
}

/// Rectangular barrier `V = 1` under a traveling wave `u0 = e^{ikx}`.
pub fn traveling_barrier(k: f64) -> ScatteringProblem {
    build(PotentialSpec::constant(-k * k), PotentialSpec::constant(1.0), [c(1.0, 0.0), c(0.0, k)])
}

pub fn polynomial_ramp() -> ScatteringProblem {
    build(
        PotentialSpec::polynomial(vec![0.5, -1.0]),
        PotentialSpec::polynomial(vec![0.0, 1.0, -1.0]),
        [c(1.0, 0.0), c(0.3, 0.0)],
    )
}

pub fn two_step() -> ScatteringProblem {
    let v = PotentialSpec::piecewise_constant(&[0.0, 0.4, 1.0], &[1.0, -0.5]).expect("valid steps");
    build(PotentialSpec::constant(-4.0), v, [c(0.5, 0.0), c(1.0, 0.0)])
}

/// Piecewise-constant `V` with 16 values drawn uniformly from `[-1, 1]`.
pub fn noise(seed: u64) -> ScatteringProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments = (0..NOISE_PIECES)
        .map(|i| {
            let lo = i as f64 / NOISE_PIECES as f64;
            let hi = (i + 1) as f64 / NOISE_PIECES as f64;
            Segment::new(lo, hi, vec![rng.random_range(-1.0..=1.0)])
        })
        .collect();
    let v = PotentialSpec::new(segments, Vec::new()).expect("valid noise");
    build(PotentialSpec::constant(-2.0), v, [c(1.0, 0.0), c(0.5, 0.0)])
}

pub fn quadratic_well() -> ScatteringProblem {
    build(
        PotentialSpec::polynomial(vec![-1.0, 0.0, 3.0]),
        PotentialSpec::polynomial(vec![2.0, -3.0]),
        [c(1.0, 0.0), c(0.5, 0.0)],
    )
}

/// `V = 2` on `[¼, ¾]` only.
pub fn partial_support() -> ScatteringProblem {
    build(
        PotentialSpec::constant(-9.0),
        PotentialSpec::indicator(0.25, 0.75, 2.0).expect("valid indicator"),
        [c(0.0, 0.0), c(1.0, 0.0)],
    )
}

/// `V ≡ 0`.
pub fn unperturbed() -> ScatteringProblem {
    build(PotentialSpec::constant(-1.0), PotentialSpec::zero(), [c(1.0, 0.0), c(0.0, 1.0)])
}

/// Problems with `V ≢ 0`, by name.
pub fn corpus() -> Vec<(&'static str, ScatteringProblem)> {
    vec![
        ("example1", example1(1.0)),
        ("example2", example2()),
        ("free_chi", free_chi()),
        ("traveling_barrier", traveling_barrier(1.0)),
        ("polynomial_ramp", polynomial_ramp()),
        ("two_step", two_step()),
        ("noise", noise(NOISE_SEED)),
        ("quadratic_well", quadratic_well()),
        ("partial_support", partial_support()),
    ]
}

/// Problems whose `b` vanishes identically.
pub fn degenerate() -> Vec<(&'static str, ScatteringProblem)> {
    vec![("unperturbed", unperturbed()), ("example1_pi", example1(PI)), ("example1_2pi", example1(2.0 * PI))]
}
