//! JSON problem files.
//!
//! ```json
//! {
//!   "problem": {
//!     "Q": { "segments": [{ "interval": [0.0, 1.0], "coeffs": [-9.869604401089358] }] },
//!     "V": {
//!       "segments": [{ "interval": [0.0, 1.0], "coeffs": [-1.0] }],
//!       "spikes": [{ "position": 0.0, "weight": 1.0 }]
//!     },
//!     "u0": { "value": [0.0, 0.0], "derivative": [3.141592653589793, 0.0] },
//!     "tolerances": { "ode_rtol": 1e-10, "wronskian": 1e-10, "max_step": 0.125 }
//!   },
//!   "command": { "grid": { "lo": -5.0, "hi": 5.0, "points": 41 }, "radii": [50.0, 500.0] }
//! }
//! ```
//!
//! Segment coefficients are in the local variable `x - interval[0]`. Complex
//! numbers are `[re, im]`. `spikes`, `tolerances` and every `command` field are
//! optional.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Tolerances;
use crate::potential::{PotentialSpec, Segment, Spike};
use crate::problem::ScatteringProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spikes: Vec<Spike>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub value: [f64; 2],
    pub derivative: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "Q")]
    pub q: PotentialConfig,
    #[serde(rename = "V")]
    pub v: PotentialConfig,
    pub u0: InitialData,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    /// Evenly spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| if i + 1 == n { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64 })
            .collect()
    }
}

/// Optional parameters for the analyses; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

impl CommandConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.grid {
            validate_grid(g)?;
        }
        validate_radii(&self.radii)?;
        if self.lambdas.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Config("command.lambdas: values must be finite".into()));
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        self.lambdas.iter().map(|z| Complex64::new(z[0], z[1])).collect()
    }
}

pub fn validate_grid(g: Grid) -> Result<()> {
    if g.points < 2 {
        return Err(Error::Config("grid: needs at least 2 points".into()));
    }
    if !(g.lo.is_finite() && g.hi.is_finite() && g.lo < g.hi) {
        return Err(Error::Config("grid: needs finite lo < hi".into()));
    }
    Ok(())
}

pub fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Config("radii: must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("radii: must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub command: CommandConfig,
}

fn is_default(c: &CommandConfig) -> bool {
    *c == CommandConfig::default()
}

/// A loaded, validated config.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ScatteringProblem,
    pub command: CommandConfig,
}

fn complex(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ScatteringProblem> {
        let field = |name: &str, e: Error| Error::Config(format!("problem.{name}: {e}"));
        if !self.q.spikes.is_empty() {
            return Err(field("Q.spikes", Error::UnsupportedBackground));
        }
        let q = PotentialSpec::new(self.q.segments.clone(), Vec::new()).map_err(|e| field("Q", e))?;
        let v = PotentialSpec::new(self.v.segments.clone(), self.v.spikes.clone()).map_err(|e| field("V", e))?;
        let u0 = [complex(self.u0.value), complex(self.u0.derivative)];
        ScatteringProblem::new(q, v, u0, self.tolerances).map_err(|e| field("u0", e))
    }

    pub fn from_problem(problem: &ScatteringProblem) -> Self {
        let u = problem.u0_init();
        ProblemConfig {
            q: PotentialConfig { segments: problem.background().segments().to_vec(), spikes: Vec::new() },
            v: PotentialConfig {
                segments: problem.perturbation().segments().to_vec(),
                spikes: problem.perturbation().spikes().to_vec(),
            },
            u0: InitialData { value: [u[0].re, u[0].im], derivative: [u[1].re, u[1].im] },
            tolerances: problem.tolerances(),
        }
    }
}

/// Parses and validates a config; errors name the offending field path and position.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Error::Config(format!("{} at line {} column {}: {}", e.path(), inner.line(), inner.column(), inner))
    })?;
    file.command.validate()?;
    Ok(RunConfig { problem: file.problem.build()?, command: file.command })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Pretty JSON with a trailing newline; the output is byte-stable.
pub fn to_json(file: &ConfigFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("config serializes");
    s.push('\n');
    s
}
