//! Piecewise-polynomial potentials on `[0, 1]` with optional delta spikes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// One polynomial piece. `coeffs[k]` multiplies `(x - lo)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub interval: [f64; 2],
    pub coeffs: Vec<f64>,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        Segment { interval: [lo, hi], coeffs }
    }

    pub fn lo(&self) -> f64 {
        self.interval[0]
    }

    pub fn hi(&self) -> f64 {
        self.interval[1]
    }

    pub fn len(&self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn value(&self, x: f64) -> f64 {
        poly::eval(&self.coeffs, x - self.lo())
    }

    /// Polynomial of degree zero (or identically zero).
    pub fn constant_value(&self) -> Option<f64> {
        match poly::trimmed(&self.coeffs) {
            [] => Some(0.0),
            [c] => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        poly::trimmed(&self.coeffs).is_empty()
    }
}

/// Point interaction `weight * delta(x - position)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spike {
    pub position: f64,
    pub weight: f64,
}

/// A real potential on `[0, 1]`: polynomial segments covering the interval plus
/// an optional measure part made of delta spikes.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    segments: Vec<Segment>,
    spikes: Vec<Spike>,
    l1_norm: f64,
}

impl PotentialSpec {
    pub fn new(segments: Vec<Segment>, spikes: Vec<Spike>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidPotential(msg));
        if segments.is_empty() {
            return bad("at least one segment is required".into());
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.lo().is_finite() && s.hi().is_finite()) || s.lo() >= s.hi() {
                return bad(format!("segment {i} has an empty or non-finite interval"));
            }
            if s.coeffs.iter().any(|c| !c.is_finite()) {
                return bad(format!("segment {i} has non-finite coefficients"));
            }
        }
        if segments[0].lo() != 0.0 {
            return bad("segments must start at x = 0".into());
        }
        if segments[segments.len() - 1].hi() != 1.0 {
            return bad("segments must end at x = 1".into());
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[0].hi() != w[1].lo() {
                return bad(format!("segments {i} and {} are not contiguous ({} != {})", i + 1, w[0].hi(), w[1].lo()));
            }
        }
        for (i, s) in spikes.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.position) || !s.weight.is_finite() {
                return bad(format!("spike {i} must sit in [0, 1] with a finite weight"));
            }
        }
        if spikes.windows(2).any(|w| w[0].position >= w[1].position) {
            return bad("spike positions must strictly increase".into());
        }
        let l1_norm = segments.iter().map(|s| poly::abs_integral(&s.coeffs, s.len())).sum();
        Ok(PotentialSpec { segments, spikes, l1_norm })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// A single polynomial in `x` over the whole interval.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::new(vec![Segment::new(0.0, 1.0, coeffs)], Vec::new()).expect("single segment on [0, 1] is valid")
    }

    /// Piecewise constant with the given breakpoints `0 = x_0 < ... < x_n = 1`.
    pub fn piecewise_constant(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::InvalidPotential("piecewise constant needs one more breakpoint than values".into()));
        }
        let segments = breaks.windows(2).zip(values).map(|(w, &v)| Segment::new(w[0], w[1], vec![v])).collect();
        Self::new(segments, Vec::new())
    }

    /// `height` on `[lo, hi]`, zero elsewhere in `[0, 1]`.
    pub fn indicator(lo: f64, hi: f64, height: f64) -> Result<Self> {
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        if lo > 0.0 {
            breaks.push(lo);
            values.push(0.0);
        }
        values.push(height);
        if hi < 1.0 {
            breaks.push(hi);
            values.push(0.0);
        }
        breaks.push(1.0);
        Self::piecewise_constant(&breaks, &values)
    }

    pub fn with_spikes(self, spikes: Vec<Spike>) -> Result<Self> {
        Self::new(self.segments, spikes)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    pub fn has_spikes(&self) -> bool {
        !self.spikes.is_empty()
    }

    /// `∫ |V|` over the absolutely continuous part.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// True when both the density and the measure part vanish.
    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(Segment::is_zero) && self.spikes.iter().all(|s| s.weight == 0.0)
    }

    /// Segment that owns `x`; interior breakpoints belong to the right-hand segment.
    pub fn segment_index(&self, x: f64) -> usize {
        self.segments.partition_point(|s| s.hi() <= x).min(self.segments.len() - 1)
    }

    pub fn segment_at(&self, x: f64) -> &Segment {
        &self.segments[self.segment_index(x)]
    }

    pub fn value(&self, x: f64) -> f64 {
        self.segment_at(x).value(x)
    }

    /// Interior and end breakpoints, including `0` and `1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend(self.segments.iter().map(Segment::hi));
        out
    }

    /// Some piece is strictly positive on a set of positive measure, or a spike is positive.
    pub fn has_positive_part(&self) -> bool {
        self.spikes.iter().any(|s| s.weight > 0.0) || self.segments.iter().any(|s| sign_somewhere(s, 1.0))
    }

    pub fn has_negative_part(&self) -> bool {
        self.spikes.iter().any(|s| s.weight < 0.0) || self.segments.iter().any(|s| sign_somewhere(s, -1.0))
    }

    /// Splits segment `index` at `at`, re-expanding the right half about its new left end.
    pub fn split_segment(&self, index: usize, at: f64) -> Result<Self> {
        let seg = self.segments.get(index).ok_or_else(|| Error::InvalidArgument(format!("no segment {index}")))?;
        if !(at > seg.lo() && at < seg.hi()) {
            return Err(Error::InvalidArgument(format!("{at} is not inside segment {index}")));
        }
        let left = Segment::new(seg.lo(), at, seg.coeffs.clone());
        let right = Segment::new(at, seg.hi(), poly::taylor_shift(&seg.coeffs, at - seg.lo()));
        let mut segments = self.segments.clone();
        segments.splice(index..=index, [left, right]);
        Self::new(segments, self.spikes.clone())
    }
}

fn sign_somewhere(seg: &Segment, sign: f64) -> bool {
    let mut knots = vec![0.0];
    knots.extend(poly::real_roots_in(&seg.coeffs, 0.0, seg.len()));
    knots.push(seg.len());
    knots.windows(2).any(|w| poly::eval(&seg.coeffs, 0.5 * (w[0] + w[1])) * sign > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_gaps_and_overlaps() {
        let gap = vec![Segment::new(0.0, 0.4, vec![1.0]), Segment::new(0.5, 1.0, vec![1.0])];
        assert!(matches!(PotentialSpec::new(gap, vec![]), Err(Error::InvalidPotential(_))));
        let short = vec![Segment::new(0.0, 0.9, vec![1.0])];
        assert!(PotentialSpec::new(short, vec![]).is_err());
        let unordered = vec![Spike { position: 0.5, weight: 1.0 }, Spike { position: 0.5, weight: 2.0 }];
        assert!(PotentialSpec::zero().with_spikes(unordered).is_err());
    }

    #[test]
    fn l1_norm_of_sign_changing_polynomial() {
        // V = 1 - 2x: ∫|1 - 2x| = 1/2
        let v = PotentialSpec::polynomial(vec![1.0, -2.0]);
        assert!((v.l1_norm() - 0.5).abs() < 1e-15);
        assert!(v.has_positive_part() && v.has_negative_part());
    }

    #[test]
    fn l1_ignores_spikes() {
        let v = PotentialSpec::zero()
            .with_spikes(vec![Spike { position: 0.0, weight: 1.0 }, Spike { position: 1.0, weight: -1.0 }])
            .unwrap();
        assert_eq!(v.l1_norm(), 0.0);
        assert!(!v.is_zero());
    }

    #[test]
    fn segment_lookup_is_right_continuous() {
        let v = PotentialSpec::indicator(0.25, 0.75, 2.0).unwrap();
        assert_eq!(v.value(0.1), 0.0);
        assert_eq!(v.value(0.25), 2.0);
        assert_eq!(v.value(0.75), 0.0);
        assert_eq!(v.value(1.0), 0.0);
        assert_eq!(v.breakpoints(), vec![0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn split_preserves_values() {
        let v = PotentialSpec::polynomial(vec![0.3, -1.2, 2.0, -0.7]);
        let w = v.split_segment(0, 0.37).unwrap();
        for x in [0.0, 0.2, 0.37, 0.5, 0.99] {
            assert!((v.value(x) - w.value(x)).abs() < 1e-14);
        }
        assert!((v.l1_norm() - w.l1_norm()).abs() < 1e-12);
    }
}
