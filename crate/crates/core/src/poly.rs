//! Small dense-polynomial helpers. Coefficients are stored lowest degree first.

use num_complex::Complex64;

pub(crate) fn eval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// Value of the antiderivative vanishing at `s = 0`.
pub(crate) fn eval_antiderivative(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, &c)| acc * s + c / (k as f64 + 1.0)) * s
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

/// Drops trailing exact zeros so the degree is meaningful.
pub(crate) fn trimmed(coeffs: &[f64]) -> &[f64] {
    let len = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..len]
}

/// Re-expands `p(s)` about `s = shift`, i.e. returns coefficients of `p(shift + t)` in `t`.
pub(crate) fn taylor_shift(coeffs: &[f64], shift: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    if shift == 0.0 {
        return out;
    }
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += shift * out[j + 1];
        }
    }
    out
}

pub(crate) fn taylor_shift_complex(coeffs: &[Complex64], shift: f64) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    if shift == 0.0 {
        return out;
    }
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = out[j + 1];
            out[j] += next * shift;
        }
    }
    out
}

/// Real roots of `p` strictly inside `(a, b)`, ascending.
///
/// Critical points (roots of `p'`) split the interval into monotone pieces and
/// each piece holds at most one root, found by bisection.
pub(crate) fn real_roots_in(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = trimmed(coeffs);
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            if r > a && r < b {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut knots = vec![a];
            knots.extend(real_roots_in(&derivative(p), a, b));
            knots.push(b);
            let mut roots: Vec<f64> = Vec::new();
            for w in knots.windows(2) {
                let (mut lo, mut hi) = (w[0], w[1]);
                let (mut flo, fhi) = (eval(p, lo), eval(p, hi));
                if flo == 0.0 {
                    if lo > a && roots.last().is_none_or(|&r| r < lo) {
                        roots.push(lo);
                    }
                    continue;
                }
                if fhi == 0.0 {
                    if hi < b {
                        roots.push(hi);
                    }
                    continue;
                }
                if flo.signum() == fhi.signum() {
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = eval(p, mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            roots.dedup();
            roots
        }
    }
}

/// Exact integral of `|p(s)|` over `s ∈ [0, len]`, split at the sign changes of `p`.
pub(crate) fn abs_integral(coeffs: &[f64], len: f64) -> f64 {
    let mut knots = vec![0.0];
    knots.extend(real_roots_in(coeffs, 0.0, len));
    knots.push(len);
    knots.windows(2).map(|w| (eval_antiderivative(coeffs, w[1]) - eval_antiderivative(coeffs, w[0])).abs()).sum()
}
