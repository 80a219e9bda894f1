//! Quadrature building blocks: Gauss–Legendre rules and Chebyshev–Lobatto
//! panels with a spectral cumulative-integration matrix.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * x * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (x * p1 - p2) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Chebyshev–Lobatto points on `[-1, 1]` in ascending order together with the
/// matrix `S` such that `(S f)_i ≈ ∫_{-1}^{x_i} f`.
#[derive(Debug, Clone)]
pub(crate) struct ChebyshevPanel {
    pub nodes: Vec<f64>,
    pub integration: Vec<Vec<f64>>,
}

impl ChebyshevPanel {
    pub fn new(order: usize) -> Self {
        let p = order.max(2);
        let nodes: Vec<f64> = (0..=p).map(|j| -(PI * j as f64 / p as f64).cos()).collect();
        // T_k(x_j) with x_j = -cos(πj/p)
        let cheb = |k: usize, j: usize| {
            let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            s * (PI * (k * j) as f64 / p as f64).cos()
        };
        let mut integration = vec![vec![0.0; p + 1]; p + 1];
        for col in 0..=p {
            // Chebyshev coefficients of the unit vector e_col
            let half = if col == 0 || col == p { 0.5 } else { 1.0 };
            let mut c: Vec<f64> = (0..=p).map(|n| 2.0 / p as f64 * half * cheb(n, col)).collect();
            c[0] *= 0.5;
            c[p] *= 0.5;
            let mut b = vec![0.0; p + 2];
            b[1] += c[0];
            b[2] += 0.25 * c[1];
            for n in 2..=p {
                b[n + 1] += c[n] / (2.0 * (n + 1) as f64);
                b[n - 1] -= c[n] / (2.0 * (n - 1) as f64);
            }
            let at_minus_one: f64 = b.iter().enumerate().map(|(k, v)| if k % 2 == 0 { *v } else { -*v }).sum();
            for (row, line) in integration.iter_mut().enumerate() {
                let val: f64 = b.iter().enumerate().map(|(k, v)| v * cheb(k, row)).sum();
                line[col] = val - at_minus_one;
            }
        }
        ChebyshevPanel { nodes, integration }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k = {k}: {q} vs {exact}");
        }
    }

    #[test]
    fn cumulative_integration_of_monomials() {
        let panel = ChebyshevPanel::new(16);
        for k in 0..16 {
            let f: Vec<f64> = panel.nodes.iter().map(|x| x.powi(k)).collect();
            for (i, x) in panel.nodes.iter().enumerate() {
                let got: f64 = panel.integration[i].iter().zip(&f).map(|(s, v)| s * v).sum();
                let exact = (x.powi(k + 1) - (-1f64).powi(k + 1)) / (k as f64 + 1.0);
                assert!((got - exact).abs() < 1e-14, "k = {k}, x = {x}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn cumulative_integration_of_exponential() {
        let panel = ChebyshevPanel::new(20);
        let f: Vec<f64> = panel.nodes.iter().map(|x| (2.0 * x).exp()).collect();
        let last = panel.len() - 1;
        let got: f64 = panel.integration[last].iter().zip(&f).map(|(s, v)| s * v).sum();
        let exact = ((2f64).exp() - (-2f64).exp()) / 2.0;
        assert!((got - exact).abs() < 1e-13);
    }
}
