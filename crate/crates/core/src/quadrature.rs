//! Gauss-Hermite quadrature and Gaussian discretization.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

/// Order of the Gauss-Hermite rule used for Gaussian expectations.
pub const HERMITE_ORDER: usize = 64;

/// Nodes and weights of the `n`-point rule for `∫ f(x) e^{−x²} dx`.
///
/// Nodes start from the eigenvalues of the Jacobi matrix and are polished by
/// Newton steps on the orthonormal Hermite recurrence; weights come from the
/// Christoffel function `1 / Σ_{k<n} p_k(x)²`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, pm1, _) = orthonormal_hermite(n, *x);
            let dp = (2.0 * n as f64).sqrt() * pm1;
            *x -= p / dp;
        }
        weights.push(1.0 / orthonormal_hermite(n, *x).2);
    }
    (nodes, weights)
}

/// `(p_n(x), p_{n−1}(x), Σ_{k<n} p_k(x)²)` for the orthonormal Hermite family.
fn orthonormal_hermite(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += cur * cur;
        let next = x * (2.0 / (k + 1) as f64).sqrt() * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev, sum_sq)
}

fn hermite64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(HERMITE_ORDER))
}

/// `E[f(X)]` for `X ~ N(mean, sd²)` by the 64-point Gauss-Hermite rule.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64, mean: f64, sd: f64) -> f64 {
    let (nodes, weights) = hermite64();
    let scale = std::f64::consts::SQRT_2 * sd;
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mean + scale * x))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt()
}

/// `P(a < X ≤ b)` for `X ~ N(mean, sd²)`; `sd = 0` gives a point mass.
pub fn normal_interval_probability(a: f64, b: f64, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return if a < mean && mean <= b { 1.0 } else { 0.0 };
    }
    let n = Normal::new(mean, sd).expect("positive standard deviation");
    (n.cdf(b) - n.cdf(a)).max(0.0)
}

/// The `k` quantiles `F⁻¹((i + ½)/k)` of `N(mean, sd²)`, each carrying mass
/// `1/k`.
pub fn normal_quantile_grid(k: usize, mean: f64, sd: f64) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (0..k)
        .map(|i| mean + sd * n.inverse_cdf((i as f64 + 0.5) / k as f64))
        .collect()
}

/// `k` equal-width cells on `[−width, width]` (in standard deviations) with
/// their exact normal probabilities, renormalized over the truncated range.
pub fn normal_cell_grid(k: usize, width: f64) -> Vec<(f64, f64)> {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    let h = 2.0 * width / k as f64;
    let cells: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let a = -width + i as f64 * h;
            (a + 0.5 * h, n.cdf(a + h) - n.cdf(a))
        })
        .collect();
    let total: f64 = cells.iter().map(|c| c.1).sum();
    cells.into_iter().map(|(x, p)| (x, p / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_gaussian_moments() {
        assert!((gaussian_expectation(|_| 1.0, 0.0, 1.0) - 1.0).abs() < 1e-13);
        assert!((gaussian_expectation(|x| x * x, 0.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((gaussian_expectation(|x| x.powi(4), 1.0, 2.0) - (1.0 + 6.0 * 4.0 + 3.0 * 16.0)).abs() < 1e-9);
        assert!((gaussian_expectation(|x| x.cos(), 0.0, 1.0) - (-0.5f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn nodes_are_symmetric() {
        let (x, w) = gauss_hermite(10);
        for i in 0..10 {
            assert!((x[i] + x[9 - i]).abs() < 1e-12);
            assert!((w[i] - w[9 - i]).abs() < 1e-12);
        }
        assert!((w.iter().sum::<f64>() - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn discretizations_have_unit_mass() {
        let q = normal_quantile_grid(1000, 2.0, 3.0);
        assert!((q.iter().sum::<f64>() / 1000.0 - 2.0).abs() < 1e-9);
        let cells = normal_cell_grid(200, 8.0);
        assert!((cells.iter().map(|c| c.1).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((normal_interval_probability(f64::NEG_INFINITY, 0.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
    }
}
