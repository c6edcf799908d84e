//! Shared numerical kernels: order-4 difference stencils (for the few
//! second-level derivatives the order-3 jets cannot reach), quadrature
//! weights, pairwise summation for order-independent reductions, and small
//! dense least squares.

use crate::Result;
use num_complex::Complex64;

/// Pairwise (cascade) summation: deterministic and order-stable, used so
/// parallel reductions can collect into a vec and reduce reproducibly.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        2 => x[0] + x[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
        }
    }
}

/// Fourth-order central first derivative from five samples
/// `f(-2h), f(-h), f(0), f(h), f(2h)`.
pub fn diff1_4(f: &[f64; 5], h: f64) -> f64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
}

/// Fourth-order central second derivative from the same five samples.
pub fn diff2_4(f: &[f64; 5], h: f64) -> f64 {
    (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)
}

/// Complex versions of the stencils.
pub fn cdiff1_4(f: &[Complex64; 5], h: f64) -> Complex64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
}

pub fn cdiff2_4(f: &[Complex64; 5], h: f64) -> Complex64 {
    (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)
}

/// Evaluate `f` on the 5-point axis stencil `x + k·h`, `k = −2..2`.
pub fn sample5<T, F: FnMut(f64) -> Result<T>>(x: f64, h: f64, mut f: F) -> Result<[T; 5]> {
    Ok([
        f(x - 2.0 * h)?,
        f(x - h)?,
        f(x)?,
        f(x + h)?,
        f(x + 2.0 * h)?,
    ])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` with the three-term recurrence.  Adequate for the modest `n` used
/// in chart quadrature.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Solve the dense least-squares problem `A x ≈ b` by SVD; returns
/// `(x, rms_residual, condition_number)`.
pub fn lsq_svd(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DVector<f64>) -> (nalgebra::DVector<f64>, f64, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let x = svd.solve(b, smax * 1e-14).expect("svd solve");
    let r = a * &x - b;
    let rms = (r.norm_squared() / b.len() as f64).sqrt();
    (x, rms, if smin > 0.0 { smax / smin } else { f64::INFINITY })
}

/// One-dimensional trapezoid weights: periodic axes get uniform weight `h`
/// over `n` nodes (no duplicated endpoint); bounded axes get the composite
/// rule over `n` nodes including both endpoints.
pub fn trapezoid_weights(len: f64, n: usize, periodic: bool) -> Vec<f64> {
    if periodic {
        vec![len / n as f64; n]
    } else {
        let h = len / (n - 1) as f64;
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stencils_are_fourth_order() {
        let f = |x: f64| (2.0 * x).sin() * x.exp();
        let exact1 = |x: f64| (2.0 * (2.0 * x).cos() + (2.0 * x).sin()) * x.exp();
        let x0 = 0.37;
        let mut errs = Vec::new();
        for &h in &[1e-2, 5e-3] {
            let s = sample5(x0, h, |x| Ok::<_, crate::Error>(f(x))).unwrap();
            errs.push((diff1_4(&s, h) - exact1(x0)).abs());
        }
        // halving h must shrink the error by ~16
        assert!(errs[0] / errs[1] > 10.0, "ratio {}", errs[0] / errs[1]);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 polynomial x^14: ∫ = 2/15
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert_relative_eq!(s, 2.0 / 15.0, max_relative = 1e-13);
        let s: f64 = w.iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        // ∮ exp(sin θ) dθ = 2π I₀(1)
        let n = 32;
        let w = trapezoid_weights(2.0 * std::f64::consts::PI, n, true);
        let s: f64 = (0..n)
            .map(|k| w[k] * (2.0 * std::f64::consts::PI * k as f64 / n as f64).sin().exp())
            .sum();
        assert_relative_eq!(s, 7.95492652101284, max_relative = 1e-12);
    }

    #[test]
    fn pairwise_matches_naive_on_benign_data() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = x.iter().sum();
        assert_relative_eq!(pairwise_sum(&x), naive, max_relative = 1e-12);
    }
}
