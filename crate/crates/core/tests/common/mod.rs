//! Shared helpers and independent oracles for the integration suites.

use ndarray::Array2;
use num_complex::Complex64;

/// Pure state on one site, 1-based.
pub fn site_state(l: usize, j: usize) -> Array2<Complex64> {
    let mut rho = Array2::zeros((l, l));
    rho[(j - 1, j - 1)] = Complex64::ONE;
    rho
}

/// Bessel function of the first kind through the Simpson quadrature of
/// `J_n(x) = (1/pi) int_0^pi cos(n theta - x sin theta) d theta`,
/// independent of any series expansion used elsewhere.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let m = 4000; // even
    let h = std::f64::consts::PI / m as f64;
    let f = |theta: f64| (n as f64 * theta - x * theta.sin()).cos();
    let mut s = f(0.0) + f(std::f64::consts::PI);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / (3.0 * std::f64::consts::PI)
}

/// Free-lattice site populations from a central site: `J_{j-j0}(2Jt)^2`.
pub fn free_lattice_populations(l: usize, j0: usize, t: f64) -> Vec<f64> {
    (1..=l)
        .map(|j| {
            let n = j as i64 - j0 as i64;
            bessel_j(n, 2.0 * t).powi(2)
        })
        .collect()
}

/// `n` logarithmically spaced points over `[a, b]`.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}
