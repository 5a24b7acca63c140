//! Transport diagnostics: populations, RMSD, participation ratio,
//! l1-coherence, state fidelity, power-law fits, and effective-rate time
//! rescaling.

use ndarray::{Array1, Array2};
use ndarray_linalg::Eigh;
use num_complex::Complex64;

use crate::bath::{self, BathSpec};
use crate::error::{CoreError, Result};

/// Time series of reduced density matrices.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Array2<Complex64>>,
}

impl DensityTrajectory {
    /// Site populations `P_j(t)`, 1-based ordering along each row.
    pub fn populations(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|rho| (0..rho.nrows()).map(|j| rho[(j, j)].re).collect())
            .collect()
    }
}

/// Time series of site populations only (semiclassical runs).
#[derive(Debug, Clone)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
}

/// Scalar transport diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportPoint {
    /// RMSD from the initial site: `sqrt(sum_j (j - j0)^2 P_j)`.
    pub sigma: f64,
    /// Population participation ratio `1 / sum_j P_j^2`, in [1, L].
    pub ppr: f64,
    /// l1-norm of coherence `sum_{i != j} |rho_ij|`.
    pub l1_coherence: f64,
}

/// Compute RMSD, PPR, and l1-coherence of a unit-trace state. `j0` is the
/// 1-based reference site.
pub fn transport_observables(rho: &Array2<Complex64>, j0: usize) -> TransportPoint {
    let l = rho.nrows();
    let populations: Vec<f64> = (0..l).map(|j| rho[(j, j)].re).collect();
    let (sigma, ppr) = population_observables(&populations, j0);
    let mut l1 = 0.0;
    for i in 0..l {
        for j in 0..l {
            if i != j {
                l1 += rho[(i, j)].norm();
            }
        }
    }
    TransportPoint { sigma, ppr, l1_coherence: l1 }
}

/// RMSD and PPR from populations alone.
pub fn population_observables(populations: &[f64], j0: usize) -> (f64, f64) {
    let mut second_moment = 0.0;
    let mut sum_sq = 0.0;
    for (idx, p) in populations.iter().enumerate() {
        let d = (idx + 1) as f64 - j0 as f64;
        second_moment += d * d * p;
        sum_sq += p * p;
    }
    (second_moment.max(0.0).sqrt(), 1.0 / sum_sq)
}

/// Elementwise magnitudes `|rho_ij|` for heatmap emission.
pub fn coherence_snapshot(rho: &Array2<Complex64>) -> Array2<f64> {
    rho.map(|v| v.norm())
}

/// Result of fitting `sigma(t) = D t^alpha` over a window.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Least squares of `log sigma = log D + alpha log t` over `window`.
pub fn power_law_fit(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    if times.len() != values.len() {
        return Err(CoreError::ShapeMismatch("times and values differ in length".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= window.0 && t <= window.1 {
            if !(t > 0.0) {
                return Err(CoreError::Domain("fit window must have t > 0".into()));
            }
            if !(v > 0.0) {
                return Err(CoreError::Domain(format!("non-positive value {v} at t = {t} in fit window")));
            }
            xs.push(t.ln());
            ys.push(v.ln());
        }
    }
    let n = xs.len();
    if n < 10 {
        return Err(CoreError::InvalidArgument(format!(
            "fit window [{}, {}] holds {n} points; at least 10 required",
            window.0, window.1
        )));
    }
    let nf = n as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = nf * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(CoreError::Domain("degenerate fit window (single time)".into()));
    }
    let alpha = (nf * sxy - sx * sy) / denom;
    let log_d = (sy - alpha * sx) / nf;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (log_d + alpha * x);
            r * r
        })
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(PowerLawFit { amplitude: log_d.exp(), exponent: alpha, residual, window, points: n })
}

/// Rescale times as `t~ = Gamma_eff t` with `Gamma_eff = L(h)` from the
/// bath's symmetrized Lorentzian.
pub fn rescale_time(times: &[f64], bath_spec: &BathSpec, field: f64) -> Vec<f64> {
    let rate = bath::effective_rate(bath_spec, field);
    times.iter().map(|t| rate * t).collect()
}

/// Centered moving average with the given odd width; the window shrinks
/// symmetrically near the edges. Intended for log-spaced samples, where an
/// index-centered window is a log-time window.
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 || values.is_empty() {
        return values.to_vec();
    }
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let r = half.min(i).min(values.len() - 1 - i);
            let lo = i - r;
            let hi = i + r;
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Full derived series for one trajectory.
#[derive(Debug, Clone)]
pub struct TransportSeries {
    pub times: Vec<f64>,
    pub rescaled_times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_filtered: Vec<f64>,
    pub ppr: Vec<f64>,
    pub l1_coherence: Vec<f64>,
    pub effective_rate: f64,
}

/// Derive all transport series from a density-matrix trajectory.
pub fn transport_series(
    trajectory: &DensityTrajectory,
    j0: usize,
    bath_spec: &BathSpec,
    field: f64,
    filter_width: usize,
) -> TransportSeries {
    let points: Vec<TransportPoint> =
        trajectory.states.iter().map(|rho| transport_observables(rho, j0)).collect();
    let sigma: Vec<f64> = points.iter().map(|p| p.sigma).collect();
    TransportSeries {
        times: trajectory.times.clone(),
        rescaled_times: rescale_time(&trajectory.times, bath_spec, field),
        sigma_filtered: moving_average(&sigma, filter_width),
        sigma,
        ppr: points.iter().map(|p| p.ppr).collect(),
        l1_coherence: points.iter().map(|p| p.l1_coherence).collect(),
        effective_rate: bath::effective_rate(bath_spec, field),
    }
}

/// Trace distance `(1/2) ||rho - sigma||_1` between Hermitian states.
pub fn trace_distance(rho: &Array2<Complex64>, sigma: &Array2<Complex64>) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(CoreError::ShapeMismatch("state dimensions differ".into()));
    }
    let diff = rho - sigma;
    let (vals, _) = diff
        .eigh(ndarray_linalg::UPLO::Lower)
        .map_err(|e| CoreError::Linalg(format!("trace distance eigensolve: {e}")))?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Uhlmann fidelity `F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Eigenvalues in `[-1e-6, 0)` are clipped to zero before the square
/// roots; anything more negative is an error.
pub fn fidelity(rho: &Array2<Complex64>, sigma: &Array2<Complex64>) -> Result<f64> {
    let sqrt_rho = psd_sqrt(rho)?;
    let inner = sqrt_rho.dot(sigma).dot(&sqrt_rho);
    let (vals, _) = inner
        .eigh(ndarray_linalg::UPLO::Lower)
        .map_err(|e| CoreError::Linalg(format!("fidelity eigensolve: {e}")))?;
    let root_sum: f64 = clip_spectrum(&vals)?.iter().map(|v| v.sqrt()).sum();
    Ok(root_sum * root_sum)
}

fn psd_sqrt(rho: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (vals, vecs) = rho
        .eigh(ndarray_linalg::UPLO::Lower)
        .map_err(|e| CoreError::Linalg(format!("matrix square root eigensolve: {e}")))?;
    let clipped = clip_spectrum(&vals)?;
    let n = rho.nrows();
    let mut out = Array2::zeros((n, n));
    for k in 0..n {
        let s = clipped[k].sqrt();
        if s == 0.0 {
            continue;
        }
        // eigh hands back the conjugated eigenvector matrix for complex
        // Hermitian input; undo the conjugation when rebuilding
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += s * vecs[(i, k)].conj() * vecs[(j, k)];
            }
        }
    }
    Ok(out)
}

fn clip_spectrum(vals: &Array1<f64>) -> Result<Vec<f64>> {
    vals.iter()
        .map(|&v| {
            if v < -1e-6 {
                Err(CoreError::Domain(format!("state has negative eigenvalue {v:.3e}")))
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}
