//! Generator spectroscopy: dominant eigenvalues, two-cluster detection,
//! the spectral gap, and relaxation timescales.
//!
//! Clustering is deterministic: after setting aside the steady state (the
//! single eigenvalue with the largest real part), the remaining decay
//! rates `|Re lambda|` are sorted and split at their largest gap. The
//! group with the smaller rates is the slow cluster. Eigenvalues with
//! vanishing real part other than the steady state are kept and form a
//! zero-decay slow cluster, which is what the infinite-field Lindblad
//! limit produces.

use num_complex::Complex64;

use ndarray_linalg::Eig;

use crate::error::{CoreError, Result};
use crate::heom::Generator;
use crate::lattice::EigenDecomposition;

/// Dense non-Hermitian eigensolves above this dimension are refused; the
/// workspace alone would dominate memory.
pub const MAX_DENSE_DIM: usize = 4200;

/// Cluster membership of one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterLabel {
    Steady,
    Slow,
    Fast,
}

impl std::fmt::Display for ClusterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClusterLabel::Steady => write!(f, "steady"),
            ClusterLabel::Slow => write!(f, "slow"),
            ClusterLabel::Fast => write!(f, "fast"),
        }
    }
}

/// Clustered dominant spectrum of a generator.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    /// Label per eigenvalue, aligned with `eigenvalues`.
    pub labels: Vec<ClusterLabel>,
    /// Gap between the clusters' nearest edges; `None` when fewer than
    /// two non-steady eigenvalues exist.
    pub delta: Option<f64>,
    /// Longest relaxation time in the slow cluster (`max |Re|^-1`);
    /// infinite when the slow cluster touches zero decay.
    pub tau_slow: Option<f64>,
    /// Relaxation time of the fastest slow-cluster mode (`min |Re|^-1`
    /// over the slow cluster); the metastable plateau survives up to
    /// roughly this time. Infinite when every slow mode is zero-decay.
    pub tau_slow_edge: Option<f64>,
    /// Shortest relaxation time in the fast cluster (`min |Re|^-1`).
    pub tau_fast: Option<f64>,
    pub zero_tol: f64,
}

impl SpectrumReport {
    pub fn slow_cluster(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.cluster(ClusterLabel::Slow)
    }

    pub fn fast_cluster(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.cluster(ClusterLabel::Fast)
    }

    fn cluster(&self, which: ClusterLabel) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.labels)
            .filter(move |(_, &l)| l == which)
            .map(|(&v, _)| v)
    }
}

/// The `k` eigenvalues of the generator with the largest real parts,
/// sorted by descending real part.
pub fn dominant_eigenvalues(generator: &Generator, k: usize) -> Result<Vec<Complex64>> {
    let dim = generator.dim();
    if k > dim {
        return Err(CoreError::InvalidArgument(format!("requested {k} eigenvalues of a {dim}-dim generator")));
    }
    if dim > MAX_DENSE_DIM {
        return Err(CoreError::ResourceBudget { dim, budget: MAX_DENSE_DIM });
    }
    let dense = generator.matrix().to_dense();
    let (vals, _) = dense
        .eig()
        .map_err(|e| CoreError::Linalg(format!("non-Hermitian eigensolver failed: {e}")))?;
    let mut vals: Vec<Complex64> = vals.to_vec();
    vals.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap().then(b.im.partial_cmp(&a.im).unwrap()));
    vals.truncate(k);
    Ok(vals)
}

/// Scale-aware default zero tolerance for steady-state identification.
pub fn default_zero_tol(kappa: f64) -> f64 {
    1e-9 * kappa.max(1e-300)
}

/// Cluster eigenvalues by the largest gap in decay rate and measure the
/// gap and the cluster timescales.
pub fn cluster_and_gap(eigenvalues: &[Complex64], zero_tol: f64) -> Result<SpectrumReport> {
    if eigenvalues.is_empty() {
        return Err(CoreError::InvalidArgument("no eigenvalues supplied".into()));
    }
    let mut sorted: Vec<Complex64> = eigenvalues.to_vec();
    sorted.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap().then(b.im.partial_cmp(&a.im).unwrap()));

    // The steady state is the single eigenvalue with the largest real part.
    let mut labels = vec![ClusterLabel::Slow; sorted.len()];
    labels[0] = ClusterLabel::Steady;

    let rest: Vec<(usize, f64)> =
        (1..sorted.len()).map(|i| (i, sorted[i].re.abs())).collect();

    if rest.len() < 2 {
        return Ok(SpectrumReport {
            eigenvalues: sorted,
            labels,
            delta: None,
            tau_slow: None,
            tau_slow_edge: None,
            tau_fast: None,
            zero_tol,
        });
    }

    // Split the sorted decay rates at their largest gap.
    let mut rates: Vec<f64> = rest.iter().map(|&(_, r)| r).collect();
    rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut split_at = 0usize;
    let mut widest = -1.0f64;
    for i in 0..rates.len() - 1 {
        let gap = rates[i + 1] - rates[i];
        if gap > widest {
            widest = gap;
            split_at = i;
        }
    }
    let slow_edge = rates[split_at];
    let fast_edge = rates[split_at + 1];

    let mut slow_min = f64::INFINITY;
    let mut fast_max = 0.0f64;
    for &(idx, rate) in &rest {
        if rate <= slow_edge {
            labels[idx] = ClusterLabel::Slow;
            slow_min = slow_min.min(rate);
        } else {
            labels[idx] = ClusterLabel::Fast;
            fast_max = fast_max.max(rate);
        }
    }

    let delta = fast_edge - slow_edge;
    let tau_slow = if slow_min <= zero_tol { f64::INFINITY } else { 1.0 / slow_min };
    let tau_slow_edge = if slow_edge <= zero_tol { f64::INFINITY } else { 1.0 / slow_edge };
    let tau_fast = 1.0 / fast_max;

    Ok(SpectrumReport {
        eigenvalues: sorted,
        labels,
        delta: Some(delta),
        tau_slow: Some(tau_slow),
        tau_slow_edge: Some(tau_slow_edge),
        tau_fast: Some(tau_fast),
        zero_tol,
    })
}

/// Distances between two spectra.
#[derive(Debug, Clone, Copy)]
pub struct SpectraDistance {
    /// Symmetric Hausdorff distance between the eigenvalue sets.
    pub hausdorff: f64,
    /// Difference of the cluster gaps, when both reports carry one.
    pub delta_difference: Option<f64>,
}

/// Compare two spectrum reports of the same requested size.
pub fn compare_spectra(a: &SpectrumReport, b: &SpectrumReport) -> Result<SpectraDistance> {
    if a.eigenvalues.len() != b.eigenvalues.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "spectra hold {} and {} eigenvalues",
            a.eigenvalues.len(),
            b.eigenvalues.len()
        )));
    }
    let hausdorff = hausdorff_distance(&a.eigenvalues, &b.eigenvalues);
    let delta_difference = match (a.delta, b.delta) {
        (Some(x), Some(y)) => Some((x - y).abs()),
        _ => None,
    };
    Ok(SpectraDistance { hausdorff, delta_difference })
}

fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |from: &[Complex64], to: &[Complex64]| {
        from.iter()
            .map(|x| to.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// True iff every clustered (non-steady) eigenvalue's imaginary part lies
/// within `tol` of some Bohr frequency `eps_n - eps_m` of the chain.
pub fn bohr_frequency_check(report: &SpectrumReport, eig: &EigenDecomposition, tol: f64) -> bool {
    let l = eig.dimension();
    let mut bohr = Vec::with_capacity(l * l);
    for n in 0..l {
        for m in 0..l {
            bohr.push(eig.energies[n] - eig.energies[m]);
        }
    }
    report
        .eigenvalues
        .iter()
        .zip(&report.labels)
        .filter(|(_, &lab)| lab != ClusterLabel::Steady)
        .all(|(v, _)| bohr.iter().any(|w| (v.im - w).abs() <= tol))
}
