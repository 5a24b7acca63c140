//! The Aubry-André-Harper chain: Hamiltonian construction, exact
//! diagonalization, and localization diagnostics.
//!
//! The onsite potential is `V_j = h cos(2 pi beta j + phi)` with sites
//! `j = 1..L`. The chain is open (hopping runs over `j = 1..L-1`) and `L`
//! is required to be odd so that a central site `j0 = (L+1)/2` exists.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Inverse golden ratio, the standard AAH incommensuration.
pub const INVERSE_GOLDEN_RATIO: f64 = 0.618033988749894848;

/// Parameters of the quasiperiodic chain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Site count; odd, at least 3.
    #[serde(rename = "L")]
    pub sites: usize,
    /// Hopping energy J > 0; the unit of energy.
    #[serde(default = "default_hopping", rename = "J")]
    pub hopping: f64,
    /// Quasiperiodic field amplitude h >= 0 in units of J.
    #[serde(rename = "h")]
    pub field: f64,
    /// Potential phase phi in radians.
    #[serde(default, rename = "phi")]
    pub phase: f64,
    /// Incommensuration beta.
    #[serde(default = "default_beta", rename = "beta")]
    pub beta: f64,
}

fn default_hopping() -> f64 {
    1.0
}

fn default_beta() -> f64 {
    INVERSE_GOLDEN_RATIO
}

impl ChainSpec {
    pub fn new(sites: usize, field: f64) -> Result<Self> {
        let spec = ChainSpec {
            sites,
            hopping: 1.0,
            field,
            phase: 0.0,
            beta: INVERSE_GOLDEN_RATIO,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 3 {
            return Err(CoreError::InvalidChain(format!("L = {} but L >= 3 required", self.sites)));
        }
        if self.sites % 2 == 0 {
            return Err(CoreError::InvalidChain(format!(
                "L = {} is even; an odd L is required so the central site exists",
                self.sites
            )));
        }
        if !(self.hopping > 0.0) {
            return Err(CoreError::InvalidChain(format!("J = {} but J > 0 required", self.hopping)));
        }
        if !(self.field >= 0.0) {
            return Err(CoreError::InvalidChain(format!("h = {} but h >= 0 required", self.field)));
        }
        Ok(())
    }

    /// Central site, 1-based.
    pub fn center_site(&self) -> usize {
        (self.sites + 1) / 2
    }

    /// Onsite potential at 1-based site `j`.
    pub fn potential(&self, j: usize) -> f64 {
        self.field * (2.0 * std::f64::consts::PI * self.beta * j as f64 + self.phase).cos()
    }
}

/// Dense real symmetric AAH Hamiltonian.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    spec: ChainSpec,
    matrix: Array2<f64>,
}

impl Hamiltonian {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.spec.sites
    }
}

/// Build the tridiagonal single-particle AAH Hamiltonian.
pub fn build_aah_hamiltonian(spec: &ChainSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    let l = spec.sites;
    let mut m = Array2::zeros((l, l));
    for i in 0..l {
        m[(i, i)] = spec.potential(i + 1);
        if i + 1 < l {
            m[(i, i + 1)] = spec.hopping;
            m[(i + 1, i)] = spec.hopping;
        }
    }
    Ok(Hamiltonian { spec: *spec, matrix: m })
}

/// Eigenbasis of the chain Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Energies in ascending order.
    pub energies: Array1<f64>,
    /// Orthonormal eigenvectors as columns, matching `energies`.
    pub states: Array2<f64>,
    /// Localization center of each eigenstate: argmax_j |phi_n(j)|^2,
    /// 1-based, ties broken toward the smallest site.
    pub centers: Vec<usize>,
}

impl EigenDecomposition {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    /// Amplitude phi_n(j) with 1-based site `j` and 0-based state `n`.
    pub fn amplitude(&self, n: usize, j: usize) -> f64 {
        self.states[(j - 1, n)]
    }
}

/// Diagonalize the Hamiltonian; eigenvalues come out ascending.
pub fn diagonalize(h: &Hamiltonian) -> Result<EigenDecomposition> {
    let (energies, states) = h
        .matrix
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::Linalg(format!("symmetric eigensolver failed: {e}")))?;
    let l = energies.len();
    let mut centers = Vec::with_capacity(l);
    for n in 0..l {
        let mut best = 0usize;
        let mut best_val = -1.0;
        for j in 0..l {
            let w = states[(j, n)] * states[(j, n)];
            // strict comparison: ties resolve to the smallest site
            if w > best_val {
                best_val = w;
                best = j;
            }
        }
        centers.push(best + 1);
    }
    Ok(EigenDecomposition { energies, states, centers })
}

/// Localization length `xi = 1 / ln(h / 2J)`, defined in the localized
/// phase `h > 2J` only.
pub fn localization_length(field: f64, hopping: f64) -> Result<f64> {
    if field <= 2.0 * hopping {
        return Err(CoreError::Domain(format!(
            "localization length undefined for h = {field} <= 2J = {}",
            2.0 * hopping
        )));
    }
    Ok(1.0 / (field / (2.0 * hopping)).ln())
}

/// IPR of the site state `|j0>` in the eigenbasis:
/// `sum_m |phi_m(j0)|^4`, in (0, 1].
pub fn ipr_of_site(eig: &EigenDecomposition, j0: usize) -> Result<f64> {
    let l = eig.dimension();
    if j0 < 1 || j0 > l {
        return Err(CoreError::InvalidArgument(format!("site {j0} out of range 1..={l}")));
    }
    let row = eig.states.row(j0 - 1);
    Ok(row.iter().map(|a| a * a * a * a).sum())
}

/// Keep the sizes whose central-site IPR exceeds `1 - epsilon`.
pub fn filter_sizes(sizes: &[usize], field: f64, hopping: f64, epsilon: f64) -> Result<Vec<usize>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CoreError::InvalidArgument(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    if field <= 2.0 * hopping {
        return Err(CoreError::Domain(
            "size filtering targets the localized phase (h > 2J)".into(),
        ));
    }
    let mut kept = Vec::new();
    for &l in sizes {
        let spec = ChainSpec { sites: l, hopping, field, phase: 0.0, beta: INVERSE_GOLDEN_RATIO };
        let eig = diagonalize(&build_aah_hamiltonian(&spec)?)?;
        if ipr_of_site(&eig, spec.center_site())? > 1.0 - epsilon {
            kept.push(l);
        }
    }
    Ok(kept)
}
