//! Hierarchical equations of motion for the locally-coupled chain.
//!
//! The single-particle sector is an L-dimensional Hilbert space and the
//! coupling operator is the central-site projector `A = |j0><j0|`. Each
//! auxiliary density operator (ADO) is an L x L complex matrix labelled by
//! a multi-index `n` over the bath modes with `sum_k n_k <= tier`; the
//! `n = 0` member is the physical reduced state. Density matrices are
//! vectorized row-major (`rho_ij -> i*L + j`) and the full hierarchy is a
//! single flat vector acted on by one sparse generator, so the HEOM,
//! Lindblad, and Bloch-Redfield generators share the evolution and
//! spectrum machinery.
//!
//! The scaled-ADO normalization `rho_n / prod_k sqrt(n_k! |c_k|^{n_k})`
//! keeps deep-tier magnitudes O(1); truncation is hard (ADOs beyond the
//! tier are zero, no terminator).

use ndarray::Array2;
use num_complex::Complex64;

use crate::bath::{self, BathSpec};
use crate::error::{CoreError, Result};
use crate::lattice::{ChainSpec, Hamiltonian};
use crate::observables::DensityTrajectory;
use crate::ode::{self, OdeOptions};
use crate::sparse::{CooMatrix, CsrMatrix};

/// Maximum hierarchy depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TierSpec {
    pub depth: usize,
}

impl TierSpec {
    pub fn new(depth: usize) -> Self {
        TierSpec { depth }
    }
}

/// Default cap on the flattened hierarchy dimension `M * L^2`.
pub const DEFAULT_DIMENSION_BUDGET: usize = 4_000_000;

/// Which master equation a generator implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Heom,
    Lindblad,
    Redfield,
}

impl std::fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorKind::Heom => write!(f, "heom"),
            GeneratorKind::Lindblad => write!(f, "lindblad"),
            GeneratorKind::Redfield => write!(f, "redfield"),
        }
    }
}

/// A sparse superoperator together with its provenance.
#[derive(Debug, Clone)]
pub struct Generator {
    kind: GeneratorKind,
    matrix: CsrMatrix,
    sites: usize,
    n_ados: usize,
    chain: ChainSpec,
    bath: BathSpec,
    tier: Option<usize>,
}

impl Generator {
    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// Full flattened dimension `M * L^2`.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Dimension of the physical (tier-0) block, `L^2`.
    pub fn physical_dim(&self) -> usize {
        self.sites * self.sites
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n_ados(&self) -> usize {
        self.n_ados
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn tier(&self) -> Option<usize> {
        self.tier
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub(crate) fn from_parts(
        kind: GeneratorKind,
        matrix: CsrMatrix,
        chain: ChainSpec,
        bath: BathSpec,
        tier: Option<usize>,
    ) -> Self {
        let sites = chain.sites;
        let n_ados = matrix.dim() / (sites * sites);
        Generator { kind, matrix, sites, n_ados, chain, bath, tier }
    }
}

/// Flattened hierarchy vector; index 0 block is the physical state.
#[derive(Debug, Clone)]
pub struct HierarchyState {
    sites: usize,
    n_ados: usize,
    pub data: Vec<Complex64>,
}

impl HierarchyState {
    /// Initialize with the physical block set to `rho0` and all auxiliary
    /// blocks zero.
    pub fn from_density(rho0: &Array2<Complex64>, n_ados: usize) -> Result<Self> {
        let l = rho0.nrows();
        if rho0.ncols() != l {
            return Err(CoreError::ShapeMismatch("density matrix must be square".into()));
        }
        let mut data = vec![Complex64::ZERO; n_ados * l * l];
        for i in 0..l {
            for j in 0..l {
                data[i * l + j] = rho0[(i, j)];
            }
        }
        Ok(HierarchyState { sites: l, n_ados, data })
    }

    pub fn n_ados(&self) -> usize {
        self.n_ados
    }

    pub fn sites(&self) -> usize {
        self.sites
    }
}

/// Extract the physical block and re-Hermitize it as `(rho + rho^dag)/2`.
pub fn reduced_state(state: &HierarchyState) -> Array2<Complex64> {
    reduced_from_flat(&state.data, state.sites)
}

pub(crate) fn reduced_from_flat(data: &[Complex64], l: usize) -> Array2<Complex64> {
    let mut rho = Array2::zeros((l, l));
    for i in 0..l {
        for j in 0..l {
            let a = data[i * l + j];
            let b = data[j * l + i];
            rho[(i, j)] = 0.5 * (a + b.conj());
        }
    }
    rho
}

/// Hermiticity defect of the physical block before re-Hermitization.
pub fn hermiticity_defect(state: &HierarchyState) -> f64 {
    let l = state.sites;
    let mut worst = 0.0f64;
    for i in 0..l {
        for j in 0..l {
            let d = (state.data[i * l + j] - state.data[j * l + i].conj()).norm();
            worst = worst.max(0.5 * d);
        }
    }
    worst
}

/// All multi-indices over `modes` bath modes with total depth `<= tier`,
/// ordered by total depth then lexicographically. Index 0 is the zero
/// multi-index.
pub fn hierarchy_indices(modes: usize, tier: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=tier {
        let mut current = vec![0usize; modes];
        fill(&mut out, &mut current, 0, total);
    }
    return out;

    fn fill(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, pos: usize, remaining: usize) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(current.clone());
            return;
        }
        for v in 0..=remaining {
            current[pos] = v;
            fill(out, current, pos + 1, remaining - v);
        }
    }
}

/// Build the HEOM generator for the chain-plus-bath at the given tier.
pub fn build_heom_generator(
    hamiltonian: &Hamiltonian,
    bath_spec: &BathSpec,
    tier: &TierSpec,
) -> Result<Generator> {
    build_heom_generator_with_budget(hamiltonian, bath_spec, tier, DEFAULT_DIMENSION_BUDGET)
}

/// As [`build_heom_generator`] with an explicit cap on `M * L^2`.
pub fn build_heom_generator_with_budget(
    hamiltonian: &Hamiltonian,
    bath_spec: &BathSpec,
    tier: &TierSpec,
    budget: usize,
) -> Result<Generator> {
    bath_spec.validate()?;
    let chain = *hamiltonian.spec();
    let l = chain.sites;
    let modes = bath::decompose(bath_spec);
    let indices = hierarchy_indices(modes.len(), tier.depth);
    let n_ados = indices.len();
    let dim = n_ados * l * l;
    if dim > budget {
        return Err(CoreError::ResourceBudget { dim, budget });
    }

    let lookup = |idx: &[usize]| indices.iter().position(|n| n == idx);

    let s0 = chain.center_site() - 1; // 0-based coupling site
    let mut coo = CooMatrix::new(dim);
    let block = l * l;

    for (m, n_idx) in indices.iter().enumerate() {
        let off = m * block;

        // -i [H, .] on the diagonal block
        add_hamiltonian_commutator(&mut coo, off, hamiltonian.matrix());

        // -(sum_k n_k nu_k) identity
        let damping: Complex64 = n_idx
            .iter()
            .zip(&modes)
            .map(|(&nk, mode)| nk as f64 * mode.rate)
            .sum();
        if damping != Complex64::ZERO {
            for p in 0..block {
                coo.push(off + p, off + p, -damping);
            }
        }

        for (k, mode) in modes.iter().enumerate() {
            let abs_c = mode.coefficient.norm();
            if abs_c == 0.0 {
                continue; // decoupled hierarchy (kappa = 0)
            }
            let nk = n_idx[k];

            // coupling to the deeper ADO: -i sqrt((n_k + 1) |c_k|) [A, .]
            let mut up = n_idx.clone();
            up[k] += 1;
            if let Some(m_up) = lookup(&up) {
                let f = ((nk + 1) as f64 * abs_c).sqrt();
                add_projector_left(&mut coo, off, m_up * block, l, s0, Complex64::new(0.0, -f));
                add_projector_right(&mut coo, off, m_up * block, l, s0, Complex64::new(0.0, f));
            }

            // coupling to the shallower ADO:
            // -i sqrt(n_k / |c_k|) (c_k A . - c_k^* . A)
            if nk > 0 {
                let mut down = n_idx.clone();
                down[k] -= 1;
                let m_down = lookup(&down).expect("shallower ADO always present");
                let g = (nk as f64 / abs_c).sqrt();
                let left = Complex64::new(0.0, -g) * mode.coefficient;
                let right = Complex64::new(0.0, g) * mode.coefficient.conj();
                add_projector_left(&mut coo, off, m_down * block, l, s0, left);
                add_projector_right(&mut coo, off, m_down * block, l, s0, right);
            }
        }
    }

    Ok(Generator::from_parts(GeneratorKind::Heom, coo.to_csr(), chain, *bath_spec, Some(tier.depth)))
}

/// Append `-i [H, .]` acting within one block at `offset`.
fn add_hamiltonian_commutator(coo: &mut CooMatrix, offset: usize, h: &Array2<f64>) {
    let l = h.nrows();
    for i in 0..l {
        for a in 0..l {
            let v = h[(i, a)];
            if v == 0.0 {
                continue;
            }
            let hv = Complex64::new(0.0, -v);
            for j in 0..l {
                // -i H_ia rho_aj
                coo.push(offset + i * l + j, offset + a * l + j, hv);
                // +i rho_ja H_ai  (H symmetric)
                coo.push(offset + j * l + a, offset + j * l + i, -hv);
            }
        }
    }
}

/// Append `scale * A rho` with `A = |s0><s0|`, mapping the `col_off` block
/// into the `row_off` block.
pub(crate) fn add_projector_left(
    coo: &mut CooMatrix,
    row_off: usize,
    col_off: usize,
    l: usize,
    s0: usize,
    scale: Complex64,
) {
    for j in 0..l {
        coo.push(row_off + s0 * l + j, col_off + s0 * l + j, scale);
    }
}

/// Append `scale * rho A` with `A = |s0><s0|`.
pub(crate) fn add_projector_right(
    coo: &mut CooMatrix,
    row_off: usize,
    col_off: usize,
    l: usize,
    s0: usize,
    scale: Complex64,
) {
    for i in 0..l {
        coo.push(row_off + i * l + s0, col_off + i * l + s0, scale);
    }
}

/// Evolve an initial density matrix under any generator and return the
/// reduced states at the requested times.
pub fn evolve(
    generator: &Generator,
    rho0: &Array2<Complex64>,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<DensityTrajectory> {
    let l = generator.sites();
    if rho0.nrows() != l || rho0.ncols() != l {
        return Err(CoreError::ShapeMismatch(format!(
            "initial state is {}x{} but the chain has {l} sites",
            rho0.nrows(),
            rho0.ncols()
        )));
    }
    let trace: Complex64 = (0..l).map(|i| rho0[(i, i)]).sum();
    if (trace - Complex64::ONE).norm() > 1e-8 {
        return Err(CoreError::InvalidArgument(format!("initial trace {trace} is not 1")));
    }
    let herm_defect = (0..l)
        .flat_map(|i| (0..l).map(move |j| (i, j)))
        .map(|(i, j)| (rho0[(i, j)] - rho0[(j, i)].conj()).norm())
        .fold(0.0f64, f64::max);
    if herm_defect > 1e-8 {
        return Err(CoreError::InvalidArgument(format!(
            "initial state is not Hermitian (defect {herm_defect:.2e})"
        )));
    }

    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(CoreError::InvalidArgument("output times must be non-negative".into()));
    }

    let state = HierarchyState::from_density(rho0, generator.n_ados())?;
    let matrix = generator.matrix();
    // rho0 lives at t = 0 even when the output grid starts later
    let skip_origin = times.first().is_some_and(|&t| t > 0.0);
    let mut grid: Vec<f64>;
    let grid = if skip_origin {
        grid = Vec::with_capacity(times.len() + 1);
        grid.push(0.0);
        grid.extend_from_slice(times);
        grid.as_slice()
    } else {
        times
    };
    let flat = ode::integrate(|y, dy| matrix.matvec_into(y, dy), &state.data, grid, opts)?;

    let states = flat
        .iter()
        .skip(if skip_origin { 1 } else { 0 })
        .map(|v| reduced_from_flat(v, l))
        .collect();
    Ok(DensityTrajectory { times: times.to_vec(), states })
}

/// Pairwise tier-convergence report.
#[derive(Debug, Clone)]
pub struct TierConvergence {
    pub tiers: Vec<usize>,
    /// Max-over-time trace distance between consecutive-tier trajectories.
    pub distances: Vec<f64>,
    pub threshold: f64,
    pub converged: bool,
}

/// Run the same evolution at each tier and compare consecutive reduced
/// trajectories by the max trace distance over the time grid.
pub fn tier_convergence(
    hamiltonian: &Hamiltonian,
    bath_spec: &BathSpec,
    rho0: &Array2<Complex64>,
    times: &[f64],
    tiers: &[usize],
    opts: &OdeOptions,
    threshold: f64,
) -> Result<TierConvergence> {
    if tiers.len() < 2 {
        return Err(CoreError::InvalidArgument("at least two tiers are required".into()));
    }
    let mut trajectories = Vec::with_capacity(tiers.len());
    for &depth in tiers {
        let gen = build_heom_generator(hamiltonian, bath_spec, &TierSpec::new(depth))?;
        trajectories.push(evolve(&gen, rho0, times, opts)?);
    }
    let mut distances = Vec::with_capacity(tiers.len() - 1);
    for pair in trajectories.windows(2) {
        let worst = pair[0]
            .states
            .iter()
            .zip(&pair[1].states)
            .map(|(a, b)| crate::observables::trace_distance(a, b))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
        distances.push(worst);
    }
    let converged = distances.last().map(|&d| d < threshold).unwrap_or(false);
    Ok(TierConvergence { tiers: tiers.to_vec(), distances, threshold, converged })
}
