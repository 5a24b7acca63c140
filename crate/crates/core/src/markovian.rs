//! Lindblad and non-secular Bloch-Redfield generators on the vectorized
//! physical space, for cross-validation against HEOM.
//!
//! Both act on the same `L^2`-dimensional space as the tier-0 HEOM block.
//! The Lindblad dissipator uses the jump operator `sqrt(kappa) |j0><j0|`;
//! the Redfield tensor is built from the one-sided Fourier transform of
//! the bath correlation function at the chain's Bohr frequencies, with no
//! secular approximation, and is returned in the site basis.

use ndarray::Array2;
use num_complex::Complex64;

use crate::bath::BathSpec;
use crate::error::{CoreError, Result};
use crate::heom::{self, Generator, GeneratorKind};
use crate::lattice::{diagonalize, Hamiltonian};
use crate::observables::{self, DensityTrajectory};
use crate::ode::OdeOptions;
use crate::sparse::CooMatrix;

/// One-sided Fourier transform of the bath correlation function,
/// `Gamma(omega) = int_0^inf C(t) e^{i omega t} dt
///             = (kappa gamma / 4) [ 1/(gamma - i(omega + omega0))
///                                 + 1/(gamma - i(omega - omega0)) ]`.
pub fn half_fourier(bath: &BathSpec, omega: f64) -> Complex64 {
    let quarter = 0.25 * bath.kappa * bath.gamma;
    let a = Complex64::new(bath.gamma, -(omega + bath.omega0));
    let b = Complex64::new(bath.gamma, -(omega - bath.omega0));
    quarter * (a.inv() + b.inv())
}

/// Table of `Gamma(eps_n - eps_m)` over all eigenpairs of a chain.
#[derive(Debug, Clone)]
pub struct HalfFourierRates {
    /// Entry `(m, n)` holds `Gamma(eps_n - eps_m)`.
    pub table: Array2<Complex64>,
}

impl HalfFourierRates {
    pub fn build(energies: &[f64], bath: &BathSpec) -> Self {
        let l = energies.len();
        let mut table = Array2::zeros((l, l));
        for m in 0..l {
            for n in 0..l {
                table[(m, n)] = half_fourier(bath, energies[n] - energies[m]);
            }
        }
        HalfFourierRates { table }
    }
}

/// Lindblad generator
/// `L[rho] = -i [H, rho] + kappa (A rho A - 1/2 {A, rho})` with the
/// central-site projector `A` (`A^2 = A`).
pub fn build_lindblad(hamiltonian: &Hamiltonian, bath: &BathSpec) -> Result<Generator> {
    bath.validate()?;
    let chain = *hamiltonian.spec();
    let l = chain.sites;
    let s0 = chain.center_site() - 1;
    let mut coo = CooMatrix::new(l * l);

    add_commutator(&mut coo, hamiltonian.matrix());

    let kappa = Complex64::new(bath.kappa, 0.0);
    // A rho A: the single entry (s0, s0) <- (s0, s0)
    coo.push(s0 * l + s0, s0 * l + s0, kappa);
    // -1/2 {A, rho}
    heom::add_projector_left(&mut coo, 0, 0, l, s0, -0.5 * kappa);
    heom::add_projector_right(&mut coo, 0, 0, l, s0, -0.5 * kappa);

    Ok(Generator::from_parts(GeneratorKind::Lindblad, coo.to_csr(), chain, *bath, None))
}

/// Full (non-secular) Bloch-Redfield generator
/// `L[rho] = -i [H, rho] + [Lambda rho, A] + [A, rho Lambda^dag]`
/// with `Lambda = sum_ab |a> A_ab Gamma(eps_b - eps_a) <b|` in the energy
/// eigenbasis, transformed back to the site basis.
pub fn build_bloch_redfield(hamiltonian: &Hamiltonian, bath: &BathSpec) -> Result<Generator> {
    bath.validate()?;
    let chain = *hamiltonian.spec();
    let l = chain.sites;
    let s0 = chain.center_site() - 1;
    let eig = diagonalize(hamiltonian)?;
    let rates = HalfFourierRates::build(eig.energies.as_slice().unwrap(), bath);

    // A in the eigenbasis is rank-1: A~_ab = phi_a(j0) phi_b(j0).
    let weights: Vec<f64> = (0..l).map(|n| eig.states[(s0, n)]).collect();
    let mut lambda_eig = Array2::<Complex64>::zeros((l, l));
    for a in 0..l {
        for b in 0..l {
            lambda_eig[(a, b)] = weights[a] * weights[b] * rates.table[(a, b)];
        }
    }
    // back to the site basis: Lambda = U Lambda~ U^T (U real orthogonal)
    let mut lambda = Array2::<Complex64>::zeros((l, l));
    for i in 0..l {
        for j in 0..l {
            let mut acc = Complex64::ZERO;
            for a in 0..l {
                for b in 0..l {
                    acc += eig.states[(i, a)] * lambda_eig[(a, b)] * eig.states[(j, b)];
                }
            }
            lambda[(i, j)] = acc;
        }
    }
    let lambda_dag = conj_transpose(&lambda);

    let mut coo = CooMatrix::new(l * l);
    add_commutator(&mut coo, hamiltonian.matrix());

    // [Lambda rho, A] = Lambda rho A - A Lambda rho
    let a_lambda = project_row(&lambda, s0); // A Lambda: only row s0 survives
    add_left_mult(&mut coo, l, &neg(&a_lambda), Complex64::ONE);
    add_left_right(&mut coo, l, &lambda, s0);

    // [A, rho Lambda^dag] = A rho Lambda^dag - rho Lambda^dag A
    let lambda_dag_a = project_col(&lambda_dag, s0); // Lambda^dag A: only column s0
    add_right_mult(&mut coo, l, &neg(&lambda_dag_a), Complex64::ONE);
    add_right_left(&mut coo, l, &lambda_dag, s0);

    Ok(Generator::from_parts(GeneratorKind::Redfield, coo.to_csr(), chain, *bath, None))
}

/// `-i [H, .]` for a real symmetric dense H within a single block.
fn add_commutator(coo: &mut CooMatrix, h: &Array2<f64>) {
    let l = h.nrows();
    for i in 0..l {
        for a in 0..l {
            let v = h[(i, a)];
            if v == 0.0 {
                continue;
            }
            let hv = Complex64::new(0.0, -v);
            for j in 0..l {
                coo.push(i * l + j, a * l + j, hv);
                coo.push(j * l + a, j * l + i, -hv);
            }
        }
    }
}

/// `scale * M rho`: entries `((i,j),(a,j)) += scale M_ia`.
fn add_left_mult(coo: &mut CooMatrix, l: usize, m: &Array2<Complex64>, scale: Complex64) {
    for i in 0..l {
        for a in 0..l {
            let v = scale * m[(i, a)];
            if v == Complex64::ZERO {
                continue;
            }
            for j in 0..l {
                coo.push(i * l + j, a * l + j, v);
            }
        }
    }
}

/// `scale * rho M`: entries `((i,j),(i,b)) += scale M_bj`.
fn add_right_mult(coo: &mut CooMatrix, l: usize, m: &Array2<Complex64>, scale: Complex64) {
    for b in 0..l {
        for j in 0..l {
            let v = scale * m[(b, j)];
            if v == Complex64::ZERO {
                continue;
            }
            for i in 0..l {
                coo.push(i * l + j, i * l + b, v);
            }
        }
    }
}

/// `M rho A` with the projector `A = |s0><s0|`:
/// entries `((i, s0), (a, s0)) += M_ia`.
fn add_left_right(coo: &mut CooMatrix, l: usize, m: &Array2<Complex64>, s0: usize) {
    for i in 0..l {
        for a in 0..l {
            coo.push(i * l + s0, a * l + s0, m[(i, a)]);
        }
    }
}

/// `A rho M` with the projector `A = |s0><s0|`:
/// entries `((s0, j), (s0, b)) += M_bj`.
fn add_right_left(coo: &mut CooMatrix, l: usize, m: &Array2<Complex64>, s0: usize) {
    for b in 0..l {
        for j in 0..l {
            coo.push(s0 * l + j, s0 * l + b, m[(b, j)]);
        }
    }
}

fn project_row(m: &Array2<Complex64>, s0: usize) -> Array2<Complex64> {
    let l = m.nrows();
    let mut out = Array2::zeros((l, l));
    for j in 0..l {
        out[(s0, j)] = m[(s0, j)];
    }
    out
}

fn project_col(m: &Array2<Complex64>, s0: usize) -> Array2<Complex64> {
    let l = m.nrows();
    let mut out = Array2::zeros((l, l));
    for i in 0..l {
        out[(i, s0)] = m[(i, s0)];
    }
    out
}

fn neg(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.map(|v| -v)
}

fn conj_transpose(m: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, c) = m.dim();
    let mut out = Array2::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
    out
}

/// Evolve the same initial state under HEOM and Bloch-Redfield and return
/// the Uhlmann fidelity between the two reduced states at each time.
pub fn fidelity_heom_vs_br(
    hamiltonian: &Hamiltonian,
    bath: &BathSpec,
    tier: &heom::TierSpec,
    rho0: &Array2<Complex64>,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<f64>> {
    let heom_gen = heom::build_heom_generator(hamiltonian, bath, tier)?;
    let br_gen = build_bloch_redfield(hamiltonian, bath)?;
    let a = heom::evolve(&heom_gen, rho0, times, opts)?;
    let b = heom::evolve(&br_gen, rho0, times, opts)?;
    fidelity_series(&a, &b)
}

/// Pointwise Uhlmann fidelity between two trajectories on the same grid.
pub fn fidelity_series(a: &DensityTrajectory, b: &DensityTrajectory) -> Result<Vec<f64>> {
    if a.times.len() != b.times.len() {
        return Err(CoreError::ShapeMismatch("trajectories differ in length".into()));
    }
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| observables::fidelity(x, y))
        .collect()
}
