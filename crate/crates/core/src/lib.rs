//! Dissipative single-particle transport in the Aubry-André-Harper chain.
//!
//! The crate simulates a spinless particle on a quasiperiodic chain whose
//! central site is coupled to a bath with exponentially decaying
//! correlations. It provides:
//!
//! - [`lattice`]: the AAH Hamiltonian, its spectrum, and localization
//!   diagnostics (IPR-based system-size filtering);
//! - [`bath`]: the bath correlation function, its exponential-mode
//!   decomposition, and the Lorentzian activation rate;
//! - [`heom`]: the hierarchical-equations-of-motion generator and time
//!   evolution of the auxiliary-density-operator hierarchy;
//! - [`markovian`]: Lindblad and non-secular Bloch-Redfield generators on
//!   the same vectorized space, plus state fidelity between methods;
//! - [`spectrum`]: dominant eigenvalues of any generator, two-cluster
//!   detection, the spectral gap, and relaxation timescales;
//! - [`semiclassical`]: the incoherent-hopping rate equation between
//!   localized states with bath-activated Lorentzian rates;
//! - [`observables`]: RMSD, participation ratio, l1-coherence, power-law
//!   fits, and effective-rate time rescaling.
//!
//! All energies are measured in units of the hopping `J` and times in
//! `1/J`. Sites are 1-based at every public interface.

pub mod bath;
pub mod error;
pub mod heom;
pub mod lattice;
pub mod markovian;
pub mod observables;
pub mod ode;
pub mod semiclassical;
pub mod sparse;
pub mod spectrum;

pub use bath::{BathSpec, ExponentialMode};
pub use error::CoreError;
pub use heom::{Generator, GeneratorKind, HierarchyState, TierSpec};
pub use lattice::{ChainSpec, EigenDecomposition, Hamiltonian};
pub use observables::{DensityTrajectory, PopulationTrajectory, TransportSeries};
pub use semiclassical::RateMatrix;
pub use spectrum::SpectrumReport;
