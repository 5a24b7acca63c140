//! Incoherent-hopping rate equation for the deeply localized phase.
//!
//! Transitions between exponentially localized states are driven by the
//! noise at the central site. Each rate combines the overlap of the two
//! envelopes with that site and a Lorentzian activation factor in the
//! energy mismatch:
//!
//! `Gamma_mn = |phi_m(j0)|^2 |phi_n(j0)|^2
//!     * (1/2) [ g gamma^2 / (gamma^2 + (Delta + omega0)^2)
//!             + g gamma^2 / (gamma^2 + (Delta - omega0)^2) ]`
//!
//! with `Delta = eps_n - eps_m` and `phi_n(j) = e^{-|j - j_n|/xi} / N_n`
//! normalized numerically over the finite chain. The deep-localized mode
//! labels state `n` by its site and uses `eps_n = h cos(2 pi beta n)`;
//! the eigenbasis mode takes energies and centers from an exact
//! diagonalization instead.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::bath::BathSpec;
use crate::error::{CoreError, Result};
use crate::lattice::{localization_length, ChainSpec, EigenDecomposition};
use crate::observables::PopulationTrajectory;

/// Default coupling calibration `g = kappa / 10`.
pub const DEFAULT_COUPLING_FRACTION: f64 = 0.1;

/// Symmetric matrix of incoherent hopping rates between localized states.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    size: usize,
    /// Row-major `size * size` entries, zero diagonal.
    rates: Vec<f64>,
    /// 1-based site label of each state.
    sites: Vec<usize>,
    pub g: f64,
    pub gamma: f64,
    pub omega0: f64,
    pub xi: f64,
    pub center: usize,
}

impl RateMatrix {
    /// Wrap explicit rates, enforcing non-negativity, zero diagonal, and
    /// symmetry.
    pub fn from_rates(rates: Vec<f64>, sites: Vec<usize>) -> Result<Self> {
        let size = sites.len();
        if rates.len() != size * size {
            return Err(CoreError::ShapeMismatch(format!(
                "{} rates for {} states",
                rates.len(),
                size
            )));
        }
        for m in 0..size {
            if rates[m * size + m] != 0.0 {
                return Err(CoreError::InvalidArgument(format!("nonzero diagonal rate at state {m}")));
            }
            for n in 0..size {
                let r = rates[m * size + n];
                if !(r >= 0.0) {
                    return Err(CoreError::InvalidArgument(format!("negative rate {r} at ({m}, {n})")));
                }
                let rt = rates[n * size + m];
                if (r - rt).abs() > 1e-12 * (1.0 + r.abs()) {
                    return Err(CoreError::InvalidArgument(format!("asymmetric rates at ({m}, {n}): {r} vs {rt}")));
                }
            }
        }
        Ok(RateMatrix {
            size,
            rates,
            sites,
            g: f64::NAN,
            gamma: f64::NAN,
            omega0: 0.0,
            xi: f64::NAN,
            center: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Rate from state `n` into state `m`, 0-based labels.
    pub fn rate(&self, m: usize, n: usize) -> f64 {
        self.rates[m * self.size + n]
    }

    /// 1-based site label of state `m`.
    pub fn site_of(&self, m: usize) -> usize {
        self.sites[m]
    }

    /// Generator `M_mn = Gamma_mn - delta_mn sum_k Gamma_km`; columns sum
    /// to zero, and the matrix is symmetric because the rates are.
    pub fn generator(&self) -> Array2<f64> {
        let n = self.size;
        let mut m = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.rate(i, j);
            }
        }
        for j in 0..n {
            let out: f64 = (0..n).map(|k| self.rate(k, j)).sum();
            m[(j, j)] -= out;
        }
        m
    }
}

/// Rates in the deep-localized approximation: state `n` lives on site `n`
/// with energy `h cos(2 pi beta n + phi)`.
pub fn transition_rates_deep(chain: &ChainSpec, bath: &BathSpec, g: f64) -> Result<RateMatrix> {
    chain.validate()?;
    bath.validate()?;
    let sites: Vec<usize> = (1..=chain.sites).collect();
    let energies: Vec<f64> = sites.iter().map(|&j| chain.potential(j)).collect();
    transition_rates_from(chain, &sites, &energies, bath, g)
}

/// Rates from an exact eigenbasis: energies and localization centers come
/// from `lattice::diagonalize`.
pub fn transition_rates_eigenbasis(
    chain: &ChainSpec,
    eig: &EigenDecomposition,
    bath: &BathSpec,
    g: f64,
) -> Result<RateMatrix> {
    if eig.dimension() != chain.sites {
        return Err(CoreError::ShapeMismatch(format!(
            "eigenbasis of dimension {} for a chain of {} sites",
            eig.dimension(),
            chain.sites
        )));
    }
    let energies: Vec<f64> = eig.energies.to_vec();
    transition_rates_from(chain, &eig.centers, &energies, bath, g)
}

/// Rates for explicitly supplied state sites and energies.
pub fn transition_rates_from(
    chain: &ChainSpec,
    sites: &[usize],
    energies: &[f64],
    bath: &BathSpec,
    g: f64,
) -> Result<RateMatrix> {
    if sites.len() != energies.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "{} sites but {} energies",
            sites.len(),
            energies.len()
        )));
    }
    if !(g >= 0.0) {
        return Err(CoreError::InvalidArgument(format!("coupling g = {g} but g >= 0 required")));
    }
    let xi = localization_length(chain.field, chain.hopping)?;
    let j0 = chain.center_site();
    let l = chain.sites;
    let n_states = sites.len();

    // |phi_n(j0)|^2 with the envelope normalized over the finite chain.
    let weight: Vec<f64> = sites
        .iter()
        .map(|&jn| {
            let norm2: f64 = (1..=l)
                .map(|j| (-2.0 * (j as f64 - jn as f64).abs() / xi).exp())
                .sum();
            (-2.0 * (j0 as f64 - jn as f64).abs() / xi).exp() / norm2
        })
        .collect();

    let g2 = bath.gamma * bath.gamma;
    let mut rates = vec![0.0; n_states * n_states];
    for m in 0..n_states {
        for n in 0..n_states {
            if m == n {
                continue;
            }
            let delta = energies[n] - energies[m];
            let plus = delta + bath.omega0;
            let minus = delta - bath.omega0;
            let activation = 0.5 * g * g2 * (1.0 / (g2 + plus * plus) + 1.0 / (g2 + minus * minus));
            rates[m * n_states + n] = weight[m] * weight[n] * activation;
        }
    }

    Ok(RateMatrix {
        size: n_states,
        rates,
        sites: sites.to_vec(),
        g,
        gamma: bath.gamma,
        omega0: bath.omega0,
        xi,
        center: j0,
    })
}

/// Effective incoherent hopping rate used for the semiclassical time
/// rescaling:
/// `1/2 [ 10 g gamma^2 / (gamma^2 + (h + omega0)^2)
///      + 10 g gamma^2 / (gamma^2 + (h - omega0)^2) ]`.
pub fn effective_rate_cl(g: f64, gamma: f64, omega0: f64, field: f64) -> f64 {
    let g2 = gamma * gamma;
    let plus = field + omega0;
    let minus = field - omega0;
    5.0 * g * g2 * (1.0 / (g2 + plus * plus) + 1.0 / (g2 + minus * minus))
}

/// Accumulated transition weight
/// `J(t) = int_0^t dt1 int_0^t dt2 e^{-gamma |t1 - t2|} cos(Delta (t1 - t2))`
/// in closed form, including the decaying transients.
pub fn transition_weight(delta: f64, gamma: f64, t: f64) -> f64 {
    let d2 = gamma * gamma + delta * delta;
    let osc = (-gamma * t).exp();
    2.0 * gamma * t / d2 + 2.0 * (delta * delta - gamma * gamma) / (d2 * d2)
        - 2.0 * (delta * delta - gamma * gamma) * osc * (delta * t).cos() / (d2 * d2)
        - 4.0 * delta * gamma * osc * (delta * t).sin() / (d2 * d2)
}

/// Linear-in-time limit of `transition_weight`, whose slope defines the
/// hopping rates.
pub fn transition_weight_markov(delta: f64, gamma: f64, t: f64) -> f64 {
    2.0 * gamma * t / (gamma * gamma + delta * delta)
}

/// Propagate `dP/dt = M P` exactly through the spectral decomposition of
/// the symmetric generator.
pub fn evolve_rate_equation(r: &RateMatrix, p0: &[f64], times: &[f64]) -> Result<PopulationTrajectory> {
    let n = r.len();
    if p0.len() != n {
        return Err(CoreError::ShapeMismatch(format!(
            "initial populations of length {} for {} states",
            p0.len(),
            n
        )));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(CoreError::InvalidArgument(format!("initial populations sum to {total}, not 1")));
    }
    if let Some(bad) = p0.iter().find(|&&p| p < -1e-12) {
        return Err(CoreError::InvalidArgument(format!("negative initial population {bad}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(CoreError::InvalidArgument("times must be non-negative and non-decreasing".into()));
    }

    let (mu, v) = r
        .generator()
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::Linalg(format!("rate generator eigensolver failed: {e}")))?;
    let p0 = Array1::from_vec(p0.to_vec());
    let coeffs = v.t().dot(&p0);

    let populations = times
        .iter()
        .map(|&t| {
            let scaled: Array1<f64> =
                Array1::from_iter(mu.iter().zip(&coeffs).map(|(&m, &c)| (m * t).exp() * c));
            v.dot(&scaled).to_vec()
        })
        .collect();

    Ok(PopulationTrajectory { times: times.to_vec(), populations })
}

/// Total-variation distance `1/2 sum_j |p_j - q_j|` between two
/// population vectors.
pub fn population_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "population vectors of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Per-time total-variation distance between two population trajectories
/// on the same grid.
pub fn distance_series(a: &PopulationTrajectory, b: &PopulationTrajectory) -> Result<Vec<f64>> {
    if a.times.len() != b.times.len()
        || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs()))
    {
        return Err(CoreError::ShapeMismatch("trajectories use different time grids".into()));
    }
    a.populations
        .iter()
        .zip(&b.populations)
        .map(|(p, q)| population_distance(p, q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::lorentzian_rate;
    use crate::lattice::{build_aah_hamiltonian, diagonalize};
    use proptest::prelude::*;

    fn chain(l: usize, h: f64) -> ChainSpec {
        ChainSpec::new(l, h).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_rates() {
        let b = BathSpec::new(2.0, 10.0).unwrap();
        let r = transition_rates_deep(&chain(15, 10.0), &b, 0.0).unwrap();
        for m in 0..r.len() {
            for n in 0..r.len() {
                assert_eq!(r.rate(m, n), 0.0);
            }
        }
    }

    #[test]
    fn delocalized_field_is_rejected() {
        let b = BathSpec::new(2.0, 10.0).unwrap();
        assert!(matches!(
            transition_rates_deep(&chain(15, 1.5), &b, 0.2),
            Err(CoreError::Domain(_))
        ));
    }

    #[test]
    fn rate_entries_match_envelope_times_activation() {
        // oracle: |phi_m(j0)|^2 |phi_n(j0)|^2 L(Delta) with kappa -> g
        let spec = chain(15, 10.0);
        let b = BathSpec::with_omega0(2.0, 10.0, 3.0).unwrap();
        let g = 0.2;
        let r = transition_rates_deep(&spec, &b, g).unwrap();
        let xi = localization_length(spec.field, spec.hopping).unwrap();
        let j0 = spec.center_site();
        let weight = |jn: usize| {
            let norm2: f64 = (1..=spec.sites)
                .map(|j| (-2.0 * (j as f64 - jn as f64).abs() / xi).exp())
                .sum();
            (-2.0 * (j0 as f64 - jn as f64).abs() / xi).exp() / norm2
        };
        let surrogate = BathSpec::with_omega0(g, b.gamma, b.omega0).unwrap();
        for (m, n) in [(0usize, 1usize), (3, 9), (7, 8), (12, 2)] {
            let delta = spec.potential(n + 1) - spec.potential(m + 1);
            let expect = weight(m + 1) * weight(n + 1) * lorentzian_rate(&surrogate, delta);
            assert!((r.rate(m, n) - expect).abs() < 1e-15 * (1.0 + expect));
        }
    }

    #[test]
    fn resonant_pairs_beat_detuned_pairs_by_the_lorentzian_ratio() {
        let spec = chain(15, 10.0);
        let b = BathSpec::new(2.0, 10.0).unwrap();
        let sites = vec![7, 9];
        let resonant = transition_rates_from(&spec, &sites, &[1.0, 1.0], &b, 0.2).unwrap();
        let detuned = transition_rates_from(&spec, &sites, &[1.0, 1.0 + spec.field], &b, 0.2).unwrap();
        let ratio = resonant.rate(0, 1) / detuned.rate(0, 1);
        let expect = (b.gamma * b.gamma + spec.field * spec.field) / (b.gamma * b.gamma);
        assert!((ratio - expect).abs() < 1e-10, "{ratio} vs {expect}");
    }

    #[test]
    fn effective_rate_cl_reference_values() {
        assert!((effective_rate_cl(0.2, 10.0, 0.0, 10.0) - 1.0).abs() < 1e-15);
        // omega0 = h doubles the resonant term and suppresses the other
        let v = effective_rate_cl(0.2, 10.0, 10.0, 10.0);
        let expect = 5.0 * 0.2 * 100.0 * (1.0 / 500.0 + 1.0 / 100.0);
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn site_resolved_hopping_is_directionally_asymmetric() {
        // from a fixed off-center site, the inward and outward
        // nearest-neighbor rates differ
        let spec = chain(33, 10.0);
        let b = BathSpec::new(2.0, 10.0).unwrap();
        let r = transition_rates_deep(&spec, &b, 0.2).unwrap();
        let j = 20usize; // 0-based state on site 21, j0 = 17
        let inward = r.rate(j, j - 1);
        let outward = r.rate(j, j + 1);
        assert!((inward - outward).abs() > 0.1 * inward.max(outward));
    }

    #[test]
    fn eigenbasis_rates_approach_deep_localized_rates_at_large_field() {
        let spec = chain(15, 40.0);
        let b = BathSpec::new(2.0, 10.0).unwrap();
        let eig = diagonalize(&build_aah_hamiltonian(&spec).unwrap()).unwrap();
        let exact = transition_rates_eigenbasis(&spec, &eig, &b, 0.2).unwrap();
        let deep = transition_rates_deep(&spec, &b, 0.2).unwrap();
        // compare entries between states centered on the same sites
        let mut checked = 0;
        for m in 0..15 {
            for n in 0..15 {
                if m == n {
                    continue;
                }
                let (jm, jn) = (exact.site_of(m), exact.site_of(n));
                let d = deep.rate(jm - 1, jn - 1);
                let e = exact.rate(m, n);
                assert!((e - d).abs() < 0.05 * d.max(e), "({jm},{jn}): {e} vs {d}");
                checked += 1;
            }
        }
        assert_eq!(checked, 15 * 14);
    }

    #[test]
    fn two_state_relaxation_closed_form() {
        let rate = 0.37;
        let r = RateMatrix::from_rates(vec![0.0, rate, rate, 0.0], vec![1, 2]).unwrap();
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let traj = evolve_rate_equation(&r, &[1.0, 0.0], &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let expect = 0.5 * (1.0 + (-2.0 * rate * t).exp());
            assert!((traj.populations[i][0] - expect).abs() < 1e-12);
            assert!((traj.populations[i][0] + traj.populations[i][1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_state_is_uniform() {
        // moderate field keeps every state well connected, so the zero
        // eigenvalue is isolated from the slow decay modes
        let spec = chain(9, 4.0);
        let b = BathSpec::new(2.0, 5.0).unwrap();
        let r = transition_rates_deep(&spec, &b, 0.3).unwrap();
        // generator annihilates the uniform vector by column-sum symmetry
        let m = r.generator();
        let uniform = Array1::from_elem(9, 1.0 / 9.0);
        let residual = m.dot(&uniform);
        assert!(residual.iter().all(|x| x.abs() < 1e-15));

        // null-space oracle: the top eigenvector is uniform, all other
        // modes decay
        let (mu, v) = m.eigh(UPLO::Lower).unwrap();
        let top = mu.len() - 1; // ascending order
        assert!(mu[top].abs() < 1e-14);
        let scale = 9.0f64.sqrt() * v[(0, top)].signum();
        for i in 0..9 {
            assert!((v[(i, top)] * scale - 1.0).abs() < 1e-10);
        }
        // propagate far beyond the slowest relaxation time
        let t_relax = 50.0 / mu[top - 1].abs();
        let mut p0 = vec![0.0; 9];
        p0[4] = 1.0;
        let traj = evolve_rate_equation(&r, &p0, &[t_relax]).unwrap();
        for &p in &traj.populations[0] {
            assert!((p - 1.0 / 9.0).abs() < 1e-8, "{p}");
        }
    }

    #[test]
    fn evolution_conserves_and_stays_non_negative() {
        let spec = chain(33, 10.0);
        let b = BathSpec::new(2.0, 10.0).unwrap();
        let r = transition_rates_deep(&spec, &b, 0.2).unwrap();
        let mut p0 = vec![0.0; 33];
        p0[16] = 1.0;
        let times: Vec<f64> = (0..60).map(|i| (0.2 * i as f64).exp() - 1.0).collect();
        let traj = evolve_rate_equation(&r, &p0, &times).unwrap();
        for row in &traj.populations {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-10);
            assert!(row.iter().all(|&p| p >= -1e-12));
        }
    }

    #[test]
    fn from_rates_enforces_invariants() {
        assert!(RateMatrix::from_rates(vec![0.0, 1.0, 2.0, 0.0], vec![1, 2]).is_err());
        assert!(RateMatrix::from_rates(vec![0.0, -1.0, -1.0, 0.0], vec![1, 2]).is_err());
        assert!(RateMatrix::from_rates(vec![0.5, 1.0, 1.0, 0.0], vec![1, 2]).is_err());
        assert!(RateMatrix::from_rates(vec![0.0, 1.0], vec![1, 2]).is_err());
    }

    #[test]
    fn transition_weight_against_quadrature() {
        // double trapezoid integral of e^{-gamma|t1-t2|} cos(Delta (t1-t2))
        let (delta, gamma, t) = (3.0, 1.5, 2.0);
        let n = 2000;
        let dt = t / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 }
                    * if j == 0 || j == n { 0.5 } else { 1.0 };
                let s = (i as f64 - j as f64) * dt;
                sum += w * (-gamma * s.abs()).exp() * (delta * s).cos();
            }
        }
        let numeric = sum * dt * dt;
        let closed = transition_weight(delta, gamma, t);
        assert!((numeric - closed).abs() < 1e-4, "{numeric} vs {closed}");
    }

    #[test]
    fn transition_weight_limits() {
        assert_eq!(transition_weight(3.0, 1.5, 0.0), 0.0);
        // long times: offset plus the Markov slope
        let (delta, gamma) = (2.0, 1.0);
        let d2 = gamma * gamma + delta * delta;
        for t in [40.0, 60.0] {
            let expect = transition_weight_markov(delta, gamma, t)
                + 2.0 * (delta * delta - gamma * gamma) / (d2 * d2);
            assert!((transition_weight(delta, gamma, t) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_reference_values() {
        assert_eq!(population_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(population_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(population_distance(&[1.0], &[0.5, 0.5]).is_err());

        let a = PopulationTrajectory { times: vec![0.0, 1.0], populations: vec![vec![1.0, 0.0], vec![0.5, 0.5]] };
        let b = PopulationTrajectory { times: vec![0.0, 1.0], populations: vec![vec![0.0, 1.0], vec![0.5, 0.5]] };
        let d = distance_series(&a, &b).unwrap();
        assert_eq!(d, vec![1.0, 0.0]);

        let c = PopulationTrajectory { times: vec![0.0, 2.0], populations: b.populations.clone() };
        assert!(distance_series(&a, &c).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rates_are_symmetric_non_negative_zero_diagonal(
            h in 2.5f64..40.0, gamma in 0.5f64..30.0, omega0 in 0.0f64..10.0, g in 0.0f64..1.0,
        ) {
            let spec = chain(15, h);
            let b = BathSpec::with_omega0(2.0, gamma, omega0).unwrap();
            let r = transition_rates_deep(&spec, &b, g).unwrap();
            for m in 0..15 {
                prop_assert_eq!(r.rate(m, m), 0.0);
                for n in 0..15 {
                    prop_assert!(r.rate(m, n) >= 0.0);
                    prop_assert!((r.rate(m, n) - r.rate(n, m)).abs() <= 1e-15 * (1.0 + r.rate(m, n)));
                }
            }
        }

        #[test]
        fn evolution_preserves_normalization(seed in 0u64..500) {
            let spec = chain(9, 8.0);
            let b = BathSpec::new(2.0, 5.0).unwrap();
            let r = transition_rates_deep(&spec, &b, 0.3).unwrap();
            let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64
            };
            let mut p0: Vec<f64> = (0..9).map(|_| next()).collect();
            let total: f64 = p0.iter().sum();
            for p in &mut p0 {
                *p /= total;
            }
            let traj = evolve_rate_equation(&r, &p0, &[0.0, 0.7, 13.0]).unwrap();
            for row in &traj.populations {
                let s: f64 = row.iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-10);
                prop_assert!(row.iter().all(|&p| p >= -1e-12));
            }
        }
    }
}
