//! Bath correlation function and its exponential-mode decomposition.
//!
//! The bath enters the reduced dynamics only through
//! `C(t) = (kappa gamma / 2) e^{-gamma |t|} cos(omega0 t)`. At
//! `omega0 = 0` this is a single real exponential; at `omega0 > 0` it
//! splits into a conjugate pair of complex modes. The Lorentzian
//! activation rate `L(omega)` derived from the same correlations sets the
//! effective transport timescale in the localized phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Bath correlation parameters, all in units of the hopping J.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BathSpec {
    /// Total correlation weight kappa >= 0.
    pub kappa: f64,
    /// Correlation decay rate gamma > 0.
    pub gamma: f64,
    /// Correlation oscillation frequency omega0 >= 0.
    #[serde(default)]
    pub omega0: f64,
}

impl BathSpec {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        let spec = BathSpec { kappa, gamma, omega0: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_omega0(kappa: f64, gamma: f64, omega0: f64) -> Result<Self> {
        let spec = BathSpec { kappa, gamma, omega0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(CoreError::InvalidBath(format!("kappa = {} but kappa >= 0 required", self.kappa)));
        }
        if !(self.gamma > 0.0) {
            return Err(CoreError::InvalidBath(format!("gamma = {} but gamma > 0 required", self.gamma)));
        }
        if !(self.omega0 >= 0.0) {
            return Err(CoreError::InvalidBath(format!("omega0 = {} but omega0 >= 0 required", self.omega0)));
        }
        Ok(())
    }
}

/// One term of the exponential decomposition `C(t) = sum_k c_k e^{-nu_k t}`.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialMode {
    pub coefficient: Complex64,
    pub rate: Complex64,
}

/// `C(t) = (kappa gamma / 2) e^{-gamma |t|} cos(omega0 t)`.
pub fn correlation(bath: &BathSpec, t: f64) -> f64 {
    0.5 * bath.kappa * bath.gamma * (-bath.gamma * t.abs()).exp() * (bath.omega0 * t).cos()
}

/// Decompose `C(t)` (for t >= 0) into complex exponential modes.
///
/// `omega0 = 0` yields the single mode `(kappa gamma / 2, gamma)`;
/// `omega0 > 0` yields the conjugate pair with rates `gamma -+ i omega0`.
pub fn decompose(bath: &BathSpec) -> Vec<ExponentialMode> {
    let half = 0.5 * bath.kappa * bath.gamma;
    if bath.omega0 == 0.0 {
        vec![ExponentialMode {
            coefficient: Complex64::new(half, 0.0),
            rate: Complex64::new(bath.gamma, 0.0),
        }]
    } else {
        vec![
            ExponentialMode {
                coefficient: Complex64::new(0.5 * half, 0.0),
                rate: Complex64::new(bath.gamma, -bath.omega0),
            },
            ExponentialMode {
                coefficient: Complex64::new(0.5 * half, 0.0),
                rate: Complex64::new(bath.gamma, bath.omega0),
            },
        ]
    }
}

/// Symmetrized Lorentzian activation rate
/// `L(omega) = 1/2 [ kappa gamma^2 / (gamma^2 + (omega + omega0)^2)
///              + kappa gamma^2 / (gamma^2 + (omega - omega0)^2) ]`,
/// reducing to a single Lorentzian of width gamma at `omega0 = 0`.
pub fn lorentzian_rate(bath: &BathSpec, omega: f64) -> f64 {
    let g2 = bath.gamma * bath.gamma;
    let plus = omega + bath.omega0;
    let minus = omega - bath.omega0;
    0.5 * bath.kappa * g2 * (1.0 / (g2 + plus * plus) + 1.0 / (g2 + minus * minus))
}

/// Effective bath-activated hopping rate `Gamma_eff = L(h)` used for time
/// rescaling in the localized phase.
pub fn effective_rate(bath: &BathSpec, field: f64) -> f64 {
    lorentzian_rate(bath, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn correlation_at_zero_and_one() {
        let b = BathSpec::new(2.0, 1.0).unwrap();
        assert!((correlation(&b, 0.0) - 1.0).abs() < 1e-15); // kappa gamma / 2
        assert!((correlation(&b, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn correlation_integrates_to_half_kappa() {
        // Simpson quadrature of C over [0, 40/gamma]
        let b = BathSpec::new(2.0, 3.0).unwrap();
        let t_max = 40.0 / b.gamma;
        let n = 100_000;
        let h = t_max / n as f64;
        let mut s = correlation(&b, 0.0) + correlation(&b, t_max);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * correlation(&b, i as f64 * h);
        }
        let integral = s * h / 3.0;
        assert!((integral - b.kappa / 2.0).abs() < 1e-8, "{integral}");
    }

    #[test]
    fn single_mode_identity() {
        let b = BathSpec::new(2.0, 3.0).unwrap();
        let modes = decompose(&b);
        assert_eq!(modes.len(), 1);
        assert!((modes[0].coefficient - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!((modes[0].rate - Complex64::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn oscillating_mode_pair() {
        let b = BathSpec::with_omega0(2.0, 3.0, 5.0).unwrap();
        let modes = decompose(&b);
        assert_eq!(modes.len(), 2);
        assert!((modes[0].coefficient - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        assert!((modes[0].rate - Complex64::new(3.0, -5.0)).norm() < 1e-15);
        assert!((modes[1].rate - Complex64::new(3.0, 5.0)).norm() < 1e-15);
    }

    #[test]
    fn lorentzian_values() {
        let b = BathSpec::new(2.0, 10.0).unwrap();
        assert!((lorentzian_rate(&b, 0.0) - 2.0).abs() < 1e-15); // peak = kappa
        assert!((effective_rate(&b, 10.0) - 1.0).abs() < 1e-15); // 2*100/200

        let b = BathSpec::new(2.0, 20.0).unwrap();
        assert!((effective_rate(&b, 10.0) - 1.6).abs() < 1e-15); // 2*400/500
    }

    #[test]
    fn lindblad_limit_of_the_integral() {
        // gamma -> infinity: the weight concentrates at t = 0 and the
        // integral over any fixed window approaches kappa / 2.
        let b = BathSpec::new(2.0, 1e4).unwrap();
        let t_max = 1.0;
        let n = 4_000_000;
        let h = t_max / n as f64;
        let mut s = 0.5 * (correlation(&b, 0.0) + correlation(&b, t_max));
        for i in 1..n {
            s += correlation(&b, i as f64 * h);
        }
        let integral = s * h;
        assert!((integral - b.kappa / 2.0).abs() < 1e-3, "{integral}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn correlation_is_even(kappa in 0.0f64..5.0, gamma in 0.1f64..50.0,
                               omega0 in 0.0f64..20.0, t in -20.0f64..20.0) {
            let b = BathSpec::with_omega0(kappa, gamma, omega0).unwrap();
            prop_assert!((correlation(&b, t) - correlation(&b, -t)).abs() < 1e-12);
        }

        #[test]
        fn reconstruction_from_modes(kappa in 0.0f64..5.0, gamma in 0.1f64..20.0,
                                     omega0 in 0.0f64..20.0) {
            let b = BathSpec::with_omega0(kappa, gamma, omega0).unwrap();
            let modes = decompose(&b);
            for i in 0..100 {
                let t = 10.0 / gamma * i as f64 / 99.0;
                let rebuilt: Complex64 = modes
                    .iter()
                    .map(|m| m.coefficient * (-m.rate * t).exp())
                    .sum();
                prop_assert!((rebuilt.re - correlation(&b, t)).abs() < 1e-12);
                prop_assert!(rebuilt.im.abs() < 1e-12);
            }
        }

        #[test]
        fn lorentzian_even_and_decreasing(kappa in 0.0f64..5.0, gamma in 0.1f64..20.0,
                                          omega in 0.0f64..30.0) {
            let b = BathSpec::new(kappa, gamma).unwrap();
            prop_assert!((lorentzian_rate(&b, omega) - lorentzian_rate(&b, -omega)).abs() < 1e-12);
            prop_assert!(lorentzian_rate(&b, omega) >= lorentzian_rate(&b, omega + 0.5) - 1e-15);
        }
    }
}
