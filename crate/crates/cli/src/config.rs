//! Experiment configuration: TOML parsing and whole-file validation.

use std::path::PathBuf;

use aah_heom::bath::BathSpec;
use aah_heom::lattice::ChainSpec;
use serde::{Deserialize, Serialize};

/// Supported experiment kinds, matching the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Dynamics,
    Spectrum,
    Collapse,
    CompareMarkovian,
    Semiclassical,
    FilterSizes,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ExperimentKind::Dynamics => "dynamics",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Collapse => "collapse",
            ExperimentKind::CompareMarkovian => "compare_markovian",
            ExperimentKind::Semiclassical => "semiclassical",
            ExperimentKind::FilterSizes => "filter_sizes",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub chain: ChainSpec,
    pub bath: BathSpec,
    #[serde(default)]
    pub tier: TierSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub semiclassical: SemiclassicalSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSection {
    pub depth: usize,
}

impl Default for TierSection {
    fn default() -> Self {
        TierSection { depth: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_max: f64,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: TimeScale,
}

fn default_t_min() -> f64 {
    0.01
}

fn default_points() -> usize {
    100
}

fn default_scale() -> TimeScale {
    TimeScale::Log
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { t_max: 100.0, t_min: 0.01, points: 100, scale: TimeScale::Log }
    }
}

impl TimeSection {
    /// The sampling grid, always starting at t = 0.
    pub fn grid(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        match self.scale {
            TimeScale::Linear => {
                for i in 1..=self.points {
                    times.push(self.t_max * i as f64 / self.points as f64);
                }
            }
            TimeScale::Log => {
                let (la, lb) = (self.t_min.ln(), self.t_max.ln());
                for i in 0..self.points {
                    times.push((la + (lb - la) * i as f64 / (self.points - 1) as f64).exp());
                }
            }
        }
        times
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gamma: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub omega0: Option<Vec<f64>>,
    #[serde(rename = "L")]
    pub sites: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Power-law window in rescaled time for the main fit.
    pub early: Option<(f64, f64)>,
    /// Window for the late-time exponent.
    pub late: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Generators to diagonalize.
    pub generators: Vec<String>,
    /// Number of dominant eigenvalues kept; defaults to L^2.
    pub count: Option<usize>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            generators: vec!["heom".into(), "lindblad".into(), "redfield".into()],
            count: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBasis {
    Deep,
    Eigenbasis,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiclassicalSection {
    /// Coupling g; defaults to kappa / 10.
    pub g: Option<f64>,
    #[serde(default = "default_basis")]
    pub basis: RateBasis,
}

fn default_basis() -> RateBasis {
    RateBasis::Deep
}

impl Default for SemiclassicalSection {
    fn default() -> Self {
        SemiclassicalSection { g: None, basis: RateBasis::Deep }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub epsilon: f64,
    pub l_min: usize,
    pub l_max: usize,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection { epsilon: 0.02, l_min: 9, l_max: 101 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Moving-average width for the filtered RMSD column.
    pub filter_width: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), filter_width: 5 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection { rtol: 1e-8, atol: 1e-10 }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
    }

    /// Collect every invalid field instead of stopping at the first.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if let Err(e) = self.chain.validate() {
            errors.push(format!("chain: {e}"));
        }
        if let Err(e) = self.bath.validate() {
            errors.push(format!("bath: {e}"));
        }
        if !(self.time.t_max > 0.0) {
            errors.push(format!("time.t_max: {} but a positive value is required", self.time.t_max));
        }
        if self.time.points < 2 {
            errors.push(format!("time.points: {} but at least 2 are required", self.time.points));
        }
        if self.time.scale == TimeScale::Log && !(self.time.t_min > 0.0 && self.time.t_min < self.time.t_max)
        {
            errors.push(format!(
                "time.t_min: {} but 0 < t_min < t_max is required on a log grid",
                self.time.t_min
            ));
        }
        for (name, axis) in [
            ("sweep.gamma", &self.sweep.gamma),
            ("sweep.kappa", &self.sweep.kappa),
            ("sweep.h", &self.sweep.h),
            ("sweep.omega0", &self.sweep.omega0),
        ] {
            if let Some(values) = axis {
                if values.is_empty() {
                    errors.push(format!("{name}: empty sweep list"));
                }
            }
        }
        if let Some(values) = &self.sweep.sites {
            if values.is_empty() {
                errors.push("sweep.L: empty sweep list".into());
            }
        }
        for (name, window) in [("fit.early", self.fit.early), ("fit.late", self.fit.late)] {
            if let Some((a, b)) = window {
                if !(a > 0.0 && b > a) {
                    errors.push(format!("{name}: ({a}, {b}) but 0 < start < end is required"));
                }
            }
        }
        for kind in &self.spectrum.generators {
            if !matches!(kind.as_str(), "heom" | "lindblad" | "redfield") {
                errors.push(format!(
                    "spectrum.generators: unknown generator {kind:?} (expected heom, lindblad, or redfield)"
                ));
            }
        }
        if let Some(g) = self.semiclassical.g {
            if !(g >= 0.0) {
                errors.push(format!("semiclassical.g: {g} but g >= 0 is required"));
            }
        }
        if !(self.filter.epsilon > 0.0 && self.filter.epsilon < 1.0) {
            errors.push(format!("filter.epsilon: {} outside (0, 1)", self.filter.epsilon));
        }
        if self.filter.l_min < 3 || self.filter.l_min > self.filter.l_max {
            errors.push(format!(
                "filter.l_min: {} but 3 <= l_min <= l_max is required",
                self.filter.l_min
            ));
        }
        if self.output.filter_width == 0 {
            errors.push("output.filter_width: 0 but at least 1 is required".into());
        }
        if !(self.integrator.rtol > 0.0 && self.integrator.atol > 0.0) {
            errors.push(format!(
                "integrator: rtol {} / atol {} but positive tolerances are required",
                self.integrator.rtol, self.integrator.atol
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// One element of the sweep's cartesian product.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub chain: ChainSpec,
    pub bath: BathSpec,
}

fn format_value(v: f64) -> String {
    let s = format!("{v}");
    s.replace('-', "m")
}

impl ExperimentConfig {
    /// Expand the sweep axes into the cartesian product of points.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let one = |v| vec![v];
        let gammas = self.sweep.gamma.clone().unwrap_or_else(|| one(self.bath.gamma));
        let kappas = self.sweep.kappa.clone().unwrap_or_else(|| one(self.bath.kappa));
        let fields = self.sweep.h.clone().unwrap_or_else(|| one(self.chain.field));
        let omegas = self.sweep.omega0.clone().unwrap_or_else(|| one(self.bath.omega0));
        let sizes = self.sweep.sites.clone().unwrap_or_else(|| vec![self.chain.sites]);

        let mut points = Vec::new();
        for &l in &sizes {
            for &h in &fields {
                for &kappa in &kappas {
                    for &gamma in &gammas {
                        for &omega0 in &omegas {
                            let mut label = Vec::new();
                            if self.sweep.sites.is_some() {
                                label.push(format!("L{l}"));
                            }
                            if self.sweep.h.is_some() {
                                label.push(format!("h{}", format_value(h)));
                            }
                            if self.sweep.kappa.is_some() {
                                label.push(format!("kappa{}", format_value(kappa)));
                            }
                            if self.sweep.gamma.is_some() {
                                label.push(format!("gamma{}", format_value(gamma)));
                            }
                            if self.sweep.omega0.is_some() {
                                label.push(format!("omega0_{}", format_value(omega0)));
                            }
                            points.push(SweepPoint {
                                label: if label.is_empty() { "base".into() } else { label.join("_") },
                                chain: ChainSpec { sites: l, field: h, ..self.chain },
                                bath: BathSpec { kappa, gamma, omega0 },
                            });
                        }
                    }
                }
            }
        }
        points
    }
}
