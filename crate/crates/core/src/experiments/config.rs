//! Experiment settings: presets, the TOML config file and flag overrides.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseCorrelation, DEFAULT_LAMBDA_GRID};
use crate::qaoa::{GradientRule, GsObjective};
use crate::statevec::MAX_QUBITS;
use crate::tfd::{Beta, TfdFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    TfdSweep,
    Gs,
    Hybrid,
    Noise,
    Mitigate,
}

impl Command {
    /// Section name in the config file and default experiment id.
    pub fn name(&self) -> &'static str {
        match self {
            Command::TfdSweep => "tfd_sweep",
            Command::Gs => "gs",
            Command::Hybrid => "hybrid",
            Command::Noise => "noise",
            Command::Mitigate => "mitigate",
        }
    }

    pub fn presets(&self) -> &'static [&'static str] {
        match self {
            Command::TfdSweep => &["fig2", "fig5"],
            Command::Gs => &["fig3"],
            Command::Hybrid => &["fig3c", "fig3d"],
            Command::Noise => &["fig4"],
            Command::Mitigate => &["fig6"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Minimal,
    ClassicalIsing,
    General,
}

impl FamilyName {
    pub fn with_layers(self, layers: usize) -> TfdFamily {
        match self {
            FamilyName::Minimal => TfdFamily::Minimal,
            FamilyName::ClassicalIsing => TfdFamily::ClassicalIsing { layers },
            FamilyName::General => TfdFamily::General { layers },
        }
    }
}

/// Temperatures `∞, 2, 1, 0.5, 0.2, 0` as inverse temperatures.
pub fn default_betas() -> Vec<Beta> {
    [0.0, 0.5, 1.0, 2.0, 5.0, f64::INFINITY]
        .into_iter()
        .map(|b| Beta::new(b).expect("valid grid"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfdSweepConfig {
    pub family: FamilyName,
    /// Layer count for the layered families.
    pub layers: usize,
    pub l: usize,
    /// Transverse field of `H_A`.
    pub g: f64,
    pub betas: Vec<Beta>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TfdSweepConfig {
    fn default() -> Self {
        Self {
            family: FamilyName::Minimal,
            layers: 1,
            l: 3,
            g: 1.0,
            betas: default_betas(),
            restarts: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsConfig {
    pub l: usize,
    pub p: Vec<usize>,
    pub objectives: Vec<GsObjective>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GsConfig {
    fn default() -> Self {
        Self {
            l: 7,
            p: vec![1, 2, 3],
            objectives: vec![GsObjective::Fidelity, GsObjective::Energy],
            restarts: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    Random,
    /// Exact fidelity optimum at the same depth.
    Warm,
    /// Angles from `angles`.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridConfig {
    pub l: usize,
    pub p: usize,
    /// Shots per measurement setting, ignored when `exact` is set.
    pub shots: usize,
    pub exact: bool,
    pub epsilon: f64,
    pub eta: f64,
    pub iterations: usize,
    pub start: StartMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    pub gradient: GradientRule,
    pub grad_tol: f64,
    /// Gate noise during the loop; both zero runs noiselessly.
    pub gamma: f64,
    pub lambda: f64,
    /// Trajectories per energy in exact mode with noise.
    pub noise_samples: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            l: 7,
            p: 1,
            shots: 2000,
            exact: false,
            epsilon: 0.05,
            eta: 0.005,
            iterations: 100,
            start: StartMode::Random,
            angles: None,
            gradient: GradientRule::OneSided,
            grad_tol: 1e-6,
            gamma: 0.0,
            lambda: 0.0,
            noise_samples: 1000,
            restarts: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredEnergy {
    pub p: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub l: usize,
    pub p: Vec<usize>,
    /// Angles come from this exact optimum at each depth.
    pub objective: GsObjective,
    /// λ values for the Γ curves and thresholds.
    pub lambdas: Vec<f64>,
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub samples: usize,
    pub correlation: NoiseCorrelation,
    /// Depths compared for the threshold, `[shallow, deep]`.
    pub threshold: [usize; 2],
    pub measured: Vec<MeasuredEnergy>,
    /// λ grid for calibration; empty skips it.
    pub calibration_lambdas: Vec<f64>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            l: 7,
            p: vec![1, 2, 3],
            objective: GsObjective::Fidelity,
            lambdas: vec![0.0, 0.22],
            gamma_max: 0.3,
            gamma_step: 0.01,
            samples: 1000,
            correlation: NoiseCorrelation::PerGate,
            threshold: [1, 3],
            measured: [(1, -8.02), (2, -7.74), (3, -5.46)]
                .into_iter()
                .map(|(p, energy)| MeasuredEnergy { p, energy })
                .collect(),
            calibration_lambdas: DEFAULT_LAMBDA_GRID.to_vec(),
            restarts: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigateConfig {
    pub family: FamilyName,
    pub layers: usize,
    pub l: usize,
    pub g: f64,
    pub betas: Vec<Beta>,
    pub shots: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub correlation: NoiseCorrelation,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MitigateConfig {
    fn default() -> Self {
        Self {
            family: FamilyName::Minimal,
            layers: 1,
            l: 3,
            g: 1.0,
            betas: default_betas(),
            shots: 2000,
            gamma: 0.0,
            lambda: 0.22,
            correlation: NoiseCorrelation::PerGate,
            restarts: 20,
            seed: 1,
        }
    }
}

/// Resolved settings of one run, tagged by subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "settings", rename_all = "snake_case")]
pub enum ExperimentConfig {
    TfdSweep(TfdSweepConfig),
    Gs(GsConfig),
    Hybrid(HybridConfig),
    Noise(NoiseConfig),
    Mitigate(MitigateConfig),
}

/// Command-line values that win over the preset and the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub p: Option<Vec<usize>>,
    pub gamma_max: Option<f64>,
    pub lambda: Option<f64>,
    pub shots: Option<usize>,
    pub beta_grid: Option<Vec<Beta>>,
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        match self {
            ExperimentConfig::TfdSweep(_) => Command::TfdSweep,
            ExperimentConfig::Gs(_) => Command::Gs,
            ExperimentConfig::Hybrid(_) => Command::Hybrid,
            ExperimentConfig::Noise(_) => Command::Noise,
            ExperimentConfig::Mitigate(_) => Command::Mitigate,
        }
    }

    pub fn defaults(command: Command) -> Self {
        match command {
            Command::TfdSweep => ExperimentConfig::TfdSweep(TfdSweepConfig::default()),
            Command::Gs => ExperimentConfig::Gs(GsConfig::default()),
            Command::Hybrid => ExperimentConfig::Hybrid(HybridConfig::default()),
            Command::Noise => ExperimentConfig::Noise(NoiseConfig::default()),
            Command::Mitigate => ExperimentConfig::Mitigate(MitigateConfig::default()),
        }
    }

    pub fn preset(command: Command, name: &str) -> Result<Self> {
        if !command.presets().contains(&name) {
            return Err(Error::usage(
                "preset",
                format!(
                    "`{name}` is not a {} preset (choose from {})",
                    command.name(),
                    command.presets().join(", ")
                ),
            ));
        }
        let mut config = Self::defaults(command);
        match (&mut config, name) {
            (ExperimentConfig::TfdSweep(c), "fig5") => {
                c.family = FamilyName::ClassicalIsing;
                c.g = 0.0;
            }
            (ExperimentConfig::Hybrid(c), "fig3d") => {
                c.p = 2;
                c.start = StartMode::Warm;
                c.iterations = 50;
            }
            _ => {}
        }
        Ok(config)
    }

    /// Defaults or preset, then the file section, then flags.
    pub fn resolve(
        command: Command,
        preset: Option<&str>,
        config_file: Option<&Path>,
        overrides: &Overrides,
    ) -> Result<Self> {
        let mut config = match preset {
            Some(name) => Self::preset(command, name)?,
            None => Self::defaults(command),
        };
        if let Some(path) = config_file {
            config = config.merge_file(&std::fs::read_to_string(path)?)?;
        }
        config.apply(overrides)?;
        config.validate()?;
        Ok(config)
    }

    /// Merges the top-level `seed` and this command's section of a TOML document.
    pub fn merge_file(self, text: &str) -> Result<Self> {
        let command = self.command();
        let doc: toml::Table = toml::from_str(text)?;
        let mut section = toml::Table::new();
        for (key, value) in doc {
            match key.as_str() {
                "seed" => {
                    section.insert(key, value);
                }
                k if k == command.name() => {
                    let toml::Value::Table(t) = value else {
                        return Err(Error::usage(k, "expected a table"));
                    };
                    section.extend(t);
                }
                "tfd_sweep" | "gs" | "hybrid" | "noise" | "mitigate" => {}
                other => return Err(Error::usage(other, "unknown top-level key")),
            }
        }
        Ok(match self {
            ExperimentConfig::TfdSweep(c) => ExperimentConfig::TfdSweep(merge(&c, section, command)?),
            ExperimentConfig::Gs(c) => ExperimentConfig::Gs(merge(&c, section, command)?),
            ExperimentConfig::Hybrid(c) => ExperimentConfig::Hybrid(merge(&c, section, command)?),
            ExperimentConfig::Noise(c) => ExperimentConfig::Noise(merge(&c, section, command)?),
            ExperimentConfig::Mitigate(c) => ExperimentConfig::Mitigate(merge(&c, section, command)?),
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        let command = self.command();
        let reject = |flag: &str| Err(Error::usage(flag, format!("not used by {}", command.name())));
        match self {
            ExperimentConfig::TfdSweep(c) => {
                set(&mut c.seed, o.seed);
                set(&mut c.betas, o.beta_grid.clone());
                if o.p.is_some() {
                    return reject("p");
                }
                if o.gamma_max.is_some() {
                    return reject("gamma-max");
                }
                if o.lambda.is_some() {
                    return reject("lambda");
                }
                if o.shots.is_some() {
                    return reject("shots");
                }
            }
            ExperimentConfig::Gs(c) => {
                set(&mut c.seed, o.seed);
                set(&mut c.p, o.p.clone());
                if o.gamma_max.is_some() {
                    return reject("gamma-max");
                }
                if o.lambda.is_some() {
                    return reject("lambda");
                }
                if o.shots.is_some() {
                    return reject("shots");
                }
                if o.beta_grid.is_some() {
                    return reject("beta-grid");
                }
            }
            ExperimentConfig::Hybrid(c) => {
                set(&mut c.seed, o.seed);
                if let Some(p) = &o.p {
                    let [p] = p.as_slice() else {
                        return Err(Error::usage("p", "hybrid takes a single depth"));
                    };
                    c.p = *p;
                }
                set(&mut c.lambda, o.lambda);
                set(&mut c.shots, o.shots);
                if o.gamma_max.is_some() {
                    return reject("gamma-max");
                }
                if o.beta_grid.is_some() {
                    return reject("beta-grid");
                }
            }
            ExperimentConfig::Noise(c) => {
                set(&mut c.seed, o.seed);
                set(&mut c.p, o.p.clone());
                set(&mut c.gamma_max, o.gamma_max);
                if let Some(lambda) = o.lambda {
                    c.lambdas = vec![lambda];
                }
                if o.shots.is_some() {
                    return reject("shots");
                }
                if o.beta_grid.is_some() {
                    return reject("beta-grid");
                }
            }
            ExperimentConfig::Mitigate(c) => {
                set(&mut c.seed, o.seed);
                set(&mut c.lambda, o.lambda);
                set(&mut c.shots, o.shots);
                set(&mut c.betas, o.beta_grid.clone());
                if o.p.is_some() {
                    return reject("p");
                }
                if o.gamma_max.is_some() {
                    return reject("gamma-max");
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::TfdSweep(c) => {
                check_tfd_family(c.family, c.layers, c.l, c.g)?;
                check_nonempty("betas", &c.betas)?;
                check_restarts(c.restarts)
            }
            ExperimentConfig::Gs(c) => {
                check_sites(c.l, 1)?;
                check_depths("p", &c.p)?;
                check_nonempty("objectives", &c.objectives)?;
                check_restarts(c.restarts)
            }
            ExperimentConfig::Hybrid(c) => {
                check_sites(c.l, 1)?;
                if c.p == 0 {
                    return Err(Error::usage("p", "must be at least 1"));
                }
                if !c.exact && c.shots == 0 {
                    return Err(Error::usage("shots", "must be at least 1"));
                }
                check_positive("epsilon", c.epsilon)?;
                check_positive("eta", c.eta)?;
                check_nonnegative("gamma", c.gamma)?;
                check_nonnegative("lambda", c.lambda)?;
                if c.noise_samples == 0 {
                    return Err(Error::usage("noise_samples", "must be at least 1"));
                }
                match (&c.start, &c.angles) {
                    (StartMode::Explicit, Some(a)) if a.len() == 2 * c.p => Ok(()),
                    (StartMode::Explicit, _) => Err(Error::usage(
                        "angles",
                        format!("explicit start needs {} angles", 2 * c.p),
                    )),
                    (_, Some(_)) => Err(Error::usage("angles", "only used with start = \"explicit\"")),
                    _ => check_restarts(c.restarts),
                }
            }
            ExperimentConfig::Noise(c) => {
                check_sites(c.l, 1)?;
                check_depths("p", &c.p)?;
                check_nonempty("lambdas", &c.lambdas)?;
                for &x in c.lambdas.iter().chain(&c.calibration_lambdas) {
                    check_nonnegative("lambdas", x)?;
                }
                check_nonnegative("gamma_max", c.gamma_max)?;
                check_positive("gamma_step", c.gamma_step)?;
                if c.samples == 0 {
                    return Err(Error::usage("samples", "must be at least 1"));
                }
                if c.threshold[0] >= c.threshold[1] {
                    return Err(Error::usage("threshold", "expected [shallow, deep] with shallow < deep"));
                }
                for m in &c.measured {
                    if !c.p.contains(&m.p) {
                        return Err(Error::usage("measured", format!("depth {} is not in p", m.p)));
                    }
                }
                check_restarts(c.restarts)
            }
            ExperimentConfig::Mitigate(c) => {
                if c.family == FamilyName::General {
                    return Err(Error::Capability(
                        "the general family has no gate form to run under noise".into(),
                    ));
                }
                check_tfd_family(c.family, c.layers, c.l, c.g)?;
                check_nonempty("betas", &c.betas)?;
                if c.shots == 0 {
                    return Err(Error::usage("shots", "must be at least 1"));
                }
                check_nonnegative("gamma", c.gamma)?;
                check_nonnegative("lambda", c.lambda)?;
                check_restarts(c.restarts)
            }
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn merge<T: Serialize + DeserializeOwned>(base: &T, section: toml::Table, command: Command) -> Result<T> {
    let toml::Value::Table(mut table) =
        toml::Value::try_from(base).map_err(|e| Error::usage(command.name(), e.to_string()))?
    else {
        unreachable!("configs serialize to tables")
    };
    table.extend(section);
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::usage(command.name(), e.message().to_string()))
}

fn check_sites(l: usize, copies: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::usage("l", "needs at least 2 sites"));
    }
    if copies * l > MAX_QUBITS {
        return Err(Error::Capability(format!(
            "{} qubits exceed the {MAX_QUBITS}-qubit limit",
            copies * l
        )));
    }
    Ok(())
}

fn check_tfd_family(family: FamilyName, layers: usize, l: usize, g: f64) -> Result<()> {
    check_sites(l, 2)?;
    if family != FamilyName::Minimal && layers == 0 {
        return Err(Error::usage("layers", "must be at least 1"));
    }
    if !g.is_finite() {
        return Err(Error::usage("g", "must be finite"));
    }
    if family == FamilyName::ClassicalIsing && g != 0.0 {
        return Err(Error::usage("g", "the classical Ising family needs g = 0"));
    }
    Ok(())
}

fn check_nonempty<T>(field: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::usage(field, "must not be empty"));
    }
    Ok(())
}

fn check_depths(field: &str, p: &[usize]) -> Result<()> {
    check_nonempty(field, p)?;
    if p.contains(&0) {
        return Err(Error::usage(field, "depths must be at least 1"));
    }
    Ok(())
}

fn check_restarts(restarts: usize) -> Result<()> {
    if restarts == 0 {
        return Err(Error::usage("restarts", "must be at least 1"));
    }
    Ok(())
}

fn check_positive(field: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::usage(field, format!("must be positive, got {x}")));
    }
    Ok(())
}

fn check_nonnegative(field: &str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::usage(field, format!("must be nonnegative, got {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_text(command: Command, text: &str) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::defaults(command).merge_file(text)?;
        c.apply(&Overrides::default())?;
        c.validate()?;
        Ok(c)
    }

    #[test]
    fn file_section_overrides_defaults() {
        let c = resolve_text(
            Command::TfdSweep,
            "seed = 9\n[tfd_sweep]\nbetas = [0, 1.5, \"inf\"]\n[gs]\nl = 5\n",
        )
        .unwrap();
        let ExperimentConfig::TfdSweep(c) = c else { panic!() };
        assert_eq!(c.seed, 9);
        assert_eq!(c.betas.len(), 3);
        assert!(c.betas[2].is_infinite());
    }

    #[test]
    fn flags_win_over_file() {
        let mut c = ExperimentConfig::defaults(Command::Noise)
            .merge_file("[noise]\ngamma_max = 0.1\n")
            .unwrap();
        c.apply(&Overrides {
            gamma_max: Some(0.2),
            lambda: Some(0.1),
            ..Default::default()
        })
        .unwrap();
        let ExperimentConfig::Noise(c) = c else { panic!() };
        assert_eq!((c.gamma_max, c.lambdas.clone()), (0.2, vec![0.1]));
    }

    #[test]
    fn usage_errors_name_the_field() {
        let err = resolve_text(Command::TfdSweep, "[tfd_sweep]\nbetas = []\n").unwrap_err();
        assert!(matches!(err, Error::Usage { ref field, .. } if field == "betas"));
        let err = resolve_text(Command::Mitigate, "[mitigate]\nshots = 0\n").unwrap_err();
        assert!(matches!(err, Error::Usage { ref field, .. } if field == "shots"));
        let err = resolve_text(Command::Gs, "[gs]\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = resolve_text(Command::Gs, "colour = 1\n").unwrap_err();
        assert!(matches!(err, Error::Usage { ref field, .. } if field == "colour"));
    }

    #[test]
    fn presets_are_checked_against_the_command() {
        assert!(ExperimentConfig::preset(Command::Gs, "fig2").is_err());
        let ExperimentConfig::Hybrid(h) = ExperimentConfig::preset(Command::Hybrid, "fig3d").unwrap() else {
            panic!()
        };
        assert_eq!((h.p, h.start, h.iterations), (2, StartMode::Warm, 50));
    }

    #[test]
    fn oversized_register_is_a_capability_error() {
        let err = resolve_text(Command::TfdSweep, "[tfd_sweep]\nl = 8\n").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn inapplicable_flag_is_rejected() {
        let mut c = ExperimentConfig::defaults(Command::Gs);
        let err = c
            .apply(&Overrides {
                shots: Some(10),
                ..Default::default()
            })
            .unwrap_err();
        assert!(matches!(err, Error::Usage { ref field, .. } if field == "shots"));
    }
}
