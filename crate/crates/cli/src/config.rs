//! Run configuration: a TOML file of flat key = value sections, fully
//! validated before any computation starts. Invalid configs are rejected
//! with the offending key named.

use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    EvolveLindblad,
    EvolveReset,
    SteadyEvolution,
    SteadyIterative,
    OracleLindblad,
    OracleReset,
    Correlators,
    CompareExact,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::EvolveLindblad => "evolve-lindblad",
            Experiment::EvolveReset => "evolve-reset",
            Experiment::SteadyEvolution => "steady-evolution",
            Experiment::SteadyIterative => "steady-iterative",
            Experiment::OracleLindblad => "oracle-lindblad",
            Experiment::OracleReset => "oracle-reset",
            Experiment::Correlators => "correlators",
            Experiment::CompareExact => "compare-exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantKey {
    Continuous,
    Floquet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub experiment: Experiment,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub variant: VariantKey,
    pub j: f64,
    pub h: f64,
    pub l: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetSection {
    pub h_a: f64,
    pub t: usize,
    /// Constant coupling; mutually exclusive with `lambdas`.
    pub lambda: Option<f64>,
    /// Full per-step schedule; length must equal `t`.
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    InfiniteTemperature,
    Thermal,
    Ground,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub beta: Option<f64>,
    pub path: Option<String>,
    /// Project dense oracle initial states onto the even parity sector
    /// (the sector the momentum grid describes). Only meaningful for the
    /// oracle-* and compare-exact experiments.
    pub project_even: Option<bool>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: InitialKind::InfiniteTemperature,
            beta: None,
            path: None,
            project_even: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub dt_scaled: Option<f64>,
    pub t_end_scaled: Option<f64>,
    pub cycles: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_time: Option<f64>,
    pub observe_stride: Option<usize>,
    pub ell_max: Option<usize>,
    pub fit_window: Option<[usize; 2]>,
    pub k_max: Option<usize>,
    pub charge_max: Option<usize>,
    pub initial_beta_guess: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub lambdas: Option<Vec<f64>>,
    pub scaled_window: Option<f64>,
    pub scaled_stride: Option<f64>,
    pub oracle_dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub model: ModelSection,
    pub dissipation: Option<DissipationSection>,
    pub reset: Option<ResetSection>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| config_err(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML of the fully resolved configuration, embedded in
    /// every output header.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let m = &self.model;
        if !m.j.is_finite() || !m.h.is_finite() {
            return Err(config_err("model.j and model.h must be finite"));
        }
        if m.l < 2 {
            return Err(config_err("model.l must be at least 2"));
        }
        if let Some(d) = &self.dissipation {
            if !d.epsilon.is_finite() || d.epsilon <= 0.0 {
                return Err(config_err("dissipation.epsilon must be positive"));
            }
        }
        if let Some(r) = &self.reset {
            if r.t < 1 {
                return Err(config_err("reset.t must be at least 1"));
            }
            match (&r.lambda, &r.lambdas) {
                (Some(_), Some(_)) => {
                    return Err(config_err(
                        "reset.lambda and reset.lambdas are mutually exclusive",
                    ))
                }
                (None, None) => {
                    return Err(config_err("one of reset.lambda or reset.lambdas is required"))
                }
                (None, Some(ls)) if ls.len() != r.t => {
                    return Err(config_err(format!(
                        "reset.lambdas has {} entries but reset.t = {}",
                        ls.len(),
                        r.t
                    )))
                }
                _ => {}
            }
        }
        match self.initial.kind {
            InitialKind::Thermal if self.initial.beta.is_none() => {
                return Err(config_err("initial.beta is required for kind = \"thermal\""))
            }
            InitialKind::File if self.initial.path.is_none() => {
                return Err(config_err("initial.path is required for kind = \"file\""))
            }
            _ => {}
        }
        if let Some(dt) = self.numerics.dt_scaled {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(config_err("numerics.dt_scaled must be positive"));
            }
        }
        if let Some([lo, hi]) = self.numerics.fit_window {
            if lo < 1 || hi <= lo {
                return Err(config_err("numerics.fit_window must satisfy 1 <= lo < hi"));
            }
        }

        // Experiment-specific requirements, named per key.
        use Experiment::*;
        let e = self.run.experiment;
        let need = |cond: bool, key: &str| -> Result<(), RunError> {
            if cond {
                Ok(())
            } else {
                Err(config_err(format!(
                    "{key} is required for experiment = \"{}\"",
                    e.name()
                )))
            }
        };
        let variant_is = |v: VariantKey, why: &str| -> Result<(), RunError> {
            if m.variant == v {
                Ok(())
            } else {
                Err(config_err(format!(
                    "model.variant must be \"{}\" for experiment = \"{}\"",
                    why,
                    e.name()
                )))
            }
        };
        match e {
            EvolveLindblad => {
                variant_is(VariantKey::Continuous, "continuous")?;
                need(self.numerics.t_end_scaled.is_some(), "numerics.t_end_scaled")?;
            }
            EvolveReset => {
                variant_is(VariantKey::Floquet, "floquet")?;
                need(self.reset.is_some(), "reset section")?;
                need(self.numerics.cycles.is_some(), "numerics.cycles")?;
            }
            SteadyEvolution => {
                if m.variant == VariantKey::Floquet {
                    need(self.reset.is_some(), "reset section")?;
                }
            }
            SteadyIterative => {
                variant_is(VariantKey::Continuous, "continuous")?;
            }
            OracleLindblad => {
                variant_is(VariantKey::Continuous, "continuous")?;
                need(self.dissipation.is_some(), "dissipation.epsilon")?;
                need(self.numerics.t_end_scaled.is_some(), "numerics.t_end_scaled")?;
                if !(2..=8).contains(&m.l) {
                    return Err(config_err("model.l must lie in 2..=8 for the dense oracle"));
                }
            }
            OracleReset => {
                variant_is(VariantKey::Floquet, "floquet")?;
                need(self.reset.is_some(), "reset section")?;
                need(self.numerics.cycles.is_some(), "numerics.cycles")?;
                if !(2..=5).contains(&m.l) {
                    return Err(config_err(
                        "model.l must lie in 2..=5 for the dense reset oracle",
                    ));
                }
            }
            Correlators => {
                if m.variant == VariantKey::Floquet {
                    need(self.reset.is_some(), "reset section")?;
                }
            }
            CompareExact => match m.variant {
                VariantKey::Continuous => {
                    need(self.numerics.epsilons.is_some(), "numerics.epsilons")?;
                    if !(2..=8).contains(&m.l) {
                        return Err(config_err("model.l must lie in 2..=8 for the dense oracle"));
                    }
                }
                VariantKey::Floquet => {
                    need(self.numerics.lambdas.is_some(), "numerics.lambdas")?;
                    need(self.reset.is_some(), "reset section")?;
                    if !(2..=5).contains(&m.l) {
                        return Err(config_err(
                            "model.l must lie in 2..=5 for the dense reset oracle",
                        ));
                    }
                }
            },
        }
        Ok(())
    }
}
