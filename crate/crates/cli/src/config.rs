//! Experiment configuration: TOML schema, validation, and conversion
//! into core scenario/algorithm objects. Everything that can be
//! rejected before a run starts is rejected here.

use anyhow::{anyhow, bail, Context, Result};
use oco_core::algorithms::{theorem4_params, AlgorithmId, BanditParams, SharedScenario, StepSizeRule};
use oco_core::costs::evar_cost_values;
use oco_core::harness::{TheoremId, EVAR_COST_SAMPLES};
use oco_core::scenarios;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub algorithm: Option<AlgorithmSpec>,
    /// Compare-style list; `algorithm` and `algorithms` are exclusive.
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Bound checks to run, by name (eq2, thm1, thm2, thm3, thm4,
    /// lemma1, lemma2-step, estimator-bias).
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub family: String,
    pub d: usize,
    pub t: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub drift: Option<f64>,
    #[serde(default)]
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub id: String,
    #[serde(default)]
    pub step: Option<StepSpec>,
    /// Bandit run seed (default 0); overridden by --seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Bandit seed collection for the expectation-level bound check.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub bandit: Option<BanditSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditSpec {
    /// Ball radius inside the feasible set; the probe scale.
    pub r: f64,
    /// "theorem" derives (delta, eta, alpha) from the bound's formula.
    #[serde(default)]
    pub tuning: Option<String>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub g_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trace: Option<String>,
    pub summary: Option<String>,
    pub table: Option<String>,
    pub sweep: Option<String>,
}

impl OutputSpec {
    pub fn trace_name(&self) -> &str {
        self.trace.as_deref().unwrap_or("trace.csv")
    }
    pub fn summary_name(&self) -> &str {
        self.summary.as_deref().unwrap_or("summary.txt")
    }
    pub fn table_name(&self) -> &str {
        self.table.as_deref().unwrap_or("compare.csv")
    }
    pub fn sweep_name(&self) -> &str {
        self.sweep.as_deref().unwrap_or("sweep.csv")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub t: Option<Vec<usize>>,
    pub d: Option<Vec<usize>>,
    /// Scenario generator seeds; for bandit runs these are run seeds.
    pub seeds: Option<Vec<u64>>,
    pub drift: Option<Vec<f64>>,
    pub spread: Option<Vec<f64>>,
}

/// Raw text plus parsed form, so summaries can echo the input exactly.
pub struct LoadedConfig {
    pub raw: String,
    pub config: ExperimentConfig,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let config: ExperimentConfig = toml::from_str(&raw)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    config.validate()?;
    Ok(LoadedConfig { raw, config })
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.algorithm.is_some() && !self.algorithms.is_empty() {
            bail!("give either [algorithm] or [[algorithms]], not both");
        }
        for name in &self.checks {
            if TheoremId::from_name(name).is_none() {
                bail!("unknown check {name:?}");
            }
        }
        self.scenario.validate()?;
        for alg in self.algorithm_specs() {
            alg.validate()?;
        }
        Ok(())
    }

    pub fn algorithm_specs(&self) -> Vec<&AlgorithmSpec> {
        match &self.algorithm {
            Some(a) => vec![a],
            None => self.algorithms.iter().collect(),
        }
    }

    pub fn check_ids(&self) -> Vec<TheoremId> {
        self.checks
            .iter()
            .map(|n| TheoremId::from_name(n).expect("validated at load"))
            .collect()
    }
}

impl ScenarioSpec {
    fn family_shape(&self) -> Result<(bool, bool, bool)> {
        // (needs seed, needs drift, needs spread)
        Ok(match self.family.as_str() {
            "identical-quadratic" => (true, false, false),
            "identical-centered-quadratic" => (false, false, false),
            "smooth-plus-drift" => (true, true, false),
            "linear-random" => (true, false, true),
            "linear-switching" => (false, false, false),
            "random-quadratics" => (true, false, false),
            "linear-drift-simplex" => (true, true, false),
            other => bail!("unknown scenario family {other:?}"),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.t < 1 {
            bail!("horizon t must be at least 1");
        }
        if self.d < 1 {
            bail!("dimension d must be at least 1");
        }
        let (seed, drift, spread) = self.family_shape()?;
        let family = &self.family;
        if seed != self.seed.is_some() {
            bail!(
                "family {family:?} {} a scenario seed",
                if seed { "needs" } else { "does not take" }
            );
        }
        if drift != self.drift.is_some() {
            bail!(
                "family {family:?} {} a drift parameter",
                if drift { "needs" } else { "does not take" }
            );
        }
        if spread != self.spread.is_some() {
            bail!(
                "family {family:?} {} a spread parameter",
                if spread { "needs" } else { "does not take" }
            );
        }
        Ok(())
    }

    pub fn build(&self) -> Result<SharedScenario> {
        let d = self.d;
        let t = self.t;
        let sc = match self.family.as_str() {
            "identical-quadratic" => scenarios::identical_quadratic(d, t, self.seed.unwrap()),
            "identical-centered-quadratic" => scenarios::identical_centered_quadratic(d, t),
            "smooth-plus-drift" => {
                scenarios::smooth_plus_drift(d, t, self.seed.unwrap(), self.drift.unwrap())
            }
            "linear-random" => {
                scenarios::linear_random(d, t, self.seed.unwrap(), self.spread.unwrap())
            }
            "linear-switching" => scenarios::linear_switching(d, t),
            "random-quadratics" => scenarios::random_quadratics(d, t, self.seed.unwrap()),
            "linear-drift-simplex" => {
                scenarios::linear_drift_simplex(d, t, self.seed.unwrap(), self.drift.unwrap())
            }
            other => bail!("unknown scenario family {other:?}"),
        };
        sc.map_err(|e| anyhow!("scenario construction failed: {e}"))
    }

    /// Clone with swept axes substituted.
    pub fn with(&self, t: Option<usize>, d: Option<usize>, seed: Option<u64>, drift: Option<f64>, spread: Option<f64>) -> Self {
        ScenarioSpec {
            family: self.family.clone(),
            d: d.unwrap_or(self.d),
            t: t.unwrap_or(self.t),
            seed: seed.or(self.seed),
            drift: drift.or(self.drift),
            spread: spread.or(self.spread),
        }
    }
}

impl AlgorithmSpec {
    pub fn algorithm_id(&self) -> Result<AlgorithmId> {
        AlgorithmId::from_name(&self.id).ok_or_else(|| anyhow!("unknown algorithm {:?}", self.id))
    }

    fn validate(&self) -> Result<()> {
        let id = self.algorithm_id()?;
        if id == AlgorithmId::Bandit {
            if self.step.is_some() {
                bail!("bandit runs take their step size from [algorithm.bandit], not `step`");
            }
            let bandit = self
                .bandit
                .as_ref()
                .ok_or_else(|| anyhow!("bandit runs need an [algorithm.bandit] section"))?;
            bandit.validate()?;
        } else {
            if self.bandit.is_some() {
                bail!("[algorithm.bandit] only applies to the bandit algorithm");
            }
            if self.seed.is_some() || self.seeds.is_some() {
                bail!("run seeds only apply to the bandit algorithm; other runs are deterministic");
            }
            if self.step.is_none() {
                bail!("algorithm {:?} needs a `step` (a number, \"oracle-evar\", or \"doubling\")", self.id);
            }
        }
        Ok(())
    }

    pub fn step_rule(&self) -> Result<StepSizeRule> {
        match self.step.as_ref() {
            None => bail!("algorithm {:?} has no step rule", self.id),
            Some(StepSpec::Fixed(v)) => Ok(StepSizeRule::Fixed(*v)),
            Some(StepSpec::Named(name)) => match name.as_str() {
                "oracle-evar" => Ok(StepSizeRule::OracleEvar),
                "doubling" => Ok(StepSizeRule::Doubling),
                other => bail!(
                    "unknown step rule {other:?} (expected a number, \"oracle-evar\", or \"doubling\")"
                ),
            },
        }
    }

    /// Human-readable step rule for summaries.
    pub fn step_label(&self) -> String {
        match self.step.as_ref() {
            None => "bandit".to_string(),
            Some(StepSpec::Fixed(v)) => crate::output::fmt_f64(*v),
            Some(StepSpec::Named(n)) => n.clone(),
        }
    }

    pub fn bandit_params(&self, scenario: &SharedScenario) -> Result<BanditParams> {
        let spec = self
            .bandit
            .as_ref()
            .ok_or_else(|| anyhow!("bandit runs need an [algorithm.bandit] section"))?;
        spec.to_params(scenario)
    }
}

impl BanditSpec {
    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            bail!("bandit r must be positive");
        }
        let theorem = match self.tuning.as_deref() {
            None => false,
            Some("theorem") => true,
            Some(other) => bail!("unknown bandit tuning {other:?} (expected \"theorem\")"),
        };
        if theorem {
            if self.delta.is_some() || self.eta.is_some() || self.alpha.is_some() {
                bail!("theorem tuning derives delta/eta/alpha; do not set them explicitly");
            }
        } else {
            for (name, v) in [("delta", self.delta), ("eta", self.eta), ("alpha", self.alpha)] {
                if v.is_none() {
                    bail!("bandit runs need `{name}` (or tuning = \"theorem\")");
                }
            }
            let delta = self.delta.unwrap();
            let alpha = self.alpha.unwrap();
            let expected = delta / self.r;
            if (alpha - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                bail!("alpha must equal delta/r: got alpha {alpha}, delta/r {expected}");
            }
        }
        Ok(())
    }

    pub fn to_params(&self, scenario: &SharedScenario) -> Result<BanditParams> {
        let mut params = if self.tuning.as_deref() == Some("theorem") {
            let evar = evar_cost_values(scenario, EVAR_COST_SAMPLES).value;
            theorem4_params(scenario, self.r, evar)
                .map_err(|e| anyhow!("theorem tuning failed: {e}"))?
        } else {
            BanditParams {
                delta: self.delta.unwrap(),
                eta: self.eta.unwrap(),
                r: self.r,
                alpha: self.alpha.unwrap(),
                g_weight: None,
            }
        };
        params.g_weight = self.g_weight.or(params.g_weight);
        Ok(params)
    }
}
