use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineKind;
use crate::kb::{PolarityOrder, ToolId};
use crate::mln::{SamplerConfig, DEFAULT_ORACLE_CAP};
use crate::resolve::{ResolveConfig, ResolveError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mode {
    Pipeline,
    Step1Only,
    Baseline { baseline: BaselineKind, tool: Option<ToolId> },
}

/// Everything a run depends on; echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub num_samples: usize,
    pub burn_in: usize,
    pub samplesat_sa_prob: f64,
    pub sa_temperature: f64,
    pub walksat_noise: f64,
    pub max_flips: Option<usize>,
    pub chains: usize,
    pub learn_iters: usize,
    pub learn_samples: usize,
    pub damping: f64,
    pub max_step: f64,
    pub tie_break: PolarityOrder,
    pub rules_file: Option<PathBuf>,
    /// Starting weight of every soft rule of the default rule set.
    pub init_weight: f64,
    pub mode: Mode,
    pub oracle_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SamplerConfig::default();
        let r = ResolveConfig::default();
        RunConfig {
            seed: s.seed,
            num_samples: s.num_samples,
            burn_in: s.burn_in,
            samplesat_sa_prob: s.samplesat_sa_prob,
            sa_temperature: s.sa_temperature,
            walksat_noise: s.walksat_noise,
            max_flips: s.max_flips,
            chains: s.chains,
            learn_iters: r.learn_iters,
            learn_samples: r.learn_samples,
            damping: r.damping,
            max_step: r.max_step,
            tie_break: r.tie_break,
            rules_file: None,
            init_weight: 1.0,
            mode: Mode::Pipeline,
            oracle_cap: DEFAULT_ORACLE_CAP,
        }
    }
}

impl RunConfig {
    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            seed: self.seed,
            num_samples: self.num_samples,
            burn_in: self.burn_in,
            samplesat_sa_prob: self.samplesat_sa_prob,
            sa_temperature: self.sa_temperature,
            walksat_noise: self.walksat_noise,
            max_flips: self.max_flips,
            chains: self.chains,
        }
    }

    pub fn resolve_config(&self) -> ResolveConfig {
        ResolveConfig {
            sampler: self.sampler(),
            learn_iters: self.learn_iters,
            learn_samples: self.learn_samples,
            damping: self.damping,
            max_step: self.max_step,
            tie_break: self.tie_break,
            oracle_cap: self.oracle_cap,
            step2: self.mode != Mode::Step1Only,
        }
    }

    pub fn validate(&self) -> Result<(), ResolveError> {
        if !self.init_weight.is_finite() {
            return Err(ResolveError::InvalidConfig("init_weight must be finite".into()));
        }
        self.resolve_config().validate()
    }
}
