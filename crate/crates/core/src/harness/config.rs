use serde::{Deserialize, Serialize};

use crate::discount::DiscountFamily;
use crate::env::ChainParams;
use crate::error::{Error, Result};
use crate::oracle::MAX_LEAVES;
use crate::planner::PlannerConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    /// ρUCT planner with the true environment as model.
    Mcts,
    /// Exact expectimax over the planning horizon.
    Oracle,
    /// Always takes the instant reward.
    FixedMyopic,
    /// Always advances along the chain.
    FixedFarsighted,
}

impl AgentKind {
    pub fn is_fixed(self) -> bool {
        matches!(self, AgentKind::FixedMyopic | AgentKind::FixedFarsighted)
    }
}

/// Horizon, exploration constant and simulation budget of the tree search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerSettings {
    pub horizon: usize,
    pub ucb_c: f64,
    pub samples: u64,
}

impl PlannerSettings {
    /// Geometric and hyperbolic runs.
    pub const STANDARD: PlannerSettings = PlannerSettings {
        horizon: 10,
        ucb_c: 0.01,
        samples: 10_000,
    };

    /// Power discounting: shorter horizon, smaller exploration constant, more samples.
    pub const POWER: PlannerSettings = PlannerSettings {
        horizon: 7,
        ucb_c: 0.001,
        samples: 100_000,
    };

    /// Sample budget of the reduced CI profile.
    pub const FAST_SAMPLES: u64 = 10_000;

    pub fn for_family(family: &DiscountFamily<f64>) -> Self {
        match family {
            DiscountFamily::Power { .. } => Self::POWER,
            _ => Self::STANDARD,
        }
    }

    pub fn fast(self) -> Self {
        Self {
            samples: self.samples.min(Self::FAST_SAMPLES),
            ..self
        }
    }

    pub fn planner_config(&self, env: &ChainParams<f64>) -> PlannerConfig<f64> {
        PlannerConfig::new(self.horizon, self.ucb_c, self.samples, env.reward_bounds())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: ChainParams<f64>,
    pub discount: DiscountFamily<f64>,
    pub planner: PlannerSettings,
    pub agent: AgentKind,
    pub cycles: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Default chain, 200 cycles, seed 0, planner settings matching the family.
    pub fn new(discount: DiscountFamily<f64>, agent: AgentKind) -> Self {
        Self {
            env: ChainParams::default(),
            planner: PlannerSettings::for_family(&discount),
            discount,
            agent,
            cycles: 200,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.discount.validate()?;
        self.planner.planner_config(&self.env).validate()?;
        if self.agent == AgentKind::Oracle {
            let leaves = 2u64.checked_pow(self.planner.horizon as u32);
            if leaves.is_none_or(|n| n > MAX_LEAVES) {
                return Err(Error::Config(format!(
                    "oracle agent cannot enumerate horizon {}",
                    self.planner.horizon
                )));
            }
        }
        Ok(())
    }
}
