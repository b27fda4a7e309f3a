//! Informed reinforcement-learning agent planned by ρUCT Monte-Carlo tree search
//! under arbitrary time-indexed discount functions.
//!
//! The crate is organised bottom-up:
//!
//! - [`discount`]: discount families (geometric, hyperbolic, power, tabulated) and
//!   the time-consistency classifier.
//! - [`env`]: the environment contract and the delayed-reward chain MDP.
//! - [`planner`]: the ρUCT search tree, UCB action selection and plan extraction.
//! - [`oracle`]: exact depth-limited expectimax used as ground truth for the planner.
//! - [`inconsistency`]: the plan-versus-action time-inconsistency detector.
//! - [`harness`]: seeded episodes, parameter sweeps, CSV/JSON output and the CLI.
//!
//! Core numerics are generic over the scalar type ([`Scalar`], implemented for `f32`
//! and `f64`). The harness works in `f64`; the aliases below name the concrete types
//! it uses.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discount;
pub mod env;
pub mod error;
pub mod harness;
pub mod inconsistency;
pub mod oracle;
pub mod planner;
pub mod scalar;

pub use discount::{DiscountFamily, DiscountVector, ParamAxis};
pub use env::{Action, ChainEnv, ChainParams, ChainState, Environment, Percept};
pub use error::{Error, Result};
pub use inconsistency::{detect, Detector, InconsistencyRecord};
pub use oracle::{expectimax, expectimax_dp, threshold_sweep, OracleResult};
pub use planner::{extract_plan, plan_action, ucb_select, AgentPlan, ArmStats, PlannerConfig, SearchTree};
pub use scalar::Scalar;

pub type DiscountFamilyF64 = DiscountFamily<f64>;
pub type DiscountFamilyF32 = DiscountFamily<f32>;
pub type DiscountVectorF64 = DiscountVector<f64>;
pub type DiscountVectorF32 = DiscountVector<f32>;
pub type ChainParamsF64 = ChainParams<f64>;
pub type ChainParamsF32 = ChainParams<f32>;
pub type ChainEnvF64 = ChainEnv<f64>;
pub type ChainEnvF32 = ChainEnv<f32>;
pub type PlannerConfigF64 = PlannerConfig<f64>;
pub type PlannerConfigF32 = PlannerConfig<f32>;
pub type ChainTreeF64 = SearchTree<ChainState, f64>;
pub type OracleResultF64 = OracleResult<f64>;
