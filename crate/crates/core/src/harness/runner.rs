use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discount::ParamAxis;
use crate::env::{Action, ChainEnv, ChainState, Environment};
use crate::error::{Error, Result};
use crate::harness::config::{AgentKind, ExperimentConfig};
use crate::inconsistency::Detector;
use crate::oracle::expectimax;
use crate::planner::{extract_plan, plan_action, AgentPlan};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u64,
    /// State the action was taken from.
    pub state: ChainState,
    pub action: Action,
    pub reward: f64,
    pub cumulative_reward: f64,
    pub average_reward: f64,
    pub plan: AgentPlan,
    /// `None` when the cycle could not be evaluated.
    pub inconsistent: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total_reward: f64,
    pub inconsistency_count: u64,
    pub evaluated_cycles: u64,
    /// Not serialised, so that result files depend only on config and seed.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl PartialEq for Summary {
    fn eq(&self, other: &Self) -> bool {
        self.total_reward == other.total_reward
            && self.inconsistency_count == other.inconsistency_count
            && self.evaluated_cycles == other.evaluated_cycles
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub series: Vec<CycleRecord>,
    pub summary: Summary,
}

impl ExperimentResult {
    pub fn final_average(&self) -> f64 {
        self.series.last().map_or(0.0, |r| r.average_reward)
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.series.iter().map(|r| r.reward).collect()
    }
}

/// Running mean `(r_1 + ... + r_t) / t` for every prefix.
pub fn average_reward(rewards: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    rewards
        .iter()
        .enumerate()
        .map(|(i, r)| {
            total += r;
            total / (i + 1) as f64
        })
        .collect()
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and an index.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Runs one seeded episode of `config.cycles` cycles starting from `S_0` at `t = 1`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let env = ChainEnv::new(config.env)?;
    let planner = config.planner.planner_config(&config.env);
    let horizon = config.planner.horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut detector = Detector::new();
    let mut state = env.initial_state();
    let mut cumulative = 0.0;
    let mut series = Vec::with_capacity(config.cycles as usize);

    for cycle in 1..=config.cycles {
        let (action, plan) = match config.agent {
            AgentKind::FixedMyopic => (Action::INSTANT, AgentPlan::repeat(Action::INSTANT, horizon)),
            AgentKind::FixedFarsighted => (Action::ADVANCE, AgentPlan::repeat(Action::ADVANCE, horizon)),
            AgentKind::Mcts => {
                let dvec = config.discount.vector(cycle, horizon)?;
                let (action, tree) = plan_action(&env, state, &dvec, &planner, &mut rng)?;
                (action, extract_plan(&tree, horizon)?)
            }
            AgentKind::Oracle => {
                let dvec = config.discount.vector(cycle, horizon)?;
                let best = expectimax(&env, state, &dvec, horizon)?;
                (best.root_action(), best.plan)
            }
        };
        let percept = env.step(state, action)?;
        cumulative += percept.reward;
        let record = detector.observe(cycle, &plan, action);
        series.push(CycleRecord {
            cycle,
            state,
            action,
            reward: percept.reward,
            cumulative_reward: cumulative,
            average_reward: cumulative / cycle as f64,
            plan,
            inconsistent: record.flagged,
        });
        state = percept.observation;
    }

    Ok(ExperimentResult {
        config: config.clone(),
        series,
        summary: Summary {
            total_reward: cumulative,
            inconsistency_count: detector.flagged(),
            evaluated_cycles: detector.evaluated(),
            wall_clock: started.elapsed(),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Position in the value grid.
    pub index: usize,
    pub axis: ParamAxis,
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub result: ExperimentResult,
}

/// Runs `repeats` episodes for each value of `axis`, in parallel, returning results in
/// grid order (then repeat order). Point seeds depend only on the base seed and the
/// point's grid index and repeat number.
pub fn sweep(base: &ExperimentConfig, axis: ParamAxis, values: &[f64], repeats: usize) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    if repeats == 0 {
        return Err(Error::Config("sweep needs at least one repeat".into()));
    }
    let configs = values
        .iter()
        .enumerate()
        .flat_map(|(index, &value)| (0..repeats).map(move |repeat| (index, value, repeat)))
        .map(|(index, value, repeat)| {
            let mut cfg = base.clone();
            cfg.discount = base.discount.with_param(axis, value)?;
            cfg.seed = mix_seed(mix_seed(base.seed, index as u64), repeat as u64);
            cfg.validate()?;
            Ok((index, value, repeat, cfg))
        })
        .collect::<Result<Vec<_>>>()?;

    configs
        .into_par_iter()
        .map(|(index, value, repeat, cfg)| {
            Ok(SweepPoint {
                index,
                axis,
                value,
                repeat,
                seed: cfg.seed,
                result: run_experiment(&cfg)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discount::DiscountFamily;

    fn fixed(agent: AgentKind) -> ExperimentConfig {
        ExperimentConfig::new(DiscountFamily::geometric(0.9).unwrap(), agent)
    }

    #[test]
    fn farsighted_baseline() {
        let r = run_experiment(&fixed(AgentKind::FixedFarsighted)).unwrap();
        assert_eq!(r.summary.total_reward, 33_000.0);
        assert_eq!(r.final_average(), 165.0);
        assert_eq!(r.series[5].average_reward, 1000.0 / 6.0);
        assert_eq!(r.summary.inconsistency_count, 0);
    }

    #[test]
    fn myopic_baseline() {
        let r = run_experiment(&fixed(AgentKind::FixedMyopic)).unwrap();
        assert_eq!(r.summary.total_reward, 800.0);
        assert_eq!(r.final_average(), 4.0);
    }

    #[test]
    fn zero_cycles() {
        let mut cfg = fixed(AgentKind::Mcts);
        cfg.cycles = 0;
        let r = run_experiment(&cfg).unwrap();
        assert!(r.series.is_empty());
        assert_eq!(r.summary.total_reward, 0.0);
    }

    #[test]
    fn average_reward_examples() {
        assert!(average_reward(&[]).is_empty());
        assert_eq!(average_reward(&[0.0; 5]), vec![0.0; 5]);
        let mut paper_offset = vec![0.0; 7];
        paper_offset.push(1000.0);
        assert_eq!(average_reward(&paper_offset)[7], 125.0);
        let spec_offset = [0.0, 0.0, 0.0, 0.0, 0.0, 1000.0];
        assert!((average_reward(&spec_offset)[5] - 166.666_666_666_666_66).abs() < 1e-9);
    }

    #[test]
    fn series_metrics_are_coherent() {
        let mut cfg = fixed(AgentKind::Oracle);
        cfg.discount = DiscountFamily::hyperbolic(12.0, 1.0).unwrap();
        cfg.cycles = 40;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.series.len(), 40);
        assert_eq!(r.summary.total_reward, r.series.last().unwrap().cumulative_reward);
        let flagged = r.series.iter().filter(|c| c.inconsistent == Some(true)).count() as u64;
        assert_eq!(flagged, r.summary.inconsistency_count);
        let avgs = average_reward(&r.rewards());
        for (rec, avg) in r.series.iter().zip(avgs) {
            assert_eq!(rec.average_reward, avg);
        }
        // steep hyperbolic oracle procrastinates: always plans 0111111000, always takes a_0
        assert!(r.series.iter().all(|c| c.plan.to_string() == "0111111000"));
        assert_eq!(r.summary.inconsistency_count, 39);
    }

    #[test]
    fn seed_mixing_is_stable_per_index() {
        assert_eq!(mix_seed(7, 3), mix_seed(7, 3));
        assert_ne!(mix_seed(7, 3), mix_seed(7, 4));
        assert_ne!(mix_seed(7, 3), mix_seed(8, 3));
    }

    #[test]
    fn sweep_validation() {
        let base = fixed(AgentKind::Oracle);
        assert!(matches!(sweep(&base, ParamAxis::G, &[], 1), Err(Error::Config(_))));
        assert!(matches!(
            sweep(&base, ParamAxis::Kappa, &[1.0], 1),
            Err(Error::Config(_))
        ));
        assert!(sweep(&base, ParamAxis::G, &[1.5], 1).is_err());
    }

    #[test]
    fn sweep_points_independent_of_grid_extension() {
        let mut base = fixed(AgentKind::Mcts);
        base.cycles = 3;
        base.planner.samples = 200;
        let short = sweep(&base, ParamAxis::G, &[0.2, 0.9], 2).unwrap();
        let long = sweep(&base, ParamAxis::G, &[0.2, 0.9, 0.5], 2).unwrap();
        assert_eq!(short.len(), 4);
        assert_eq!(&long[..4], &short[..]);
        let order: Vec<_> = long.iter().map(|p| (p.index, p.repeat)).collect();
        assert_eq!(order, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
    }
}
