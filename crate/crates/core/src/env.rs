//! Environment contract and the delayed-reward chain MDP.
//!
//! The chain has states `S_0 ..= S_N`. Action `a_0` returns to `S_0` paying the instant
//! reward from anywhere. Action `a_1` advances `S_i -> S_{i+1}` paying the step reward,
//! except that `S_{N-1} -> S_N` pays the large delayed reward and `S_N` advances to
//! `S_1`. Following `a_1` forever from `S_0` therefore collects the large reward every
//! `N` cycles.

use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(pub usize);

impl Action {
    /// `a_0`: take the instant reward and return to `S_0`.
    pub const INSTANT: Action = Action(0);
    /// `a_1`: advance along the chain.
    pub const ADVANCE: Action = Action(1);

    pub fn index(self) -> usize {
        self.0
    }

    /// Single-character plan symbol, `'0'..='9'`.
    pub fn symbol(self) -> char {
        char::from_digit(self.0 as u32, 10).expect("plan symbols cover actions 0-9")
    }

    pub fn from_symbol(c: char) -> Option<Action> {
        c.to_digit(10).map(|d| Action(d as usize))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Environment response: observation and reward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Percept<O, T> {
    pub observation: O,
    pub reward: T,
}

/// A fully observable environment a planner can simulate.
pub trait Environment<T: Scalar> {
    type State: Copy + Eq + Hash + fmt::Debug;

    fn num_actions(&self) -> usize;

    fn initial_state(&self) -> Self::State;

    fn step(&self, state: Self::State, action: Action) -> Result<Percept<Self::State, T>>;

    /// `(min, max)` over all rewards the environment can emit.
    fn reward_bounds(&self) -> (T, T);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChainState(pub usize);

impl ChainState {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams<T> {
    /// Chain length `N`; states are `0..=N`.
    pub n: usize,
    /// `r_I`, paid by `a_0`.
    pub instant: T,
    /// `r_0`, paid by ordinary `a_1` moves.
    pub step: T,
    /// `r_L`, paid by `a_1` from `S_{N-1}`.
    pub large: T,
}

impl<T: Scalar> Default for ChainParams<T> {
    fn default() -> Self {
        Self {
            n: 6,
            instant: T::lit(4.0),
            step: T::zero(),
            large: T::lit(1000.0),
        }
    }
}

impl<T: Scalar> ChainParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("chain length N = {} must be >= 2", self.n)));
        }
        let rewards = [self.instant, self.step, self.large];
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain("chain rewards must be finite".into()));
        }
        let n = T::from_count(self.n as u64);
        if !(self.step < self.instant / n) {
            return Err(Error::Domain(format!(
                "step reward {} must be below instant/N = {}",
                self.step,
                self.instant / n
            )));
        }
        if !(self.large > n * self.instant) {
            return Err(Error::Domain(format!(
                "large reward {} must exceed N * instant = {}",
                self.large,
                n * self.instant
            )));
        }
        Ok(())
    }

    pub fn reward_bounds(&self) -> (T, T) {
        let rewards = [self.step, self.instant, self.large];
        let lo = rewards.iter().copied().fold(T::infinity(), T::min);
        let hi = rewards.iter().copied().fold(T::neg_infinity(), T::max);
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainEnv<T> {
    params: ChainParams<T>,
}

impl<T: Scalar> ChainEnv<T> {
    pub fn new(params: ChainParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &ChainParams<T> {
        &self.params
    }
}

impl<T: Scalar> Environment<T> for ChainEnv<T> {
    type State = ChainState;

    fn num_actions(&self) -> usize {
        2
    }

    fn initial_state(&self) -> ChainState {
        ChainState(0)
    }

    fn step(&self, state: ChainState, action: Action) -> Result<Percept<ChainState, T>> {
        let n = self.params.n;
        if state.0 > n {
            return Err(Error::InvalidState { index: state.0, n });
        }
        let (next, reward) = match action {
            Action::INSTANT => (0, self.params.instant),
            Action::ADVANCE if state.0 == n => (1, self.params.step),
            Action::ADVANCE if state.0 + 1 == n => (n, self.params.large),
            Action::ADVANCE => (state.0 + 1, self.params.step),
            Action(other) => {
                return Err(Error::InvalidAction {
                    action: other,
                    num_actions: 2,
                })
            }
        };
        Ok(Percept {
            observation: ChainState(next),
            reward,
        })
    }

    fn reward_bounds(&self) -> (T, T) {
        self.params.reward_bounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env() -> ChainEnv<f64> {
        ChainEnv::new(ChainParams::default()).unwrap()
    }

    fn step(s: usize, a: Action) -> (usize, f64) {
        let p = env().step(ChainState(s), a).unwrap();
        (p.observation.0, p.reward)
    }

    #[test]
    fn default_transitions() {
        assert_eq!(step(0, Action::INSTANT), (0, 4.0));
        assert_eq!(step(5, Action::ADVANCE), (6, 1000.0));
        assert_eq!(step(2, Action::ADVANCE), (3, 0.0));
        assert_eq!(step(6, Action::ADVANCE), (1, 0.0));
        assert_eq!(step(6, Action::INSTANT), (0, 4.0));
    }

    #[test]
    fn invalid_inputs() {
        let e = env();
        assert!(matches!(
            e.step(ChainState(7), Action::INSTANT),
            Err(Error::InvalidState { index: 7, n: 6 })
        ));
        assert!(matches!(
            e.step(ChainState(0), Action(2)),
            Err(Error::InvalidAction { action: 2, .. })
        ));
    }

    #[test]
    fn initial_state_is_s0() {
        assert_eq!(env().initial_state(), ChainState(0));
        let short = ChainParams {
            n: 2,
            instant: 4.0,
            step: 0.0,
            large: 100.0,
        };
        assert_eq!(ChainEnv::new(short).unwrap().initial_state(), ChainState(0));
    }

    #[test]
    fn reward_bounds_examples() {
        assert_eq!(env().reward_bounds(), (0.0, 1000.0));
        let p = ChainParams {
            n: 2,
            instant: 4.0,
            step: 1.0,
            large: 100.0,
        };
        assert_eq!(p.reward_bounds(), (1.0, 100.0));
        let flat = ChainParams {
            n: 6,
            instant: 3.0,
            step: 3.0,
            large: 3.0,
        };
        let (lo, hi) = flat.reward_bounds();
        assert_eq!(lo, hi);
        assert!(flat.validate().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ChainParams {
            n: 1,
            ..ChainParams::<f64>::default()
        }
        .validate()
        .is_err());
        assert!(ChainParams {
            step: 1.0,
            ..ChainParams::<f64>::default()
        }
        .validate()
        .is_err());
        assert!(ChainParams {
            large: 24.0,
            ..ChainParams::<f64>::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn farsighted_replay_has_period_n() {
        let e = env();
        let mut s = e.initial_state();
        let mut paid = Vec::new();
        for cycle in 1..=60 {
            let p = e.step(s, Action::ADVANCE).unwrap();
            if p.reward == 1000.0 {
                paid.push(cycle);
            }
            s = p.observation;
        }
        assert_eq!(paid, (1..=10).map(|i| 6 * i).collect::<Vec<_>>());
    }

    #[test]
    fn myopic_replay_pays_every_cycle() {
        let e = env();
        let mut s = e.initial_state();
        for _ in 0..50 {
            let p = e.step(s, Action::INSTANT).unwrap();
            assert_eq!((p.observation, p.reward), (ChainState(0), 4.0));
            s = p.observation;
        }
    }

    proptest! {
        #[test]
        fn transitions_follow_chain_rules(s in 0usize..=6, a in 0usize..2) {
            let e = env();
            let p = e.step(ChainState(s), Action(a)).unwrap();
            prop_assert!([0.0, 4.0, 1000.0].contains(&p.reward));
            if a == 0 {
                prop_assert_eq!(p.observation, ChainState(0));
            } else if s < 6 {
                prop_assert_eq!(p.observation, ChainState(s + 1));
            }
            prop_assert_eq!(p, e.step(ChainState(s), Action(a)).unwrap());
        }
    }
}
