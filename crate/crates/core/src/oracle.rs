//! Exact depth-limited expectimax for deterministic environments.
//!
//! With a deterministic model the expectation over percepts collapses, and the
//! optimal truncated value is a maximum over all action sequences of length
//! `horizon`. [`expectimax`] enumerates them in lexicographic order; [`expectimax_dp`]
//! is an independent memoised recursion over `(state, depth)` used to cross-check it.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::discount::{DiscountFamily, DiscountVector, ParamAxis};
use crate::env::{Action, Environment};
use crate::error::{Error, Result};
use crate::planner::AgentPlan;
use crate::scalar::Scalar;

/// Best `(value, action, successor)` per `(state, depth)`.
type Memo<S, T> = HashMap<(S, usize), (T, Action, S)>;

/// Largest number of leaves the enumeration will visit (`2^24`).
pub const MAX_LEAVES: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<T> {
    /// Discounted return of `plan`.
    pub value: T,
    /// Lexicographically smallest optimal action sequence, of length `horizon`.
    pub plan: AgentPlan,
}

impl<T> OracleResult<T> {
    pub fn root_action(&self) -> Action {
        self.plan.first().expect("oracle plans are non-empty")
    }
}

fn check_horizon<T: Scalar, E: Environment<T>>(env: &E, dvec: &DiscountVector<T>, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Config("oracle horizon must be >= 1".into()));
    }
    let leaves = (env.num_actions() as u64).checked_pow(horizon as u32);
    if leaves.is_none_or(|n| n > MAX_LEAVES) {
        return Err(Error::Config(format!(
            "oracle horizon {horizon} exceeds the enumeration guard of {MAX_LEAVES} leaves"
        )));
    }
    if dvec.len() < horizon {
        return Err(Error::Config(format!(
            "discount vector covers {} steps but the oracle horizon is {horizon}",
            dvec.len()
        )));
    }
    Ok(())
}

/// Exhaustive maximum of `sum_{d < horizon} dvec[d] * r_d` over all action sequences.
pub fn expectimax<T, E>(env: &E, state: E::State, dvec: &DiscountVector<T>, horizon: usize) -> Result<OracleResult<T>>
where
    T: Scalar,
    E: Environment<T>,
{
    check_horizon(env, dvec, horizon)?;
    let mut search = Enumeration {
        env,
        dvec,
        horizon,
        prefix: Vec::with_capacity(horizon),
        best: None,
    };
    search.descend(state, 0, T::zero())?;
    let (value, actions) = search.best.expect("at least one sequence enumerated");
    Ok(OracleResult {
        value,
        plan: AgentPlan::new(actions),
    })
}

struct Enumeration<'a, T, E> {
    env: &'a E,
    dvec: &'a DiscountVector<T>,
    horizon: usize,
    prefix: Vec<Action>,
    best: Option<(T, Vec<Action>)>,
}

impl<T: Scalar, E: Environment<T>> Enumeration<'_, T, E> {
    fn descend(&mut self, state: E::State, depth: usize, acc: T) -> Result<()> {
        if depth == self.horizon {
            // strict improvement keeps the first (lexicographically smallest) optimum
            if self.best.as_ref().is_none_or(|(v, _)| acc > *v) {
                self.best = Some((acc, self.prefix.clone()));
            }
            return Ok(());
        }
        for a in 0..self.env.num_actions() {
            let action = Action(a);
            let percept = self.env.step(state, action)?;
            self.prefix.push(action);
            self.descend(
                percept.observation,
                depth + 1,
                acc + self.dvec.at_offset(depth) * percept.reward,
            )?;
            self.prefix.pop();
        }
        Ok(())
    }
}

/// Memoised backward recursion over `(state, depth)`. Agrees with [`expectimax`] on
/// plan and, up to summation order, on value.
pub fn expectimax_dp<T, E>(
    env: &E,
    state: E::State,
    dvec: &DiscountVector<T>,
    horizon: usize,
) -> Result<OracleResult<T>>
where
    T: Scalar,
    E: Environment<T>,
{
    check_horizon(env, dvec, horizon)?;
    let mut memo: Memo<E::State, T> = HashMap::new();
    let value = best_to_go(env, dvec, horizon, state, 0, &mut memo)?;
    let mut actions = Vec::with_capacity(horizon);
    let mut s = state;
    for depth in 0..horizon {
        let (_, action, next) = memo[&(s, depth)];
        actions.push(action);
        s = next;
    }
    Ok(OracleResult {
        value,
        plan: AgentPlan::new(actions),
    })
}

fn best_to_go<T, E>(
    env: &E,
    dvec: &DiscountVector<T>,
    horizon: usize,
    state: E::State,
    depth: usize,
    memo: &mut Memo<E::State, T>,
) -> Result<T>
where
    T: Scalar,
    E: Environment<T>,
{
    if depth == horizon {
        return Ok(T::zero());
    }
    if let Some(&(v, _, _)) = memo.get(&(state, depth)) {
        return Ok(v);
    }
    let mut best: Option<(T, Action, E::State)> = None;
    for a in 0..env.num_actions() {
        let percept = env.step(state, Action(a))?;
        let v = dvec.at_offset(depth) * percept.reward
            + best_to_go(env, dvec, horizon, percept.observation, depth + 1, memo)?;
        if best.is_none_or(|(b, _, _)| v > b) {
            best = Some((v, Action(a), percept.observation));
        }
    }
    let entry = best.expect("environment has at least one action");
    memo.insert((state, depth), entry);
    Ok(entry.0)
}

/// Oracle root action at `state` for each value of `axis` in `grid`, in grid order.
/// The discount vector for each point starts at origin `now`.
pub fn threshold_sweep<T, E>(
    env: &E,
    family: &DiscountFamily<T>,
    axis: ParamAxis,
    grid: &[T],
    state: E::State,
    now: u64,
    horizon: usize,
) -> Result<Vec<(T, OracleResult<T>)>>
where
    T: Scalar,
    E: Environment<T>,
{
    if grid.is_empty() {
        return Err(Error::Config("threshold sweep needs a non-empty grid".into()));
    }
    grid.iter()
        .map(|&value| {
            let dvec = family.with_param(axis, value)?.vector(now, horizon)?;
            Ok((value, expectimax(env, state, &dvec, horizon)?))
        })
        .collect()
}

/// Discounted return of replaying `plan` from `state`.
pub fn replay_value<T, E>(env: &E, state: E::State, dvec: &DiscountVector<T>, plan: &AgentPlan) -> Result<T>
where
    T: Scalar,
    E: Environment<T>,
{
    let mut s = state;
    let mut acc = T::zero();
    for (d, &a) in plan.actions().iter().enumerate() {
        let percept = env.step(s, a)?;
        acc = acc + dvec.at_offset(d) * percept.reward;
        s = percept.observation;
    }
    Ok(acc)
}
