//! ρUCT Monte-Carlo tree search with the true environment as the model.
//!
//! The tree alternates decision nodes (one per history, here one per reached state)
//! and chance nodes (one per action taken from a decision node). Each simulation
//! descends with UCB selection, expands at most one new chance node, finishes with a uniform
//! random rollout past the frontier and backs the sampled discounted return up through
//! every chance node it crossed.
//!
//! Returns use the absolute weights of the supplied [`DiscountVector`]: the reward for
//! the action taken `d` steps below the root is weighted by `dvec.at_offset(d)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::discount::DiscountVector;
use crate::env::{Action, Environment};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerConfig<T> {
    /// Search horizon `m` in cycles.
    pub horizon: usize,
    /// Exploration constant `C`.
    pub exploration: T,
    /// Simulations per decision.
    pub samples: u64,
    /// `alpha`: smallest reward the environment emits.
    pub reward_min: T,
    /// `beta`: largest reward the environment emits.
    pub reward_max: T,
}

impl<T: Scalar> PlannerConfig<T> {
    pub fn new(horizon: usize, exploration: T, samples: u64, bounds: (T, T)) -> Self {
        Self {
            horizon,
            exploration,
            samples,
            reward_min: bounds.0,
            reward_max: bounds.1,
        }
    }

    pub fn for_env<E: Environment<T>>(env: &E, horizon: usize, exploration: T, samples: u64) -> Self {
        Self::new(horizon, exploration, samples, env.reward_bounds())
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("planner horizon must be >= 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("planner needs at least one sample".into()));
        }
        if !(self.exploration >= T::zero()) || !self.exploration.is_finite() {
            return Err(Error::Config(format!(
                "exploration constant {} must be finite and >= 0",
                self.exploration
            )));
        }
        self.normaliser().map(|_| ())
    }

    /// `1 / (m (beta - alpha))`.
    pub fn normaliser(&self) -> Result<T> {
        let range = self.reward_max - self.reward_min;
        if !(range > T::zero()) || !range.is_finite() {
            return Err(Error::Config(format!(
                "reward range [{}, {}] is degenerate; value normalisation undefined",
                self.reward_min, self.reward_max
            )));
        }
        Ok((T::from_count(self.horizon as u64) * range).recip())
    }
}

/// Visit count and mean return of one action below a decision node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmStats<T> {
    pub visits: u64,
    pub value: T,
}

/// UCB action choice at a decision node with `parent_visits` visits.
///
/// Unvisited arms are taken first, lowest index first. Otherwise the arm maximising
/// `V/(m(beta-alpha)) + C sqrt(ln T(h) / T(ha))` wins, ties to the lowest index.
pub fn ucb_select<T: Scalar>(parent_visits: u64, arms: &[ArmStats<T>], cfg: &PlannerConfig<T>) -> Result<Action> {
    let norm = cfg.normaliser()?;
    if arms.is_empty() {
        return Err(Error::Config("decision node has no actions".into()));
    }
    Ok(select_arm(
        norm,
        cfg.exploration,
        parent_visits,
        arms.iter().map(|a| (a.visits, a.value)),
    ))
}

#[inline]
fn select_arm<T: Scalar>(norm: T, c: T, parent_visits: u64, arms: impl Iterator<Item = (u64, T)>) -> Action {
    let log_parent = T::from_count(parent_visits.max(1)).ln();
    let mut best = 0;
    let mut best_score = T::neg_infinity();
    for (i, (visits, value)) in arms.enumerate() {
        if visits == 0 {
            return Action(i);
        }
        let score = norm * value + c * (log_parent / T::from_count(visits)).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Action(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DecisionId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChanceId(pub usize);

#[derive(Clone, Debug)]
pub struct DecisionNode<S> {
    state: S,
    visits: u64,
    slot_base: usize,
}

impl<S: Copy> DecisionNode<S> {
    pub fn state(&self) -> S {
        self.state
    }

    /// Completed backups through this node.
    pub fn visits(&self) -> u64 {
        self.visits
    }
}

#[derive(Clone, Debug)]
pub struct ChanceNode<S, T> {
    state: S,
    action: Action,
    visits: u64,
    value: T,
    first: Option<(S, DecisionId)>,
    rest: Vec<(S, DecisionId)>,
}

impl<S: Copy + PartialEq, T: Scalar> ChanceNode<S, T> {
    pub fn action(&self) -> Action {
        self.action
    }

    pub fn visits(&self) -> u64 {
        self.visits
    }

    /// Mean of all discounted returns backed up through this node.
    pub fn value(&self) -> T {
        self.value
    }

    pub fn children(&self) -> impl Iterator<Item = (S, DecisionId)> + '_ {
        self.first.iter().chain(self.rest.iter()).copied()
    }

    fn child(&self, observation: S) -> Option<DecisionId> {
        self.children().find(|(o, _)| *o == observation).map(|(_, id)| id)
    }
}

/// Search tree stored in flat arenas. Node 0 of the decision arena is the root.
#[derive(Clone, Debug)]
pub struct SearchTree<S, T> {
    decisions: Vec<DecisionNode<S>>,
    chances: Vec<ChanceNode<S, T>>,
    slots: Vec<Option<ChanceId>>,
    num_actions: usize,
}

struct SearchParams<T> {
    norm: T,
    exploration: T,
    horizon: usize,
}

impl<S, T> SearchTree<S, T>
where
    S: Copy + PartialEq,
    T: Scalar,
{
    pub fn new(root: S, num_actions: usize) -> Self {
        let mut tree = Self {
            decisions: Vec::new(),
            chances: Vec::new(),
            slots: Vec::new(),
            num_actions,
        };
        tree.push_decision(root, 0);
        tree
    }

    pub fn root(&self) -> DecisionId {
        DecisionId(0)
    }

    pub fn decision(&self, id: DecisionId) -> &DecisionNode<S> {
        &self.decisions[id.0]
    }

    pub fn chance(&self, id: ChanceId) -> &ChanceNode<S, T> {
        &self.chances[id.0]
    }

    pub fn num_decision_nodes(&self) -> usize {
        self.decisions.len()
    }

    pub fn num_chance_nodes(&self) -> usize {
        self.chances.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Chance children of a decision node that exist, in action order.
    pub fn children(&self, id: DecisionId) -> impl Iterator<Item = ChanceId> + '_ {
        let base = self.decisions[id.0].slot_base;
        self.slots[base..base + self.num_actions].iter().flatten().copied()
    }

    /// Statistics for every action at a decision node, unvisited actions included.
    pub fn arms(&self, id: DecisionId) -> Vec<ArmStats<T>> {
        let base = self.decisions[id.0].slot_base;
        self.slots[base..base + self.num_actions]
            .iter()
            .map(|slot| match slot {
                Some(c) => ArmStats {
                    visits: self.chances[c.0].visits,
                    value: self.chances[c.0].value,
                },
                None => ArmStats {
                    visits: 0,
                    value: T::zero(),
                },
            })
            .collect()
    }

    /// Highest-value visited chance child; ties go to more visits, then lower action index.
    pub fn best_child(&self, id: DecisionId) -> Option<ChanceId> {
        let mut best: Option<ChanceId> = None;
        for c in self.children(id) {
            let node = &self.chances[c.0];
            if node.visits == 0 {
                continue;
            }
            best = match best {
                None => Some(c),
                Some(b) => {
                    let cur = &self.chances[b.0];
                    if node.value > cur.value || (node.value == cur.value && node.visits > cur.visits) {
                        Some(c)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    }

    /// Most visited decision child of a chance node, first-created on ties.
    pub fn likeliest_outcome(&self, id: ChanceId) -> Option<DecisionId> {
        let mut best: Option<DecisionId> = None;
        for (_, d) in self.chances[id.0].children() {
            if best.is_none_or(|b| self.decisions[d.0].visits > self.decisions[b.0].visits) {
                best = Some(d);
            }
        }
        best
    }

    /// Runs one simulation from the root to the configured horizon and returns its
    /// discounted return.
    pub fn sample<E, R>(&mut self, env: &E, dvec: &DiscountVector<T>, cfg: &PlannerConfig<T>, rng: &mut R) -> Result<T>
    where
        E: Environment<T, State = S>,
        R: Rng + ?Sized,
    {
        let params = search_params(cfg, dvec)?;
        self.visit_decision(env, DecisionId(0), 0, &params, dvec, rng)
    }

    fn push_decision(&mut self, state: S, visits: u64) -> DecisionId {
        let slot_base = self.slots.len();
        self.slots.extend(std::iter::repeat_n(None, self.num_actions));
        self.decisions.push(DecisionNode {
            state,
            visits,
            slot_base,
        });
        DecisionId(self.decisions.len() - 1)
    }

    fn visit_decision<E, R>(
        &mut self,
        env: &E,
        id: DecisionId,
        depth: usize,
        params: &SearchParams<T>,
        dvec: &DiscountVector<T>,
        rng: &mut R,
    ) -> Result<T>
    where
        E: Environment<T, State = S>,
        R: Rng + ?Sized,
    {
        if depth >= params.horizon {
            self.decisions[id.0].visits += 1;
            return Ok(T::zero());
        }
        let node = &self.decisions[id.0];
        let base = node.slot_base;
        let slots = &self.slots[base..base + self.num_actions];
        let chances = &self.chances;
        let action = select_arm(
            params.norm,
            params.exploration,
            node.visits,
            slots.iter().map(|s| match s {
                Some(c) => (chances[c.0].visits, chances[c.0].value),
                None => (0, T::zero()),
            }),
        );
        let chance = match self.slots[base + action.0] {
            Some(c) => c,
            None => {
                let state = self.decisions[id.0].state;
                self.chances.push(ChanceNode {
                    state,
                    action,
                    visits: 0,
                    value: T::zero(),
                    first: None,
                    rest: Vec::new(),
                });
                let c = ChanceId(self.chances.len() - 1);
                self.slots[base + action.0] = Some(c);
                c
            }
        };
        let ret = self.visit_chance(env, chance, depth, params, dvec, rng)?;
        self.decisions[id.0].visits += 1;
        Ok(ret)
    }

    fn visit_chance<E, R>(
        &mut self,
        env: &E,
        id: ChanceId,
        depth: usize,
        params: &SearchParams<T>,
        dvec: &DiscountVector<T>,
        rng: &mut R,
    ) -> Result<T>
    where
        E: Environment<T, State = S>,
        R: Rng + ?Sized,
    {
        let (state, action) = {
            let node = &self.chances[id.0];
            (node.state, node.action)
        };
        let percept = env.step(state, action)?;
        let immediate = dvec.at_offset(depth) * percept.reward;
        let future = match self.chances[id.0].child(percept.observation) {
            Some(child) => self.visit_decision(env, child, depth + 1, params, dvec, rng)?,
            None => {
                let child = self.push_decision(percept.observation, 1);
                let node = &mut self.chances[id.0];
                if node.first.is_none() {
                    node.first = Some((percept.observation, child));
                } else {
                    node.rest.push((percept.observation, child));
                }
                let remaining = params.horizon - depth - 1;
                rollout_return(
                    env,
                    percept.observation,
                    dvec,
                    depth + 1,
                    remaining,
                    &mut uniform_policy(env),
                    rng,
                )?
            }
        };
        let ret = immediate + future;
        let node = &mut self.chances[id.0];
        node.visits += 1;
        node.value = node.value + (ret - node.value) / T::from_count(node.visits);
        Ok(ret)
    }
}

fn search_params<T: Scalar>(cfg: &PlannerConfig<T>, dvec: &DiscountVector<T>) -> Result<SearchParams<T>> {
    let norm = cfg.normaliser()?;
    if dvec.len() < cfg.horizon {
        return Err(Error::Config(format!(
            "discount vector covers {} steps but the horizon is {}",
            dvec.len(),
            cfg.horizon
        )));
    }
    Ok(SearchParams {
        norm,
        exploration: cfg.exploration,
        horizon: cfg.horizon,
    })
}

/// Uniform random choice over the environment's actions.
pub fn uniform_policy<T, E, R>(env: &E) -> impl FnMut(E::State, &mut R) -> Action
where
    T: Scalar,
    E: Environment<T>,
    R: Rng + ?Sized,
{
    let n = env.num_actions();
    move |_, rng: &mut R| Action(rng.gen_range(0..n))
}

/// Simulates `depth_remaining` steps from `state` under `policy`, starting at
/// discount offset `offset`, and returns `sum_d dvec[offset + d] * r_d`.
pub fn rollout_return<T, E, R, P>(
    env: &E,
    mut state: E::State,
    dvec: &DiscountVector<T>,
    offset: usize,
    depth_remaining: usize,
    policy: &mut P,
    rng: &mut R,
) -> Result<T>
where
    T: Scalar,
    E: Environment<T>,
    R: Rng + ?Sized,
    P: FnMut(E::State, &mut R) -> Action,
{
    let mut total = T::zero();
    for d in offset..offset + depth_remaining {
        let action = policy(state, rng);
        let percept = env.step(state, action)?;
        total = total + dvec.at_offset(d) * percept.reward;
        state = percept.observation;
    }
    Ok(total)
}

/// Builds a fresh tree from `state` with `cfg.samples` simulations and returns the
/// root action with the highest mean return (ties: more visits, then lower index).
pub fn plan_action<T, E, R>(
    env: &E,
    state: E::State,
    dvec: &DiscountVector<T>,
    cfg: &PlannerConfig<T>,
    rng: &mut R,
) -> Result<(Action, SearchTree<E::State, T>)>
where
    T: Scalar,
    E: Environment<T>,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let params = search_params(cfg, dvec)?;
    let mut tree = SearchTree::new(state, env.num_actions());
    for _ in 0..cfg.samples {
        tree.visit_decision(env, DecisionId(0), 0, &params, dvec, rng)?;
    }
    let best = tree.best_child(tree.root()).ok_or(Error::EmptyTree)?;
    Ok((tree.chance(best).action(), tree))
}

/// Walks the tree from the root, taking the highest-value chance child at each
/// decision node and then its most visited outcome, for at most `horizon` steps.
pub fn extract_plan<S, T>(tree: &SearchTree<S, T>, horizon: usize) -> Result<AgentPlan>
where
    S: Copy + PartialEq,
    T: Scalar,
{
    let mut actions = Vec::with_capacity(horizon);
    let mut node = tree.root();
    while actions.len() < horizon {
        let Some(chance) = tree.best_child(node) else { break };
        actions.push(tree.chance(chance).action());
        match tree.likeliest_outcome(chance) {
            Some(next) => node = next,
            None => break,
        }
    }
    if actions.is_empty() {
        return Err(Error::EmptyTree);
    }
    Ok(AgentPlan::new(actions))
}

/// Planned action sequence; the first entry is the action for the current cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AgentPlan {
    actions: Vec<Action>,
}

impl AgentPlan {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn repeat(action: Action, len: usize) -> Self {
        Self::new(vec![action; len])
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn get(&self, i: usize) -> Option<Action> {
        self.actions.get(i).copied()
    }

    pub fn first(&self) -> Option<Action> {
        self.get(0)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

impl fmt::Display for AgentPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.actions.iter().try_for_each(|a| write!(f, "{}", a.symbol()))
    }
}

impl FromStr for AgentPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Action::from_symbol(c).ok_or_else(|| Error::Config(format!("bad plan symbol '{c}'"))))
            .collect::<Result<Vec<_>>>()
            .map(AgentPlan::new)
    }
}

impl Serialize for AgentPlan {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AgentPlan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
