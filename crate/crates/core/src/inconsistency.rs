//! Behavioural time-inconsistency check: an action is flagged when it differs from
//! the action the previous cycle's plan predicted for this cycle.
//!
//! Only the immediate next action is compared. Deeper plan entries are unreliable
//! near the search horizon and would produce false positives.

use serde::{Deserialize, Serialize};

use crate::env::Action;
use crate::planner::AgentPlan;

/// `Some(true)` when `taken` contradicts `prev_plan[1]`, `Some(false)` when it agrees,
/// `None` when the plan is too short to predict this cycle.
pub fn detect(prev_plan: &AgentPlan, taken: Action) -> Option<bool> {
    prev_plan.get(1).map(|predicted| predicted != taken)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconsistencyRecord {
    pub cycle: u64,
    /// Action the previous plan predicted, if it could be evaluated.
    pub planned: Option<Action>,
    pub taken: Action,
    /// `None` for not evaluated (first cycle, or a previous plan shorter than two).
    pub flagged: Option<bool>,
}

/// Tracks the previous plan across cycles and counts flagged actions.
#[derive(Clone, Debug, Default)]
pub struct Detector {
    previous: Option<AgentPlan>,
    flagged: u64,
    evaluated: u64,
}

impl Detector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the action taken at `cycle` and the plan made at that cycle.
    pub fn observe(&mut self, cycle: u64, plan: &AgentPlan, taken: Action) -> InconsistencyRecord {
        let planned = self.previous.as_ref().and_then(|p| p.get(1));
        let flagged = self.previous.as_ref().and_then(|p| detect(p, taken));
        if let Some(f) = flagged {
            self.evaluated += 1;
            if f {
                self.flagged += 1;
            }
        }
        self.previous = Some(plan.clone());
        InconsistencyRecord {
            cycle,
            planned,
            taken,
            flagged,
        }
    }

    pub fn flagged(&self) -> u64 {
        self.flagged
    }

    pub fn evaluated(&self) -> u64 {
        self.evaluated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(s: &str) -> AgentPlan {
        s.parse().unwrap()
    }

    #[test]
    fn detect_examples() {
        assert_eq!(detect(&plan("0111111000"), Action(0)), Some(true));
        assert_eq!(detect(&plan("0000000000"), Action(0)), Some(false));
        assert_eq!(detect(&plan("1111111111"), Action(1)), Some(false));
        assert_eq!(detect(&plan("1"), Action(1)), None);
        assert_eq!(detect(&plan(""), Action(0)), None);
    }

    #[test]
    fn first_cycle_not_evaluated() {
        let mut d = Detector::new();
        let r = d.observe(1, &plan("0111111000"), Action(0));
        assert_eq!(r.flagged, None);
        assert_eq!(r.planned, None);
        assert_eq!(d.evaluated(), 0);
    }

    #[test]
    fn procrastination_flags_every_later_cycle() {
        let mut d = Detector::new();
        for cycle in 1..=200 {
            let r = d.observe(cycle, &plan("0111111000"), Action(0));
            assert_eq!(r.flagged.is_some(), cycle > 1);
            assert_eq!(
                r.flagged == Some(true),
                r.planned.is_some() && r.planned != Some(r.taken)
            );
        }
        assert_eq!(d.flagged(), 199);
        assert_eq!(d.evaluated(), 199);
    }

    #[test]
    fn short_previous_plan_skips_cycle() {
        let mut d = Detector::new();
        d.observe(1, &plan("1"), Action(1));
        let r = d.observe(2, &plan("11"), Action(0));
        assert_eq!(r.flagged, None);
        let r = d.observe(3, &plan("11"), Action(0));
        assert_eq!(r.flagged, Some(true));
    }
}
