//! Work limits shared by the SAT solver, the automorphism search and the
//! exhaustive checkers.

use std::time::{Duration, Instant};

/// Upper bounds on the work a single call may perform.
///
/// `max_steps` counts whatever unit the caller documents (decisions for the
/// SAT solver, search-tree nodes for the automorphism search, stored states
/// for the consistency checker). Step limits are deterministic; time limits
/// are not, so reproducible pipelines gate on steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_steps: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SolveBudget {
    pub const fn unlimited() -> Self {
        Self {
            max_steps: None,
            max_time: None,
        }
    }

    pub const fn steps(n: u64) -> Self {
        Self {
            max_steps: Some(n),
            max_time: None,
        }
    }

    pub const fn time(d: Duration) -> Self {
        Self {
            max_steps: None,
            max_time: Some(d),
        }
    }

    pub fn with_time(mut self, d: Duration) -> Self {
        self.max_time = Some(d);
        self
    }

    pub fn is_bounded(&self) -> bool {
        self.max_steps.is_some() || self.max_time.is_some()
    }

    pub(crate) fn start(&self) -> BudgetClock {
        BudgetClock {
            budget: *self,
            started: Instant::now(),
            steps: 0,
        }
    }
}

/// Running counter against a [`SolveBudget`].
#[derive(Debug)]
pub(crate) struct BudgetClock {
    budget: SolveBudget,
    started: Instant,
    steps: u64,
}

impl BudgetClock {
    /// Records one step. Returns `false` once the budget is exhausted.
    pub fn tick(&mut self) -> bool {
        self.steps += 1;
        if let Some(max) = self.budget.max_steps {
            if self.steps > max {
                return false;
            }
        }
        // Reading the clock every step is measurable in tight loops.
        if self.steps % 64 == 0 {
            return !self.time_exceeded();
        }
        true
    }

    pub fn time_exceeded(&self) -> bool {
        matches!(self.budget.max_time, Some(t) if self.started.elapsed() >= t)
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }
}
