mod common;

use arena_core::{Action, Target, Verb};
use arena_edh::{
    builtin, run_edh, Budget, EdhInstance, EdhSuite, EdhView, Model, ModelAdapter, ModelError,
    RepeatModel, Termination,
};
use common::*;
use proptest::prelude::*;

fn instance() -> EdhInstance {
    let suite = EdhSuite::load(fixtures().join("edh/suite.json")).unwrap();
    suite
        .instances
        .into_iter()
        .find(|i| i.session_id == "log-repair_bowl")
        .unwrap()
}

fn run(model: &dyn Model, inst: &EdhInstance) -> arena_edh::EdhResult {
    run_edh(inst, model, library().registry().clone()).unwrap()
}

#[test]
fn stop_first_executes_nothing() {
    let lib = library();
    let r = run(builtin("stop", lib).unwrap().as_ref(), &instance());
    assert_eq!(r.termination, Termination::StopPredicted);
    assert!(r.predicted.is_empty());
    assert!(!r.success);
    assert_eq!(r.goal_condition_rate, 0.0);
}

#[test]
fn non_stopping_model_runs_exactly_the_action_budget() {
    let lib = library();
    let r = run(builtin("spin", lib).unwrap().as_ref(), &instance());
    assert_eq!(r.termination, Termination::ActionBudget);
    assert_eq!(r.predicted.len(), 1000);
    assert_eq!(r.api_failures, 0);
}

#[test]
fn failing_model_stops_at_thirty_failures() {
    let lib = library();
    let r = run(builtin("fail", lib).unwrap().as_ref(), &instance());
    assert_eq!(r.termination, Termination::FailureBudget);
    assert_eq!(r.predicted.len(), 30);
    assert_eq!(r.api_failures, 30);
    assert!(r
        .predicted
        .iter()
        .all(|p| !p.ok && p.failure_code.is_some()));
}

#[test]
fn forward_model_ends_on_failures_once_blocked() {
    let lib = library();
    let r = run(builtin("forward", lib).unwrap().as_ref(), &instance());
    assert_eq!(r.termination, Termination::FailureBudget);
    assert_eq!(r.api_failures, 30);
    assert!(r.predicted.len() < 1000);
}

#[test]
fn failure_budget_wins_when_both_are_exhausted() {
    let mut inst = instance();
    inst.budget = Budget {
        max_actions: 30,
        max_api_failures: 30,
    };
    let lib = library();
    let r = run(builtin("fail", lib).unwrap().as_ref(), &inst);
    assert_eq!(r.predicted.len(), 30);
    assert_eq!(r.termination, Termination::FailureBudget);
}

struct Raiser;

struct RaiseAfter(usize);

impl ModelAdapter for RaiseAfter {
    fn next_action(&mut self, _: &EdhView<'_>) -> Result<Action, ModelError> {
        if self.0 == 0 {
            return Err(ModelError("boom".into()));
        }
        self.0 -= 1;
        Ok(Action::RotateLeft)
    }
}

impl Model for Raiser {
    fn name(&self) -> &str {
        "raiser"
    }

    fn start(&self, _: &EdhInstance) -> Box<dyn ModelAdapter> {
        Box::new(RaiseAfter(3))
    }
}

#[test]
fn raising_model_is_recorded() {
    let r = run(&Raiser, &instance());
    assert_eq!(r.termination, Termination::ModelRaised);
    assert_eq!(r.predicted.len(), 3);
    assert_eq!(r.error.as_deref(), Some("boom"));
}

#[test]
fn unknown_builtin_is_an_error() {
    assert!(builtin("nope", library()).is_err());
}

/// Cycles through a fixed pattern of succeeding and failing actions.
struct Pattern(Vec<bool>);

struct PatternRun(Vec<bool>, usize);

impl ModelAdapter for PatternRun {
    fn next_action(&mut self, _: &EdhView<'_>) -> Result<Action, ModelError> {
        let ok = self.0[self.1 % self.0.len()];
        self.1 += 1;
        Ok(if ok {
            Action::RotateLeft
        } else {
            Action::interact(Verb::Pickup, Target::id("missing"))
        })
    }
}

impl Model for Pattern {
    fn name(&self) -> &str {
        "pattern"
    }

    fn start(&self, _: &EdhInstance) -> Box<dyn ModelAdapter> {
        Box::new(PatternRun(self.0.clone(), 0))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The run never exceeds either budget, and stops exactly when one is hit.
    #[test]
    fn budgets_are_exact(
        pattern in prop::collection::vec(any::<bool>(), 1..8),
        max_actions in 1u32..80,
        max_failures in 1u32..20,
    ) {
        let mut inst = instance();
        inst.budget = Budget { max_actions, max_api_failures: max_failures };
        let r = run(&Pattern(pattern), &inst);
        let failures = r.predicted.iter().filter(|p| !p.ok).count() as u32;
        prop_assert_eq!(failures, r.api_failures);
        prop_assert!(r.predicted.len() as u32 <= max_actions);
        prop_assert!(failures <= max_failures);
        match r.termination {
            Termination::ActionBudget => {
                prop_assert_eq!(r.predicted.len() as u32, max_actions);
                prop_assert!(failures < max_failures);
            }
            Termination::FailureBudget => {
                prop_assert_eq!(failures, max_failures);
                prop_assert!(!r.predicted.last().unwrap().ok);
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }
}

#[test]
fn repeat_model_names_itself() {
    let m = RepeatModel::new("x", Action::Stop);
    assert_eq!(m.name(), "x");
}
