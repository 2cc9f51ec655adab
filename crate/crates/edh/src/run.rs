//! Running one model over one EDH instance.

use std::sync::Arc;

use arena_core::{
    apply_action, diff_states, render_default, Action, ClassRegistry, FailureCode, StateDelta,
    WorldState,
};
use serde::{Deserialize, Serialize};

use crate::error::EdhError;
use crate::instance::{EdhInstance, PastAction};
use crate::model::{EdhView, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StopPredicted,
    ActionBudget,
    FailureBudget,
    ModelRaised,
}

impl Termination {
    pub const ALL: [Termination; 4] = [
        Termination::StopPredicted,
        Termination::ActionBudget,
        Termination::FailureBudget,
        Termination::ModelRaised,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::StopPredicted => "stop_predicted",
            Termination::ActionBudget => "action_budget",
            Termination::FailureBudget => "failure_budget",
            Termination::ModelRaised => "model_raised",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedAction {
    pub action: Action,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_code: Option<FailureCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdhResult {
    pub instance_id: String,
    pub predicted: Vec<PredictedAction>,
    pub termination: Termination,
    pub api_failures: u32,
    /// Changes on the expected instances between the initial and final state.
    pub achieved_changes: StateDelta,
    pub success: bool,
    pub goal_condition_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Executes predicted actions until Stop, a budget is exhausted or the model
/// raises. When one action exhausts both budgets the failure budget is
/// reported.
pub fn run_edh(
    instance: &EdhInstance,
    model: &dyn Model,
    registry: Arc<ClassRegistry>,
) -> Result<EdhResult, EdhError> {
    let initial = WorldState::from_snapshot(instance.initial_state.clone(), registry)?;
    let mut state = initial.clone();
    let mut adapter = model.start(instance);
    let mut history: Vec<PastAction> = Vec::new();
    let mut predicted = Vec::new();
    let mut failures = 0u32;
    let mut error = None;
    let budget = instance.budget;

    let termination = loop {
        if predicted.len() as u32 >= budget.max_actions {
            break Termination::ActionBudget;
        }
        let observation = render_default(&state);
        let view = EdhView {
            instance,
            predicted: &history,
            observation: &observation,
        };
        let action = match adapter.next_action(&view) {
            Ok(a) => a,
            Err(e) => {
                error = Some(e.0);
                break Termination::ModelRaised;
            }
        };
        if action == Action::Stop {
            break Termination::StopPredicted;
        }
        let (next, result) = apply_action(&state, &action);
        state = next;
        history.push(PastAction {
            action: action.clone(),
            ok: result.ok,
        });
        predicted.push(PredictedAction {
            action,
            ok: result.ok,
            failure_code: result.failure_code,
        });
        if !result.ok {
            failures += 1;
            if failures >= budget.max_api_failures {
                break Termination::FailureBudget;
            }
        }
    };

    let expected = &instance.expected_changes;
    let achieved = diff_states(&initial, &state)?.restrict_to(expected.instances());
    let matched = expected.overlap(&achieved);
    let goal_condition_rate = if expected.is_empty() {
        1.0
    } else {
        matched as f64 / expected.len() as f64
    };
    Ok(EdhResult {
        instance_id: instance.instance_id.clone(),
        predicted,
        termination,
        api_failures: failures,
        success: matched == expected.len(),
        achieved_changes: achieved,
        goal_condition_rate,
        error,
    })
}
