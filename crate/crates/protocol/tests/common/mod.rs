#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use arena_core::mission::MissionSpec;
use arena_core::{
    apply_action, check_goals, init_mission, render_default, Action, SceneLibrary, WorldState,
};
use arena_protocol::{
    ActionRecord, Baseline, CompactObservation, DialogTurn, InferenceMode, InferenceRequest,
    InferenceResponse, Speaker,
};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn library() -> Arc<SceneLibrary> {
    let f = fixtures();
    Arc::new(SceneLibrary::load(f.join("classes.json"), f.join("scenes")).unwrap())
}

pub fn mission(id: &str) -> MissionSpec {
    let text =
        std::fs::read_to_string(fixtures().join("missions").join(format!("{id}.json"))).unwrap();
    MissionSpec::from_json(&text).unwrap()
}

pub fn transcript(id: &str) -> Vec<String> {
    let text =
        std::fs::read_to_string(fixtures().join("transcripts").join(format!("{id}.json"))).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["utterances"]
        .as_array()
        .unwrap()
        .iter()
        .map(|u| u.as_str().unwrap().to_string())
        .collect()
}

/// In-process stand-in for the orchestrator's turn loop.
pub struct Driver {
    pub baseline: Arc<Baseline>,
    pub session: String,
    pub world: WorldState,
    pub mission: Option<MissionSpec>,
    pub turn: u32,
    pub dialog: Vec<DialogTurn>,
    pub history: Vec<ActionRecord>,
    pub previous: Option<String>,
    pub mode: InferenceMode,
}

#[derive(Debug, Clone)]
pub struct TurnOutcome {
    pub responses: Vec<InferenceResponse>,
    pub executed: Vec<(Action, bool)>,
    pub dialog: Option<String>,
    pub complete: bool,
}

impl TurnOutcome {
    pub fn actions(&self) -> Vec<Action> {
        self.executed.iter().map(|(a, _)| a.clone()).collect()
    }
}

impl Driver {
    pub fn new(baseline: Arc<Baseline>, session: &str, world: WorldState) -> Self {
        Self {
            baseline,
            session: session.into(),
            world,
            mission: None,
            turn: 0,
            dialog: Vec::new(),
            history: Vec::new(),
            previous: None,
            mode: InferenceMode::Live,
        }
    }

    pub fn for_mission(baseline: Arc<Baseline>, lib: &SceneLibrary, id: &str) -> Self {
        let spec = mission(id);
        let world = init_mission(&spec, lib).unwrap();
        let mut d = Self::new(baseline, id, world);
        d.mission = Some(spec);
        d
    }

    pub fn request(&self, utterance: &str) -> InferenceRequest {
        InferenceRequest {
            session_id: self.session.clone(),
            turn_index: self.turn,
            utterance: utterance.into(),
            observation: CompactObservation::from(&render_default(&self.world)),
            dialog_history: self.dialog.clone(),
            action_history: self.history.clone(),
            previous_response_id: self.previous.clone(),
            scene_id: self.world.scene_id().to_string(),
            alternatives: Vec::new(),
            mode: self.mode,
        }
    }

    pub fn complete(&self) -> bool {
        self.mission
            .as_ref()
            .is_some_and(|m| check_goals(&self.world, m).unwrap().overall)
    }

    pub fn begin_turn(&mut self, utterance: &str) {
        self.dialog.push(DialogTurn {
            speaker: Speaker::User,
            text: utterance.into(),
        });
    }

    /// Executes a response's actions, stopping early at mission completion
    /// or Stop; returns what ran and whether the turn must end.
    pub fn apply(&mut self, resp: &InferenceResponse) -> (Vec<(Action, bool)>, bool) {
        self.previous = Some(resp.response_id.clone());
        let mut executed = Vec::new();
        for a in &resp.actions {
            let (next, result) = apply_action(&self.world, a);
            self.world = next;
            self.history.push(ActionRecord {
                turn_index: self.turn,
                action: a.clone(),
                ok: result.ok,
            });
            executed.push((a.clone(), result.ok));
            if self.complete() || matches!(a, Action::Stop) {
                return (executed, true);
            }
        }
        (executed, resp.turn_complete)
    }

    pub fn end_turn(&mut self, dialog: Option<&str>) {
        if let Some(d) = dialog {
            self.dialog.push(DialogTurn {
                speaker: Speaker::Robot,
                text: d.into(),
            });
        }
        self.turn += 1;
    }

    /// Runs one user turn with a cap of `max_rounds` inference calls.
    pub fn say(&mut self, utterance: &str, max_rounds: usize) -> TurnOutcome {
        self.begin_turn(utterance);
        let mut out = TurnOutcome {
            responses: Vec::new(),
            executed: Vec::new(),
            dialog: None,
            complete: false,
        };
        for _ in 0..max_rounds {
            let req = self.request(utterance);
            let resp = self.baseline.infer(&req);
            resp.validate().unwrap();
            out.responses.push(resp.clone());
            let (executed, ended) = self.apply(&resp);
            out.executed.extend(executed);
            if ended {
                if resp.turn_complete {
                    out.dialog = resp.dialog.clone();
                }
                break;
            }
        }
        out.complete = self.complete();
        self.end_turn(out.dialog.clone().as_deref());
        out
    }
}
