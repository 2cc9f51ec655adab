#![allow(dead_code)]

pub mod demo;

use std::path::PathBuf;
use std::sync::Arc;

use arena_core::{
    apply_action, check_goals, init_mission, render_default, MissionSpec, SceneLibrary,
};
use arena_edh::{LogRecorder, SessionLog, Speaker};
use arena_protocol::{
    ActionRecord, Baseline, CompactObservation, DialogTurn, InferenceMode, InferenceRequest,
    Speaker as WireSpeaker,
};

pub const MISSIONS: [&str; 13] = [
    "chill_soda",
    "clean_plate",
    "cook_egg",
    "deliver_spanner",
    "disinfect_computer",
    "eat_donut",
    "empty_mug",
    "fill_bottle",
    "heat_burger",
    "light_lamp",
    "make_coffee",
    "repair_bowl",
    "slice_bread",
];

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

/// Plays a mission transcript against the baseline and records the log.
pub fn record_mission(lib: &Arc<SceneLibrary>, id: &str) -> SessionLog {
    let spec = mission(id);
    let baseline = Baseline::new(lib.clone());
    let mut world = init_mission(&spec, lib).unwrap();
    let mut rec = LogRecorder::for_mission(format!("log-{id}"), &world, &spec);
    let mut dialog = Vec::new();
    let mut history = Vec::new();
    let mut previous = None;
    'turns: for (turn, utt) in transcript(id).iter().enumerate() {
        rec.utterance(Speaker::Commander, utt);
        dialog.push(DialogTurn {
            speaker: WireSpeaker::User,
            text: utt.clone(),
        });
        for _ in 0..10 {
            let req = InferenceRequest {
                session_id: format!("log-{id}"),
                turn_index: turn as u32,
                utterance: utt.clone(),
                observation: CompactObservation::from(&render_default(&world)),
                dialog_history: dialog.clone(),
                action_history: history.clone(),
                previous_response_id: previous.clone(),
                scene_id: world.scene_id().to_string(),
                alternatives: Vec::new(),
                mode: InferenceMode::Live,
            };
            let resp = baseline.infer(&req);
            previous = Some(resp.response_id.clone());
            for a in &resp.actions {
                let (next, result) = apply_action(&world, a);
                rec.action(a, &result, &next);
                world = next;
                history.push(ActionRecord {
                    turn_index: turn as u32,
                    action: a.clone(),
                    ok: result.ok,
                });
                if check_goals(&world, &spec).unwrap().overall {
                    break 'turns;
                }
            }
            if resp.turn_complete {
                if let Some(d) = resp.dialog {
                    rec.utterance(Speaker::Follower, &d);
                    dialog.push(DialogTurn {
                        speaker: WireSpeaker::Robot,
                        text: d,
                    });
                }
                break;
            }
        }
    }
    rec.utterance(Speaker::Commander, "thanks");
    rec.finish()
}

pub fn blessing() -> bool {
    std::env::var_os("ARENA_BLESS").is_some()
}

/// Compares `actual` to the golden file, rewriting it when blessing.
pub fn golden(name: &str, actual: &str) {
    let path = fixtures().join(name);
    if blessing() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}
