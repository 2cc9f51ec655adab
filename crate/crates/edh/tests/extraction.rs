mod common;

use std::collections::BTreeSet;

use arena_core::{apply_action, diff_states, Action, SceneLibrary, Target, Verb, WorldState};
use arena_edh::{extract_dir, extract_edh_instances, EdhSuite, LogEvent, SessionLog};
use common::demo::{close, demo_prefix, open, Demo};
use common::*;

fn logs() -> Vec<SessionLog> {
    MISSIONS
        .iter()
        .map(|id| SessionLog::load(fixtures().join("logs").join(format!("{id}.json"))).unwrap())
        .collect()
}

/// Independent segmentation: walk the log once, closing a segment at each
/// utterance, and keep it when all three conditions hold.
fn oracle_segments(log: &SessionLog, lib: &SceneLibrary) -> Vec<(usize, Vec<Action>)> {
    let state0 =
        arena_core::instantiate_with_overrides(lib, &log.scene_id, &log.overrides).unwrap();
    let relevant: BTreeSet<_> = match &log.mission {
        Some(m) => m.task_relevant_instances(&state0),
        None => {
            let mut s = state0.clone();
            for a in log.actions() {
                s = apply_action(&s, a).0;
            }
            diff_states(&state0, &s)
                .unwrap()
                .instances()
                .into_iter()
                .cloned()
                .collect()
        }
    };
    let mut out = Vec::new();
    let mut state = state0;
    let mut seg_start: WorldState = state.clone();
    let mut seg_actions: Vec<Action> = Vec::new();
    let mut utterances_before = 0usize;
    let mut seg_index = 0usize;
    let mut seen_any_event = false;
    for e in &log.events {
        match e {
            LogEvent::Utterance { .. } => {
                if seen_any_event {
                    let had_dialog = utterances_before > 0;
                    let interacts = seg_actions
                        .iter()
                        .any(|a| matches!(a, Action::Interact { .. }));
                    let changed = diff_states(&seg_start, &state)
                        .unwrap()
                        .entries()
                        .any(|d| relevant.contains(&d.instance));
                    if had_dialog && interacts && changed {
                        out.push((seg_index, seg_actions.clone()));
                    }
                    seg_index += 1;
                }
                utterances_before += 1;
                seg_start = state.clone();
                seg_actions.clear();
            }
            LogEvent::Action { action, .. } => {
                state = apply_action(&state, action).0;
                seg_actions.push(action.clone());
            }
        }
        seen_any_event = true;
    }
    out
}

#[test]
fn extraction_matches_brute_force_oracle() {
    let lib = library();
    let mut total = 0;
    for log in logs() {
        let got: Vec<(usize, Vec<Action>)> = extract_edh_instances(&log, &lib)
            .unwrap()
            .into_iter()
            .map(|i| (i.segment, i.reference_actions))
            .collect();
        let want = oracle_segments(&log, &lib);
        assert_eq!(got, want, "{}", log.session_id);
        total += got.len();
    }
    assert!(
        total >= MISSIONS.len(),
        "every mission log yields at least one instance"
    );
}

#[test]
fn every_instance_satisfies_the_criteria() {
    let lib = library();
    for log in logs() {
        let relevant = arena_edh::task_relevant(&log, &lib).unwrap();
        for inst in extract_edh_instances(&log, &lib).unwrap() {
            assert!(!inst.dialog_history.is_empty());
            assert!(inst.reference_actions.iter().any(Action::is_interaction));
            assert!(!inst.expected_changes.is_empty());
            assert!(inst
                .expected_changes
                .instances()
                .iter()
                .all(|i| relevant.contains(*i)));
            assert_eq!(inst.instance_id, inst.content_id());
            assert!(inst.action_history.len() <= log.actions().count());
        }
    }
}

#[test]
fn extraction_is_deterministic() {
    let lib = library();
    let a = extract_dir(fixtures().join("logs"), &lib).unwrap();
    let b = extract_dir(fixtures().join("logs"), &lib).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let ids: BTreeSet<_> = a.instances.iter().map(|i| &i.instance_id).collect();
    assert_eq!(ids.len(), a.instances.len(), "ids are unique");
}

#[test]
fn golden_suite() {
    let lib = library();
    let suite = extract_dir(fixtures().join("logs"), &lib).unwrap();
    golden("edh/suite.json", &suite.to_json());
    let back = EdhSuite::from_json(&suite.to_json()).unwrap();
    assert_eq!(back, suite);
}

#[test]
fn only_the_compliant_segment_is_extracted() {
    let mut d = demo_prefix();
    d.say("put the mug in the fridge");
    // Unbracketed trailing actions.
    d.act(Action::interact(Verb::Place, Target::id("fridge_1")));
    let log = d.rec.finish();
    let inst = extract_edh_instances(&log, &d.lib).unwrap();
    assert_eq!(inst.len(), 1);
    assert_eq!(
        inst[0].dialog_history.last().unwrap().text,
        "open the fridge"
    );
    assert_eq!(inst[0].reference_actions.len(), 2);
    assert_eq!(inst[0].action_history.len(), 5);
    assert_eq!(oracle_segments(&log, &d.lib).len(), 1);
}

#[test]
fn segment_changing_only_irrelevant_objects_is_dropped() {
    let mut d = demo_prefix();
    // Closing again makes the fridge unchanged over the whole session.
    d.say("close it");
    d.act(close("fridge_1"));
    d.say("thanks");
    let log = d.rec.finish();
    let inst = extract_edh_instances(&log, &d.lib).unwrap();
    assert!(inst.is_empty(), "{inst:?}");
    assert!(oracle_segments(&log, &d.lib).is_empty());
}

#[test]
fn log_without_utterances_yields_nothing() {
    let mut d = Demo::new();
    d.act(Action::GotoRoom {
        room: "break_room".into(),
    });
    d.act(Action::GotoViewpoint {
        viewpoint: "br_fridge".into(),
    });
    d.act(open("fridge_1"));
    let log = d.rec.finish();
    assert!(extract_edh_instances(&log, &d.lib).unwrap().is_empty());
}

#[test]
fn instance_starts_from_the_segment_state() {
    let lib = library();
    let log = SessionLog::load(fixtures().join("logs/repair_bowl.json")).unwrap();
    let trace = arena_edh::replay_trace(&log, &lib).unwrap();
    for inst in extract_edh_instances(&log, &lib).unwrap() {
        let held = inst.action_history.len();
        let mut s = trace.states[0].clone();
        for a in &inst.action_history {
            s = apply_action(&s, &a.action).0;
        }
        assert_eq!(s.snapshot(), inst.initial_state, "after {held} actions");
    }
}
