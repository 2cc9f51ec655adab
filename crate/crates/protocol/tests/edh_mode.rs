mod common;

use std::sync::Arc;

use arena_core::world::{AgentPose, Heading, Pitch};
use arena_core::{object_at, render_default, Action, Target, Verb};
use arena_protocol::{Baseline, InferenceMode};
use common::*;

#[test]
fn edh_mode_targets_pixels_on_the_intended_object() {
    let lib = library();
    let w = lib
        .instantiate("demo")
        .unwrap()
        .unwrap()
        .with_agent(AgentPose {
            room: "break_room".into(),
            viewpoint: "br_entry".into(),
            heading: Heading::N,
            pitch: Pitch::Level,
        })
        .unwrap();
    let mut d = Driver::new(Arc::new(Baseline::new(lib)), "edh", w);
    d.mode = InferenceMode::Edh;
    d.begin_turn("pick up the mug");
    let mut picked = false;
    for _ in 0..5 {
        let resp = d.baseline.infer(&d.request("pick up the mug"));
        let obs = render_default(&d.world);
        for a in &resp.actions {
            if let Action::Interact { verb, target } = a {
                assert_eq!(*verb, Verb::Pickup);
                let Target::Pixel { x, y } = target else {
                    panic!("{a}")
                };
                assert_eq!(
                    object_at(&obs, *x, *y).unwrap().map(|i| i.as_str()),
                    Some("mug_1")
                );
                picked = true;
            }
        }
        let (executed, ended) = d.apply(&resp);
        assert!(executed.iter().all(|(_, ok)| *ok));
        if ended {
            break;
        }
    }
    assert!(picked);
    assert_eq!(d.world.held_object().map(|o| o.id.as_str()), Some("mug_1"));
}

#[test]
fn edh_mode_emits_at_most_one_interaction_per_response() {
    let lib = library();
    let mut d = Driver::for_mission(
        Arc::new(Baseline::new(lib.clone())),
        &lib,
        "disinfect_computer",
    );
    d.mode = InferenceMode::Edh;
    for u in transcript("disinfect_computer") {
        let out = d.say(&u, 10);
        for r in &out.responses {
            assert!(r.actions.iter().filter(|a| a.is_interaction()).count() <= 1);
        }
    }
}
