mod common;

use std::sync::Arc;

use arena_core::world::{AgentPose, Heading, Pitch};
use arena_core::{apply_action, render_default, Action, Target, Verb};
use arena_protocol::Baseline;
use common::*;

fn two_mugs_in_view() -> Driver {
    let lib = library();
    let w = lib.instantiate("demo").unwrap().unwrap();
    let at = |vp: &str| AgentPose {
        room: "break_room".into(),
        viewpoint: vp.into(),
        heading: Heading::N,
        pitch: Pitch::Level,
    };
    let (w, r) = apply_action(
        &w.with_agent(at("br_fridge")).unwrap(),
        &Action::interact(Verb::Open, Target::id("fridge_1")),
    );
    assert!(r.ok);
    let w = w.with_agent(at("br_entry")).unwrap();
    let obs = render_default(&w);
    assert!(
        obs.is_visible(&"mug_1".into()) && obs.is_visible(&"mug_2".into()),
        "{:?}",
        obs.visible
    );
    Driver::new(Arc::new(Baseline::new(lib)), "ambiguous", w)
}

#[test]
fn ambiguous_reference_highlights_and_asks() {
    let mut d = two_mugs_in_view();
    let out = d.say("pick up the mug", 10);
    assert_eq!(
        out.actions(),
        vec![Action::Highlight {
            target: Target::id("mug_1")
        }]
    );
    assert_eq!(
        out.dialog.as_deref(),
        Some("I see more than one mug. Do you mean the one I highlighted?")
    );
    assert!(d.world.held_object().is_none());
}

#[test]
fn confirming_the_highlight_picks_that_instance() {
    let mut d = two_mugs_in_view();
    d.say("pick up the mug", 10);
    let out = d.say("yes", 10);
    assert_eq!(
        out.actions().last(),
        Some(&Action::interact(Verb::Pickup, Target::id("mug_1")))
    );
    assert_eq!(d.world.held_object().map(|o| o.id.as_str()), Some("mug_1"));
}

#[test]
fn a_new_command_replaces_the_question() {
    let mut d = two_mugs_in_view();
    d.say("pick up the mug", 10);
    let out = d.say("open the fridge", 10);
    assert!(out.actions().iter().all(|a| a.verb() != Some(Verb::Pickup)));
}

#[test]
fn location_hint_resolves_the_ambiguity() {
    let mut d = two_mugs_in_view();
    let out = d.say("pick up the mug in the fridge", 10);
    assert_eq!(
        out.actions().last(),
        Some(&Action::interact(Verb::Pickup, Target::id("mug_2")))
    );
}
