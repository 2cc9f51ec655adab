mod common;

use std::sync::Arc;

use arena_core::world::{AgentPose, Heading, Pitch};
use arena_core::{apply_action, render_default, Action, RoomId, ViewpointId, WorldState};
use arena_protocol::{
    baseline_infer, update_visual_memory, Baseline, Belief, SceneContext, VisualMemory,
};
use common::*;
use proptest::prelude::*;

fn demo() -> WorldState {
    library().instantiate("demo").unwrap().unwrap()
}

fn pose(room: &str, vp: &str, heading: Heading, pitch: Pitch) -> AgentPose {
    AgentPose {
        room: RoomId::from(room),
        viewpoint: ViewpointId::from(vp),
        heading,
        pitch,
    }
}

fn step(world: &mut WorldState, memory: &mut VisualMemory, action: Action) {
    let (next, result) = apply_action(world, &action);
    assert!(result.ok, "{action}");
    *world = next;
    *memory = update_visual_memory(memory, world.layout(), &render_default(world));
}

#[test]
fn sighting_records_viewpoint_then_latest_wins() {
    let mut world = demo()
        .with_agent(pose("break_room", "br_entry", Heading::N, Pitch::Level))
        .unwrap();
    let mut memory = update_visual_memory(
        &VisualMemory::new(),
        world.layout(),
        &render_default(&world),
    );
    let mugs: Vec<_> = memory.of_class("Mug").collect();
    assert_eq!(mugs.len(), 1);
    assert_eq!(
        (mugs[0].id.as_str(), mugs[0].viewpoint.as_str()),
        ("mug_1", "br_entry")
    );

    step(
        &mut world,
        &mut memory,
        Action::GotoViewpoint {
            viewpoint: "br_fridge".into(),
        },
    );
    step(&mut world, &mut memory, Action::RotateRight);
    let mugs: Vec<_> = memory.of_class("Mug").collect();
    assert_eq!(mugs.len(), 1);
    assert_eq!(mugs[0].viewpoint.as_str(), "br_fridge");
    assert_eq!(mugs[0].heading, Heading::E);
    assert_eq!(mugs[0].tick, world.tick());
}

#[test]
fn repeated_observation_is_idempotent() {
    let world = demo()
        .with_agent(pose("break_room", "br_entry", Heading::N, Pitch::Level))
        .unwrap();
    let obs = render_default(&world);
    let once = update_visual_memory(&VisualMemory::new(), world.layout(), &obs);
    let twice = update_visual_memory(&once, world.layout(), &obs);
    assert_eq!(once, twice);
    assert_eq!(once.len(), 3);
}

#[test]
fn vanished_object_is_forgotten_from_the_same_pose() {
    let world = demo()
        .with_agent(pose("break_room", "br_shelf", Heading::N, Pitch::Level))
        .unwrap();
    let mut memory = update_visual_memory(
        &VisualMemory::new(),
        world.layout(),
        &render_default(&world),
    );
    assert!(memory.get(&"mug_1".into()).is_some());
    let (world, r) = apply_action(
        &world,
        &Action::interact(arena_core::Verb::Pickup, arena_core::Target::id("mug_1")),
    );
    assert!(r.ok);
    let held_view = render_default(&world);
    memory.observe(world.layout(), &held_view);
    assert!(memory.get(&"mug_1".into()).is_none());
}

#[test]
fn remembered_target_out_of_view_prepends_return_to_last_viewpoint() {
    let lib = library();
    let mut world = demo()
        .with_agent(pose("break_room", "br_entry", Heading::N, Pitch::Level))
        .unwrap();
    let mut belief = Belief::default();
    belief.memory = update_visual_memory(&belief.memory, world.layout(), &render_default(&world));
    step(
        &mut world,
        &mut belief.memory,
        Action::GotoViewpoint {
            viewpoint: "br_fridge".into(),
        },
    );
    step(&mut world, &mut belief.memory, Action::RotateRight);
    step(
        &mut world,
        &mut belief.memory,
        Action::GotoRoom {
            room: "robotics_lab".into(),
        },
    );
    step(
        &mut world,
        &mut belief.memory,
        Action::GotoRoom {
            room: "break_room".into(),
        },
    );
    assert!(!render_default(&world).is_visible(&"mug_1".into()));
    assert_eq!(
        belief
            .memory
            .get(&"mug_1".into())
            .unwrap()
            .viewpoint
            .as_str(),
        "br_fridge"
    );

    let ctx = SceneContext::from_library(&lib, "demo").unwrap();
    let driver = Driver::new(Arc::new(Baseline::new(lib.clone())), "walk", world);
    let resp = baseline_infer(&driver.request("pick up the mug"), &ctx, &mut belief);
    assert!(!resp.turn_complete);
    assert_eq!(
        resp.actions[0],
        Action::GotoViewpoint {
            viewpoint: "br_fridge".into()
        }
    );
}

#[test]
fn walk_ends_with_the_remembered_mug_in_hand() {
    let lib = library();
    let world = demo()
        .with_agent(pose("break_room", "br_entry", Heading::N, Pitch::Level))
        .unwrap();
    let mut d = Driver::new(Arc::new(Baseline::new(lib)), "walk2", world);
    d.say("look around", 10);
    d.say("go to the robotics lab", 10);
    d.say("go to the break room", 10);
    let out = d.say("pick up the mug", 10);
    assert!(out.responses.len() <= 5);
    assert_eq!(d.world.held_object().map(|o| o.id.as_str()), Some("mug_1"));
}

fn any_pose() -> impl Strategy<Value = AgentPose> {
    let vps = vec![
        ("hallway", "hw_entry"),
        ("hallway", "hw_center"),
        ("break_room", "br_entry"),
        ("break_room", "br_center"),
        ("break_room", "br_shelf"),
        ("break_room", "br_fridge"),
        ("robotics_lab", "rl_entry"),
        ("robotics_lab", "rl_center"),
        ("robotics_lab", "rl_rack"),
    ];
    (
        prop::sample::select(vps),
        prop::sample::select(Heading::ALL.to_vec()),
        prop::sample::select(Pitch::ALL.to_vec()),
    )
        .prop_map(|((r, v), h, p)| pose(r, v, h, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn memory_is_idempotent_and_latest_wins(walk in prop::collection::vec(any_pose(), 1..8)) {
        let base = demo();
        let mut memory = VisualMemory::new();
        for p in walk {
            let world = base.with_agent(p).unwrap();
            let obs = render_default(&world);
            let next = update_visual_memory(&memory, world.layout(), &obs);
            prop_assert_eq!(&update_visual_memory(&next, world.layout(), &obs), &next);
            for v in &obs.visible {
                let s = next.get(&v.id).unwrap();
                prop_assert_eq!(&s.viewpoint, &obs.pose.viewpoint);
                prop_assert_eq!(s.heading, obs.pose.heading);
                prop_assert_eq!(s.tick, obs.tick);
            }
            let ids: Vec<_> = next.iter().map(|s| s.id.clone()).collect();
            let mut dedup = ids.clone();
            dedup.sort();
            dedup.dedup();
            prop_assert_eq!(ids.len(), dedup.len());
            memory = next;
        }
    }
}
