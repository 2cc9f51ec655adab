#![allow(dead_code)]

pub mod affordance;
pub mod raster;

use std::path::PathBuf;

use arena_core::action::Action;
use arena_core::affordance::Verb;
use arena_core::render::render_default;
use arena_core::world::{AgentPose, Heading, Pitch};
use arena_core::{InstanceId, SceneLibrary, Target, WorldState};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

pub fn library() -> SceneLibrary {
    let f = fixtures();
    SceneLibrary::load(f.join("classes.json"), f.join("scenes")).expect("fixture library")
}

pub fn lab(lib: &SceneLibrary) -> WorldState {
    lib.instantiate("lab")
        .expect("lab scene")
        .expect("valid lab scene")
}

/// Compares `actual` with a committed golden file, rewriting it instead when
/// `ARENA_BLESS` is set.
pub fn golden(name: &str, actual: &str) {
    let path = fixtures().join("golden").join(name);
    if std::env::var_os("ARENA_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

/// Pose in the object's room from which it is visible within reach at the
/// smallest depth, if any.
pub fn best_pose(state: &WorldState, id: &InstanceId) -> Option<AgentPose> {
    let room = state.effective_room(id)?.clone();
    let mut best: Option<(u16, AgentPose)> = None;
    for vp in state.layout().viewpoints_in(&room) {
        for heading in Heading::ALL {
            for pitch in Pitch::ALL {
                let pose = AgentPose {
                    room: room.clone(),
                    viewpoint: vp.id.clone(),
                    heading,
                    pitch,
                };
                let s = state.with_agent(pose.clone()).ok()?;
                let obs = render_default(&s);
                if let Some(v) = obs.visible_object(id) {
                    if obs.in_reach(id) && best.as_ref().is_none_or(|(d, _)| v.depth_mm < *d) {
                        best = Some((v.depth_mm, pose));
                    }
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Random action biased toward targets in the current view so that a good
/// share of interactions succeed.
pub fn random_action(state: &WorldState, rng: &mut impl Rng) -> Action {
    let obs = render_default(state);
    let roll = rng.gen_range(0..100);
    match roll {
        0..=7 => [
            Action::MoveForward,
            Action::MoveBackward,
            Action::RotateLeft,
            Action::RotateRight,
            Action::LookUp,
            Action::LookDown,
        ][rng.gen_range(0..6)]
        .clone(),
        8..=14 => {
            let vps: Vec<_> = state.layout().viewpoints.keys().cloned().collect();
            Action::GotoViewpoint {
                viewpoint: vps.choose(rng).unwrap().clone(),
            }
        }
        15..=16 => {
            let rooms: Vec<_> = state.layout().rooms.keys().cloned().collect();
            Action::GotoRoom {
                room: rooms.choose(rng).unwrap().clone(),
            }
        }
        17 => Action::Stop,
        18 => Action::Dialog {
            text: "hello".into(),
        },
        19 => Action::Highlight {
            target: random_target(state, &obs, rng),
        },
        20..=29 => Action::Interact {
            verb: *Verb::ALL.choose(rng).unwrap(),
            target: random_target(state, &obs, rng),
        },
        _ => {
            let reachable: Vec<_> = obs.visible.iter().filter(|v| obs.in_reach(&v.id)).collect();
            let Some(v) = reachable.choose(rng) else {
                return if state.agent().pitch == Pitch::Down {
                    Action::RotateRight
                } else {
                    Action::LookDown
                };
            };
            let class = state.class_of(&v.id).unwrap();
            let mut verbs: Vec<Verb> = Verb::ALL
                .into_iter()
                .filter(|verb| verb.licensing_properties().iter().any(|p| class.has(*p)))
                .collect();
            if class.sliceable {
                verbs.push(Verb::Slice);
            }
            let verb = verbs.choose(rng).copied().unwrap_or(Verb::Pickup);
            Action::Interact {
                verb,
                target: Target::Instance { id: v.id.clone() },
            }
        }
    }
}

fn random_target(state: &WorldState, obs: &arena_core::Observation, rng: &mut impl Rng) -> Target {
    match rng.gen_range(0..10) {
        0 => {
            let ids: Vec<_> = state.objects().keys().cloned().collect();
            Target::Instance {
                id: ids.choose(rng).unwrap().clone(),
            }
        }
        1..=3 => Target::Pixel {
            x: rng.gen_range(-2..obs.width as i64 + 2),
            y: rng.gen_range(-2..obs.height as i64 + 2),
        },
        _ if !obs.visible.is_empty() => {
            let v = obs.visible.choose(rng).unwrap();
            if rng.gen_bool(0.5) {
                Target::Instance { id: v.id.clone() }
            } else {
                let x = rng.gen_range(v.bbox[0]..=v.bbox[2]) as i64;
                let y = rng.gen_range(v.bbox[1]..=v.bbox[3]) as i64;
                Target::Pixel { x, y }
            }
        }
        _ => Target::Pixel { x: 0, y: 0 },
    }
}
