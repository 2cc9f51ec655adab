//! Affordance checks shared with the workspace acceptance run.

use arena_core::affordance::{AffordanceProperty as P, ResultState, StateKey as K, Verb};
use arena_core::delta::{DeltaField, FieldValue};
use arena_core::sim::FailureCode;
use arena_core::world::WorldSnapshot;
use arena_core::{
    apply_action, render_default, transition_for, Action, InstanceId, Target, WorldState,
};

use super::{best_pose, lab, library};

enum Expect {
    Held,
    Contained,
    Flag(K, bool),
}

fn expected(p: P) -> (Verb, Expect) {
    match p {
        P::Pickupable => (Verb::Pickup, Expect::Held),
        P::Receptacle => (Verb::Place, Expect::Contained),
        P::Openable => (Verb::Open, Expect::Flag(K::IsOpen, true)),
        P::Breakable => (Verb::Break, Expect::Flag(K::IsBroken, true)),
        P::Toggleable => (Verb::ToggleOn, Expect::Flag(K::IsToggledOn, true)),
        P::Powerable => (Verb::Power, Expect::Flag(K::IsPowered, true)),
        P::Dirtyable => (Verb::Clean, Expect::Flag(K::IsDirty, false)),
        P::Heatable => (Verb::Heat, Expect::Flag(K::IsHeated, true)),
        P::Eatable => (Verb::Eat, Expect::Flag(K::IsEaten, true)),
        P::Chillable => (Verb::Chill, Expect::Flag(K::IsChilled, true)),
        P::Fillable => (Verb::Fill, Expect::Flag(K::IsFilled, true)),
        P::Cookable => (Verb::Cook, Expect::Flag(K::IsCooked, true)),
        P::Infectable => (Verb::Clean, Expect::Flag(K::IsInfected, false)),
        P::Decor => unreachable!(),
    }
}

fn rebuild(state: &WorldState, edit: impl FnOnce(&mut WorldSnapshot)) -> WorldState {
    let mut snap = state.snapshot();
    edit(&mut snap);
    WorldState::from_snapshot(snap, state.registry().clone()).expect("edited state stays valid")
}

fn open_everything(state: &WorldState) -> WorldState {
    rebuild(state, |s| {
        for o in s.objects.values_mut() {
            if let Some(v) = o.states.get_mut(&K::IsOpen) {
                *v = true;
            }
        }
    })
}

fn face(state: &WorldState, id: &InstanceId) -> WorldState {
    let pose = best_pose(state, id).unwrap_or_else(|| panic!("{id} is never within reach"));
    state.with_agent(pose).unwrap()
}

pub fn check_table() {
    for p in P::actionable() {
        let t = transition_for(p).unwrap();
        let (verb, exp) = expected(p);
        assert_eq!(t.verb, verb, "{p:?}");
        match (exp, t.result) {
            (Expect::Held, ResultState::Held) | (Expect::Contained, ResultState::ContainedIn) => {}
            (Expect::Flag(k, v), ResultState::Flag { key, value }) => {
                assert_eq!((k, v), (key, value), "{p:?}")
            }
            _ => panic!("{p:?} has the wrong result kind"),
        }
    }
    assert!(transition_for(P::Decor).is_err());
}

pub fn check_realized() {
    let lib = library();
    let base = open_everything(&lab(&lib));
    for p in P::actionable() {
        let (verb, exp) = expected(p);
        let candidate = base
            .objects()
            .values()
            .find(|o| {
                lib.registry().get(&o.class).unwrap().has(p)
                    && (p != P::Receptacle || o.contained_in.is_none())
            })
            .unwrap_or_else(|| panic!("no fixture object has {p:?}"))
            .id
            .clone();
        let prepared = match &exp {
            Expect::Held => base.clone(),
            Expect::Contained => {
                let carried = InstanceId::from("apple_1");
                assert_ne!(candidate, carried);
                rebuild(&base, |s| {
                    let o = s.objects.get_mut(&carried).unwrap();
                    o.held = true;
                    o.contained_in = None;
                })
            }
            Expect::Flag(key, value) => rebuild(&base, |s| {
                let o = s.objects.get_mut(&candidate).unwrap();
                o.states.insert(*key, !*value);
                if o.states.contains_key(&K::IsPowered) && *key == K::IsToggledOn {
                    o.states.insert(K::IsPowered, true);
                }
            }),
        };
        let before = face(&prepared, &candidate);
        let (after, res) = apply_action(
            &before,
            &Action::interact(verb, Target::id(candidate.clone())),
        );
        assert!(res.ok, "{p:?} on {candidate}: {:?}", res.failure_code);
        match exp {
            Expect::Held => {
                assert!(after.objects()[&candidate].held);
                assert_eq!(
                    res.state_delta.get(&candidate, DeltaField::HELD),
                    Some((&FieldValue::Bool(false), &FieldValue::Bool(true)))
                );
            }
            Expect::Contained => {
                let carried = InstanceId::from("apple_1");
                assert_eq!(
                    after.objects()[&carried].contained_in.as_ref(),
                    Some(&candidate)
                );
                assert!(!after.objects()[&carried].held);
            }
            Expect::Flag(key, value) => {
                assert_eq!(after.objects()[&candidate].state(key), Some(value), "{p:?}");
                assert_eq!(
                    res.state_delta.get(&candidate, DeltaField::State(key)),
                    Some((&FieldValue::Bool(!value), &FieldValue::Bool(value)))
                );
            }
        }
    }
}

pub fn check_decor() {
    let lib = library();
    let base = lab(&lib);
    let decor: Vec<_> = base
        .objects()
        .values()
        .filter(|o| lib.registry().get(&o.class).unwrap().is_decor())
        .map(|o| o.id.clone())
        .collect();
    assert!(!decor.is_empty());
    for id in decor {
        // decor can sit beyond reach; only visibility matters for the pixel case
        let s = super::best_pose(&base, &id)
            .map(|p| base.with_agent(p).unwrap())
            .unwrap_or_else(|| base.clone());
        let obs = render_default(&s);
        let pixel = obs.visible_object(&id).and_then(|v| {
            (v.bbox[1]..=v.bbox[3])
                .flat_map(|y| (v.bbox[0]..=v.bbox[2]).map(move |x| (x as i64, y as i64)))
                .find(|(x, y)| obs.object_at(*x, *y).unwrap() == Some(&id))
        });
        for verb in Verb::ALL {
            let (after, res) = apply_action(&s, &Action::interact(verb, Target::id(id.clone())));
            assert_eq!(
                res.failure_code,
                Some(FailureCode::DecorTarget),
                "{verb} on {id}"
            );
            assert_eq!(after.objects(), s.objects());
            if let Some((x, y)) = pixel {
                let (_, res) = apply_action(&s, &Action::interact(verb, Target::pixel(x, y)));
                assert_eq!(
                    res.failure_code,
                    Some(FailureCode::DecorTarget),
                    "{verb} at pixel on {id}"
                );
            }
        }
    }
}
