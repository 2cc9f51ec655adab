//! Action execution.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::action::{Action, Target};
use crate::affordance::{AffordanceProperty, StateKey, Verb};
use crate::delta::{DeltaField, FieldValue, StateDelta};
use crate::ids::{InstanceId, ViewpointId};
use crate::registry::KNIFE_MARKER;
use crate::render::render_default;
use crate::world::{AgentPose, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureCode {
    ActionNotApplicable,
    TargetNotVisible,
    TargetNotResolvable,
    HandOccupied,
    HandEmpty,
    ReceptacleClosed,
    NavigationBlocked,
    DecorTarget,
}

/// Pose and tick of one frame produced by an action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRef {
    pub tick: u64,
    pub pose: AgentPose,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionResult {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_code: Option<FailureCode>,
    pub state_delta: StateDelta,
    pub frames: Vec<FrameRef>,
}

impl ActionResult {
    fn success(delta: StateDelta, frames: Vec<FrameRef>) -> Self {
        Self {
            ok: true,
            failure_code: None,
            state_delta: delta,
            frames,
        }
    }

    fn failure(code: FailureCode, frame: FrameRef) -> Self {
        Self {
            ok: false,
            failure_code: Some(code),
            state_delta: StateDelta::new(),
            frames: vec![frame],
        }
    }
}

/// Applies `action` to `state`, returning the successor state and the
/// result. The tick advances by one whether or not the action succeeds; a
/// failed action changes nothing else.
pub fn apply_action(state: &WorldState, action: &Action) -> (WorldState, ActionResult) {
    let mut next = state.clone();
    next.tick += 1;
    match execute(state, &mut next, action) {
        Ok((delta, frames)) => (next, ActionResult::success(delta, frames)),
        Err(code) => {
            let mut failed = state.clone();
            failed.tick += 1;
            let frame = FrameRef {
                tick: failed.tick,
                pose: failed.agent.clone(),
            };
            (failed, ActionResult::failure(code, frame))
        }
    }
}

type Outcome = Result<(StateDelta, Vec<FrameRef>), FailureCode>;

fn frame(next: &WorldState) -> Vec<FrameRef> {
    vec![FrameRef {
        tick: next.tick,
        pose: next.agent.clone(),
    }]
}

fn execute(state: &WorldState, next: &mut WorldState, action: &Action) -> Outcome {
    match action {
        Action::MoveForward => step(state, next, false),
        Action::MoveBackward => step(state, next, true),
        Action::RotateLeft => {
            next.agent.heading = state.agent.heading.left();
            Ok((StateDelta::new(), frame(next)))
        }
        Action::RotateRight => {
            next.agent.heading = state.agent.heading.right();
            Ok((StateDelta::new(), frame(next)))
        }
        Action::LookUp => {
            next.agent.pitch = state
                .agent
                .pitch
                .raised()
                .ok_or(FailureCode::NavigationBlocked)?;
            Ok((StateDelta::new(), frame(next)))
        }
        Action::LookDown => {
            next.agent.pitch = state
                .agent
                .pitch
                .lowered()
                .ok_or(FailureCode::NavigationBlocked)?;
            Ok((StateDelta::new(), frame(next)))
        }
        Action::GotoViewpoint { viewpoint } => {
            if !state.layout.viewpoints.contains_key(viewpoint) {
                return Err(FailureCode::TargetNotResolvable);
            }
            travel(state, next, viewpoint)
        }
        Action::GotoRoom { room } => {
            let r = state
                .layout
                .rooms
                .get(room)
                .ok_or(FailureCode::TargetNotResolvable)?;
            if &state.agent.room == room {
                return Ok((StateDelta::new(), frame(next)));
            }
            let entry = r.entry.clone();
            travel(state, next, &entry)
        }
        Action::Dialog { .. } | Action::Stop => Ok((StateDelta::new(), frame(next))),
        Action::Highlight { target } => {
            resolve(state, target, false)?;
            Ok((StateDelta::new(), frame(next)))
        }
        Action::Interact { verb, target } => {
            let id = resolve(state, target, true)?;
            let delta = interact(state, next, *verb, &id)?;
            Ok((delta, frame(next)))
        }
    }
}

fn step(state: &WorldState, next: &mut WorldState, backward: bool) -> Outcome {
    let heading = if backward {
        state.agent.heading.opposite()
    } else {
        state.agent.heading
    };
    let [hx, hz] = heading.vector();
    let layout = &state.layout;
    let here = &layout.viewpoints[&state.agent.viewpoint];
    let mut best: Option<(f64, &ViewpointId)> = None;
    for n in layout.neighbors(&here.id) {
        let vp = &layout.viewpoints[n];
        if vp.room != here.room {
            continue;
        }
        let (dx, dz) = (
            vp.position[0] - here.position[0],
            vp.position[1] - here.position[1],
        );
        let len = (dx * dx + dz * dz).sqrt();
        if len == 0.0 {
            continue;
        }
        // within 30 degrees of the heading
        if (dx * hx + dz * hz) / len < 30f64.to_radians().cos() {
            continue;
        }
        if best.is_none_or(|(d, _)| len < d) {
            best = Some((len, n));
        }
    }
    let (_, to) = best.ok_or(FailureCode::NavigationBlocked)?;
    next.agent.viewpoint = to.clone();
    Ok((StateDelta::new(), frame(next)))
}

/// Breadth-first shortest path over the viewpoint graph, excluding the
/// start. Neighbors are expanded in id order so the path is deterministic.
pub fn shortest_path(
    state: &WorldState,
    from: &ViewpointId,
    to: &ViewpointId,
) -> Option<Vec<ViewpointId>> {
    if from == to {
        return Some(Vec::new());
    }
    let layout = &state.layout;
    let mut prev: BTreeMap<&ViewpointId, &ViewpointId> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(cur) = queue.pop_front() {
        for n in layout.neighbors(cur) {
            if n == from || prev.contains_key(n) {
                continue;
            }
            prev.insert(n, cur);
            if n == to {
                let mut path = vec![n.clone()];
                let mut at = cur;
                while at != from {
                    path.push(at.clone());
                    at = prev[at];
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(n);
        }
    }
    None
}

fn travel(state: &WorldState, next: &mut WorldState, to: &ViewpointId) -> Outcome {
    let path =
        shortest_path(state, &state.agent.viewpoint, to).ok_or(FailureCode::NavigationBlocked)?;
    if path.is_empty() {
        return Ok((StateDelta::new(), frame(next)));
    }
    let mut frames = Vec::with_capacity(path.len());
    for hop in path {
        let vp = &state.layout.viewpoints[&hop];
        next.agent.viewpoint = hop.clone();
        next.agent.room = vp.room.clone();
        frames.push(FrameRef {
            tick: next.tick,
            pose: next.agent.clone(),
        });
    }
    Ok((StateDelta::new(), frames))
}

/// Resolves a target to an instance id. Interaction targets must be visible
/// and within reach in the current view.
fn resolve(
    state: &WorldState,
    target: &Target,
    need_reach: bool,
) -> Result<InstanceId, FailureCode> {
    match target {
        Target::Instance { id } => {
            if !state.objects.contains_key(id) {
                return Err(FailureCode::TargetNotResolvable);
            }
            if need_reach {
                if is_decor(state, id) {
                    return Err(FailureCode::DecorTarget);
                }
                let obs = render_default(state);
                if !obs.in_reach(id) {
                    return Err(FailureCode::TargetNotVisible);
                }
            }
            Ok(id.clone())
        }
        Target::Pixel { x, y } => {
            let obs = render_default(state);
            let id = match obs.object_at(*x, *y) {
                Ok(Some(id)) => id.clone(),
                _ => return Err(FailureCode::TargetNotResolvable),
            };
            if need_reach {
                if is_decor(state, &id) {
                    return Err(FailureCode::DecorTarget);
                }
                if !obs.in_reach(&id) {
                    return Err(FailureCode::TargetNotVisible);
                }
            }
            Ok(id)
        }
    }
}

fn is_decor(state: &WorldState, id: &InstanceId) -> bool {
    state.class_of(id).is_some_and(|c| c.is_decor())
}

fn set_flag(
    next: &mut WorldState,
    delta: &mut StateDelta,
    id: &InstanceId,
    key: StateKey,
    value: bool,
) {
    let obj = next.objects.get_mut(id).expect("resolved id");
    if let Some(old) = obj.states.insert(key, value) {
        delta.record(
            id.clone(),
            DeltaField::State(key),
            FieldValue::Bool(old),
            FieldValue::Bool(value),
        );
    }
}

fn interact(
    state: &WorldState,
    next: &mut WorldState,
    verb: Verb,
    id: &InstanceId,
) -> Result<StateDelta, FailureCode> {
    let class = state.class_of(id).ok_or(FailureCode::TargetNotResolvable)?;
    let licensed = if verb == Verb::Slice {
        class.sliceable
    } else {
        verb.licensing_properties().iter().any(|p| class.has(*p))
    };
    if !licensed {
        return Err(FailureCode::ActionNotApplicable);
    }
    let obj = &state.objects[id];
    let flag = |k: StateKey| obj.state(k);
    let mut delta = StateDelta::new();

    // Flag transitions that require the flag to start at `!value`.
    let flip = |key: StateKey, value: bool, next: &mut WorldState, delta: &mut StateDelta| {
        if flag(key) != Some(!value) {
            return Err(FailureCode::ActionNotApplicable);
        }
        set_flag(next, delta, id, key, value);
        Ok(())
    };

    match verb {
        Verb::Pickup => {
            if state.held_object().is_some() {
                return Err(FailureCode::HandOccupied);
            }
            let o = next.objects.get_mut(id).unwrap();
            let old_parent = o.contained_in.take();
            o.held = true;
            delta.record(
                id.clone(),
                DeltaField::HELD,
                FieldValue::Bool(false),
                FieldValue::Bool(true),
            );
            delta.record(
                id.clone(),
                DeltaField::CONTAINED_IN,
                FieldValue::Ref(old_parent),
                FieldValue::Ref(None),
            );
        }
        Verb::Place => {
            let held = state
                .held_object()
                .ok_or(FailureCode::HandEmpty)?
                .id
                .clone();
            if class.has(AffordanceProperty::Openable) && flag(StateKey::IsOpen) == Some(false) {
                return Err(FailureCode::ReceptacleClosed);
            }
            if &held == id || state.ancestors(id).iter().any(|a| a.id == held) {
                return Err(FailureCode::ActionNotApplicable);
            }
            place(state, next, &held, id);
            delta.record(
                held.clone(),
                DeltaField::HELD,
                FieldValue::Bool(true),
                FieldValue::Bool(false),
            );
            delta.record(
                held,
                DeltaField::CONTAINED_IN,
                FieldValue::Ref(None),
                FieldValue::Ref(Some(id.clone())),
            );
        }
        Verb::Open => flip(StateKey::IsOpen, true, next, &mut delta)?,
        Verb::Close => flip(StateKey::IsOpen, false, next, &mut delta)?,
        Verb::ToggleOn => {
            if class.has(AffordanceProperty::Powerable) && flag(StateKey::IsPowered) != Some(true) {
                return Err(FailureCode::ActionNotApplicable);
            }
            flip(StateKey::IsToggledOn, true, next, &mut delta)?
        }
        Verb::ToggleOff => flip(StateKey::IsToggledOn, false, next, &mut delta)?,
        Verb::Slice => {
            let tool = state.held_object().ok_or(FailureCode::HandEmpty)?;
            let knife = state
                .registry
                .get(&tool.class)
                .is_some_and(|c| c.has_marker(KNIFE_MARKER));
            if !knife {
                return Err(FailureCode::ActionNotApplicable);
            }
            flip(StateKey::IsSliced, true, next, &mut delta)?
        }
        Verb::Pour => flip(StateKey::IsFilled, false, next, &mut delta)?,
        Verb::Fill => flip(StateKey::IsFilled, true, next, &mut delta)?,
        Verb::Break => flip(StateKey::IsBroken, true, next, &mut delta)?,
        Verb::Heat => {
            flip(StateKey::IsHeated, true, next, &mut delta)?;
            if flag(StateKey::IsChilled) == Some(true) {
                set_flag(next, &mut delta, id, StateKey::IsChilled, false);
            }
        }
        Verb::Chill => {
            flip(StateKey::IsChilled, true, next, &mut delta)?;
            if flag(StateKey::IsHeated) == Some(true) {
                set_flag(next, &mut delta, id, StateKey::IsHeated, false);
            }
        }
        Verb::Cook => flip(StateKey::IsCooked, true, next, &mut delta)?,
        Verb::Eat => flip(StateKey::IsEaten, true, next, &mut delta)?,
        Verb::Power => {
            let on = flag(StateKey::IsPowered).ok_or(FailureCode::ActionNotApplicable)?;
            set_flag(next, &mut delta, id, StateKey::IsPowered, !on);
        }
        Verb::Clean => {
            let mut changed = false;
            for key in [StateKey::IsDirty, StateKey::IsInfected] {
                if flag(key) == Some(true) {
                    set_flag(next, &mut delta, id, key, false);
                    changed = true;
                }
            }
            if !changed {
                return Err(FailureCode::ActionNotApplicable);
            }
        }
    }
    Ok(delta)
}

/// Moves the held object (and everything inside it) into `receptacle`:
/// inside openable receptacles, on top of everything else.
fn place(state: &WorldState, next: &mut WorldState, held: &InstanceId, receptacle: &InstanceId) {
    let r = &state.objects[receptacle];
    let rc = state.class_of(receptacle).expect("resolved class");
    let h = &state.objects[held];
    let y = if rc.has(AffordanceProperty::Openable) {
        r.bounds.min()[1] + h.bounds.size[1] / 2.0
    } else {
        r.bounds.max()[1] + h.bounds.size[1] / 2.0
    };
    let target = [r.bounds.center[0], y, r.bounds.center[2]];
    let offset = [
        target[0] - h.bounds.center[0],
        target[1] - h.bounds.center[1],
        target[2] - h.bounds.center[2],
    ];
    let room = state
        .effective_room(receptacle)
        .cloned()
        .unwrap_or_else(|| r.room.clone());
    let moved: Vec<InstanceId> = state
        .objects
        .keys()
        .filter(|k| *k == held || state.ancestors(k).iter().any(|a| &a.id == held))
        .cloned()
        .collect();
    for k in moved {
        let o = next.objects.get_mut(&k).unwrap();
        for (c, d) in o.bounds.center.iter_mut().zip(offset) {
            *c += d;
        }
        o.room = room.clone();
    }
    let o = next.objects.get_mut(held).unwrap();
    o.held = false;
    o.contained_in = Some(receptacle.clone());
}
