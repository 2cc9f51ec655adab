//! World state: static layout (rooms and viewpoint graph), object instances
//! and the agent pose.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affordance::{AffordanceProperty, StateKey};
use crate::error::ArenaError;
use crate::ids::{InstanceId, RoomId, ViewpointId};
use crate::registry::{ClassRegistry, ObjectClass};

/// Axis-aligned box in room-local meters (x east, y up, z north).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub center: [f64; 3],
    pub size: [f64; 3],
}

impl Aabb {
    pub fn min(&self) -> [f64; 3] {
        [
            self.center[0] - self.size[0] / 2.0,
            self.center[1] - self.size[1] / 2.0,
            self.center[2] - self.size[2] / 2.0,
        ]
    }

    pub fn max(&self) -> [f64; 3] {
        [
            self.center[0] + self.size[0] / 2.0,
            self.center[1] + self.size[1] / 2.0,
            self.center[2] + self.size[2] / 2.0,
        ]
    }

    pub fn corners(&self) -> [[f64; 3]; 8] {
        let lo = self.min();
        let hi = self.max();
        let mut out = [[0.0; 3]; 8];
        for (i, c) in out.iter_mut().enumerate() {
            *c = [
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            ];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    /// Unit vector on the floor plane as (x, z).
    pub fn vector(self) -> [f64; 2] {
        match self {
            Heading::N => [0.0, 1.0],
            Heading::E => [1.0, 0.0],
            Heading::S => [0.0, -1.0],
            Heading::W => [-1.0, 0.0],
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    pub fn left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn opposite(self) -> Heading {
        self.right().right()
    }

    /// Number of clockwise quarter turns from `self` to `to`.
    pub fn quarter_turns_to(self, to: Heading) -> u8 {
        let idx = |h: Heading| Heading::ALL.iter().position(|x| *x == h).unwrap() as u8;
        (idx(to) + 4 - idx(self)) % 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pitch {
    Up,
    Level,
    Down,
}

impl Pitch {
    pub const ALL: [Pitch; 3] = [Pitch::Up, Pitch::Level, Pitch::Down];

    pub fn degrees(self) -> f64 {
        match self {
            Pitch::Up => 30.0,
            Pitch::Level => 0.0,
            Pitch::Down => -30.0,
        }
    }

    pub fn raised(self) -> Option<Pitch> {
        match self {
            Pitch::Down => Some(Pitch::Level),
            Pitch::Level => Some(Pitch::Up),
            Pitch::Up => None,
        }
    }

    pub fn lowered(self) -> Option<Pitch> {
        match self {
            Pitch::Up => Some(Pitch::Level),
            Pitch::Level => Some(Pitch::Down),
            Pitch::Down => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentPose {
    pub room: RoomId,
    pub viewpoint: ViewpointId,
    pub heading: Heading,
    pub pitch: Pitch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: RoomId,
    pub name: String,
    /// Width (x), depth (z) and height (y) in meters.
    pub dimensions: [f64; 3],
    /// Viewpoint the agent arrives at when sent to this room.
    pub entry: ViewpointId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub id: ViewpointId,
    pub room: RoomId,
    /// Floor position (x, z) in room-local meters.
    pub position: [f64; 2],
}

/// Static part of a scene: rooms and the viewpoint graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub rooms: BTreeMap<RoomId, Room>,
    pub viewpoints: BTreeMap<ViewpointId, Viewpoint>,
    pub adjacency: BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
    /// Camera height above the floor in meters.
    pub eye_height: f64,
}

impl Layout {
    pub fn neighbors(&self, vp: &ViewpointId) -> impl Iterator<Item = &ViewpointId> {
        self.adjacency.get(vp).into_iter().flatten()
    }

    pub fn viewpoints_in<'a>(
        &'a self,
        room: &'a RoomId,
    ) -> impl Iterator<Item = &'a Viewpoint> + 'a {
        self.viewpoints.values().filter(move |v| &v.room == room)
    }

    pub fn room_by_name(&self, name: &str) -> Option<&Room> {
        self.rooms
            .values()
            .find(|r| r.name.eq_ignore_ascii_case(name))
    }

    pub(crate) fn validate(&self) -> Result<(), ArenaError> {
        if self.rooms.is_empty() {
            return Err(ArenaError::Schema("scene has no rooms".into()));
        }
        for room in self.rooms.values() {
            match self.viewpoints.get(&room.entry) {
                Some(vp) if vp.room == room.id => {}
                Some(_) => {
                    return Err(ArenaError::DanglingReference(format!(
                        "entry {} of room {} lies in another room",
                        room.entry, room.id
                    )))
                }
                None => {
                    return Err(ArenaError::DanglingReference(format!(
                        "entry viewpoint {} of room {}",
                        room.entry, room.id
                    )))
                }
            }
        }
        for vp in self.viewpoints.values() {
            if !self.rooms.contains_key(&vp.room) {
                return Err(ArenaError::DanglingReference(format!(
                    "room {} of viewpoint {}",
                    vp.room, vp.id
                )));
            }
        }
        for (a, ns) in &self.adjacency {
            for b in std::iter::once(a).chain(ns) {
                if !self.viewpoints.contains_key(b) {
                    return Err(ArenaError::DanglingReference(format!(
                        "viewpoint {b} in edge"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterSize {
    pub width: u32,
    pub height: u32,
}

impl Default for RasterSize {
    fn default() -> Self {
        Self {
            width: 96,
            height: 54,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: InstanceId,
    pub class: String,
    pub room: RoomId,
    pub bounds: Aabb,
    pub states: BTreeMap<StateKey, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contained_in: Option<InstanceId>,
    #[serde(default)]
    pub held: bool,
}

impl ObjectInstance {
    pub fn state(&self, key: StateKey) -> Option<bool> {
        self.states.get(&key).copied()
    }
}

/// Serializable form of a [`WorldState`] without its class registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub scene_id: String,
    pub raster: RasterSize,
    pub layout: Layout,
    pub objects: BTreeMap<InstanceId, ObjectInstance>,
    pub agent: AgentPose,
    pub tick: u64,
}

/// Complete simulator snapshot. Immutable once built; actions produce new
/// states.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub(crate) registry: Arc<ClassRegistry>,
    pub(crate) layout: Arc<Layout>,
    pub(crate) scene_id: String,
    pub(crate) raster: RasterSize,
    pub(crate) objects: BTreeMap<InstanceId, ObjectInstance>,
    pub(crate) agent: AgentPose,
    pub(crate) tick: u64,
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.scene_id == other.scene_id
            && self.raster == other.raster
            && self.objects == other.objects
            && self.agent == other.agent
            && self.tick == other.tick
            && (Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout)
    }
}

impl WorldState {
    pub(crate) fn build(
        registry: Arc<ClassRegistry>,
        layout: Arc<Layout>,
        scene_id: String,
        raster: RasterSize,
        objects: BTreeMap<InstanceId, ObjectInstance>,
        agent: AgentPose,
        tick: u64,
    ) -> Result<Self, ArenaError> {
        let state = Self {
            registry,
            layout,
            scene_id,
            raster,
            objects,
            agent,
            tick,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn from_snapshot(
        snapshot: WorldSnapshot,
        registry: Arc<ClassRegistry>,
    ) -> Result<Self, ArenaError> {
        snapshot.layout.validate()?;
        Self::build(
            registry,
            Arc::new(snapshot.layout),
            snapshot.scene_id,
            snapshot.raster,
            snapshot.objects,
            snapshot.agent,
            snapshot.tick,
        )
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            scene_id: self.scene_id.clone(),
            raster: self.raster,
            layout: (*self.layout).clone(),
            objects: self.objects.clone(),
            agent: self.agent.clone(),
            tick: self.tick,
        }
    }

    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn registry(&self) -> &Arc<ClassRegistry> {
        &self.registry
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn raster(&self) -> RasterSize {
        self.raster
    }

    pub fn objects(&self) -> &BTreeMap<InstanceId, ObjectInstance> {
        &self.objects
    }

    pub fn object(&self, id: &InstanceId) -> Option<&ObjectInstance> {
        self.objects.get(id)
    }

    pub fn agent(&self) -> &AgentPose {
        &self.agent
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn class_of(&self, id: &InstanceId) -> Option<&ObjectClass> {
        self.objects
            .get(id)
            .and_then(|o| self.registry.get(&o.class))
    }

    pub fn instances_of<'a, 'c>(
        &'a self,
        class: &'c str,
    ) -> impl Iterator<Item = &'a ObjectInstance> + use<'a, 'c> {
        self.objects.values().filter(move |o| o.class == class)
    }

    pub fn held_object(&self) -> Option<&ObjectInstance> {
        self.objects.values().find(|o| o.held)
    }

    /// The same world with the agent moved to `pose`. Tick is unchanged.
    pub fn with_agent(&self, pose: AgentPose) -> Result<Self, ArenaError> {
        check_pose(&self.layout, &pose)?;
        let mut next = self.clone();
        next.agent = pose;
        Ok(next)
    }

    /// Containment ancestors of `id`, innermost first.
    pub fn ancestors(&self, id: &InstanceId) -> Vec<&ObjectInstance> {
        let mut out = Vec::new();
        let mut cur = self.objects.get(id).and_then(|o| o.contained_in.as_ref());
        while let Some(parent) = cur {
            let Some(p) = self.objects.get(parent) else {
                break;
            };
            if out.iter().any(|o: &&ObjectInstance| o.id == p.id) {
                break;
            }
            out.push(p);
            cur = p.contained_in.as_ref();
        }
        out
    }

    /// Room the object is effectively in: the agent's room when it (or a
    /// container of it) is held, otherwise its own room.
    pub fn effective_room(&self, id: &InstanceId) -> Option<&RoomId> {
        let obj = self.objects.get(id)?;
        if obj.held || self.ancestors(id).iter().any(|a| a.held) {
            return Some(&self.agent.room);
        }
        Some(&obj.room)
    }

    /// Whether the object is out of sight regardless of camera: held, inside
    /// something held, or inside a closed openable receptacle.
    pub fn is_hidden(&self, id: &InstanceId) -> bool {
        let Some(obj) = self.objects.get(id) else {
            return true;
        };
        if obj.held {
            return true;
        }
        self.ancestors(id).iter().any(|a| {
            a.held
                || (self
                    .registry
                    .get(&a.class)
                    .is_some_and(|c| c.has(AffordanceProperty::Openable))
                    && a.state(StateKey::IsOpen) == Some(false))
        })
    }

    /// Checks every structural invariant of the state.
    pub fn validate(&self) -> Result<(), ArenaError> {
        check_pose(&self.layout, &self.agent)?;
        let mut held = 0;
        for (key, obj) in &self.objects {
            if key != &obj.id {
                return Err(ArenaError::InvalidState(format!(
                    "object keyed {key} has id {}",
                    obj.id
                )));
            }
            let class = self.registry.get(&obj.class).ok_or_else(|| {
                ArenaError::DanglingReference(format!("class {} of {}", obj.class, obj.id))
            })?;
            if !self.layout.rooms.contains_key(&obj.room) {
                return Err(ArenaError::DanglingReference(format!(
                    "room {} of {}",
                    obj.room, obj.id
                )));
            }
            let licensed = class.licensed_keys();
            if let Some(k) = obj.states.keys().find(|k| !licensed.contains(k)) {
                return Err(ArenaError::InvalidState(format!(
                    "{} carries unlicensed state {k}",
                    obj.id
                )));
            }
            if obj.held {
                held += 1;
                if obj.contained_in.is_some() {
                    return Err(ArenaError::InvalidState(format!(
                        "{} is held and contained",
                        obj.id
                    )));
                }
            }
            if let Some(parent) = &obj.contained_in {
                let p = self.objects.get(parent).ok_or_else(|| {
                    ArenaError::DanglingReference(format!("container {parent} of {}", obj.id))
                })?;
                let pc = self.registry.get(&p.class).ok_or_else(|| {
                    ArenaError::DanglingReference(format!("class {} of {}", p.class, p.id))
                })?;
                if !pc.has(AffordanceProperty::Receptacle) {
                    return Err(ArenaError::InvalidState(format!(
                        "{} contained in non-receptacle {}",
                        obj.id, p.id
                    )));
                }
            }
        }
        if held > 1 {
            return Err(ArenaError::InvalidState(format!("{held} objects held")));
        }
        for id in self.objects.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(id);
            while let Some(c) = cur {
                if !seen.insert(c) {
                    return Err(ArenaError::InvalidState(format!(
                        "containment cycle through {id}"
                    )));
                }
                cur = self.objects.get(c).and_then(|o| o.contained_in.as_ref());
            }
        }
        Ok(())
    }
}

fn check_pose(layout: &Layout, pose: &AgentPose) -> Result<(), ArenaError> {
    match layout.viewpoints.get(&pose.viewpoint) {
        Some(vp) if vp.room == pose.room => Ok(()),
        Some(vp) => Err(ArenaError::InvalidState(format!(
            "agent viewpoint {} lies in {}, not {}",
            vp.id, vp.room, pose.room
        ))),
        None => Err(ArenaError::DanglingReference(format!(
            "agent viewpoint {}",
            pose.viewpoint
        ))),
    }
}
