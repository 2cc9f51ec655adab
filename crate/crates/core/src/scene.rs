//! Scene documents (`arena-scene/1`) and the scene library used to
//! instantiate worlds by scene id.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affordance::StateKey;
use crate::error::ArenaError;
use crate::ids::{InstanceId, RoomId, ViewpointId};
use crate::registry::ClassRegistry;
use crate::world::{
    Aabb, AgentPose, Heading, Layout, ObjectInstance, Pitch, RasterSize, Room, Viewpoint,
    WorldState,
};

pub const SCENE_SCHEMA: &str = "arena-scene/1";
pub const DEFAULT_EYE_HEIGHT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub schema: String,
    pub scene_id: String,
    #[serde(default)]
    pub raster: RasterSize,
    #[serde(default = "default_eye_height")]
    pub eye_height: f64,
    pub rooms: Vec<RoomDocument>,
    #[serde(default)]
    pub edges: Vec<(ViewpointId, ViewpointId)>,
    #[serde(default)]
    pub objects: Vec<ObjectDocument>,
    pub agent: AgentDocument,
}

fn default_eye_height() -> f64 {
    DEFAULT_EYE_HEIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomDocument {
    pub id: RoomId,
    pub name: String,
    pub dimensions: [f64; 3],
    pub entry: ViewpointId,
    pub viewpoints: Vec<ViewpointDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewpointDocument {
    pub id: ViewpointId,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDocument {
    pub id: InstanceId,
    pub class: String,
    pub room: RoomId,
    /// Box center.
    pub position: [f64; 3],
    pub size: [f64; 3],
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<StateKey, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contained_in: Option<InstanceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDocument {
    pub viewpoint: ViewpointId,
    #[serde(default = "default_heading")]
    pub heading: Heading,
    #[serde(default = "default_pitch")]
    pub pitch: Pitch,
}

fn default_heading() -> Heading {
    Heading::N
}

fn default_pitch() -> Pitch {
    Pitch::Level
}

impl SceneDocument {
    pub fn from_json(text: &str) -> Result<Self, ArenaError> {
        let doc: SceneDocument =
            serde_json::from_str(text).map_err(|e| ArenaError::Schema(e.to_string()))?;
        if doc.schema != SCENE_SCHEMA {
            return Err(ArenaError::Schema(format!(
                "expected schema {SCENE_SCHEMA}, found {}",
                doc.schema
            )));
        }
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArenaError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ArenaError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Builds a validated world at tick 0 from a scene document.
pub fn load_scene(
    doc: &SceneDocument,
    registry: Arc<ClassRegistry>,
) -> Result<WorldState, ArenaError> {
    if doc.schema != SCENE_SCHEMA {
        return Err(ArenaError::Schema(format!(
            "unsupported schema {}",
            doc.schema
        )));
    }
    if doc.raster.width < 16 || doc.raster.height < 16 {
        return Err(ArenaError::Schema("raster must be at least 16x16".into()));
    }
    let mut rooms = BTreeMap::new();
    let mut viewpoints = BTreeMap::new();
    for r in &doc.rooms {
        if rooms.contains_key(&r.id) {
            return Err(ArenaError::DuplicateId(format!("room {}", r.id)));
        }
        for v in &r.viewpoints {
            let vp = Viewpoint {
                id: v.id.clone(),
                room: r.id.clone(),
                position: v.position,
            };
            if viewpoints.insert(v.id.clone(), vp).is_some() {
                return Err(ArenaError::DuplicateId(format!("viewpoint {}", v.id)));
            }
        }
        rooms.insert(
            r.id.clone(),
            Room {
                id: r.id.clone(),
                name: r.name.clone(),
                dimensions: r.dimensions,
                entry: r.entry.clone(),
            },
        );
    }
    let mut adjacency: BTreeMap<ViewpointId, BTreeSet<ViewpointId>> = viewpoints
        .keys()
        .map(|k| (k.clone(), BTreeSet::new()))
        .collect();
    for (a, b) in &doc.edges {
        if !viewpoints.contains_key(a) || !viewpoints.contains_key(b) {
            return Err(ArenaError::DanglingReference(format!("edge {a} - {b}")));
        }
        if a == b {
            return Err(ArenaError::Schema(format!("self edge at {a}")));
        }
        adjacency.entry(a.clone()).or_default().insert(b.clone());
        adjacency.entry(b.clone()).or_default().insert(a.clone());
    }
    let layout = Layout {
        rooms,
        viewpoints,
        adjacency,
        eye_height: doc.eye_height,
    };
    layout.validate()?;

    let mut objects = BTreeMap::new();
    for o in &doc.objects {
        let class = registry.get(&o.class).ok_or_else(|| {
            ArenaError::DanglingReference(format!("class {} of {}", o.class, o.id))
        })?;
        if o.size.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(ArenaError::Schema(format!(
                "{} has non-positive size",
                o.id
            )));
        }
        let mut states = class.default_states();
        for (k, v) in &o.states {
            if !class.licenses(*k) {
                return Err(ArenaError::Schema(format!(
                    "{} ({}) cannot carry state {k}",
                    o.id, o.class
                )));
            }
            states.insert(*k, *v);
        }
        let inst = ObjectInstance {
            id: o.id.clone(),
            class: o.class.clone(),
            room: o.room.clone(),
            bounds: Aabb {
                center: o.position,
                size: o.size,
            },
            states,
            contained_in: o.contained_in.clone(),
            held: false,
        };
        if objects.insert(o.id.clone(), inst).is_some() {
            return Err(ArenaError::DuplicateId(format!("object {}", o.id)));
        }
    }
    for o in objects.values() {
        if !layout.rooms.contains_key(&o.room) {
            return Err(ArenaError::DanglingReference(format!(
                "room {} of {}",
                o.room, o.id
            )));
        }
        if let Some(c) = &o.contained_in {
            if !objects.contains_key(c) {
                return Err(ArenaError::DanglingReference(format!(
                    "container {c} of {}",
                    o.id
                )));
            }
        }
    }

    let vp = layout.viewpoints.get(&doc.agent.viewpoint).ok_or_else(|| {
        ArenaError::DanglingReference(format!("agent viewpoint {}", doc.agent.viewpoint))
    })?;
    let agent = AgentPose {
        room: vp.room.clone(),
        viewpoint: vp.id.clone(),
        heading: doc.agent.heading,
        pitch: doc.agent.pitch,
    };
    WorldState::build(
        registry,
        Arc::new(layout),
        doc.scene_id.clone(),
        doc.raster,
        objects,
        agent,
        0,
    )
}

/// Class registry plus scene documents keyed by scene id.
#[derive(Debug, Clone)]
pub struct SceneLibrary {
    registry: Arc<ClassRegistry>,
    scenes: BTreeMap<String, SceneDocument>,
}

impl SceneLibrary {
    pub fn new(registry: Arc<ClassRegistry>) -> Self {
        Self {
            registry,
            scenes: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, doc: SceneDocument) -> Result<(), ArenaError> {
        // validate eagerly so bad documents never enter the library
        load_scene(&doc, self.registry.clone())?;
        if self.scenes.contains_key(&doc.scene_id) {
            return Err(ArenaError::DuplicateId(format!("scene {}", doc.scene_id)));
        }
        self.scenes.insert(doc.scene_id.clone(), doc);
        Ok(())
    }

    /// Loads the registry file and every `*.json` scene in `scenes_dir`.
    pub fn load(
        registry_path: impl AsRef<Path>,
        scenes_dir: impl AsRef<Path>,
    ) -> Result<Self, ArenaError> {
        let registry = Arc::new(ClassRegistry::load(registry_path)?);
        let mut lib = Self::new(registry);
        let dir = scenes_dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| ArenaError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            lib.insert(SceneDocument::load(&p)?)?;
        }
        Ok(lib)
    }

    pub fn registry(&self) -> &Arc<ClassRegistry> {
        &self.registry
    }

    pub fn scene(&self, scene_id: &str) -> Option<&SceneDocument> {
        self.scenes.get(scene_id)
    }

    pub fn scene_ids(&self) -> impl Iterator<Item = &str> {
        self.scenes.keys().map(String::as_str)
    }

    pub fn instantiate(&self, scene_id: &str) -> Option<Result<WorldState, ArenaError>> {
        self.scenes
            .get(scene_id)
            .map(|doc| load_scene(doc, self.registry.clone()))
    }
}
