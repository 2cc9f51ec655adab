//! Discrete embodied-task simulator.
//!
//! Rooms hold object instances whose classes carry affordance properties;
//! each property licenses one interaction verb and one result state. The
//! agent moves over a viewpoint graph and observes the world through a
//! symbolic egocentric raster of instance ids and depths, which is also the
//! targeting surface for coordinate-addressed interactions. Missions are
//! declarative goal predicates checked against world states.

pub mod action;
pub mod affordance;
pub mod delta;
pub mod error;
pub mod hash;
pub mod ids;
pub mod mission;
pub mod registry;
pub mod render;
pub mod scene;
pub mod sim;
pub mod world;

pub use action::{Action, Target};
pub use affordance::{transition_for, AffordanceProperty, ResultState, StateKey, Transition, Verb};
pub use delta::{diff_states, DeltaEntry, DeltaField, FieldValue, StateDelta};
pub use error::ArenaError;
pub use hash::{state_hash, StateHash};
pub use ids::{InstanceId, RoomId, ViewpointId};
pub use mission::{
    check_goals, init_mission, instantiate_with_overrides, load_catalog, GoalCondition,
    MissionError, MissionSpec, MissionStatus, MissionTag, Selector, StateOverride,
};
pub use registry::{ClassRegistry, ObjectClass};
pub use render::{object_at, render_default, render_observation, Observation, VisibleObject};
pub use scene::{load_scene, SceneDocument, SceneLibrary};
pub use sim::{apply_action, ActionResult, FailureCode, FrameRef};
pub use world::{AgentPose, Heading, Pitch, RasterSize, WorldSnapshot, WorldState};
