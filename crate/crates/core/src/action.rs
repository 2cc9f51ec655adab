use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affordance::Verb;
use crate::ids::{InstanceId, RoomId, ViewpointId};

/// Selects the object an interaction applies to: directly by id, or by a
/// cell of the current observation raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Instance { id: InstanceId },
    Pixel { x: i64, y: i64 },
}

impl Target {
    pub fn id(id: impl Into<InstanceId>) -> Self {
        Target::Instance { id: id.into() }
    }

    pub fn pixel(x: i64, y: i64) -> Self {
        Target::Pixel { x, y }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Instance { id } => write!(f, "{id}"),
            Target::Pixel { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Action {
    MoveForward,
    MoveBackward,
    RotateLeft,
    RotateRight,
    LookUp,
    LookDown,
    GotoViewpoint { viewpoint: ViewpointId },
    GotoRoom { room: RoomId },
    Interact { verb: Verb, target: Target },
    Dialog { text: String },
    Highlight { target: Target },
    Stop,
}

impl Action {
    pub fn interact(verb: Verb, target: Target) -> Self {
        Action::Interact { verb, target }
    }

    pub fn is_navigation(&self) -> bool {
        matches!(
            self,
            Action::MoveForward
                | Action::MoveBackward
                | Action::RotateLeft
                | Action::RotateRight
                | Action::LookUp
                | Action::LookDown
                | Action::GotoViewpoint { .. }
                | Action::GotoRoom { .. }
        )
    }

    pub fn is_interaction(&self) -> bool {
        matches!(self, Action::Interact { .. })
    }

    pub fn is_user_interaction(&self) -> bool {
        matches!(self, Action::Dialog { .. } | Action::Highlight { .. })
    }

    /// Whether the action belongs to the offline EDH action space.
    pub fn is_edh(&self) -> bool {
        match self {
            Action::Interact { verb, .. } => verb.is_edh(),
            Action::Stop => true,
            other => other.is_navigation(),
        }
    }

    pub fn verb(&self) -> Option<Verb> {
        match self {
            Action::Interact { verb, .. } => Some(*verb),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::GotoViewpoint { viewpoint } => write!(f, "GotoViewpoint({viewpoint})"),
            Action::GotoRoom { room } => write!(f, "GotoRoom({room})"),
            Action::Interact { verb, target } => write!(f, "{verb}({target})"),
            Action::Dialog { text } => write!(f, "Dialog({text:?})"),
            Action::Highlight { target } => write!(f, "Highlight({target})"),
            other => write!(f, "{other:?}"),
        }
    }
}
