use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ids::InstanceId;
use crate::world::{AgentPose, Layout, ObjectInstance, RasterSize, WorldState};

/// Hex-encoded SHA-256 digest of a canonical state serialization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateHash(String);

impl StateHash {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for StateHash {
    fn from(s: String) -> Self {
        StateHash(s)
    }
}

#[derive(Serialize)]
struct CanonicalState<'a> {
    scene_id: &'a str,
    raster: RasterSize,
    layout: &'a Layout,
    // BTreeMaps serialize in key order: instance ids and state keys sorted
    objects: &'a BTreeMap<InstanceId, ObjectInstance>,
    agent: &'a AgentPose,
    tick: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the full state. Equal states produce equal digests.
pub fn state_hash(state: &WorldState) -> StateHash {
    let canonical = CanonicalState {
        scene_id: state.scene_id(),
        raster: state.raster(),
        layout: state.layout(),
        objects: state.objects(),
        agent: state.agent(),
        tick: state.tick(),
    };
    let bytes = serde_json::to_vec(&canonical).expect("state serializes");
    StateHash(sha256_hex(&bytes))
}
