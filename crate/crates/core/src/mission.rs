//! Mission documents (`arena-mission/1`), goal checking and the mission
//! catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Action;
use crate::affordance::StateKey;
use crate::error::ArenaError;
use crate::ids::{InstanceId, RoomId};
use crate::scene::SceneLibrary;
use crate::sim::apply_action;
use crate::world::{ObjectInstance, WorldState};

pub const MISSION_SCHEMA: &str = "arena-mission/1";

/// Matches one specific instance or any instance of a class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selector {
    Instance { instance: InstanceId },
    Class { class: String },
}

impl Selector {
    pub fn instance(id: impl Into<InstanceId>) -> Self {
        Selector::Instance {
            instance: id.into(),
        }
    }

    pub fn class(name: impl Into<String>) -> Self {
        Selector::Class { class: name.into() }
    }

    fn matches<'a>(&self, state: &'a WorldState) -> Result<Vec<&'a ObjectInstance>, MissionError> {
        let found: Vec<_> = match self {
            Selector::Instance { instance } => state.object(instance).into_iter().collect(),
            Selector::Class { class } => state.instances_of(class).collect(),
        };
        if found.is_empty() {
            return Err(MissionError::SelectorUnresolvable(self.to_string()));
        }
        Ok(found)
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Instance { instance } => write!(f, "instance {instance}"),
            Selector::Class { class } => write!(f, "class {class}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum GoalCondition {
    StateEquals {
        object: Selector,
        key: StateKey,
        value: bool,
    },
    ContainedIn {
        object: Selector,
        receptacle: Selector,
    },
    /// The object is in the agent's hand.
    HeldBy {
        object: Selector,
    },
    InRoom {
        object: Selector,
        room: RoomId,
    },
}

impl GoalCondition {
    pub fn selectors(&self) -> Vec<&Selector> {
        match self {
            GoalCondition::StateEquals { object, .. }
            | GoalCondition::HeldBy { object }
            | GoalCondition::InRoom { object, .. } => vec![object],
            GoalCondition::ContainedIn { object, receptacle } => vec![object, receptacle],
        }
    }

    fn holds(&self, state: &WorldState) -> Result<bool, MissionError> {
        Ok(match self {
            GoalCondition::StateEquals { object, key, value } => object
                .matches(state)?
                .iter()
                .any(|o| o.state(*key) == Some(*value)),
            GoalCondition::ContainedIn { object, receptacle } => {
                let rs: BTreeSet<&InstanceId> =
                    receptacle.matches(state)?.iter().map(|o| &o.id).collect();
                object
                    .matches(state)?
                    .iter()
                    .any(|o| o.contained_in.as_ref().is_some_and(|c| rs.contains(c)))
            }
            GoalCondition::HeldBy { object } => object.matches(state)?.iter().any(|o| o.held),
            GoalCondition::InRoom { object, room } => object
                .matches(state)?
                .iter()
                .any(|o| state.effective_room(&o.id) == Some(room)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgoal {
    pub description: String,
    pub conditions: Vec<GoalCondition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissionTag {
    Seen,
    Unseen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateOverride {
    pub instance: InstanceId,
    pub key: StateKey,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionSpec {
    pub schema: String,
    pub mission_id: String,
    pub title: String,
    /// Shown to the human player only; never sent to inference services.
    pub user_briefing: String,
    pub scene_id: String,
    pub tag: MissionTag,
    pub subgoals: Vec<Subgoal>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scene_overrides: Vec<StateOverride>,
    /// Action sequence known to solve the mission from its initial state.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scripted_solution: Vec<Action>,
}

impl MissionSpec {
    pub fn from_json(text: &str) -> Result<Self, MissionError> {
        let spec: MissionSpec =
            serde_json::from_str(text).map_err(|e| MissionError::Schema(e.to_string()))?;
        if spec.schema != MISSION_SCHEMA {
            return Err(MissionError::Schema(format!(
                "expected schema {MISSION_SCHEMA}, found {}",
                spec.schema
            )));
        }
        Ok(spec)
    }

    /// Canonical document bytes: pretty JSON with a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mission serializes");
        s.push('\n');
        s
    }

    pub fn is_seen(&self) -> bool {
        self.tag == MissionTag::Seen
    }

    /// Ids of every instance a goal condition can refer to in `state`.
    pub fn task_relevant_instances(&self, state: &WorldState) -> BTreeSet<InstanceId> {
        let mut out = BTreeSet::new();
        for sel in self
            .subgoals
            .iter()
            .flat_map(|s| &s.conditions)
            .flat_map(|c| c.selectors())
        {
            if let Ok(found) = sel.matches(state) {
                out.extend(found.into_iter().map(|o| o.id.clone()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionStatus {
    pub subgoals: Vec<bool>,
    pub overall: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completed_tick: Option<u64>,
}

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("override sets unlicensed state {key} on {instance}")]
    OverrideUnlicensed { instance: InstanceId, key: StateKey },
    #[error("scene {0} not found")]
    SceneNotFound(String),
    #[error("selector does not resolve: {0}")]
    SelectorUnresolvable(String),
    #[error("mission {mission}: {reason}")]
    Invalid { mission: String, reason: String },
    #[error("duplicate mission id {0}")]
    DuplicateMission(String),
    #[error("catalog failed to load: {}", format_catalog_errors(.0))]
    Catalog(Vec<(PathBuf, String)>),
    #[error(transparent)]
    Arena(#[from] ArenaError),
}

fn format_catalog_errors(errs: &[(PathBuf, String)]) -> String {
    errs.iter()
        .map(|(p, e)| format!("{}: {e}", p.display()))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Loads the mission's scene and applies its state overrides. Tick is 0.
pub fn init_mission(
    spec: &MissionSpec,
    library: &SceneLibrary,
) -> Result<WorldState, MissionError> {
    instantiate_with_overrides(library, &spec.scene_id, &spec.scene_overrides)
}

/// Loads a scene and applies state overrides, each of which must be licensed
/// by the target's class.
pub fn instantiate_with_overrides(
    library: &SceneLibrary,
    scene_id: &str,
    overrides: &[StateOverride],
) -> Result<WorldState, MissionError> {
    let mut state = library
        .instantiate(scene_id)
        .ok_or_else(|| MissionError::SceneNotFound(scene_id.to_string()))??;
    for ov in overrides {
        let obj = state.objects.get_mut(&ov.instance).ok_or_else(|| {
            MissionError::SelectorUnresolvable(format!("override target {}", ov.instance))
        })?;
        let class = library
            .registry()
            .get(&obj.class)
            .ok_or_else(|| ArenaError::DanglingReference(obj.class.clone()))?;
        if !class.licenses(ov.key) {
            return Err(MissionError::OverrideUnlicensed {
                instance: ov.instance.clone(),
                key: ov.key,
            });
        }
        obj.states.insert(ov.key, ov.value);
    }
    state.validate()?;
    Ok(state)
}

/// Evaluates every subgoal against `state`. Subgoals form an unordered
/// conjunction; conditions within a subgoal are all-of.
pub fn check_goals(state: &WorldState, spec: &MissionSpec) -> Result<MissionStatus, MissionError> {
    let mut subgoals = Vec::with_capacity(spec.subgoals.len());
    for sg in &spec.subgoals {
        let mut ok = true;
        for c in &sg.conditions {
            // evaluate all conditions so unresolvable selectors always surface
            ok &= c.holds(state)?;
        }
        subgoals.push(ok);
    }
    let overall = !subgoals.is_empty() && subgoals.iter().all(|b| *b);
    Ok(MissionStatus {
        subgoals,
        overall,
        completed_tick: overall.then_some(state.tick()),
    })
}

/// Outcome of running a mission's scripted solution.
#[derive(Debug, Clone)]
pub struct ScriptRun {
    pub final_state: WorldState,
    pub status: MissionStatus,
    /// Tick at which the mission first became complete.
    pub completed_tick: Option<u64>,
}

/// Replays `actions` from the mission's initial state, checking goals after
/// every action and stopping at first completion.
pub fn run_script(
    spec: &MissionSpec,
    library: &SceneLibrary,
    actions: &[Action],
) -> Result<ScriptRun, MissionError> {
    let mut state = init_mission(spec, library)?;
    let mut status = check_goals(&state, spec)?;
    for a in actions {
        if status.overall {
            break;
        }
        state = apply_action(&state, a).0;
        status = check_goals(&state, spec)?;
    }
    Ok(ScriptRun {
        completed_tick: status.completed_tick,
        final_state: state,
        status,
    })
}

/// Full validation: structure, selector resolution, override licensing, the
/// mission starting unsolved, and the scripted solution (when present)
/// solving it.
pub fn validate_mission(spec: &MissionSpec, library: &SceneLibrary) -> Result<(), MissionError> {
    let invalid = |reason: String| MissionError::Invalid {
        mission: spec.mission_id.clone(),
        reason,
    };
    if spec.schema != MISSION_SCHEMA {
        return Err(MissionError::Schema(format!(
            "unsupported schema {}",
            spec.schema
        )));
    }
    if spec.mission_id.is_empty() {
        return Err(invalid("empty mission_id".into()));
    }
    if spec.subgoals.is_empty() {
        return Err(invalid("no subgoals".into()));
    }
    if let Some(i) = spec.subgoals.iter().position(|s| s.conditions.is_empty()) {
        return Err(invalid(format!("subgoal {i} has no conditions")));
    }
    let state = init_mission(spec, library)?;
    for c in spec.subgoals.iter().flat_map(|s| &s.conditions) {
        for sel in c.selectors() {
            sel.matches(&state)?;
        }
        match c {
            GoalCondition::StateEquals { object, key, .. } => {
                let licensed = object
                    .matches(&state)?
                    .iter()
                    .any(|o| state.class_of(&o.id).is_some_and(|cl| cl.licenses(*key)));
                if !licensed {
                    return Err(invalid(format!("{key} not licensed for {object}")));
                }
            }
            GoalCondition::InRoom { room, .. } if !state.layout().rooms.contains_key(room) => {
                return Err(MissionError::SelectorUnresolvable(format!("room {room}")));
            }
            _ => {}
        }
    }
    if check_goals(&state, spec)?.overall {
        return Err(invalid("mission is already solved at init".into()));
    }
    if !spec.scripted_solution.is_empty() {
        let run = run_script(spec, library, &spec.scripted_solution)?;
        if !run.status.overall {
            return Err(invalid(
                "scripted solution does not complete the mission".into(),
            ));
        }
    }
    Ok(())
}

/// Loads every `*.json` mission in `dir`, validated and sorted by mission id.
/// Any failing file fails the whole load; all per-file errors are reported.
pub fn load_catalog(
    dir: impl AsRef<Path>,
    library: &SceneLibrary,
) -> Result<Vec<MissionSpec>, MissionError> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ArenaError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();

    let mut errors = Vec::new();
    let mut by_id: BTreeMap<String, (PathBuf, MissionSpec)> = BTreeMap::new();
    for path in paths {
        let loaded = std::fs::read_to_string(&path)
            .map_err(|e| MissionError::Arena(ArenaError::io(&path, e)))
            .and_then(|text| MissionSpec::from_json(&text))
            .and_then(|spec| validate_mission(&spec, library).map(|_| spec));
        match loaded {
            Ok(spec) => {
                if let Some((first, _)) = by_id.get(&spec.mission_id) {
                    errors.push((
                        path.clone(),
                        format!(
                            "duplicate mission id {} (also in {})",
                            spec.mission_id,
                            first.display()
                        ),
                    ));
                } else {
                    by_id.insert(spec.mission_id.clone(), (path, spec));
                }
            }
            Err(e) => errors.push((path, e.to_string())),
        }
    }
    if !errors.is_empty() {
        return Err(MissionError::Catalog(errors));
    }
    Ok(by_id.into_values().map(|(_, s)| s).collect())
}
