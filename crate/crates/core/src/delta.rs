//! State deltas: per-object changes of state keys, containment and the held
//! flag.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::affordance::StateKey;
use crate::error::ArenaError;
use crate::ids::InstanceId;
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaField {
    State(StateKey),
    Structural(StructuralField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StructuralField {
    #[serde(rename = "containedIn")]
    ContainedIn,
    #[serde(rename = "held")]
    Held,
}

impl DeltaField {
    pub const CONTAINED_IN: DeltaField = DeltaField::Structural(StructuralField::ContainedIn);
    pub const HELD: DeltaField = DeltaField::Structural(StructuralField::Held);
}

impl fmt::Display for DeltaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaField::State(k) => write!(f, "{k}"),
            DeltaField::Structural(StructuralField::ContainedIn) => f.write_str("containedIn"),
            DeltaField::Structural(StructuralField::Held) => f.write_str("held"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Bool(bool),
    Ref(Option<InstanceId>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub instance: InstanceId,
    pub field: DeltaField,
    pub old: FieldValue,
    pub new: FieldValue,
}

/// Set of changes keyed by (instance, field). Entries always have
/// `old != new`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct StateDelta {
    entries: BTreeMap<(InstanceId, DeltaField), (FieldValue, FieldValue)>,
}

impl StateDelta {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a change; a no-op change is dropped.
    pub fn record(
        &mut self,
        instance: InstanceId,
        field: DeltaField,
        old: FieldValue,
        new: FieldValue,
    ) {
        if old != new {
            self.entries.insert((instance, field), (old, new));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = DeltaEntry> + '_ {
        self.entries.iter().map(|((i, f), (o, n))| DeltaEntry {
            instance: i.clone(),
            field: *f,
            old: o.clone(),
            new: n.clone(),
        })
    }

    pub fn get(
        &self,
        instance: &InstanceId,
        field: DeltaField,
    ) -> Option<(&FieldValue, &FieldValue)> {
        self.entries
            .get(&(instance.clone(), field))
            .map(|(o, n)| (o, n))
    }

    pub fn contains(&self, entry: &DeltaEntry) -> bool {
        self.entries
            .get(&(entry.instance.clone(), entry.field))
            .is_some_and(|(o, n)| *o == entry.old && *n == entry.new)
    }

    pub fn instances(&self) -> BTreeSet<&InstanceId> {
        self.entries.keys().map(|(i, _)| i).collect()
    }

    /// Applies `later` on top of `self`: the result maps each field from its
    /// earliest old value to its latest new value, dropping fields that
    /// returned to where they started.
    pub fn compose(&self, later: &StateDelta) -> StateDelta {
        let mut out = self.clone();
        for ((i, f), (o, n)) in &later.entries {
            let key = (i.clone(), *f);
            match out.entries.remove(&key) {
                Some((first, _)) => {
                    if first != *n {
                        out.entries.insert(key, (first, n.clone()));
                    }
                }
                None => {
                    out.entries.insert(key, (o.clone(), n.clone()));
                }
            }
        }
        out
    }

    pub fn restrict_to<'a>(
        &self,
        instances: impl IntoIterator<Item = &'a InstanceId>,
    ) -> StateDelta {
        let keep: BTreeSet<&InstanceId> = instances.into_iter().collect();
        StateDelta {
            entries: self
                .entries
                .iter()
                .filter(|((i, _), _)| keep.contains(i))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Number of entries of `self` also present (same old and new) in `other`.
    pub fn overlap(&self, other: &StateDelta) -> usize {
        self.entries().filter(|e| other.contains(e)).count()
    }

    pub fn is_subset_of(&self, other: &StateDelta) -> bool {
        self.overlap(other) == self.len()
    }
}

impl FromIterator<DeltaEntry> for StateDelta {
    fn from_iter<T: IntoIterator<Item = DeltaEntry>>(iter: T) -> Self {
        let mut d = StateDelta::new();
        for e in iter {
            d.record(e.instance, e.field, e.old, e.new);
        }
        d
    }
}

impl Serialize for StateDelta {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries())
    }
}

impl<'de> Deserialize<'de> for StateDelta {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = Vec::<DeltaEntry>::deserialize(deserializer)?;
        let mut d = StateDelta::new();
        for e in entries {
            if e.old == e.new {
                return Err(serde::de::Error::custom(format!(
                    "delta entry for {} {} has old == new",
                    e.instance, e.field
                )));
            }
            d.record(e.instance, e.field, e.old, e.new);
        }
        Ok(d)
    }
}

/// Differences between two states of the same scene.
pub fn diff_states(a: &WorldState, b: &WorldState) -> Result<StateDelta, ArenaError> {
    if a.scene_id() != b.scene_id() || !a.objects().keys().eq(b.objects().keys()) {
        return Err(ArenaError::SceneMismatch);
    }
    let mut delta = StateDelta::new();
    for (id, oa) in a.objects() {
        let ob = &b.objects()[id];
        let keys: BTreeSet<_> = oa.states.keys().chain(ob.states.keys()).collect();
        for k in keys {
            match (oa.states.get(k), ob.states.get(k)) {
                (Some(x), Some(y)) => delta.record(
                    id.clone(),
                    DeltaField::State(*k),
                    FieldValue::Bool(*x),
                    FieldValue::Bool(*y),
                ),
                _ => return Err(ArenaError::SceneMismatch),
            }
        }
        delta.record(
            id.clone(),
            DeltaField::CONTAINED_IN,
            FieldValue::Ref(oa.contained_in.clone()),
            FieldValue::Ref(ob.contained_in.clone()),
        );
        delta.record(
            id.clone(),
            DeltaField::HELD,
            FieldValue::Bool(oa.held),
            FieldValue::Bool(ob.held),
        );
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: &str, k: StateKey, o: bool, n: bool) -> DeltaEntry {
        DeltaEntry {
            instance: i.into(),
            field: DeltaField::State(k),
            old: FieldValue::Bool(o),
            new: FieldValue::Bool(n),
        }
    }

    #[test]
    fn no_op_entries_dropped() {
        let mut d = StateDelta::new();
        d.record(
            "a".into(),
            DeltaField::HELD,
            FieldValue::Bool(true),
            FieldValue::Bool(true),
        );
        assert!(d.is_empty());
    }

    #[test]
    fn compose_collapses_round_trips() {
        let d1: StateDelta = [e("lamp", StateKey::IsToggledOn, false, true)]
            .into_iter()
            .collect();
        let d2: StateDelta = [e("lamp", StateKey::IsToggledOn, true, false)]
            .into_iter()
            .collect();
        assert!(d1.compose(&d2).is_empty());
        let d3: StateDelta = [e("fridge", StateKey::IsOpen, false, true)]
            .into_iter()
            .collect();
        let c = d1.compose(&d3);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn serde_shape() {
        let mut d = StateDelta::new();
        d.record(
            "mug".into(),
            DeltaField::CONTAINED_IN,
            FieldValue::Ref(None),
            FieldValue::Ref(Some("fridge".into())),
        );
        d.record(
            "mug".into(),
            DeltaField::State(StateKey::IsFilled),
            FieldValue::Bool(false),
            FieldValue::Bool(true),
        );
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            r#"[{"instance":"mug","field":"isFilled","old":false,"new":true},{"instance":"mug","field":"containedIn","old":null,"new":"fridge"}]"#
        );
        let back: StateDelta = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_identity_entries() {
        let bad = r#"[{"instance":"m","field":"held","old":true,"new":true}]"#;
        assert!(serde_json::from_str::<StateDelta>(bad).is_err());
    }

    #[test]
    fn subset_and_overlap() {
        let a: StateDelta = [
            e("x", StateKey::IsOpen, false, true),
            e("y", StateKey::IsBroken, false, true),
        ]
        .into_iter()
        .collect();
        let b: StateDelta = [e("x", StateKey::IsOpen, false, true)]
            .into_iter()
            .collect();
        assert!(b.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        assert_eq!(a.overlap(&b), 1);
    }
}
