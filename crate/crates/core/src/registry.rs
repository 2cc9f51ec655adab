use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affordance::{AffordanceProperty, StateKey};
use crate::error::ArenaError;

pub const REGISTRY_SCHEMA: &str = "arena-classes/1";

/// Marker carried by classes that can slice.
pub const KNIFE_MARKER: &str = "tool:knife";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectClass {
    pub name: String,
    pub synonyms: Vec<String>,
    pub properties: BTreeSet<AffordanceProperty>,
    #[serde(default)]
    pub sliceable: bool,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub markers: BTreeSet<String>,
}

impl ObjectClass {
    pub fn has(&self, property: AffordanceProperty) -> bool {
        self.properties.contains(&property)
    }

    pub fn is_decor(&self) -> bool {
        self.has(AffordanceProperty::Decor)
    }

    pub fn has_marker(&self, marker: &str) -> bool {
        self.markers.contains(marker)
    }

    /// State keys induced by the class's properties, plus `isSliced` for
    /// sliceable classes.
    pub fn licensed_keys(&self) -> BTreeSet<StateKey> {
        let mut keys: BTreeSet<_> = self
            .properties
            .iter()
            .filter_map(|p| p.state_key())
            .collect();
        if self.sliceable {
            keys.insert(StateKey::IsSliced);
        }
        keys
    }

    pub fn licenses(&self, key: StateKey) -> bool {
        self.licensed_keys().contains(&key)
    }

    /// Every licensed key, initially false.
    pub fn default_states(&self) -> BTreeMap<StateKey, bool> {
        self.licensed_keys()
            .into_iter()
            .map(|k| (k, false))
            .collect()
    }

    fn validate(&self) -> Result<(), ArenaError> {
        if self.name.is_empty() {
            return Err(ArenaError::Schema("class with empty name".into()));
        }
        if self.synonyms.is_empty() {
            return Err(ArenaError::Schema(format!(
                "class {} has no synonyms",
                self.name
            )));
        }
        if let Some(bad) = self
            .synonyms
            .iter()
            .find(|s| s.is_empty() || s.chars().any(|c| c.is_uppercase()))
        {
            return Err(ArenaError::Schema(format!(
                "class {} synonym {bad:?} must be non-empty lowercase",
                self.name
            )));
        }
        if self.is_decor() && (self.properties.len() > 1 || self.sliceable) {
            return Err(ArenaError::Schema(format!(
                "decor class {} cannot carry other affordances",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegistryDocument {
    schema: String,
    classes: Vec<ObjectClass>,
}

/// Class definitions keyed by class name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassRegistry {
    classes: BTreeMap<String, ObjectClass>,
}

impl ClassRegistry {
    pub fn new(classes: impl IntoIterator<Item = ObjectClass>) -> Result<Self, ArenaError> {
        let mut map = BTreeMap::new();
        for class in classes {
            class.validate()?;
            if map.contains_key(&class.name) {
                return Err(ArenaError::DuplicateId(format!("class {}", class.name)));
            }
            map.insert(class.name.clone(), class);
        }
        Ok(Self { classes: map })
    }

    pub fn from_json(text: &str) -> Result<Self, ArenaError> {
        let doc: RegistryDocument = serde_json::from_str(text)?;
        if doc.schema != REGISTRY_SCHEMA {
            return Err(ArenaError::Schema(format!(
                "expected schema {REGISTRY_SCHEMA}, found {}",
                doc.schema
            )));
        }
        Self::new(doc.classes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArenaError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ArenaError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let doc = RegistryDocument {
            schema: REGISTRY_SCHEMA.to_string(),
            classes: self.classes.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("registry serializes")
    }

    pub fn get(&self, name: &str) -> Option<&ObjectClass> {
        self.classes.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectClass> {
        self.classes.values()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}
