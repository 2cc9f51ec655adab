//! Affordance properties, the boolean state keys they license, and the
//! property → verb → result-state transition table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ArenaError;

/// Per-class capability flag. Every member except `Decor` licenses exactly
/// one primary interaction verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffordanceProperty {
    Pickupable,
    Openable,
    Breakable,
    Receptacle,
    Toggleable,
    Powerable,
    Dirtyable,
    Heatable,
    Eatable,
    Chillable,
    Fillable,
    Cookable,
    Infectable,
    Decor,
}

impl AffordanceProperty {
    pub const ALL: [AffordanceProperty; 14] = [
        AffordanceProperty::Pickupable,
        AffordanceProperty::Openable,
        AffordanceProperty::Breakable,
        AffordanceProperty::Receptacle,
        AffordanceProperty::Toggleable,
        AffordanceProperty::Powerable,
        AffordanceProperty::Dirtyable,
        AffordanceProperty::Heatable,
        AffordanceProperty::Eatable,
        AffordanceProperty::Chillable,
        AffordanceProperty::Fillable,
        AffordanceProperty::Cookable,
        AffordanceProperty::Infectable,
        AffordanceProperty::Decor,
    ];

    /// The 13 properties that license an action.
    pub fn actionable() -> impl Iterator<Item = AffordanceProperty> {
        Self::ALL
            .into_iter()
            .filter(|p| *p != AffordanceProperty::Decor)
    }

    /// Boolean state key carried by instances of a class with this property.
    /// `Pickupable` and `Receptacle` are tracked structurally (held flag and
    /// containment) rather than as state keys.
    pub fn state_key(self) -> Option<StateKey> {
        use AffordanceProperty::*;
        match self {
            Openable => Some(StateKey::IsOpen),
            Breakable => Some(StateKey::IsBroken),
            Toggleable => Some(StateKey::IsToggledOn),
            Powerable => Some(StateKey::IsPowered),
            Dirtyable => Some(StateKey::IsDirty),
            Heatable => Some(StateKey::IsHeated),
            Eatable => Some(StateKey::IsEaten),
            Chillable => Some(StateKey::IsChilled),
            Fillable => Some(StateKey::IsFilled),
            Cookable => Some(StateKey::IsCooked),
            Infectable => Some(StateKey::IsInfected),
            Pickupable | Receptacle | Decor => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        use AffordanceProperty::*;
        match self {
            Pickupable => "pickupable",
            Openable => "openable",
            Breakable => "breakable",
            Receptacle => "receptacle",
            Toggleable => "toggleable",
            Powerable => "powerable",
            Dirtyable => "dirtyable",
            Heatable => "heatable",
            Eatable => "eatable",
            Chillable => "chillable",
            Fillable => "fillable",
            Cookable => "cookable",
            Infectable => "infectable",
            Decor => "decor",
        }
    }
}

impl fmt::Display for AffordanceProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Boolean object state. Serialized with the camel-case names used in scene
/// and mission documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateKey {
    #[serde(rename = "isOpen")]
    IsOpen,
    #[serde(rename = "isToggledOn")]
    IsToggledOn,
    #[serde(rename = "isBroken")]
    IsBroken,
    #[serde(rename = "isDirty")]
    IsDirty,
    #[serde(rename = "isHeated")]
    IsHeated,
    #[serde(rename = "isChilled")]
    IsChilled,
    #[serde(rename = "isFilled")]
    IsFilled,
    #[serde(rename = "isCooked")]
    IsCooked,
    #[serde(rename = "isInfected")]
    IsInfected,
    #[serde(rename = "isPowered")]
    IsPowered,
    #[serde(rename = "isEaten")]
    IsEaten,
    #[serde(rename = "isSliced")]
    IsSliced,
}

impl StateKey {
    pub fn as_str(self) -> &'static str {
        use StateKey::*;
        match self {
            IsOpen => "isOpen",
            IsToggledOn => "isToggledOn",
            IsBroken => "isBroken",
            IsDirty => "isDirty",
            IsHeated => "isHeated",
            IsChilled => "isChilled",
            IsFilled => "isFilled",
            IsCooked => "isCooked",
            IsInfected => "isInfected",
            IsPowered => "isPowered",
            IsEaten => "isEaten",
            IsSliced => "isSliced",
        }
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Object interaction verbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verb {
    Pickup,
    Place,
    Open,
    Close,
    ToggleOn,
    ToggleOff,
    Slice,
    Pour,
    Break,
    Heat,
    Chill,
    Fill,
    Clean,
    Cook,
    Eat,
    Power,
}

impl Verb {
    pub const ALL: [Verb; 16] = [
        Verb::Pickup,
        Verb::Place,
        Verb::Open,
        Verb::Close,
        Verb::ToggleOn,
        Verb::ToggleOff,
        Verb::Slice,
        Verb::Pour,
        Verb::Break,
        Verb::Heat,
        Verb::Chill,
        Verb::Fill,
        Verb::Clean,
        Verb::Cook,
        Verb::Eat,
        Verb::Power,
    ];

    /// Members of the 8-verb interaction subset used by offline EDH tasks.
    pub fn is_edh(self) -> bool {
        matches!(
            self,
            Verb::Pickup
                | Verb::Place
                | Verb::Open
                | Verb::Close
                | Verb::ToggleOn
                | Verb::ToggleOff
                | Verb::Slice
                | Verb::Pour
        )
    }

    /// Properties of the *target* that license this verb. `Slice` is licensed
    /// by the class `sliceable` flag instead and returns an empty slice.
    pub fn licensing_properties(self) -> &'static [AffordanceProperty] {
        use AffordanceProperty as P;
        match self {
            Verb::Pickup => &[P::Pickupable],
            Verb::Place => &[P::Receptacle],
            Verb::Open | Verb::Close => &[P::Openable],
            Verb::ToggleOn | Verb::ToggleOff => &[P::Toggleable],
            Verb::Slice => &[],
            Verb::Pour | Verb::Fill => &[P::Fillable],
            Verb::Break => &[P::Breakable],
            Verb::Heat => &[P::Heatable],
            Verb::Chill => &[P::Chillable],
            Verb::Clean => &[P::Dirtyable, P::Infectable],
            Verb::Cook => &[P::Cookable],
            Verb::Eat => &[P::Eatable],
            Verb::Power => &[P::Powerable],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Pickup => "Pickup",
            Verb::Place => "Place",
            Verb::Open => "Open",
            Verb::Close => "Close",
            Verb::ToggleOn => "ToggleOn",
            Verb::ToggleOff => "ToggleOff",
            Verb::Slice => "Slice",
            Verb::Pour => "Pour",
            Verb::Break => "Break",
            Verb::Heat => "Heat",
            Verb::Chill => "Chill",
            Verb::Fill => "Fill",
            Verb::Clean => "Clean",
            Verb::Cook => "Cook",
            Verb::Eat => "Eat",
            Verb::Power => "Power",
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a property's primary verb does when it succeeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultState {
    /// The target becomes the held object.
    Held,
    /// The held object becomes contained in the target.
    ContainedIn,
    Flag {
        key: StateKey,
        value: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub verb: Verb,
    pub result: ResultState,
}

const fn flag(verb: Verb, key: StateKey, value: bool) -> Transition {
    Transition {
        verb,
        result: ResultState::Flag { key, value },
    }
}

/// Primary transition licensed by `property`.
///
/// `dirtyable` and `infectable` share the `Clean` verb; their pairs differ in
/// the result state key.
pub fn transition_for(property: AffordanceProperty) -> Result<Transition, ArenaError> {
    use AffordanceProperty as P;
    let t = match property {
        P::Pickupable => Transition {
            verb: Verb::Pickup,
            result: ResultState::Held,
        },
        P::Receptacle => Transition {
            verb: Verb::Place,
            result: ResultState::ContainedIn,
        },
        P::Openable => flag(Verb::Open, StateKey::IsOpen, true),
        P::Breakable => flag(Verb::Break, StateKey::IsBroken, true),
        P::Toggleable => flag(Verb::ToggleOn, StateKey::IsToggledOn, true),
        P::Powerable => flag(Verb::Power, StateKey::IsPowered, true),
        P::Dirtyable => flag(Verb::Clean, StateKey::IsDirty, false),
        P::Heatable => flag(Verb::Heat, StateKey::IsHeated, true),
        P::Eatable => flag(Verb::Eat, StateKey::IsEaten, true),
        P::Chillable => flag(Verb::Chill, StateKey::IsChilled, true),
        P::Fillable => flag(Verb::Fill, StateKey::IsFilled, true),
        P::Cookable => flag(Verb::Cook, StateKey::IsCooked, true),
        P::Infectable => flag(Verb::Clean, StateKey::IsInfected, false),
        P::Decor => return Err(ArenaError::DecorHasNoAction),
    };
    Ok(t)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn fourteen_properties() {
        let set: BTreeSet<_> = AffordanceProperty::ALL.iter().collect();
        assert_eq!(set.len(), 14);
        assert_eq!(AffordanceProperty::actionable().count(), 13);
    }

    #[test]
    fn breakable_breaks() {
        assert_eq!(
            transition_for(AffordanceProperty::Breakable).unwrap(),
            flag(Verb::Break, StateKey::IsBroken, true)
        );
    }

    #[test]
    fn toggleable_toggles_on() {
        assert_eq!(
            transition_for(AffordanceProperty::Toggleable).unwrap(),
            flag(Verb::ToggleOn, StateKey::IsToggledOn, true)
        );
    }

    #[test]
    fn decor_has_no_action() {
        assert!(matches!(
            transition_for(AffordanceProperty::Decor),
            Err(ArenaError::DecorHasNoAction)
        ));
    }

    #[test]
    fn table_is_injective_on_verb_and_result() {
        let pairs: BTreeSet<_> = AffordanceProperty::actionable()
            .map(|p| {
                let t = transition_for(p).unwrap();
                (t.verb, format!("{:?}", t.result))
            })
            .collect();
        assert_eq!(pairs.len(), 13);
    }

    #[test]
    fn primary_verb_is_licensed_by_its_property() {
        for p in AffordanceProperty::actionable() {
            let t = transition_for(p).unwrap();
            assert!(t.verb.licensing_properties().contains(&p), "{p}");
            if let ResultState::Flag { key, .. } = t.result {
                assert_eq!(p.state_key(), Some(key));
            }
        }
    }

    #[test]
    fn edh_subset_has_eight_verbs() {
        assert_eq!(Verb::ALL.iter().filter(|v| v.is_edh()).count(), 8);
    }
}
