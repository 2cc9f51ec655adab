//! Surface-form lexicons used by the baseline grammar.

use std::collections::BTreeMap;

use arena_core::world::Layout;
use arena_core::{ClassRegistry, RoomId, Verb};

/// What a verb phrase asks the robot to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Interact(Verb),
    Goto,
    Scan,
    Highlight,
    Stop,
}

/// Splits text into lowercase alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn words(s: &str) -> Vec<String> {
    tokenize(s)
}

/// Lowercase words of a CamelCase class name, e.g. `CoffeeMaker` -> `coffee maker`.
pub fn class_words(name: &str) -> String {
    let mut out = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if prev_lower && c.is_uppercase() {
            out.push(' ');
        }
        prev_lower = c.is_lowercase();
        out.extend(c.to_lowercase());
    }
    out
}

const VERB_PHRASES: &[(&str, Command)] = &[
    ("pick up", Command::Interact(Verb::Pickup)),
    ("grab", Command::Interact(Verb::Pickup)),
    ("take", Command::Interact(Verb::Pickup)),
    ("get", Command::Interact(Verb::Pickup)),
    ("fetch", Command::Interact(Verb::Pickup)),
    ("bring", Command::Interact(Verb::Pickup)),
    ("put", Command::Interact(Verb::Place)),
    ("place", Command::Interact(Verb::Place)),
    ("drop", Command::Interact(Verb::Place)),
    ("set", Command::Interact(Verb::Place)),
    ("leave", Command::Interact(Verb::Place)),
    ("throw", Command::Interact(Verb::Place)),
    ("open", Command::Interact(Verb::Open)),
    ("close", Command::Interact(Verb::Close)),
    ("shut", Command::Interact(Verb::Close)),
    ("turn on", Command::Interact(Verb::ToggleOn)),
    ("switch on", Command::Interact(Verb::ToggleOn)),
    ("start", Command::Interact(Verb::ToggleOn)),
    ("turn off", Command::Interact(Verb::ToggleOff)),
    ("switch off", Command::Interact(Verb::ToggleOff)),
    ("slice", Command::Interact(Verb::Slice)),
    ("cut", Command::Interact(Verb::Slice)),
    ("pour", Command::Interact(Verb::Pour)),
    ("pour out", Command::Interact(Verb::Pour)),
    ("empty", Command::Interact(Verb::Pour)),
    ("break", Command::Interact(Verb::Break)),
    ("smash", Command::Interact(Verb::Break)),
    ("heat", Command::Interact(Verb::Heat)),
    ("heat up", Command::Interact(Verb::Heat)),
    ("warm", Command::Interact(Verb::Heat)),
    ("warm up", Command::Interact(Verb::Heat)),
    ("chill", Command::Interact(Verb::Chill)),
    ("cool", Command::Interact(Verb::Chill)),
    ("fill", Command::Interact(Verb::Fill)),
    ("fill up", Command::Interact(Verb::Fill)),
    ("clean", Command::Interact(Verb::Clean)),
    ("wash", Command::Interact(Verb::Clean)),
    ("disinfect", Command::Interact(Verb::Clean)),
    ("cook", Command::Interact(Verb::Cook)),
    ("fry", Command::Interact(Verb::Cook)),
    ("eat", Command::Interact(Verb::Eat)),
    ("power", Command::Interact(Verb::Power)),
    ("power up", Command::Interact(Verb::Power)),
    ("plug in", Command::Interact(Verb::Power)),
    ("go to", Command::Goto),
    ("go", Command::Goto),
    ("walk to", Command::Goto),
    ("head to", Command::Goto),
    ("move to", Command::Goto),
    ("navigate to", Command::Goto),
    ("look around", Command::Scan),
    ("search", Command::Scan),
    ("highlight", Command::Highlight),
    ("point to", Command::Highlight),
    ("point at", Command::Highlight),
    ("show me", Command::Highlight),
    ("stop", Command::Stop),
];

/// Noun, verb and room lexicons for one class registry and scene layout.
#[derive(Debug, Clone)]
pub struct GroundingLexicon {
    nouns: BTreeMap<Vec<String>, String>,
    verbs: BTreeMap<Vec<String>, Command>,
    rooms: BTreeMap<Vec<String>, RoomId>,
    class_names: BTreeMap<String, String>,
    room_names: BTreeMap<RoomId, String>,
}

/// A lexicon entry matched at some token position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match<T> {
    pub value: T,
    pub len: usize,
}

fn longest<T: Clone>(table: &BTreeMap<Vec<String>, T>, tokens: &[String]) -> Option<Match<T>> {
    (1..=tokens.len()).rev().find_map(|n| {
        table.get(&tokens[..n]).map(|v| Match {
            value: v.clone(),
            len: n,
        })
    })
}

impl GroundingLexicon {
    pub fn new(registry: &ClassRegistry, layout: &Layout) -> Self {
        let mut nouns: BTreeMap<Vec<String>, String> = BTreeMap::new();
        let mut class_names = BTreeMap::new();
        // Registry iteration is sorted by name, so on a shared surface form the
        // alphabetically first class wins.
        for class in registry.iter() {
            let spoken = class_words(&class.name);
            let surfaces = class
                .synonyms
                .iter()
                .map(String::as_str)
                .chain([spoken.as_str(), class.name.as_str()]);
            for s in surfaces {
                let w = words(s);
                if !w.is_empty() {
                    nouns.entry(w).or_insert_with(|| class.name.clone());
                }
            }
            let display = class.synonyms.first().cloned().unwrap_or(spoken);
            class_names.insert(class.name.clone(), display);
        }
        let verbs = VERB_PHRASES.iter().map(|(p, c)| (words(p), *c)).collect();
        let mut rooms = BTreeMap::new();
        let mut room_names = BTreeMap::new();
        for room in layout.rooms.values() {
            rooms.insert(words(&room.name), room.id.clone());
            rooms
                .entry(words(room.id.as_str()))
                .or_insert_with(|| room.id.clone());
            room_names.insert(room.id.clone(), room.name.clone());
        }
        Self {
            nouns,
            verbs,
            rooms,
            class_names,
            room_names,
        }
    }

    /// Longest noun surface form starting at `tokens[0]`.
    pub fn noun_at(&self, tokens: &[String]) -> Option<Match<String>> {
        longest(&self.nouns, tokens)
    }

    pub fn verb_at(&self, tokens: &[String]) -> Option<Match<Command>> {
        longest(&self.verbs, tokens)
    }

    pub fn room_at(&self, tokens: &[String]) -> Option<Match<RoomId>> {
        longest(&self.rooms, tokens)
    }

    pub fn class_for(&self, surface: &str) -> Option<&str> {
        self.nouns.get(&words(surface)).map(String::as_str)
    }

    pub fn room_for(&self, surface: &str) -> Option<&RoomId> {
        self.rooms.get(&words(surface))
    }

    /// Preferred spoken name of a class.
    pub fn display_name<'a>(&'a self, class: &'a str) -> &'a str {
        self.class_names
            .get(class)
            .map(String::as_str)
            .unwrap_or(class)
    }

    pub fn room_name<'a>(&'a self, room: &'a RoomId) -> &'a str {
        self.room_names
            .get(room)
            .map(String::as_str)
            .unwrap_or(room.as_str())
    }

    /// Classes reachable from at least one surface form.
    pub fn grounded_classes(&self) -> std::collections::BTreeSet<&str> {
        self.nouns.values().map(String::as_str).collect()
    }

    pub fn surface_forms(&self) -> impl Iterator<Item = (String, &str)> {
        self.nouns.iter().map(|(k, v)| (k.join(" "), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_on_non_alphanumerics() {
        assert_eq!(
            tokenize("Put it in the 3D-printer, then stop."),
            ["put", "it", "in", "the", "3d", "printer", "then", "stop"]
        );
    }

    #[test]
    fn splits_camel_case() {
        assert_eq!(class_words("CoffeeMaker"), "coffee maker");
        assert_eq!(class_words("Printer3D"), "printer3d");
        assert_eq!(class_words("Mug"), "mug");
    }
}
