//! Keyword grammar: splits an utterance into clauses and extracts the
//! command, object, location and room of each.

use arena_core::{RoomId, Verb};

use crate::lexicon::{tokenize, Command, GroundingLexicon};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Noun {
    Class(String),
    Pronoun,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounPhrase {
    pub noun: Noun,
    /// Words the user said, for dialog.
    pub surface: String,
}

impl NounPhrase {
    pub fn class(&self) -> Option<&str> {
        match &self.noun {
            Noun::Class(c) => Some(c),
            Noun::Pronoun => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub command: Command,
    pub object: Option<NounPhrase>,
    pub location: Option<NounPhrase>,
    pub room: Option<RoomId>,
}

const MARKERS: &[&str] = &[
    "in", "into", "inside", "on", "onto", "at", "from", "near", "to", "by", "under", "beside",
];
const PRONOUNS: &[&str] = &["it", "that", "this", "them"];
const SEPARATORS: &[&str] = &["and", "then"];
const SPLIT_VERBS: &[(&str, &str, Command)] = &[
    ("turn", "on", Command::Interact(Verb::ToggleOn)),
    ("turn", "off", Command::Interact(Verb::ToggleOff)),
    ("switch", "on", Command::Interact(Verb::ToggleOn)),
    ("switch", "off", Command::Interact(Verb::ToggleOff)),
    ("pick", "up", Command::Interact(Verb::Pickup)),
    ("plug", "in", Command::Interact(Verb::Power)),
];
const AFFIRMATIVE: &[&str] = &["yes", "yeah", "yep", "correct", "right", "sure", "exactly"];

fn split_clauses(text: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for chunk in text.split([',', '.', ';', '!', '?']) {
        let mut cur = Vec::new();
        for t in tokenize(chunk) {
            if SEPARATORS.contains(&t.as_str()) {
                out.push(std::mem::take(&mut cur));
            } else {
                cur.push(t);
            }
        }
        out.push(cur);
    }
    out.retain(|c| !c.is_empty());
    out
}

/// Position, length and command of the first verb phrase, skipping over
/// tokens that start an equally long or longer noun or room name.
fn find_verb(lex: &GroundingLexicon, tokens: &[String]) -> Option<(usize, usize, Command, bool)> {
    let mut i = 0;
    while i < tokens.len() {
        let rest = &tokens[i..];
        let noun_len = lex
            .noun_at(rest)
            .map(|m| m.len)
            .max(lex.room_at(rest).map(|m| m.len))
            .unwrap_or(0);
        if let Some((_, _, cmd)) = SPLIT_VERBS.iter().find(|(head, tail, _)| {
            rest[0] == *head && rest.len() > 2 && tokens.last().is_some_and(|t| t == tail)
        }) {
            return Some((i, 1, *cmd, true));
        }
        match lex.verb_at(rest) {
            Some(v) if v.len > noun_len => return Some((i, v.len, v.value, false)),
            _ => {}
        }
        i += noun_len.max(1);
    }
    None
}

fn has_grounded_word(lex: &GroundingLexicon, tokens: &[String]) -> bool {
    (0..tokens.len())
        .any(|i| lex.noun_at(&tokens[i..]).is_some() || lex.room_at(&tokens[i..]).is_some())
}

fn parse_clause(lex: &GroundingLexicon, tokens: &[String]) -> Result<Option<Clause>, ()> {
    let Some((at, len, command, split)) = find_verb(lex, tokens) else {
        return if has_grounded_word(lex, tokens) {
            Err(())
        } else {
            Ok(None)
        };
    };
    let end = if split {
        tokens.len() - 1
    } else {
        tokens.len()
    };
    let args = &tokens[at + len..end];
    let mut clause = Clause {
        command,
        object: None,
        location: None,
        room: None,
    };
    let mut after_marker = false;
    let mut i = 0;
    while i < args.len() {
        let rest = &args[i..];
        let room = lex.room_at(rest);
        let noun = lex.noun_at(rest);
        let room_len = room.as_ref().map_or(0, |m| m.len);
        let noun_len = noun.as_ref().map_or(0, |m| m.len);
        if room_len > 0 && room_len >= noun_len {
            clause.room.get_or_insert(room.unwrap().value);
            i += room_len;
        } else if let Some(m) = noun {
            let np = NounPhrase {
                noun: Noun::Class(m.value),
                surface: rest[..m.len].join(" "),
            };
            let slot = if after_marker || clause.object.is_some() {
                &mut clause.location
            } else {
                &mut clause.object
            };
            if slot.is_none() {
                *slot = Some(np);
            }
            i += m.len;
        } else if PRONOUNS.contains(&rest[0].as_str()) {
            if !after_marker && clause.object.is_none() {
                clause.object = Some(NounPhrase {
                    noun: Noun::Pronoun,
                    surface: rest[0].clone(),
                });
            }
            i += 1;
        } else {
            if MARKERS.contains(&rest[0].as_str()) {
                after_marker = true;
            }
            i += 1;
        }
    }
    let ok = match command {
        Command::Interact(Verb::Place) => clause.location.is_some(),
        Command::Interact(_) | Command::Highlight => clause.object.is_some(),
        Command::Goto => {
            clause.object.is_some() || clause.location.is_some() || clause.room.is_some()
        }
        Command::Scan | Command::Stop => true,
    };
    if !ok {
        return Err(());
    }
    if command == Command::Goto && clause.object.is_none() {
        clause.object = clause.location.take();
    }
    Ok(Some(clause))
}

/// Parses an utterance into clauses. `None` when any clause is outside the
/// grammar or nothing actionable was said.
pub fn parse_utterance(lex: &GroundingLexicon, text: &str) -> Option<Vec<Clause>> {
    let mut out = Vec::new();
    for tokens in split_clauses(text) {
        if let Some(c) = parse_clause(lex, &tokens).ok()? {
            out.push(c);
        }
    }
    (!out.is_empty()).then_some(out)
}

/// Whether the utterance confirms a pending clarification question.
pub fn is_affirmative(text: &str) -> bool {
    tokenize(text)
        .first()
        .is_some_and(|t| AFFIRMATIVE.contains(&t.as_str()))
        || tokenize(text)
            .windows(2)
            .any(|w| w[0] == "that" && w[1] == "one")
}
