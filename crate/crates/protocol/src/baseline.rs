//! Rule-based baseline agent.
//!
//! Each utterance is parsed into a plan of steps. Every request advances the
//! plan as far as the current observation and visual memory allow: targets
//! are grounded to visible or remembered instances, approached, and acted on.
//! Interactions are verified on the next request through the `ok` flags of
//! the action history; failed steps are retried from another pose.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use arena_core::render::REACH_MM;
use arena_core::world::{AgentPose, Layout, Pitch};
use arena_core::{
    Action, AffordanceProperty, ClassRegistry, InstanceId, Observation, RoomId, SceneLibrary,
    Target, Verb,
};

use crate::approach::{candidates, navigate};
use crate::grammar::{is_affirmative, parse_utterance, Clause, Noun, NounPhrase};
use crate::lexicon::{Command, GroundingLexicon};
use crate::memory::{Sighting, VisualMemory};
use crate::wire::{InferenceMode, InferenceRequest, InferenceResponse, MAX_ACTIONS_PER_RESPONSE};

/// Responses the baseline sends per turn, the last of which always ends it.
pub const MAX_RESPONSES_PER_TURN: u32 = 5;
pub const FALLBACK_DIALOG: &str =
    "I can help with actions like picking up or opening objects. What should I do?";
pub const DONE_DIALOG: &str = "OK.";
pub const GAVE_UP_DIALOG: &str = "Sorry, I couldn't finish that.";
const MAX_ATTEMPTS: u32 = 3;
/// Horizontal distance from a location hint within which candidates count
/// as being at that location.
const HINT_RADIUS: f64 = 1.5;
const MAX_SEARCH_VIEWS: u32 = 3;

/// What the baseline knows about a scene without looking: its layout and
/// class vocabulary.
#[derive(Debug, Clone)]
pub struct SceneContext {
    pub layout: Layout,
    pub registry: Arc<ClassRegistry>,
    pub lexicon: GroundingLexicon,
}

impl SceneContext {
    pub fn new(registry: Arc<ClassRegistry>, layout: Layout) -> Self {
        let lexicon = GroundingLexicon::new(&registry, &layout);
        Self {
            layout,
            registry,
            lexicon,
        }
    }

    pub fn from_library(library: &SceneLibrary, scene_id: &str) -> Option<Self> {
        let state = library.instantiate(scene_id)?.ok()?;
        Some(Self::new(
            library.registry().clone(),
            state.layout().clone(),
        ))
    }

    fn has(&self, class: &str, p: AffordanceProperty) -> bool {
        self.registry.get(class).is_some_and(|c| c.has(p))
    }

    fn licenses(&self, class: &str, verb: Verb) -> bool {
        self.registry.get(class).is_some_and(|c| {
            if verb == Verb::Slice {
                c.sliceable
            } else {
                verb.licensing_properties().iter().any(|p| c.has(*p))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ObjRef {
    Class {
        class: String,
        surface: String,
    },
    Instance {
        id: InstanceId,
        surface: String,
    },
    /// The instance grounded by an earlier step of the same plan.
    Step {
        index: usize,
        surface: String,
    },
}

impl ObjRef {
    fn surface(&self) -> &str {
        match self {
            ObjRef::Class { surface, .. }
            | ObjRef::Instance { surface, .. }
            | ObjRef::Step { surface, .. } => surface,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum StepKind {
    GotoRoom(RoomId),
    Approach,
    Interact(Verb),
    Highlight,
    Scan,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    kind: StepKind,
    target: Option<ObjRef>,
    hint: Option<ObjRef>,
    room: Option<RoomId>,
    bound: Option<InstanceId>,
    attempts: u32,
    views: u32,
    hint_opened: bool,
    clarified: bool,
}

impl Step {
    fn new(kind: StepKind) -> Self {
        Self {
            kind,
            target: None,
            hint: None,
            room: None,
            bound: None,
            attempts: 0,
            views: 0,
            hint_opened: false,
            clarified: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Plan {
    turn_index: u32,
    steps: Vec<Step>,
    cursor: usize,
    rounds: u32,
    outcome: Option<String>,
    finished: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Emitted {
    Other,
    Main {
        step: usize,
        id: InstanceId,
        class: String,
    },
    AutoOpen {
        id: InstanceId,
    },
}

/// Per-session belief carried between requests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Belief {
    pub memory: VisualMemory,
    plan: Option<Plan>,
    history_seen: usize,
    emitted: Vec<Emitted>,
    held: Option<(InstanceId, String)>,
    open: BTreeSet<InstanceId>,
    last_object: Option<(InstanceId, String)>,
    clarification: Option<(Vec<Step>, usize)>,
}

impl Belief {
    pub fn held(&self) -> Option<&InstanceId> {
        self.held.as_ref().map(|(id, _)| id)
    }
}

fn verb_phrase(verb: Verb) -> &'static str {
    match verb {
        Verb::Pickup => "pick up",
        Verb::Place => "put down",
        Verb::Open => "open",
        Verb::Close => "close",
        Verb::ToggleOn => "turn on",
        Verb::ToggleOff => "turn off",
        Verb::Slice => "slice",
        Verb::Pour => "pour out",
        Verb::Break => "break",
        Verb::Heat => "heat",
        Verb::Chill => "chill",
        Verb::Fill => "fill",
        Verb::Clean => "clean",
        Verb::Cook => "cook",
        Verb::Eat => "eat",
        Verb::Power => "power",
    }
}

fn compile(clauses: &[Clause], lex: &GroundingLexicon, belief: &Belief) -> Option<Vec<Step>> {
    let mut steps: Vec<Step> = Vec::new();
    let mut last: Option<ObjRef> = belief
        .last_object
        .clone()
        .map(|(id, class)| ObjRef::Instance {
            surface: lex.display_name(&class).to_string(),
            id,
        });
    let mut goto_target: Option<ObjRef> = None;
    let resolve = |np: &NounPhrase, last: &Option<ObjRef>| -> Option<ObjRef> {
        match &np.noun {
            Noun::Class(c) => Some(ObjRef::Class {
                class: c.clone(),
                surface: np.surface.clone(),
            }),
            Noun::Pronoun => last.clone(),
        }
    };
    let surface = |np: &NounPhrase, last: &Option<ObjRef>| -> String {
        match (&np.noun, last) {
            (Noun::Pronoun, Some(r)) => r.surface().to_string(),
            _ => np.surface.clone(),
        }
    };
    for c in clauses {
        let mut next_goto = None;
        match c.command {
            Command::Goto => {
                if let Some(room) = &c.room {
                    steps.push(Step::new(StepKind::GotoRoom(room.clone())));
                }
                if let Some(np) = &c.object {
                    let mut s = Step::new(StepKind::Approach);
                    s.target = Some(resolve(np, &last)?);
                    s.room = c.room.clone();
                    let r = ObjRef::Step {
                        index: steps.len(),
                        surface: surface(np, &last),
                    };
                    steps.push(s);
                    last = Some(r.clone());
                    next_goto = Some(r);
                }
            }
            Command::Scan => steps.push(Step::new(StepKind::Scan)),
            Command::Stop => steps.push(Step::new(StepKind::Stop)),
            Command::Highlight => {
                let mut s = Step::new(StepKind::Highlight);
                s.target = Some(resolve(c.object.as_ref()?, &last)?);
                steps.push(s);
            }
            Command::Interact(Verb::Place) => {
                if let Some(np) = &c.object {
                    let obj = resolve(np, &last)?;
                    if already_held(&obj, &steps, belief) {
                        last = Some(obj);
                    } else {
                        let mut s = Step::new(StepKind::Interact(Verb::Pickup));
                        s.target = Some(obj);
                        last = Some(ObjRef::Step {
                            index: steps.len(),
                            surface: surface(np, &last),
                        });
                        steps.push(s);
                    }
                }
                if let Some(room) = &c.room {
                    steps.push(Step::new(StepKind::GotoRoom(room.clone())));
                }
                let mut s = Step::new(StepKind::Interact(Verb::Place));
                s.target = Some(resolve(c.location.as_ref()?, &last)?);
                s.room = c.room.clone();
                steps.push(s);
            }
            Command::Interact(verb) => {
                if let Some(room) = &c.room {
                    steps.push(Step::new(StepKind::GotoRoom(room.clone())));
                }
                let np = c.object.as_ref()?;
                let mut s = Step::new(StepKind::Interact(verb));
                s.target = Some(resolve(np, &last)?);
                s.hint = match &c.location {
                    Some(l) => Some(resolve(l, &last)?),
                    None => goto_target.clone(),
                };
                s.room = c.room.clone();
                let r = ObjRef::Step {
                    index: steps.len(),
                    surface: surface(np, &last),
                };
                steps.push(s);
                last = Some(r);
            }
        }
        goto_target = next_goto;
    }
    (!steps.is_empty()).then_some(steps)
}

fn already_held(obj: &ObjRef, steps: &[Step], belief: &Belief) -> bool {
    match obj {
        ObjRef::Step { index, .. } => {
            steps[*index].kind == StepKind::Interact(Verb::Pickup)
                || matches!(&steps[*index].target, Some(t) if already_held(t, steps, belief))
        }
        ObjRef::Instance { id, .. } => belief.held().is_some_and(|h| h == id),
        ObjRef::Class { class, .. } => belief.held.as_ref().is_some_and(|(_, c)| c == class),
    }
}

#[derive(Debug, Clone)]
enum Ground {
    Seen { s: Sighting, visible: bool },
    Ambiguous(Vec<InstanceId>),
    Held,
    Unknown,
}

fn squared(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

struct Executor<'a> {
    ctx: &'a SceneContext,
    obs: &'a Observation,
    mode: InferenceMode,
    pose: AgentPose,
    fresh: bool,
    held: Option<(InstanceId, String)>,
    batch: Vec<Action>,
    emitted: Vec<Emitted>,
}

impl Executor<'_> {
    fn ground_id(&self, belief: &Belief, id: &InstanceId) -> Ground {
        if self.held.as_ref().is_some_and(|(h, _)| h == id) {
            return Ground::Held;
        }
        if let Some(s) = belief.memory.get(id) {
            return Ground::Seen {
                s: s.clone(),
                visible: self.obs.is_visible(id),
            };
        }
        Ground::Unknown
    }

    fn ground(
        &self,
        belief: &Belief,
        steps: &[Step],
        r: &ObjRef,
        hint: Option<[f64; 3]>,
        room: Option<&RoomId>,
        allow_ambiguous: bool,
    ) -> Ground {
        let class = match r {
            ObjRef::Instance { id, .. } => return self.ground_id(belief, id),
            ObjRef::Step { index, .. } => {
                return match &steps[*index].bound {
                    Some(id) => self.ground_id(belief, id),
                    None => Ground::Unknown,
                }
            }
            ObjRef::Class { class, .. } => class,
        };
        let not_held = |id: &InstanceId| self.held.as_ref().is_none_or(|(h, _)| h != id);
        let near_hint = |s: &Sighting| {
            hint.is_none_or(|h| (s.position[0] - h[0]).hypot(s.position[2] - h[2]) <= HINT_RADIUS)
        };
        let here = &self.obs.pose.room;
        let mut visible: Vec<&Sighting> = if room.is_none_or(|r| r == here) {
            self.obs
                .visible
                .iter()
                .filter(|v| &v.class == class && not_held(&v.id))
                .filter_map(|v| belief.memory.get(&v.id))
                .filter(|s| near_hint(s))
                .collect()
        } else {
            Vec::new()
        };
        if !visible.is_empty() {
            if allow_ambiguous && visible.len() > 1 && hint.is_none() {
                visible.sort_by_key(|s| (s.depth_mm, s.id.clone()));
                return Ground::Ambiguous(visible.iter().map(|s| s.id.clone()).collect());
            }
            let best = visible
                .into_iter()
                .min_by(|a, b| match hint {
                    Some(h) => squared(a.position, h)
                        .total_cmp(&squared(b.position, h))
                        .then(a.id.cmp(&b.id)),
                    None => (a.depth_mm, &a.id).cmp(&(b.depth_mm, &b.id)),
                })
                .unwrap();
            return self.ground_id(belief, &best.id.clone());
        }
        let best = belief
            .memory
            .of_class(class)
            .filter(|s| not_held(&s.id) && near_hint(s))
            .filter(|s| room.is_none_or(|r| &s.room == r))
            .min_by(|a, b| {
                let key = |s: &Sighting| (&s.room != here, std::cmp::Reverse(s.tick));
                key(a)
                    .cmp(&key(b))
                    .then_with(|| match hint {
                        Some(h) => squared(a.position, h).total_cmp(&squared(b.position, h)),
                        None => std::cmp::Ordering::Equal,
                    })
                    .then(a.id.cmp(&b.id))
            });
        match best {
            Some(s) => self.ground_id(belief, &s.id.clone()),
            None => Ground::Unknown,
        }
    }

    fn room_left(&self, needed: usize) -> bool {
        self.batch.len() + needed <= MAX_ACTIONS_PER_RESPONSE
    }

    fn push_nav(&mut self, to: &AgentPose) {
        let nav = navigate(&self.pose, to);
        if !nav.is_empty() {
            self.fresh = false;
        }
        for a in nav {
            self.batch.push(a);
            self.emitted.push(Emitted::Other);
        }
        self.pose = to.clone();
    }

    /// Cell of the object's mask nearest its centroid.
    fn pixel_for(&self, id: &InstanceId) -> Option<Target> {
        let (cx, cy) = self.obs.mask_centroid(id)?;
        let w = self.obs.width as i64;
        let mut best: Option<(f64, i64, i64)> = None;
        for y in 0..self.obs.height as i64 {
            for x in 0..w {
                if self.obs.object_at(x, y).ok().flatten() != Some(id) {
                    continue;
                }
                let d = (x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, x, y));
                }
            }
        }
        best.map(|(_, x, y)| Target::pixel(x, y))
    }

    fn target_for(&self, id: &InstanceId) -> Option<Target> {
        match self.mode {
            InferenceMode::Live => Some(Target::id(id.clone())),
            InferenceMode::Edh => self.pixel_for(id),
        }
    }

    /// Moves to a pose that has `position` in view and reach. Returns false
    /// when no pose is left to try.
    fn approach(&mut self, seen: &Sighting, attempt: u32) -> bool {
        if attempt == 0 && self.fresh && self.obs.in_reach(&seen.id) {
            return true;
        }
        let all = candidates(
            &self.ctx.layout,
            &self.pose,
            &seen.room,
            (self.obs.width, self.obs.height),
            seen.position,
            seen.half_extent,
        );
        match all.get(attempt as usize) {
            Some(c) => {
                let pose = c.pose.clone();
                self.push_nav(&pose);
                true
            }
            None => false,
        }
    }

    /// Whether an interaction on `id` can be emitted now.
    fn can_target(&self, id: &InstanceId) -> bool {
        match self.mode {
            InferenceMode::Live => true,
            InferenceMode::Edh => self.fresh && self.obs.in_reach(id),
        }
    }
}

enum Flow {
    Continue,
    /// Run the same step again.
    Again,
    Break,
    Abort(String),
}

fn search(ex: &mut Executor<'_>, step: &mut Step) -> Flow {
    if !ex.fresh {
        return Flow::Break;
    }
    if step.views >= MAX_SEARCH_VIEWS {
        let what = step.target.as_ref().map_or("that", ObjRef::surface);
        return Flow::Abort(format!("I couldn't find the {what}."));
    }
    let mut to = ex.pose.clone();
    to.pitch = Pitch::Level;
    to.heading = to.heading.right();
    ex.push_nav(&to);
    step.views += 1;
    Flow::Break
}

fn run_step(ex: &mut Executor<'_>, belief: &mut Belief, steps: &mut [Step], i: usize) -> Flow {
    let mut step = steps[i].clone();
    let flow = run_step_inner(ex, belief, steps, &mut step, i);
    steps[i] = step;
    flow
}

fn run_step_inner(
    ex: &mut Executor<'_>,
    belief: &mut Belief,
    steps: &[Step],
    step: &mut Step,
    i: usize,
) -> Flow {
    let kind = step.kind.clone();
    match kind {
        StepKind::GotoRoom(room) => {
            if ex.pose.room != room {
                let entry = ex.ctx.layout.rooms[&room].entry.clone();
                let mut to = ex.pose.clone();
                to.room = room.clone();
                to.viewpoint = entry;
                ex.batch.push(Action::GotoRoom { room });
                ex.emitted.push(Emitted::Other);
                ex.pose = to;
                ex.fresh = false;
                if ex.mode == InferenceMode::Edh {
                    return Flow::Break;
                }
            }
            Flow::Continue
        }
        StepKind::Stop => {
            ex.batch.push(Action::Stop);
            ex.emitted.push(Emitted::Other);
            Flow::Continue
        }
        StepKind::Scan => {
            if step.views >= MAX_SEARCH_VIEWS {
                return Flow::Continue;
            }
            if !ex.fresh {
                return Flow::Break;
            }
            let mut to = ex.pose.clone();
            to.pitch = Pitch::Level;
            to.heading = to.heading.right();
            ex.push_nav(&to);
            step.views += 1;
            Flow::Break
        }
        StepKind::Approach | StepKind::Highlight | StepKind::Interact(_) => {
            let Some(target) = step.target.clone() else {
                return Flow::Abort(FALLBACK_DIALOG.into());
            };
            let verb = match kind {
                StepKind::Interact(v) => Some(v),
                _ => None,
            };
            if step.attempts >= MAX_ATTEMPTS {
                let what = target.surface();
                return Flow::Abort(match verb {
                    Some(v) => format!("I couldn't {} the {what}.", verb_phrase(v)),
                    None => format!("I couldn't get to the {what}."),
                });
            }
            if verb == Some(Verb::Place) && ex.held.is_none() {
                return Flow::Abort("I'm not holding anything.".into());
            }
            let hint_ground = step
                .hint
                .as_ref()
                .map(|h| ex.ground(belief, steps, h, None, None, false));
            let hint_pos = match &hint_ground {
                Some(Ground::Seen { s, .. }) => Some(s.position),
                _ => None,
            };
            let allow_ambiguous =
                ex.mode == InferenceMode::Live && !step.clarified && step.bound.is_none();
            let ground = match &step.bound {
                Some(id) => ex.ground_id(belief, id),
                None => ex.ground(
                    belief,
                    steps,
                    &target,
                    hint_pos,
                    step.room.as_ref(),
                    allow_ambiguous,
                ),
            };
            match ground {
                Ground::Held => {
                    if verb == Some(Verb::Pickup) {
                        return Flow::Continue;
                    }
                    Flow::Abort(format!(
                        "I need to put the {} down first.",
                        target.surface()
                    ))
                }
                Ground::Ambiguous(ids) => {
                    if !ex.batch.is_empty() {
                        return Flow::Break;
                    }
                    step.clarified = true;
                    step.bound = Some(ids[0].clone());
                    ex.batch.push(Action::Highlight {
                        target: Target::id(ids[0].clone()),
                    });
                    ex.emitted.push(Emitted::Other);
                    let mut pending = steps.to_vec();
                    pending[i] = step.clone();
                    belief.clarification = Some((pending, i));
                    let name = ex.ctx.lexicon.display_name(match &target {
                        ObjRef::Class { class, .. } => class,
                        _ => "",
                    });
                    Flow::Abort(format!(
                        "I see more than one {name}. Do you mean the one I highlighted?"
                    ))
                }
                Ground::Unknown => {
                    if let (Some(Ground::Seen { s: hint, .. }), false) =
                        (&hint_ground, step.hint_opened)
                    {
                        let id = &hint.id;
                        if ex.ctx.has(&hint.class, AffordanceProperty::Openable)
                            && !belief.open.contains(id)
                        {
                            if !ex.room_left(6) {
                                return Flow::Break;
                            }
                            if !ex.approach(hint, 0) {
                                return search(ex, step);
                            }
                            if !ex.can_target(id) {
                                return Flow::Break;
                            }
                            let Some(t) = ex.target_for(id) else {
                                return Flow::Break;
                            };
                            ex.batch.push(Action::interact(Verb::Open, t));
                            ex.emitted.push(Emitted::AutoOpen { id: id.clone() });
                            step.hint_opened = true;
                            ex.fresh = false;
                            return Flow::Break;
                        }
                    }
                    search(ex, step)
                }
                Ground::Seen { s, visible } => {
                    let id = s.id.clone();
                    let class = s.class.clone();
                    if let Some(v) = verb {
                        if !ex.ctx.licenses(&class, v) {
                            let name = ex.ctx.lexicon.display_name(&class).to_string();
                            return Flow::Abort(format!("I can't {} the {name}.", verb_phrase(v)));
                        }
                    }
                    if verb == Some(Verb::Pickup) && ex.held.as_ref().is_some_and(|(h, _)| h != &id)
                    {
                        return Flow::Abort("My hands are full.".into());
                    }
                    if !ex.room_left(7) {
                        return Flow::Break;
                    }
                    if !visible && ex.fresh {
                        // Return to where it was last seen, then look again.
                        let to = AgentPose {
                            room: s.room.clone(),
                            viewpoint: s.viewpoint.clone(),
                            heading: s.heading,
                            pitch: s.pitch,
                        };
                        if to == ex.pose {
                            belief.memory.forget(&id);
                            return search(ex, step);
                        }
                        ex.push_nav(&to);
                        if s.depth_mm > REACH_MM || verb.is_none() || ex.mode == InferenceMode::Edh
                        {
                            step.bound = Some(id);
                            return Flow::Break;
                        }
                    } else if !visible && !ex.fresh {
                        if step.kind == StepKind::Highlight {
                            // Highlighting does not need the object in view.
                        } else if !ex.approach(&s, step.attempts) {
                            return Flow::Abort(format!(
                                "I couldn't get to the {}.",
                                target.surface()
                            ));
                        }
                    } else if step.kind != StepKind::Highlight && !ex.approach(&s, step.attempts) {
                        return Flow::Abort(format!("I couldn't get to the {}.", target.surface()));
                    }
                    step.bound = Some(id.clone());
                    belief.last_object = Some((id.clone(), class.clone()));
                    match verb {
                        None if step.kind == StepKind::Highlight => {
                            ex.batch.push(Action::Highlight {
                                target: Target::id(id.clone()),
                            });
                            ex.emitted.push(Emitted::Other);
                            Flow::Continue
                        }
                        None => {
                            if ex.mode == InferenceMode::Edh && !ex.fresh {
                                return Flow::Break;
                            }
                            Flow::Continue
                        }
                        Some(v) => {
                            if !ex.can_target(&id) {
                                if ex.fresh {
                                    step.attempts += 1;
                                    return Flow::Again;
                                }
                                return Flow::Break;
                            }
                            if v == Verb::Place
                                && ex.ctx.has(&class, AffordanceProperty::Openable)
                                && !belief.open.contains(&id)
                            {
                                let Some(t) = ex.target_for(&id) else {
                                    return Flow::Break;
                                };
                                ex.batch.push(Action::interact(Verb::Open, t));
                                ex.emitted.push(Emitted::AutoOpen { id: id.clone() });
                                belief.open.insert(id.clone());
                                if ex.mode == InferenceMode::Edh {
                                    ex.fresh = false;
                                    return Flow::Break;
                                }
                            }
                            let Some(t) = ex.target_for(&id) else {
                                return Flow::Break;
                            };
                            ex.batch.push(Action::interact(v, t));
                            ex.emitted.push(Emitted::Main {
                                step: i,
                                id: id.clone(),
                                class: class.clone(),
                            });
                            match v {
                                Verb::Pickup => ex.held = Some((id.clone(), class)),
                                Verb::Place => {
                                    if let Some(h) = &ex.held {
                                        belief.last_object = Some(h.clone());
                                    }
                                    ex.held = None;
                                }
                                _ => {}
                            }
                            ex.fresh = false;
                            if ex.mode == InferenceMode::Edh {
                                return Flow::Break;
                            }
                            Flow::Continue
                        }
                    }
                }
            }
        }
    }
}

/// Folds the actions executed since the last request into the belief and
/// rewinds the plan to the first failed step.
fn absorb_history(belief: &mut Belief, req: &InferenceRequest) {
    if req.action_history.len() < belief.history_seen {
        belief.history_seen = 0;
        belief.emitted.clear();
    }
    let emitted = std::mem::take(&mut belief.emitted);
    let mut failed: Option<usize> = None;
    for (j, rec) in req.action_history[belief.history_seen..].iter().enumerate() {
        let mine = emitted.get(j);
        let Action::Interact { verb, target } = &rec.action else {
            continue;
        };
        let id = match (target, mine) {
            (Target::Instance { id }, _) => Some(id.clone()),
            (_, Some(Emitted::Main { id, .. } | Emitted::AutoOpen { id })) => Some(id.clone()),
            _ => None,
        };
        let Some(id) = id else { continue };
        if rec.ok {
            match verb {
                Verb::Pickup => {
                    let class = match mine {
                        Some(Emitted::Main { class, .. }) => class.clone(),
                        _ => belief
                            .memory
                            .get(&id)
                            .map(|s| s.class.clone())
                            .unwrap_or_default(),
                    };
                    belief.memory.forget(&id);
                    belief.held = Some((id.clone(), class.clone()));
                    belief.last_object = Some((id, class));
                }
                Verb::Place => {
                    if let Some((h, class)) = belief.held.take() {
                        let moved = belief.memory.get(&id).cloned();
                        belief.memory.forget(&h);
                        if let Some(s) = moved {
                            belief.memory.insert(Sighting {
                                id: h,
                                class,
                                clipped: true,
                                ..s
                            });
                        }
                    }
                }
                Verb::Open => {
                    belief.open.insert(id);
                }
                Verb::Close => {
                    belief.open.remove(&id);
                }
                _ => {}
            }
        } else {
            match mine {
                Some(Emitted::Main { step, .. }) => {
                    failed = Some(failed.map_or(*step, |f| f.min(*step)))
                }
                // A failed automatic open most likely means it was open already.
                Some(Emitted::AutoOpen { id }) => {
                    belief.open.insert(id.clone());
                }
                _ => {}
            }
        }
    }
    belief.history_seen = req.action_history.len();
    if let (Some(f), Some(plan)) = (failed, belief.plan.as_mut()) {
        if plan.turn_index == req.turn_index && f < plan.steps.len() {
            plan.cursor = plan.cursor.min(f);
            plan.steps[f].attempts += 1;
        }
    }
}

fn finish(belief: &mut Belief, id: String, dialog: String) -> InferenceResponse {
    if let Some(plan) = belief.plan.as_mut() {
        plan.finished = Some(dialog.clone());
    }
    InferenceResponse::finish(id, Some(dialog))
}

/// One baseline decision. Deterministic in (request, context, belief).
pub fn baseline_infer(
    req: &InferenceRequest,
    ctx: &SceneContext,
    belief: &mut Belief,
) -> InferenceResponse {
    let obs = match req.observation.decode() {
        Ok(o) => o,
        Err(_) => {
            return InferenceResponse::finish(
                format!("bl-{}-{}-x", req.session_id, req.turn_index),
                Some(FALLBACK_DIALOG.into()),
            )
        }
    };
    belief.memory.observe(&ctx.layout, &obs);
    absorb_history(belief, req);

    let new_turn = belief
        .plan
        .as_ref()
        .is_none_or(|p| p.turn_index != req.turn_index);
    if new_turn {
        let clarification = belief.clarification.take();
        let planned = match clarification {
            Some((steps, cursor)) if is_affirmative(&req.utterance) => Some((steps, cursor)),
            _ => parse_utterance(&ctx.lexicon, &req.utterance)
                .and_then(|clauses| compile(&clauses, &ctx.lexicon, belief))
                .map(|steps| (steps, 0)),
        };
        belief.plan = Some(Plan {
            turn_index: req.turn_index,
            steps: planned.as_ref().map(|(s, _)| s.clone()).unwrap_or_default(),
            cursor: planned.as_ref().map_or(0, |(_, c)| *c),
            rounds: 0,
            outcome: planned.is_none().then(|| FALLBACK_DIALOG.to_string()),
            finished: None,
        });
    }
    let plan = belief.plan.as_mut().expect("plan set");
    plan.rounds += 1;
    let rid = format!("bl-{}-{}-{}", req.session_id, req.turn_index, plan.rounds);
    if let Some(d) = plan.finished.clone() {
        return InferenceResponse::finish(rid, Some(d));
    }
    if let Some(d) = plan.outcome.clone() {
        return finish(belief, rid, d);
    }
    if plan.rounds >= MAX_RESPONSES_PER_TURN {
        let d = if plan.cursor >= plan.steps.len() {
            DONE_DIALOG
        } else {
            GAVE_UP_DIALOG
        };
        return finish(belief, rid, d.into());
    }

    let mut plan = belief.plan.take().expect("plan set");
    let mut ex = Executor {
        ctx,
        obs: &obs,
        mode: req.mode,
        pose: obs.pose.clone(),
        fresh: true,
        held: belief.held.clone(),
        batch: Vec::new(),
        emitted: Vec::new(),
    };
    while plan.cursor < plan.steps.len() {
        let i = plan.cursor;
        match run_step(&mut ex, belief, &mut plan.steps, i) {
            Flow::Continue => plan.cursor += 1,
            Flow::Again => {}
            Flow::Break => break,
            Flow::Abort(msg) => {
                plan.outcome = Some(msg);
                plan.cursor = plan.steps.len();
                break;
            }
        }
        if ex.batch.last() == Some(&Action::Stop) {
            plan.cursor = plan.steps.len();
            break;
        }
    }
    let batch = std::mem::take(&mut ex.batch);
    belief.emitted = std::mem::take(&mut ex.emitted);
    let done = plan.cursor >= plan.steps.len();
    let outcome = plan.outcome.clone();
    belief.plan = Some(plan);
    if !batch.is_empty() {
        return InferenceResponse::act(rid, batch);
    }
    let dialog = match outcome {
        Some(d) => d,
        None if done => DONE_DIALOG.into(),
        None => GAVE_UP_DIALOG.into(),
    };
    finish(belief, rid, dialog)
}

/// Baseline service state: scene contexts and per-session beliefs.
#[derive(Debug)]
pub struct Baseline {
    library: Arc<SceneLibrary>,
    contexts: Mutex<BTreeMap<String, Arc<SceneContext>>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Belief>>>>,
}

impl Baseline {
    pub fn new(library: Arc<SceneLibrary>) -> Self {
        Self {
            library,
            contexts: Mutex::new(BTreeMap::new()),
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn context(&self, scene_id: &str) -> Option<Arc<SceneContext>> {
        let mut map = self.contexts.lock().expect("contexts lock");
        if let Some(c) = map.get(scene_id) {
            return Some(c.clone());
        }
        let ctx = Arc::new(SceneContext::from_library(&self.library, scene_id)?);
        map.insert(scene_id.to_string(), ctx.clone());
        Some(ctx)
    }

    pub fn infer(&self, req: &InferenceRequest) -> InferenceResponse {
        let Some(ctx) = self.context(&req.scene_id) else {
            return InferenceResponse::finish(
                format!("bl-{}-{}-x", req.session_id, req.turn_index),
                Some(FALLBACK_DIALOG.into()),
            );
        };
        let belief = self
            .sessions
            .lock()
            .expect("sessions lock")
            .entry(req.session_id.clone())
            .or_default()
            .clone();
        let mut belief = belief.lock().expect("belief lock");
        baseline_infer(req, &ctx, &mut belief)
    }

    pub fn belief(&self, session_id: &str) -> Option<Belief> {
        let sessions = self.sessions.lock().expect("sessions lock");
        let b = sessions
            .get(session_id)?
            .lock()
            .expect("belief lock")
            .clone();
        Some(b)
    }

    pub fn end_session(&self, session_id: &str) {
        self.sessions
            .lock()
            .expect("sessions lock")
            .remove(session_id);
    }
}
