//! Hand-built logs on the demo scene, one segment per extraction case.

use arena_core::{apply_action, Action, SceneLibrary, Target, Verb, WorldState};
use arena_edh::{LogRecorder, Speaker};

pub struct Demo {
    pub lib: std::sync::Arc<SceneLibrary>,
    pub state: WorldState,
    pub rec: LogRecorder,
}

impl Demo {
    pub fn new() -> Self {
        let lib = super::library();
        let state = lib.instantiate("demo").unwrap().unwrap();
        let rec = LogRecorder::new("demo-log", &state, Vec::new(), None);
        Self { lib, state, rec }
    }

    pub fn say(&mut self, text: &str) {
        self.rec.utterance(Speaker::Commander, text);
    }

    pub fn act(&mut self, action: Action) {
        let (next, result) = apply_action(&self.state, &action);
        assert!(result.ok, "{action:?} failed: {:?}", result.failure_code);
        self.rec.action(&action, &result, &next);
        self.state = next;
    }
}

pub fn open(id: &str) -> Action {
    Action::interact(Verb::Open, Target::id(id))
}

pub fn close(id: &str) -> Action {
    Action::interact(Verb::Close, Target::id(id))
}

pub fn demo_prefix() -> Demo {
    let mut d = Demo::new();
    // Before any dialog.
    d.act(Action::GotoRoom {
        room: "break_room".into(),
    });
    d.act(Action::GotoViewpoint {
        viewpoint: "br_shelf".into(),
    });
    d.act(Action::interact(Verb::Pickup, Target::id("mug_1")));
    // Navigation only.
    d.say("look around");
    d.act(Action::RotateLeft);
    d.act(Action::RotateRight);
    // Qualifying.
    d.say("open the fridge");
    d.act(Action::GotoViewpoint {
        viewpoint: "br_fridge".into(),
    });
    d.act(open("fridge_1"));
    // Interaction with no net change.
    d.say("check the fridge door");
    d.act(close("fridge_1"));
    d.act(open("fridge_1"));
    d
}
