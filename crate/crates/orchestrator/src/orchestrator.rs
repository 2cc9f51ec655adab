//! Session lifecycle and the per-turn interaction loop.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::Instant;

use arena_core::hash::sha256_hex;
use arena_core::{
    apply_action, check_goals, init_mission, load_catalog, object_at, render_default, Action,
    InstanceId, MissionSpec, MissionStatus, MissionTag, SceneLibrary, Target, WorldState,
};
use arena_edh::{LogRecorder, SessionLog, Speaker};
use arena_metrics::{InteractionRecord, RecordStore};
use arena_protocol::{
    request_to_json, ActionRecord, Baseline, ClientError, CompactObservation, DialogTurn,
    HttpInferenceClient, InferenceClient, InferenceMode, InferenceRequest, LocalInferenceClient,
    Speaker as WireSpeaker,
};
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use crate::config::{Config, TurnLimits, LOCAL_ENDPOINT};
use crate::error::OrchestratorError;
use crate::events::{Event, EventEnvelope, HIGHLIGHT_DURATION_MS};
use crate::session::{
    ExecutedAction, InferenceRoundTrip, Rating, SessionData, SessionStatus, SessionStore,
    SessionView, TurnOutcome, TurnRecord, PROTOCOL_ERROR_DIALOG, TIMEOUT_DIALOG,
};

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

const STREAM_CAPACITY: usize = 4096;

/// Message on a session's broadcast channel.
#[derive(Debug, Clone)]
pub enum StreamItem {
    Event(Arc<EventEnvelope>),
    Closed,
}

struct Live {
    data: SessionData,
    world: WorldState,
    recorder: LogRecorder,
    next_seq: u64,
}

impl Live {
    fn emit(&mut self, tx: &broadcast::Sender<StreamItem>, event: Event) {
        let env = EventEnvelope {
            seq: Some(self.next_seq),
            session_id: self.data.session_id.clone(),
            event,
        };
        self.next_seq += 1;
        let _ = tx.send(StreamItem::Event(Arc::new(env)));
    }

    fn snapshot(&self) -> EventEnvelope {
        EventEnvelope {
            seq: None,
            session_id: self.data.session_id.clone(),
            event: Event::frame(&render_default(&self.world), true),
        }
    }

    fn sync(&mut self) {
        self.data.world = self.world.snapshot();
        self.data.log = self.recorder.log().clone();
    }
}

pub struct SessionHandle {
    id: String,
    turn: tokio::sync::Mutex<()>,
    live: Mutex<Live>,
    tx: broadcast::Sender<StreamItem>,
}

impl SessionHandle {
    fn lock(&self) -> MutexGuard<'_, Live> {
        self.live.lock().expect("session lock")
    }
}

/// A subscription: the snapshot frame to send first, then live items.
pub struct Subscription {
    pub snapshot: EventEnvelope,
    pub receiver: broadcast::Receiver<StreamItem>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session: SessionView,
    pub observation: CompactObservation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub mission_id: String,
    pub title: String,
    pub scene_id: String,
    pub tag: MissionTag,
    pub subgoals: usize,
}

pub struct Orchestrator {
    library: Arc<SceneLibrary>,
    catalog: BTreeMap<String, MissionSpec>,
    clients: BTreeMap<String, Arc<dyn InferenceClient>>,
    default_team: String,
    limits: TurnLimits,
    max_sessions: usize,
    idle_timeout: Duration,
    sessions: RwLock<BTreeMap<String, Arc<SessionHandle>>>,
    store: SessionStore,
    logs_dir: std::path::PathBuf,
    metrics: RecordStore,
    clock: Clock,
    next_id: AtomicU64,
}

pub struct OrchestratorBuilder {
    config: Config,
    library: Option<Arc<SceneLibrary>>,
    clients: BTreeMap<String, Arc<dyn InferenceClient>>,
    clock: Clock,
}

impl OrchestratorBuilder {
    pub fn library(mut self, library: Arc<SceneLibrary>) -> Self {
        self.library = Some(library);
        self
    }

    /// Overrides the configured endpoint of `team`.
    pub fn client(mut self, team: impl Into<String>, client: Arc<dyn InferenceClient>) -> Self {
        self.clients.insert(team.into(), client);
        self
    }

    pub fn clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn build(self) -> Result<Orchestrator, OrchestratorError> {
        let cfg = self.config;
        cfg.validate()?;
        let library = match self.library {
            Some(l) => l,
            None => Arc::new(SceneLibrary::load(&cfg.classes, &cfg.scenes)?),
        };
        let catalog = load_catalog(&cfg.catalog, &library)?
            .into_iter()
            .map(|m| (m.mission_id.clone(), m))
            .collect();
        let mut clients = BTreeMap::new();
        for (team, tc) in &cfg.teams {
            let client: Arc<dyn InferenceClient> = if tc.endpoint == LOCAL_ENDPOINT {
                Arc::new(LocalInferenceClient::new(Arc::new(Baseline::new(
                    library.clone(),
                ))))
            } else {
                Arc::new(HttpInferenceClient::new(
                    &tc.endpoint,
                    cfg.limits.deadline(),
                ))
            };
            clients.insert(team.clone(), client);
        }
        clients.extend(self.clients);
        let store = SessionStore::open(cfg.data_dir.join("sessions"))?;
        let logs_dir = cfg.data_dir.join("logs");
        std::fs::create_dir_all(&logs_dir)?;
        let orch = Orchestrator {
            library,
            catalog,
            clients,
            default_team: cfg.default_team.clone(),
            limits: cfg.limits,
            max_sessions: cfg.max_sessions,
            idle_timeout: Duration::seconds(cfg.idle_timeout_secs as i64),
            sessions: RwLock::new(BTreeMap::new()),
            store,
            logs_dir,
            metrics: RecordStore::open(cfg.metrics_path())?,
            clock: self.clock,
            next_id: AtomicU64::new(1),
        };
        orch.restore()?;
        Ok(orch)
    }
}

fn session_number(id: &str) -> Option<u64> {
    id.strip_prefix("s-")?.parse().ok()
}

enum Step {
    Continue,
    End(TurnOutcome),
}

impl Orchestrator {
    pub fn builder(config: Config) -> OrchestratorBuilder {
        OrchestratorBuilder {
            config,
            library: None,
            clients: BTreeMap::new(),
            clock: Arc::new(Utc::now),
        }
    }

    pub fn from_config(config: Config) -> Result<Self, OrchestratorError> {
        Self::builder(config).build()
    }

    fn restore(&self) -> Result<(), OrchestratorError> {
        let mut map = self.sessions.write().expect("sessions lock");
        for data in self.store.load_all()? {
            let world =
                WorldState::from_snapshot(data.world.clone(), self.library.registry().clone())?;
            let recorder = LogRecorder::resume(data.log.clone());
            if let Some(n) = session_number(&data.session_id) {
                self.next_id.fetch_max(n + 1, Ordering::Relaxed);
            }
            let (tx, _) = broadcast::channel(STREAM_CAPACITY);
            let id = data.session_id.clone();
            let live = Live {
                data,
                world,
                recorder,
                next_seq: 0,
            };
            map.insert(
                id.clone(),
                Arc::new(SessionHandle {
                    id,
                    turn: tokio::sync::Mutex::new(()),
                    live: Mutex::new(live),
                    tx,
                }),
            );
        }
        Ok(())
    }

    pub fn library(&self) -> &Arc<SceneLibrary> {
        &self.library
    }

    pub fn limits(&self) -> TurnLimits {
        self.limits
    }

    pub fn metrics(&self) -> &RecordStore {
        &self.metrics
    }

    pub fn missions(&self) -> Vec<MissionSummary> {
        self.catalog
            .values()
            .map(|m| MissionSummary {
                mission_id: m.mission_id.clone(),
                title: m.title.clone(),
                scene_id: m.scene_id.clone(),
                tag: m.tag,
                subgoals: m.subgoals.len(),
            })
            .collect()
    }

    fn handle(&self, id: &str) -> Result<Arc<SessionHandle>, OrchestratorError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| OrchestratorError::SessionNotFound(id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions
            .read()
            .expect("sessions lock")
            .keys()
            .cloned()
            .collect()
    }

    pub fn create_session(
        &self,
        mission_id: &str,
        team: Option<&str>,
    ) -> Result<SessionCreated, OrchestratorError> {
        let mission = self
            .catalog
            .get(mission_id)
            .ok_or_else(|| OrchestratorError::MissionNotFound(mission_id.to_string()))?
            .clone();
        let team = team.unwrap_or(&self.default_team).to_string();
        if !self.clients.contains_key(&team) {
            return Err(OrchestratorError::UnknownTeam(team));
        }
        let world = init_mission(&mission, &self.library)?;
        let status = check_goals(&world, &mission)?;
        let mut map = self.sessions.write().expect("sessions lock");
        let active = map
            .values()
            .filter(|h| h.lock().data.status == SessionStatus::Active)
            .count();
        if active >= self.max_sessions {
            return Err(OrchestratorError::CapacityExceeded(self.max_sessions));
        }
        let id = format!("s-{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let now = (self.clock)();
        let recorder = LogRecorder::for_mission(id.clone(), &world, &mission);
        let data = SessionData {
            session_id: id.clone(),
            team_id: team,
            mission,
            status: SessionStatus::Active,
            world: world.snapshot(),
            mission_status: status,
            turns: Vec::new(),
            rating: None,
            created_at: now,
            ended_at: None,
            last_activity: now,
            finalized: false,
            dialog: Vec::new(),
            history: Vec::new(),
            previous_response_id: None,
            log: recorder.log().clone(),
        };
        self.store.save(&data)?;
        let (tx, _) = broadcast::channel(STREAM_CAPACITY);
        let obs = render_default(&world);
        let mut live = Live {
            data,
            world,
            recorder,
            next_seq: 0,
        };
        live.emit(&tx, Event::frame(&obs, false));
        live.emit(&tx, Event::MicOpen);
        let created = SessionCreated {
            session: live.data.view(),
            observation: CompactObservation::from(&obs),
        };
        map.insert(
            id.clone(),
            Arc::new(SessionHandle {
                id,
                turn: tokio::sync::Mutex::new(()),
                live: Mutex::new(live),
                tx,
            }),
        );
        Ok(created)
    }

    pub fn session(&self, id: &str) -> Result<SessionView, OrchestratorError> {
        Ok(self.handle(id)?.lock().data.view())
    }

    pub fn session_data(&self, id: &str) -> Result<SessionData, OrchestratorError> {
        let h = self.handle(id)?;
        let mut live = h.lock();
        live.sync();
        Ok(live.data.clone())
    }

    pub fn world(&self, id: &str) -> Result<WorldState, OrchestratorError> {
        Ok(self.handle(id)?.lock().world.clone())
    }

    pub fn subscribe(&self, id: &str) -> Result<Subscription, OrchestratorError> {
        let h = self.handle(id)?;
        let live = h.lock();
        Ok(Subscription {
            snapshot: live.snapshot(),
            receiver: h.tx.subscribe(),
            closed: live.data.finalized,
        })
    }

    /// Snapshot frame of the session's current view.
    pub fn snapshot_frame(&self, id: &str) -> Result<EventEnvelope, OrchestratorError> {
        Ok(self.handle(id)?.lock().snapshot())
    }

    pub async fn handle_utterance(
        &self,
        id: &str,
        text: &str,
    ) -> Result<TurnRecord, OrchestratorError> {
        let h = self.handle(id)?;
        let _turn = h
            .turn
            .try_lock()
            .map_err(|_| OrchestratorError::TurnInFlight)?;
        let text = text.trim();
        if text.is_empty() {
            return Err(OrchestratorError::EmptyUtterance);
        }
        let started = Instant::now();
        let (client, turn_index) = {
            let mut live = h.lock();
            if live.data.status != SessionStatus::Active {
                return Err(OrchestratorError::SessionNotActive(live.data.status));
            }
            live.data.last_activity = (self.clock)();
            live.data.dialog.push(DialogTurn {
                speaker: WireSpeaker::User,
                text: text.to_string(),
            });
            live.recorder.utterance(Speaker::Commander, text);
            let client = self
                .clients
                .get(&live.data.team_id)
                .cloned()
                .ok_or_else(|| OrchestratorError::UnknownTeam(live.data.team_id.clone()))?;
            (client, live.data.turns.len() as u32)
        };

        let mut round_trips = Vec::new();
        let mut executed = Vec::new();
        let mut robot_dialog = None;
        let mut failures = 0u32;
        let outcome = 'turn: loop {
            if round_trips.len() as u32 >= self.limits.max_inference_rounds_per_turn {
                break TurnOutcome::RoundLimit;
            }
            let req = self.request(&h.lock(), turn_index, text);
            let digest = sha256_hex(request_to_json(&req).as_bytes());
            let reply = tokio::time::timeout(self.limits.deadline(), client.infer(&req)).await;
            let resp = match reply {
                Err(_) | Ok(Err(ClientError::Timeout(_))) => {
                    round_trips.push(InferenceRoundTrip {
                        request_digest: digest,
                        response: None,
                        error: Some("inference deadline exceeded".into()),
                    });
                    robot_dialog = Some(TIMEOUT_DIALOG.to_string());
                    break TurnOutcome::InferenceTimeout;
                }
                Ok(Err(e)) => {
                    round_trips.push(InferenceRoundTrip {
                        request_digest: digest,
                        response: None,
                        error: Some(e.to_string()),
                    });
                    robot_dialog = Some(PROTOCOL_ERROR_DIALOG.to_string());
                    break TurnOutcome::InferenceProtocolError;
                }
                Ok(Ok(resp)) => resp,
            };
            if let Err(e) = resp.validate() {
                round_trips.push(InferenceRoundTrip {
                    request_digest: digest,
                    response: Some(resp),
                    error: Some(e.to_string()),
                });
                robot_dialog = Some(PROTOCOL_ERROR_DIALOG.to_string());
                break TurnOutcome::InferenceProtocolError;
            }
            round_trips.push(InferenceRoundTrip {
                request_digest: digest,
                response: Some(resp.clone()),
                error: None,
            });
            let mut live = h.lock();
            live.data.previous_response_id = Some(resp.response_id.clone());
            for action in &resp.actions {
                if executed.len() as u32 >= self.limits.max_actions_per_turn {
                    break 'turn TurnOutcome::ActionLimit;
                }
                let (step, done) = self.execute(&h, &mut live, turn_index, action)?;
                if !done.result.ok {
                    failures += 1;
                }
                executed.push(done);
                if let Step::End(outcome) = step {
                    break 'turn outcome;
                }
                if failures >= self.limits.max_failures_per_turn {
                    break 'turn TurnOutcome::FailureLimit;
                }
            }
            if resp.turn_complete {
                robot_dialog = resp.dialog.clone();
                break TurnOutcome::TurnComplete;
            }
        };

        let mut live = h.lock();
        if let Some(d) = &robot_dialog {
            live.emit(&h.tx, Event::RobotDialog { text: d.clone() });
            live.data.dialog.push(DialogTurn {
                speaker: WireSpeaker::Robot,
                text: d.clone(),
            });
            live.recorder.utterance(Speaker::Follower, d);
        }
        live.emit(&h.tx, Event::TurnEnded { turn_index });
        if live.data.status == SessionStatus::Active {
            live.emit(&h.tx, Event::MicOpen);
        }
        let record = TurnRecord {
            turn_index,
            utterance: text.to_string(),
            round_trips,
            executed,
            robot_dialog,
            outcome,
            mission_status_after: live.data.mission_status.clone(),
            wall_time_ms: started.elapsed().as_millis() as u64,
        };
        live.data.turns.push(record.clone());
        live.data.last_activity = (self.clock)();
        live.sync();
        self.store.save(&live.data)?;
        Ok(record)
    }

    fn request(&self, live: &Live, turn_index: u32, utterance: &str) -> InferenceRequest {
        InferenceRequest {
            session_id: live.data.session_id.clone(),
            turn_index,
            utterance: utterance.to_string(),
            observation: CompactObservation::from(&render_default(&live.world)),
            dialog_history: live.data.dialog.clone(),
            action_history: live.data.history.clone(),
            previous_response_id: live.data.previous_response_id.clone(),
            scene_id: live.world.scene_id().to_string(),
            alternatives: Vec::new(),
            mode: InferenceMode::Live,
        }
    }

    fn highlighted(world: &WorldState, target: &Target) -> Option<InstanceId> {
        match target {
            Target::Instance { id } => Some(id.clone()),
            Target::Pixel { x, y } => object_at(&render_default(world), *x, *y)
                .ok()
                .flatten()
                .cloned(),
        }
    }

    fn execute(
        &self,
        h: &SessionHandle,
        live: &mut Live,
        turn_index: u32,
        action: &Action,
    ) -> Result<(Step, ExecutedAction), OrchestratorError> {
        let highlight = match action {
            Action::Highlight { target } => Self::highlighted(&live.world, target),
            _ => None,
        };
        let (next, result) = apply_action(&live.world, action);
        live.recorder.action(action, &result, &next);
        for f in &result.frames {
            let view = next.with_agent(f.pose.clone())?;
            let mut obs = render_default(&view);
            obs.tick = f.tick;
            live.emit(&h.tx, Event::frame(&obs, false));
        }
        if let (true, Some(instance)) = (result.ok, highlight) {
            live.emit(
                &h.tx,
                Event::Highlight {
                    instance,
                    duration_ms: HIGHLIGHT_DURATION_MS,
                },
            );
        }
        live.world = next;
        live.data.history.push(ActionRecord {
            turn_index,
            action: action.clone(),
            ok: result.ok,
        });
        let before: MissionStatus = live.data.mission_status.clone();
        let after = check_goals(&live.world, &live.data.mission)?;
        for (i, (was, now)) in before.subgoals.iter().zip(&after.subgoals).enumerate() {
            if *now && !*was {
                live.emit(&h.tx, Event::SubgoalComplete { index: i });
            }
        }
        let completed = after.overall && !before.overall;
        live.data.mission_status = after;
        let step = if completed {
            live.emit(&h.tx, Event::MissionComplete);
            live.data.status = SessionStatus::MissionComplete;
            live.data.ended_at = Some((self.clock)());
            Step::End(TurnOutcome::MissionComplete)
        } else if matches!(action, Action::Stop) {
            Step::End(TurnOutcome::StopAction)
        } else {
            Step::Continue
        };
        Ok((
            step,
            ExecutedAction {
                action: action.clone(),
                result,
            },
        ))
    }

    fn finalize(&self, h: &SessionHandle, live: &mut Live) -> Result<(), OrchestratorError> {
        if live.data.finalized {
            return Ok(());
        }
        let d = &live.data;
        self.metrics.append(&InteractionRecord {
            team_id: d.team_id.clone(),
            timestamp: d.ended_at.unwrap_or_else(|| (self.clock)()),
            mission_id: d.mission.mission_id.clone(),
            mission_seen: d.mission.is_seen(),
            success: d.mission_status.overall,
            rating: d.rating.as_ref().map(|r| r.score),
            abandoned: d.status == SessionStatus::Abandoned,
            session_id: Some(d.session_id.clone()),
        })?;
        live.data.finalized = true;
        live.sync();
        self.store.save(&live.data)?;
        let _ = h.tx.send(StreamItem::Closed);
        Ok(())
    }

    pub fn submit_rating(
        &self,
        id: &str,
        score: i64,
        comment: Option<String>,
    ) -> Result<SessionView, OrchestratorError> {
        let h = self.handle(id)?;
        let _turn = h
            .turn
            .try_lock()
            .map_err(|_| OrchestratorError::TurnInFlight)?;
        let mut live = h.lock();
        if live.data.rating.is_some() {
            return Err(OrchestratorError::RatingAlreadySubmitted);
        }
        if !(1..=5).contains(&score) {
            return Err(OrchestratorError::ScoreOutOfRange(score));
        }
        if !live.data.status.ratable() || live.data.finalized {
            return Err(OrchestratorError::SessionNotRatable(live.data.status));
        }
        live.data.rating = Some(Rating {
            score: score as u8,
            comment: comment.filter(|c| !c.trim().is_empty()),
        });
        self.finalize(&h, &mut live)?;
        Ok(live.data.view())
    }

    /// The user leaves before the mission is complete.
    pub fn end_session(&self, id: &str) -> Result<SessionView, OrchestratorError> {
        let h = self.handle(id)?;
        let _turn = h
            .turn
            .try_lock()
            .map_err(|_| OrchestratorError::TurnInFlight)?;
        let mut live = h.lock();
        if live.data.status == SessionStatus::Active {
            live.data.status = SessionStatus::Ended;
            live.data.ended_at = Some((self.clock)());
            live.sync();
            self.store.save(&live.data)?;
        }
        Ok(live.data.view())
    }

    /// Log of a finished session; also written under the data directory.
    pub fn export_session_log(&self, id: &str) -> Result<SessionLog, OrchestratorError> {
        let h = self.handle(id)?;
        let live = h.lock();
        if live.data.status == SessionStatus::Active {
            return Err(OrchestratorError::SessionActive);
        }
        let log = live.recorder.log().clone();
        std::fs::write(
            self.logs_dir.join(format!("{id}.json")),
            log.to_canonical_json(),
        )?;
        Ok(log)
    }

    /// Closes sessions idle for longer than the timeout. Active ones become
    /// abandoned; finished but unrated ones are finalized without a rating.
    /// Sessions with a turn in flight are skipped.
    pub fn reap_idle(&self) -> Result<Vec<String>, OrchestratorError> {
        let now = (self.clock)();
        let handles: Vec<Arc<SessionHandle>> = self
            .sessions
            .read()
            .expect("sessions lock")
            .values()
            .cloned()
            .collect();
        let mut reaped = Vec::new();
        for h in handles {
            let Ok(_turn) = h.turn.try_lock() else {
                continue;
            };
            let mut live = h.lock();
            if live.data.finalized || now - live.data.last_activity <= self.idle_timeout {
                continue;
            }
            if live.data.status == SessionStatus::Active {
                live.data.status = SessionStatus::Abandoned;
                live.data.ended_at = Some(now);
            }
            self.finalize(&h, &mut live)?;
            reaped.push(h.id.clone());
        }
        Ok(reaped)
    }
}
