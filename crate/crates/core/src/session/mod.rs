//! One play session: a tick-ordered event stream driving the assembly, the
//! firmware mesh and a game, with the cheat policy applied to structural
//! changes. The engine holds the authoritative game state; the mesh leader
//! mirrors it to every node.

mod event;
mod log;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::games::{
    new_game, Dictionary, DictionaryError, Game, GamePhase, GameStatus, TiltVector,
};
use crate::geometry::{new_standard_assembly, Assembly, CubioId, FaceTurn, Orientation};
use crate::hash::{fnv1a, Canonical};
use crate::mesh::{MeshEvent, MeshSim};
use crate::surface::{render, FacetAddress, Field, Rendered};

pub use event::{CheatPolicy, EventKind, SessionConfig, SessionEvent};
pub use log::{parse_log, parse_script, write_log, ParsedLog, LOG_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("illegal event at tick {tick}: {reason}")]
    IllegalEvent { tick: u64, reason: String },
    #[error("corrupt log: {0}")]
    CorruptLog(String),
    #[error("tick {at} is past the end of the log ({end})")]
    TickOutOfRange { at: u64, end: u64 },
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
}

impl SessionError {
    fn illegal(tick: u64, reason: impl ToString) -> SessionError {
        SessionError::IllegalEvent {
            tick,
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDigest {
    pub final_score: i64,
    pub final_phase: GamePhase,
    #[serde(with = "hex64")]
    pub state_hash: u64,
    pub tick_count: u64,
}

mod hex64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}

impl SessionDigest {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("digest serializes")
    }
}

fn dictionary_digest(d: &Dictionary) -> u64 {
    let mut words = String::new();
    for w in d.words() {
        words.push_str(w);
        words.push('\n');
    }
    fnv1a(words.as_bytes())
}

pub struct Session {
    config: SessionConfig,
    mesh: MeshSim,
    game: Box<dyn Game>,
    tilt: Option<TiltVector>,
    clock: u64,
    penalty_points: i64,
    penalty_ticks: u64,
    forfeited: bool,
    events: Vec<SessionEvent>,
    dictionary_digest: u64,
    /// Leader and state hash of the last publication.
    replicated: Option<(CubioId, u64)>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("game", &self.config.game)
            .field("clock", &self.clock)
            .field("events", &self.events.len())
            .finish_non_exhaustive()
    }
}

impl Session {
    /// Loads the dictionary named in the config, if any.
    pub fn new(config: SessionConfig) -> Result<Session, SessionError> {
        let dict = match &config.dictionary_path {
            Some(p) => Dictionary::load(Path::new(p))?,
            None => Dictionary::default(),
        };
        Ok(Session::with_dictionary(config, dict))
    }

    pub fn with_dictionary(config: SessionConfig, dict: Dictionary) -> Session {
        let assembly = new_standard_assembly(config.core);
        let dictionary_digest = dictionary_digest(&dict);
        Session {
            mesh: MeshSim::boot(&assembly, config.seed, config.loss_rate),
            game: new_game(config.game, config.seed, Some(dict)),
            config,
            tilt: None,
            clock: 0,
            penalty_points: 0,
            penalty_ticks: 0,
            forfeited: false,
            events: Vec::new(),
            dictionary_digest,
            replicated: None,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn mesh(&self) -> &MeshSim {
        &self.mesh
    }

    #[doc(hidden)]
    pub fn mesh_mut(&mut self) -> &mut MeshSim {
        &mut self.mesh
    }

    pub fn assembly(&self) -> &Assembly {
        self.mesh.assembly()
    }

    pub fn game(&self) -> &dyn Game {
        self.game.as_ref()
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn tilt(&self) -> Option<TiltVector> {
        self.tilt
    }

    pub fn phase(&self) -> GamePhase {
        if self.forfeited {
            GamePhase::Forfeit
        } else {
            self.game.status().phase
        }
    }

    pub fn is_over(&self) -> bool {
        self.phase() != GamePhase::Running
    }

    /// Game status with penalties and forfeit folded in.
    pub fn status(&self) -> GameStatus {
        let s = self.game.status();
        GameStatus {
            score: s.score + self.penalty_points,
            phase: self.phase(),
            message: s.message,
        }
    }

    pub fn tick_count(&self) -> u64 {
        self.clock + self.penalty_ticks
    }

    /// One session tick: the game sees the held tilt, then the mesh runs.
    pub fn step(&mut self) {
        if self.is_over() {
            return;
        }
        self.game.on_tick(self.tilt);
        self.mesh.tick();
        self.clock += 1;
        self.replicate();
    }

    pub fn advance_to(&mut self, tick: u64) {
        while self.clock < tick && !self.is_over() {
            self.step();
        }
    }

    /// Publishes the current game state through the leader whenever the
    /// state or the leader has changed; a new leader may never have seen the
    /// last snapshot. Deferred while the mesh has no agreed leader.
    fn replicate(&mut self) {
        let Some(leader) = self.mesh.leader() else {
            return;
        };
        let bytes = self.game.state_bytes();
        let key = Some((leader, fnv1a(&bytes)));
        if self.replicated != key && self.mesh.replicate(bytes).is_ok() {
            self.replicated = key;
        }
    }

    /// Advances to the event's tick and routes it. Events after the session
    /// has ended are ignored.
    pub fn apply(&mut self, event: SessionEvent) -> Result<(), SessionError> {
        if event.tick < self.clock {
            return Err(SessionError::illegal(
                event.tick,
                format!("tick goes backwards (clock is {})", self.clock),
            ));
        }
        self.advance_to(event.tick);
        if self.is_over() {
            return Ok(());
        }
        let tick = event.tick;
        match &event.kind {
            EventKind::Turn { axis, layer, dir } => {
                let t = FaceTurn::new(*axis, *layer, *dir)
                    .ok_or_else(|| SessionError::illegal(tick, "layer must be 1 or -1"))?;
                self.mesh
                    .turn_links(t)
                    .map_err(|e| SessionError::illegal(tick, e))?;
                self.game.on_turn(t);
            }
            EventKind::Slide { face, row, col } => {
                if *row > 1 || *col > 1 {
                    return Err(SessionError::illegal(tick, "row and col must be 0 or 1"));
                }
                self.game
                    .on_slide(FacetAddress::new(*face, *row, *col))
                    .map_err(|e| SessionError::illegal(tick, e))?;
            }
            EventKind::Tilt { g } => self.tilt = Some(*g),
            EventKind::Detach { id } => {
                self.mesh
                    .inject(MeshEvent::NodeDetach(*id))
                    .map_err(|e| SessionError::illegal(tick, e))?;
                self.structural();
            }
            EventKind::Attach { id, pos, rot } => {
                self.mesh
                    .inject(MeshEvent::NodeAttach {
                        id: *id,
                        pos: *pos,
                        rot: rot.unwrap_or(Orientation::IDENTITY),
                    })
                    .map_err(|e| SessionError::illegal(tick, e))?;
                self.structural();
            }
        }
        self.events.push(event);
        self.replicate();
        Ok(())
    }

    fn structural(&mut self) {
        match self.config.policy {
            CheatPolicy::Accept => {}
            CheatPolicy::Penalize { points, time_ticks } => {
                self.penalty_points += points;
                self.penalty_ticks += time_ticks;
            }
            CheatPolicy::Forfeit => self.forfeited = true,
        }
        self.game
            .on_structure(self.mesh.assembly().present_facets());
    }

    /// FNV-1a over the assembly, the game's logical state, every node's game
    /// hash and the session counters.
    pub fn state_hash(&self) -> u64 {
        let mut c = Canonical::new();
        self.mesh.assembly().encode(c.buf_mut());
        c.bytes(&self.game.state_bytes());
        for n in self.mesh.nodes() {
            c.u8(n.id().0).u64(n.game_hash());
        }
        c.i64(self.penalty_points)
            .u64(self.penalty_ticks)
            .u64(self.clock)
            .u8(self.phase().code());
        fnv1a(&c.finish())
    }

    pub fn digest(&self) -> SessionDigest {
        SessionDigest {
            final_score: self.status().score,
            final_phase: self.phase(),
            state_hash: self.state_hash(),
            tick_count: self.tick_count(),
        }
    }

    pub fn log(&self) -> String {
        write_log(
            &self.config,
            self.dictionary_digest,
            &self.events,
            self.clock,
        )
    }

    pub fn field(&self) -> Field {
        self.game.field()
    }

    pub fn render(&self) -> Rendered {
        render(&self.game.field(), self.mesh.assembly())
    }

    /// Loads every node's displays with what the engine says they show.
    pub fn sync_displays(&mut self, rendered: &Rendered) {
        let digests: BTreeMap<_, _> = rendered
            .buffers
            .iter()
            .map(|(&k, b)| (k, b.digest()))
            .collect();
        self.mesh.push_displays(&digests);
    }

    /// Pauses the game and runs the mesh alone until it is quiescent.
    /// Returns the mesh ticks used.
    pub fn settle(&mut self, budget: u64) -> Option<u64> {
        let mut used = 0;
        loop {
            let before = self.replicated;
            self.replicate();
            if self.mesh.is_quiescent() && self.replicated == before && self.replicated.is_some() {
                return Some(used);
            }
            if used == budget {
                return None;
            }
            self.mesh.tick();
            used += 1;
        }
    }

    pub fn consistency_check(&self) -> bool {
        consistency_check(&self.mesh, &self.game.state_bytes(), &self.render())
    }
}

/// With the mesh quiescent: every live node reachable from the leader holds
/// the hash of the authoritative state, and every node's displays match the
/// rendering of the engine field.
pub fn consistency_check(sim: &MeshSim, state: &[u8], rendered: &Rendered) -> bool {
    if !sim.is_quiescent() {
        return false;
    }
    let Some(leader) = sim.leader() else {
        return false;
    };
    let want = fnv1a(state);
    let component = sim.component(leader);
    let hashes_agree = component
        .keys()
        .all(|id| sim.node(*id).is_some_and(|n| n.game_hash() == want));
    let displays_agree = sim.live_nodes().all(|n| {
        let expected: BTreeMap<_, _> = rendered
            .buffers
            .range((n.id(), 0)..=(n.id(), u8::MAX))
            .map(|(&(_, f), b)| (f, b.digest()))
            .collect();
        *n.display() == expected
    });
    hashes_agree && displays_agree
}

/// Runs a whole session headless.
pub fn run(
    config: SessionConfig,
    events: &[SessionEvent],
) -> Result<(SessionDigest, String), SessionError> {
    let mut s = Session::new(config)?;
    for e in events {
        s.apply(e.clone())?;
    }
    Ok((s.digest(), s.log()))
}

/// Re-runs a logged session. The dictionary must still hash as recorded.
pub fn replay(log: &str) -> Result<SessionDigest, SessionError> {
    Ok(replay_session(log, None)?.digest())
}

/// Session state after every event up to and including tick `at`, which
/// must not lie past the log's end.
pub fn state_at(log: &str, at: u64) -> Result<Session, SessionError> {
    replay_session(log, Some(at))
}

fn replay_session(log: &str, until: Option<u64>) -> Result<Session, SessionError> {
    let parsed = parse_log(log)?;
    let mut s = Session::new(parsed.config)?;
    if s.dictionary_digest != parsed.dictionary_digest {
        return Err(SessionError::CorruptLog(
            "dictionary differs from the recorded one".into(),
        ));
    }
    let end = parsed.end_tick;
    let until = until.unwrap_or(end);
    if until > end {
        return Err(SessionError::TickOutOfRange { at: until, end });
    }
    for e in parsed.events {
        if e.tick > until {
            break;
        }
        s.apply(e)?;
    }
    s.advance_to(until);
    Ok(s)
}
