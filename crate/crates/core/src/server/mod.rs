//! Live play over WebSocket. All session mutation happens in one tick loop;
//! connection tasks only parse input and queue it for the next tick.
//!
//! Client messages are JSON objects with a `type` of `start`, `turn`,
//! `slide`, `tilt`, `detach` or `attach`; input fields are those of the
//! session events. The server pushes `frame`, `status` and `mesh` after every
//! tick, and `hello`, `role` and `error` to single clients. Every server
//! message carries `tick`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc};
use tower_http::services::ServeDir;

use crate::games::GameKind;
use crate::mesh::{LinkState, Port};
use crate::session::{CheatPolicy, EventKind, Session, SessionConfig, SessionEvent};
use crate::surface::{FacetAddress, FacetBuffer};

/// 20 ticks per second of wall time.
pub const TICK_MS: u64 = 50;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    /// Used by `start` messages that do not override it.
    pub config: SessionConfig,
    pub assets: Option<PathBuf>,
    pub tick_ms: u64,
}

impl ServeOptions {
    pub fn new(config: SessionConfig) -> ServeOptions {
        ServeOptions {
            config,
            assets: None,
            tick_ms: TICK_MS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Controller,
    Viewer,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Controller => "controller",
            Role::Viewer => "viewer",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StartRequest {
    game: Option<GameKind>,
    seed: Option<u64>,
    policy: Option<String>,
    loss_rate: Option<f64>,
}

#[derive(Debug)]
enum Inbound {
    Start(SessionConfig),
    Input(EventKind),
}

/// Input messages share the session event schema, with `type` in place of
/// `kind` and no `tick`: the server stamps the next tick.
fn parse_inbound(text: &str, defaults: &SessionConfig) -> Result<Inbound, String> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let obj = v.as_object_mut().ok_or("message must be a JSON object")?;
    let ty = obj
        .remove("type")
        .and_then(|t| t.as_str().map(str::to_owned))
        .ok_or("message needs a string \"type\"")?;
    if obj.contains_key("tick") || obj.contains_key("kind") {
        return Err("clients may not set \"tick\" or \"kind\"".into());
    }
    if ty == "start" {
        let req: StartRequest =
            serde_json::from_value(v).map_err(|e| format!("bad start message: {e}"))?;
        let mut c = defaults.clone();
        if let Some(g) = req.game {
            c.game = g;
        }
        if let Some(s) = req.seed {
            c.seed = s;
        }
        if let Some(p) = req.policy {
            c.policy = p.parse::<CheatPolicy>()?;
        }
        if let Some(l) = req.loss_rate {
            if !(0.0..=1.0).contains(&l) {
                return Err(format!("loss rate {l} is outside [0, 1]"));
            }
            c.loss_rate = l;
        }
        return Ok(Inbound::Start(c));
    }
    obj.insert("kind".into(), Value::String(ty.clone()));
    serde_json::from_value(v)
        .map(Inbound::Input)
        .map_err(|e| format!("bad {ty} message: {e}"))
}

type ClientId = u64;

struct Client {
    direct: mpsc::UnboundedSender<Utf8Bytes>,
}

struct Hub {
    defaults: SessionConfig,
    session: Option<Session>,
    pending_start: Option<(ClientId, SessionConfig)>,
    queue: Vec<(ClientId, EventKind)>,
    clients: BTreeMap<ClientId, Client>,
    controller: Option<ClientId>,
    next_id: ClientId,
    /// Most recent tick broadcast, replayed to late joiners.
    last: Vec<Utf8Bytes>,
}

impl Hub {
    fn tick(&self) -> u64 {
        self.session.as_ref().map_or(0, Session::clock)
    }

    fn reply(&self, to: ClientId, msg: Value) {
        if let Some(c) = self.clients.get(&to) {
            let _ = c.direct.send(msg.to_string().into());
        }
    }

    fn error(&self, to: ClientId, message: impl Into<String>) {
        let mut m = json!({"type": "error", "tick": self.tick(), "message": message.into()});
        if self.controller != Some(to) {
            m["role"] = "viewer".into();
        }
        self.reply(to, m);
    }
}

struct Shared {
    hub: Mutex<Hub>,
    broadcast: broadcast::Sender<Utf8Bytes>,
}

impl Shared {
    fn hub(&self) -> MutexGuard<'_, Hub> {
        self.hub.lock().unwrap_or_else(|p| p.into_inner())
    }
}

fn facet_json(f: FacetAddress, buf: &FacetBuffer) -> Value {
    json!({
        "face": f.face.letter().to_string(),
        "row": f.row,
        "col": f.col,
        "px": BASE64.encode(buf.to_bytes()),
    })
}

fn port_json(p: Port) -> Value {
    json!({"cubio": p.cubio.0, "face": p.local_face})
}

/// The three per-tick pushes. Facets whose cubio is missing go out black.
fn tick_messages(s: &Session) -> [Value; 3] {
    let tick = s.clock();
    let field = s.field();
    let present = s.assembly().present_facets();
    let facets: Vec<Value> = FacetAddress::all()
        .map(|f| {
            let buf = if present[f.index()] {
                field.facet_pixels(f)
            } else {
                FacetBuffer::blank()
            };
            facet_json(f, &buf)
        })
        .collect();
    let status = s.status();
    let mesh = s.mesh();
    let nodes: Vec<Value> = mesh
        .nodes()
        .map(|n| {
            json!({
                "id": n.id().0,
                "phase": n.phase().as_str(),
                "leader": n.leader().map(|l| l.0),
                "electing": n.electing(),
                "attached": !mesh.is_frozen(n.id()),
            })
        })
        .collect();
    let links: Vec<Value> = mesh
        .links()
        .map(|l| {
            json!({
                "a": port_json(l.id.a),
                "b": port_json(l.id.b),
                "up": l.state == LinkState::Up,
            })
        })
        .collect();
    [
        json!({"type": "frame", "tick": tick, "facets": facets}),
        json!({
            "type": "status",
            "tick": tick,
            "score": status.score,
            "phase": status.phase,
            "message": status.message,
        }),
        json!({
            "type": "mesh",
            "tick": tick,
            "nodes": nodes,
            "links": links,
            "leader": mesh.leader().map(|l| l.0),
        }),
    ]
}

/// One tick boundary: start a requested session, apply queued input at the
/// next tick, advance, and return what to broadcast.
fn advance(hub: &mut Hub) -> Option<Vec<Utf8Bytes>> {
    let mut changed = false;
    if let Some((from, config)) = hub.pending_start.take() {
        match Session::new(config) {
            Ok(s) => {
                hub.session = Some(s);
                hub.queue.clear();
                changed = true;
            }
            Err(e) => hub.error(from, format!("cannot start: {e}")),
        }
    }
    let queue = std::mem::take(&mut hub.queue);
    let mut errors = Vec::new();
    let s = hub.session.as_mut()?;
    let before = s.clock();
    let next = before + 1;
    for (from, kind) in queue {
        if let Err(e) = s.apply(SessionEvent::new(next, kind)) {
            errors.push((from, e.to_string()));
        }
        changed = true;
    }
    s.advance_to(next);
    changed |= s.clock() != before;
    let out = changed.then(|| {
        tick_messages(s)
            .iter()
            .map(|m| Utf8Bytes::from(m.to_string()))
            .collect::<Vec<_>>()
    });
    for (from, e) in errors {
        hub.error(from, e);
    }
    if let Some(m) = &out {
        hub.last = m.clone();
    }
    out
}

async fn tick_loop(shared: Arc<Shared>, period: Duration) {
    let mut interval = tokio::time::interval(period);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        interval.tick().await;
        let msgs = advance(&mut shared.hub());
        for m in msgs.into_iter().flatten() {
            let _ = shared.broadcast.send(m);
        }
    }
}

fn on_text(shared: &Shared, id: ClientId, text: &str) {
    let mut hub = shared.hub();
    if hub.controller != Some(id) {
        hub.error(id, "viewer clients cannot send input");
        return;
    }
    match parse_inbound(text, &hub.defaults) {
        Ok(Inbound::Start(c)) => hub.pending_start = Some((id, c)),
        Ok(Inbound::Input(_)) if hub.session.is_none() => {
            hub.error(id, "no session running; send start first");
        }
        Ok(Inbound::Input(k)) => hub.queue.push((id, k)),
        Err(e) => hub.error(id, e),
    }
}

async fn client(shared: Arc<Shared>, mut socket: WebSocket) {
    let (tx, mut direct) = mpsc::unbounded_channel();
    let mut pushes = shared.broadcast.subscribe();
    let id = {
        let mut hub = shared.hub();
        let id = hub.next_id;
        hub.next_id += 1;
        hub.clients.insert(id, Client { direct: tx });
        let role = if hub.controller.is_none() {
            hub.controller = Some(id);
            Role::Controller
        } else {
            Role::Viewer
        };
        hub.reply(
            id,
            json!({"type": "hello", "tick": hub.tick(), "role": role.as_str()}),
        );
        for m in hub.last.clone() {
            let _ = hub.clients[&id].direct.send(m);
        }
        id
    };
    tracing::info!(client = id, "connected");
    loop {
        tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(t))) => on_text(&shared, id, t.as_str()),
                Some(Ok(Message::Binary(_))) => shared.hub().error(id, "binary messages are not accepted"),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            Some(m) = direct.recv() => {
                if socket.send(Message::Text(m)).await.is_err() {
                    break;
                }
            }
            pushed = pushes.recv() => match pushed {
                Ok(m) => {
                    if socket.send(Message::Text(m)).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::warn!(client = id, skipped = n, "slow client");
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
        }
    }
    let mut hub = shared.hub();
    hub.clients.remove(&id);
    if hub.controller == Some(id) {
        hub.controller = hub.clients.keys().next().copied();
        if let Some(next) = hub.controller {
            hub.reply(
                next,
                json!({"type": "role", "tick": hub.tick(), "role": "controller"}),
            );
        }
    }
    tracing::info!(client = id, "disconnected");
}

async fn ws(State(shared): State<Arc<Shared>>, upgrade: WebSocketUpgrade) -> Response {
    upgrade.on_upgrade(move |socket| client(shared, socket))
}

/// The running session's log, with its digest in `x-session-digest`.
async fn log(State(shared): State<Arc<Shared>>) -> Response {
    let hub = shared.hub();
    let Some(s) = &hub.session else {
        return (StatusCode::NOT_FOUND, "no session running\n").into_response();
    };
    let mut headers = HeaderMap::new();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/x-ndjson"),
    );
    if let Ok(v) = HeaderValue::from_str(&s.digest().to_json()) {
        headers.insert("x-session-digest", v);
    }
    (headers, s.log()).into_response()
}

const PLACEHOLDER: &str = "<!doctype html>\n<title>cubios</title>\n<p>No UI assets configured. \
Connect a client to <code>/ws</code>, or restart with <code>--assets DIR</code>.</p>\n";

fn router(shared: Arc<Shared>, assets: Option<PathBuf>) -> Router {
    let r = Router::new()
        .route("/ws", get(ws))
        .route("/log", get(log))
        .with_state(shared);
    match assets {
        Some(dir) => r.fallback_service(ServeDir::new(dir)),
        None => r.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

/// Serves until the listener fails.
pub async fn run(listener: TcpListener, opts: ServeOptions) -> std::io::Result<()> {
    let (broadcast, _) = broadcast::channel(64);
    let shared = Arc::new(Shared {
        hub: Mutex::new(Hub {
            defaults: opts.config,
            session: None,
            pending_start: None,
            queue: Vec::new(),
            clients: BTreeMap::new(),
            controller: None,
            next_id: 0,
            last: Vec::new(),
        }),
        broadcast,
    });
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "serving");
    }
    let ticker = tokio::spawn(tick_loop(
        shared.clone(),
        Duration::from_millis(opts.tick_ms.max(1)),
    ));
    let served = axum::serve(listener, router(shared, opts.assets)).await;
    ticker.abort();
    served
}
