//! Virtual-time simulation of the cubio firmware mesh. The simulator owns the
//! physical assembly and the links; nodes only ever see port events and
//! frames.

mod frame;
mod node;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{
    Assembly, CubioId, FaceTurn, GeometryError, LatticePos, LocalFace, Orientation,
};

pub use frame::{Frame, FrameBody, FrameKind, LeaderClaim, Lsa};
pub use node::{Node, Phase, TopoView, RETRANSMIT_TICKS};

/// Ticks a turned layer keeps its inter-layer links down.
pub const DEFAULT_TURN_TICKS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port {
    pub cubio: CubioId,
    pub local_face: LocalFace,
}

impl Port {
    pub fn new(cubio: CubioId, local_face: LocalFace) -> Port {
        Port { cubio, local_face }
    }
}

/// Unordered port pair, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId {
    pub a: Port,
    pub b: Port,
}

impl LinkId {
    pub fn new(x: Port, y: Port) -> LinkId {
        if x <= y {
            LinkId { a: x, b: y }
        } else {
            LinkId { a: y, b: x }
        }
    }

    pub fn other(&self, p: Port) -> Port {
        if p == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub state: LinkState,
    generation: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshEvent {
    LinkDown(LinkId),
    LinkUp(Port, Port),
    NodeDetach(CubioId),
    NodeAttach {
        id: CubioId,
        pos: LatticePos,
        rot: Orientation,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeshError {
    #[error("unknown entity: {0}")]
    UnknownEntity(String),
    #[error("nodes disagree on topology")]
    NoQuorum,
    #[error("no agreed leader")]
    NoLeader,
    #[error("election did not settle within {0} ticks")]
    ElectionTimeout(u64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub kind: &'static str,
    pub src: u8,
    pub dst: u8,
    pub dropped: bool,
    pub seq: u32,
}

#[derive(Debug, Clone)]
struct InFlight {
    deliver: u64,
    link: LinkId,
    generation: u64,
    to: Port,
    frame: Frame,
}

#[derive(Debug, Clone)]
pub struct MeshSim {
    assembly: Assembly,
    nodes: BTreeMap<CubioId, Node>,
    frozen: BTreeSet<CubioId>,
    links: BTreeMap<LinkId, Link>,
    scheduled_up: Vec<(u64, LinkId, u64)>,
    pending: VecDeque<InFlight>,
    clock: u64,
    rng: ChaCha8Rng,
    seed: u64,
    loss_rate: f64,
    turn_ticks: u64,
    next_generation: u64,
    trace: Option<Vec<TraceRecord>>,
}

impl MeshSim {
    /// One node per cubio, every mated port pair linked and Up, clock 0.
    pub fn boot(a: &Assembly, seed: u64, loss_rate: f64) -> MeshSim {
        let mut sim = MeshSim {
            assembly: a.clone(),
            nodes: a.ids().map(|id| (id, Node::new(id, seed))).collect(),
            frozen: BTreeSet::new(),
            links: BTreeMap::new(),
            scheduled_up: Vec::new(),
            pending: VecDeque::new(),
            clock: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            loss_rate: loss_rate.clamp(0.0, 1.0),
            turn_ticks: DEFAULT_TURN_TICKS,
            next_generation: 0,
            trace: None,
        };
        sim.relink(None);
        sim
    }

    pub fn with_trace(mut self) -> MeshSim {
        self.trace = Some(Vec::new());
        self
    }

    pub fn set_turn_ticks(&mut self, ticks: u64) {
        self.turn_ticks = ticks;
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn assembly(&self) -> &Assembly {
        &self.assembly
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node(&self, id: CubioId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    /// Nodes that are part of the assembly and running.
    pub fn live_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes
            .values()
            .filter(|n| !self.frozen.contains(&n.id()))
    }

    pub fn is_frozen(&self, id: CubioId) -> bool {
        self.frozen.contains(&id)
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn up_links(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.links
            .values()
            .filter(|l| l.state == LinkState::Up)
            .map(|l| l.id)
    }

    pub fn pending_frames(&self) -> usize {
        self.pending.len()
    }

    #[doc(hidden)]
    pub fn node_mut(&mut self, id: CubioId) -> Option<&mut Node> {
        self.nodes.get_mut(&id)
    }

    fn new_link(&mut self, id: LinkId, state: LinkState) {
        self.next_generation += 1;
        self.links.insert(
            id,
            Link {
                id,
                state,
                generation: self.next_generation,
            },
        );
    }

    fn notify_up(&mut self, id: LinkId) {
        for p in [id.a, id.b] {
            if let Some(n) = self.nodes.get_mut(&p.cubio) {
                if !self.frozen.contains(&p.cubio) {
                    n.on_port_up(p.local_face);
                }
            }
        }
    }

    fn notify_down(&mut self, id: LinkId) {
        for p in [id.a, id.b] {
            if let Some(n) = self.nodes.get_mut(&p.cubio) {
                if !self.frozen.contains(&p.cubio) {
                    n.on_port_down(p.local_face);
                }
            }
        }
    }

    /// Reconciles links with the mated ports of the assembly. New links come
    /// up immediately, or after `delay` ticks.
    fn relink(&mut self, delay: Option<u64>) {
        let mated: BTreeSet<LinkId> = self
            .assembly
            .mated_ports()
            .into_iter()
            .map(|((a, fa), (b, fb))| LinkId::new(Port::new(a, fa), Port::new(b, fb)))
            .collect();
        let stale: Vec<LinkId> = self
            .links
            .keys()
            .filter(|l| !mated.contains(l))
            .copied()
            .collect();
        for id in stale {
            let link = self.links.remove(&id).expect("present");
            if link.state == LinkState::Up {
                self.notify_down(id);
            }
        }
        for id in mated {
            if self.links.contains_key(&id) {
                continue;
            }
            match delay {
                None => {
                    self.new_link(id, LinkState::Up);
                    self.notify_up(id);
                }
                Some(d) => {
                    self.new_link(id, LinkState::Down);
                    let generation = self.links[&id].generation;
                    self.scheduled_up.push((self.clock + d, id, generation));
                }
            }
        }
    }

    fn record(&mut self, tick: u64, f: &Frame, dst: CubioId, dropped: bool) {
        if let Some(t) = &mut self.trace {
            t.push(TraceRecord {
                tick,
                kind: f.kind().as_str(),
                src: f.src.0,
                dst: dst.0,
                dropped,
                seq: f.seq,
            });
        }
    }

    pub fn tick(&mut self) {
        self.clock += 1;
        let now = self.clock;

        let due: Vec<_> = self
            .scheduled_up
            .iter()
            .filter(|s| s.0 <= now)
            .copied()
            .collect();
        self.scheduled_up.retain(|s| s.0 > now);
        for (_, id, generation) in due {
            if let Some(l) = self.links.get_mut(&id) {
                if l.generation == generation && l.state == LinkState::Down {
                    l.state = LinkState::Up;
                    self.notify_up(id);
                }
            }
        }

        while self.pending.front().is_some_and(|f| f.deliver <= now) {
            let f = self.pending.pop_front().expect("front");
            let live = self
                .links
                .get(&f.link)
                .is_some_and(|l| l.generation == f.generation && l.state == LinkState::Up)
                && !self.frozen.contains(&f.to.cubio);
            let lost = self.loss_rate > 0.0 && self.rng.random::<f64>() < self.loss_rate;
            let dropped = !live || lost;
            self.record(now, &f.frame, f.to.cubio, dropped);
            if !dropped {
                if let Some(n) = self.nodes.get_mut(&f.to.cubio) {
                    n.on_frame(f.to.local_face, f.frame);
                }
            }
        }

        let port_links: BTreeMap<Port, LinkId> = self
            .links
            .values()
            .filter(|l| l.state == LinkState::Up)
            .flat_map(|l| [(l.id.a, l.id), (l.id.b, l.id)])
            .collect();
        for (&id, node) in self.nodes.iter_mut() {
            if self.frozen.contains(&id) {
                continue;
            }
            for (face, frame) in node.on_tick(now) {
                let from = Port::new(id, face);
                let Some(&link) = port_links.get(&from) else {
                    continue;
                };
                self.pending.push_back(InFlight {
                    deliver: now + 1,
                    link,
                    generation: self.links[&link].generation,
                    to: link.other(from),
                    frame,
                });
            }
        }
    }

    pub fn run(&mut self, ticks: u64) {
        for _ in 0..ticks {
            self.tick();
        }
    }

    /// Ticks until `done` holds, at most `budget` ticks. Returns the ticks used.
    pub fn run_until(
        &mut self,
        budget: u64,
        mut done: impl FnMut(&MeshSim) -> bool,
    ) -> Option<u64> {
        for used in 0..=budget {
            if done(self) {
                return Some(used);
            }
            if used < budget {
                self.tick();
            }
        }
        None
    }

    pub fn inject(&mut self, event: MeshEvent) -> Result<(), MeshError> {
        match event {
            MeshEvent::LinkDown(id) => {
                let l = self
                    .links
                    .get_mut(&id)
                    .ok_or_else(|| MeshError::UnknownEntity(format!("link {id:?}")))?;
                if l.state == LinkState::Up {
                    l.state = LinkState::Down;
                    self.notify_down(id);
                }
            }
            MeshEvent::LinkUp(x, y) => {
                let id = LinkId::new(x, y);
                let l = self
                    .links
                    .get_mut(&id)
                    .ok_or_else(|| MeshError::UnknownEntity(format!("link {id:?}")))?;
                if l.state == LinkState::Down {
                    self.next_generation += 1;
                    l.generation = self.next_generation;
                    l.state = LinkState::Up;
                    self.notify_up(id);
                }
            }
            MeshEvent::NodeDetach(id) => {
                if !self.assembly.contains(id) {
                    return Err(MeshError::UnknownEntity(format!("cubio {id}")));
                }
                self.assembly.remove_cubio(id)?;
                self.frozen.insert(id);
                self.relink(None);
            }
            MeshEvent::NodeAttach { id, pos, rot } => {
                self.assembly.attach(id, pos, rot)?;
                if self.frozen.remove(&id) {
                    let node = self.nodes.get_mut(&id).expect("frozen node kept");
                    let stale: Vec<_> = node.live_ports().collect();
                    for p in stale {
                        node.on_port_down(p);
                    }
                } else {
                    self.nodes.insert(id, Node::new(id, self.seed));
                }
                self.relink(None);
            }
        }
        Ok(())
    }

    /// Rotates one layer: its inter-layer links break now and the new ones
    /// come up after the configured turn duration.
    pub fn turn_links(&mut self, t: FaceTurn) -> Result<(), MeshError> {
        self.assembly = self.assembly.apply_turn(t)?;
        self.relink(Some(self.turn_ticks));
        Ok(())
    }

    /// Up-link adjacency as the physical world has it.
    pub fn ground_truth(&self) -> BTreeMap<CubioId, BTreeSet<CubioId>> {
        let mut adj: BTreeMap<CubioId, BTreeSet<CubioId>> = self
            .live_nodes()
            .map(|n| (n.id(), BTreeSet::new()))
            .collect();
        for id in self.up_links() {
            adj.entry(id.a.cubio).or_default().insert(id.b.cubio);
            adj.entry(id.b.cubio).or_default().insert(id.a.cubio);
        }
        adj
    }

    /// Ground-truth connected component containing `id`.
    pub fn component(&self, id: CubioId) -> BTreeMap<CubioId, BTreeSet<CubioId>> {
        let adj = self.ground_truth();
        let mut out = BTreeMap::new();
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            if out.contains_key(&x) {
                continue;
            }
            let ns = adj.get(&x).cloned().unwrap_or_default();
            queue.extend(ns.iter().copied());
            out.insert(x, ns);
        }
        out
    }

    /// Node is SYNCED and its view matches its ground-truth component.
    pub fn node_converged(&self, id: CubioId) -> bool {
        self.nodes.get(&id).is_some_and(|n| {
            n.phase() == Phase::Synced && n.topo_view().adjacency == self.component(id)
        })
    }

    /// Every live node has the true picture of its component.
    pub fn is_synced(&self) -> bool {
        self.live_nodes().all(|n| self.node_converged(n.id()))
    }

    /// Synced, and each component agrees on one of its own members as leader.
    pub fn is_converged(&self) -> bool {
        self.is_synced()
            && self.live_nodes().all(|n| {
                let comp = self.component(n.id());
                n.leader().is_some_and(|l| {
                    comp.contains_key(&l) && comp.keys().all(|m| self.nodes[m].leader() == Some(l))
                })
            })
    }

    /// No frames in flight, no pending link-ups, and nothing left to send.
    pub fn is_quiescent(&self) -> bool {
        self.pending.is_empty()
            && self.scheduled_up.is_empty()
            && self.live_nodes().all(Node::is_idle)
    }

    /// The leader every live node agrees on.
    pub fn leader(&self) -> Option<CubioId> {
        let mut leaders = self.live_nodes().map(Node::leader);
        let first = leaders.next()??;
        leaders.all(|l| l == Some(first)).then_some(first)
    }

    /// Runs a fresh election among all live nodes. Requires every node to be
    /// SYNCED on one shared topology.
    pub fn elect(&mut self, budget: u64) -> Result<CubioId, MeshError> {
        let Some(first) = self.live_nodes().next().map(|n| n.topo_view().clone()) else {
            return Err(MeshError::NoQuorum);
        };
        let agreed = self
            .live_nodes()
            .all(|n| n.phase() == Phase::Synced && n.topo_view() == &first);
        if !agreed || first.adjacency.len() != self.live_nodes().count() {
            return Err(MeshError::NoQuorum);
        }
        let ids: Vec<CubioId> = self.live_nodes().map(Node::id).collect();
        for id in ids {
            self.nodes.get_mut(&id).expect("live").call_election();
        }
        self.run_until(budget, |s| {
            s.leader().is_some() && s.live_nodes().all(|n| !n.electing())
        })
        .ok_or(MeshError::ElectionTimeout(budget))?;
        self.leader().ok_or(MeshError::NoLeader)
    }

    /// Floods a new game-state snapshot from the agreed leader. Returns its
    /// sequence number.
    pub fn replicate(&mut self, payload: Vec<u8>) -> Result<u64, MeshError> {
        let leader = self.leader().ok_or(MeshError::NoLeader)?;
        Ok(self
            .nodes
            .get_mut(&leader)
            .expect("leader is live")
            .publish_delta(payload))
    }

    /// Hands each node the digests of what its displays currently show.
    pub fn push_displays(&mut self, digests: &BTreeMap<(CubioId, LocalFace), u64>) {
        for (&id, node) in self.nodes.iter_mut() {
            if self.frozen.contains(&id) {
                continue;
            }
            let mine = digests
                .range((id, 0)..=(id, LocalFace::MAX))
                .map(|(&(_, f), &d)| (f, d))
                .collect();
            node.set_display(mine);
        }
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.trace() {
            out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
            out.push('\n');
        }
        out
    }
}
