//! Firmware of one cubio. A node sees nothing but its own ports: carrier
//! up/down events and the frames arriving on them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{CubioId, LocalFace};
use crate::hash::fnv1a;

use super::frame::{Frame, FrameBody, LeaderClaim, Lsa};

/// Ticks between retransmissions of unacknowledged frames.
pub const RETRANSMIT_TICKS: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Boot,
    Probing,
    Synced,
    Degraded,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Boot => "BOOT",
            Phase::Probing => "PROBING",
            Phase::Synced => "SYNCED",
            Phase::Degraded => "DEGRADED",
        }
    }
}

/// Adjacency of the component a node believes it belongs to, with the LSA
/// version each member last advertised.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TopoView {
    pub versions: BTreeMap<CubioId, u32>,
    pub adjacency: BTreeMap<CubioId, BTreeSet<CubioId>>,
}

impl TopoView {
    pub fn members(&self) -> impl Iterator<Item = CubioId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn contains(&self, id: CubioId) -> bool {
        self.adjacency.contains_key(&id)
    }
}

#[derive(Debug, Clone)]
struct Pending {
    seq: u32,
    body: FrameBody,
    sent_at: Option<u64>,
}

/// Go-back-N session on one live port.
#[derive(Debug, Clone, Default)]
struct PortSession {
    next_tx: u32,
    rx_next: u32,
    outbox: VecDeque<Pending>,
    ack_due: bool,
}

#[derive(Debug, Clone)]
struct Election {
    term: u32,
    ballots: BTreeMap<CubioId, u64>,
}

#[derive(Debug, Clone)]
pub struct Node {
    id: CubioId,
    phase: Phase,
    rng: ChaCha8Rng,
    ports: BTreeMap<LocalFace, PortSession>,
    neighbor_view: BTreeMap<LocalFace, CubioId>,
    lsdb: BTreeMap<CubioId, Lsa>,
    own_version: u32,
    topo_view: TopoView,
    best_claim: Option<LeaderClaim>,
    leader: Option<LeaderClaim>,
    election: Option<Election>,
    delta: Option<(u32, u64, Arc<Vec<u8>>)>,
    game_hash: u64,
    display: BTreeMap<LocalFace, u64>,
}

impl Node {
    pub fn new(id: CubioId, seed: u64) -> Node {
        let node_seed = seed ^ (u64::from(id.0) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Node {
            id,
            phase: Phase::Boot,
            rng: ChaCha8Rng::seed_from_u64(node_seed),
            ports: BTreeMap::new(),
            neighbor_view: BTreeMap::new(),
            lsdb: BTreeMap::new(),
            own_version: 0,
            topo_view: TopoView::default(),
            best_claim: None,
            leader: None,
            election: None,
            delta: None,
            game_hash: fnv1a(&[]),
            display: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> CubioId {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn neighbor_view(&self) -> &BTreeMap<LocalFace, CubioId> {
        &self.neighbor_view
    }

    pub fn topo_view(&self) -> &TopoView {
        &self.topo_view
    }

    /// The recorded leader, if it is reachable in the current view.
    pub fn leader(&self) -> Option<CubioId> {
        self.leader.map(|c| c.leader)
    }

    pub fn leader_claim(&self) -> Option<LeaderClaim> {
        self.leader
    }

    pub fn game_hash(&self) -> u64 {
        self.game_hash
    }

    pub fn delta_seq(&self) -> u64 {
        self.delta.as_ref().map_or(0, |d| d.1)
    }

    /// `(leader term, seq)` of the held snapshot.
    pub fn delta_version(&self) -> (u32, u64) {
        self.delta.as_ref().map_or((0, 0), |d| (d.0, d.1))
    }

    pub fn display(&self) -> &BTreeMap<LocalFace, u64> {
        &self.display
    }

    pub fn electing(&self) -> bool {
        self.election.is_some()
    }

    /// No frame waits for transmission or acknowledgement.
    pub fn is_idle(&self) -> bool {
        self.ports
            .values()
            .all(|p| p.outbox.is_empty() && !p.ack_due)
    }

    pub(crate) fn set_display(&mut self, display: BTreeMap<LocalFace, u64>) {
        self.display = display;
    }

    #[doc(hidden)]
    pub fn corrupt_game_hash(&mut self, h: u64) {
        self.game_hash = h;
    }

    pub fn on_port_up(&mut self, port: LocalFace) {
        self.ports.insert(port, PortSession::default());
        self.neighbor_view.remove(&port);
        self.degrade();
        if self.phase != Phase::Boot {
            self.send(port, FrameBody::Hello { port });
        }
    }

    pub fn on_port_down(&mut self, port: LocalFace) {
        self.ports.remove(&port);
        self.neighbor_view.remove(&port);
        self.degrade();
    }

    fn degrade(&mut self) {
        if self.phase == Phase::Synced {
            self.phase = Phase::Degraded;
        }
    }

    /// Ports with a live carrier.
    pub fn live_ports(&self) -> impl Iterator<Item = LocalFace> + '_ {
        self.ports.keys().copied()
    }

    fn send(&mut self, port: LocalFace, body: FrameBody) {
        if let Some(s) = self.ports.get_mut(&port) {
            let seq = s.next_tx;
            s.next_tx += 1;
            s.outbox.push_back(Pending {
                seq,
                body,
                sent_at: None,
            });
        }
    }

    fn flood(&mut self, body: FrameBody, except: Option<LocalFace>) {
        let ports: Vec<_> = self
            .ports
            .keys()
            .copied()
            .filter(|&p| Some(p) != except)
            .collect();
        for p in ports {
            self.send(p, body.clone());
        }
    }

    pub fn on_frame(&mut self, port: LocalFace, frame: Frame) {
        let Some(session) = self.ports.get_mut(&port) else {
            return;
        };
        if let FrameBody::Ack { next } = frame.body {
            while session.outbox.front().is_some_and(|p| p.seq < next) {
                session.outbox.pop_front();
            }
            return;
        }
        session.ack_due = true;
        if frame.seq != session.rx_next {
            return;
        }
        session.rx_next += 1;
        self.handle(port, frame.src, frame.body);
    }

    fn handle(&mut self, port: LocalFace, src: CubioId, body: FrameBody) {
        match body {
            FrameBody::Hello { .. } => {
                self.neighbor_view.insert(port, src);
                self.sync_database(port);
            }
            FrameBody::Topo(lsa) => {
                if lsa.origin == self.id {
                    return;
                }
                let newer = self
                    .lsdb
                    .get(&lsa.origin)
                    .is_none_or(|old| lsa.version > old.version);
                if newer {
                    self.lsdb.insert(lsa.origin, lsa.clone());
                    self.flood(FrameBody::Topo(lsa), Some(port));
                }
            }
            FrameBody::Elect {
                origin,
                term,
                nonce,
            } => {
                if term <= self.best_term() {
                    return;
                }
                if self.election.as_ref().is_none_or(|e| e.term < term) {
                    self.start_election(term);
                }
                let e = self.election.as_mut().expect("election running");
                if e.term == term && !e.ballots.contains_key(&origin) {
                    e.ballots.insert(origin, nonce);
                    self.flood(
                        FrameBody::Elect {
                            origin,
                            term,
                            nonce,
                        },
                        Some(port),
                    );
                }
            }
            FrameBody::Leader(claim) => {
                if self.best_claim.is_none_or(|b| claim > b) {
                    self.best_claim = Some(claim);
                    self.flood(FrameBody::Leader(claim), Some(port));
                }
            }
            FrameBody::Delta { term, seq, payload } => {
                if (term, seq) > self.delta_version() {
                    self.apply_delta(term, seq, payload.clone());
                    self.flood(FrameBody::Delta { term, seq, payload }, Some(port));
                }
            }
            FrameBody::Ack { .. } => unreachable!("acks are consumed by the transport"),
        }
    }

    /// Brings a freshly identified neighbour up to date.
    fn sync_database(&mut self, port: LocalFace) {
        if let Some(c) = self.best_claim {
            self.send(port, FrameBody::Leader(c));
        }
        let lsas: Vec<_> = self.lsdb.values().cloned().collect();
        for lsa in lsas {
            self.send(port, FrameBody::Topo(lsa));
        }
        if let Some(e) = &self.election {
            let term = e.term;
            let ballots: Vec<_> = e.ballots.iter().map(|(&o, &n)| (o, n)).collect();
            for (origin, nonce) in ballots {
                self.send(
                    port,
                    FrameBody::Elect {
                        origin,
                        term,
                        nonce,
                    },
                );
            }
        }
        if let Some((term, seq, payload)) = self.delta.clone() {
            self.send(port, FrameBody::Delta { term, seq, payload });
        }
    }

    fn apply_delta(&mut self, term: u32, seq: u64, payload: Arc<Vec<u8>>) {
        self.game_hash = fnv1a(&payload);
        self.delta = Some((term, seq, payload));
    }

    fn best_term(&self) -> u32 {
        self.best_claim.map_or(0, |c| c.term)
    }

    fn start_election(&mut self, term: u32) {
        let nonce: u64 = self.rng.random();
        let mut ballots = BTreeMap::new();
        ballots.insert(self.id, nonce);
        self.election = Some(Election { term, ballots });
        self.flood(
            FrameBody::Elect {
                origin: self.id,
                term,
                nonce,
            },
            None,
        );
    }

    /// Starts a fresh election above every term this node has seen.
    pub fn call_election(&mut self) {
        let term = self
            .best_term()
            .max(self.election.as_ref().map_or(0, |e| e.term))
            + 1;
        self.start_election(term);
    }

    /// Leader-side publication of a new game-state snapshot.
    pub fn publish_delta(&mut self, payload: Vec<u8>) -> u64 {
        let term = self.best_term().max(self.delta_version().0);
        let seq = self.delta_seq() + 1;
        let payload = Arc::new(payload);
        self.apply_delta(term, seq, payload.clone());
        self.flood(FrameBody::Delta { term, seq, payload }, None);
        seq
    }

    fn probing_complete(&self) -> bool {
        self.ports
            .keys()
            .all(|p| self.neighbor_view.contains_key(p))
    }

    /// Every neighbour holds this node's current advertisement.
    fn own_lsa_delivered(&self) -> bool {
        let id = self.id;
        self.ports.values().all(|s| {
            s.outbox
                .iter()
                .all(|p| !matches!(&p.body, FrameBody::Topo(l) if l.origin == id))
        })
    }

    fn refresh_own_lsa(&mut self) {
        if !self.probing_complete() {
            return;
        }
        let neighbors: BTreeSet<CubioId> = self.neighbor_view.values().copied().collect();
        if self
            .lsdb
            .get(&self.id)
            .is_some_and(|l| l.neighbors == neighbors)
        {
            return;
        }
        self.own_version += 1;
        let lsa = Lsa {
            origin: self.id,
            version: self.own_version,
            neighbors,
        };
        self.lsdb.insert(self.id, lsa.clone());
        self.flood(FrameBody::Topo(lsa), None);
    }

    /// Reachable component over mutually confirmed adjacencies, and whether
    /// every member's advertisement is present and consistent.
    fn compute_view(&self) -> (TopoView, bool) {
        let mut view = TopoView::default();
        let mut complete =
            self.probing_complete() && self.own_lsa_delivered() && self.lsdb.contains_key(&self.id);
        let mut queue = VecDeque::from([self.id]);
        let mut seen = BTreeSet::from([self.id]);
        while let Some(x) = queue.pop_front() {
            let Some(lsa) = self.lsdb.get(&x) else {
                complete = false;
                view.adjacency.insert(x, BTreeSet::new());
                continue;
            };
            view.versions.insert(x, lsa.version);
            let mut adj = BTreeSet::new();
            for &y in &lsa.neighbors {
                match self.lsdb.get(&y) {
                    Some(other) if other.neighbors.contains(&x) => {
                        adj.insert(y);
                        if seen.insert(y) {
                            queue.push_back(y);
                        }
                    }
                    _ => complete = false,
                }
            }
            view.adjacency.insert(x, adj);
        }
        (view, complete)
    }

    fn run_leader_logic(&mut self) {
        let best_term = self.best_term();
        if self.election.as_ref().is_some_and(|e| e.term <= best_term) {
            self.election = None;
        }
        let leader_reachable = self
            .best_claim
            .is_some_and(|c| self.topo_view.contains(c.leader));
        if self.election.is_none() && !leader_reachable {
            self.start_election(best_term + 1);
        }
        if let Some(e) = &self.election {
            let members: Vec<CubioId> = self.topo_view.members().collect();
            if members.iter().all(|m| e.ballots.contains_key(m)) {
                let claim = members
                    .iter()
                    .map(|&m| LeaderClaim {
                        term: e.term,
                        nonce: e.ballots[&m],
                        leader: m,
                    })
                    .max()
                    .expect("view contains self");
                self.election = None;
                if self.best_claim.is_none_or(|b| claim > b) {
                    self.best_claim = Some(claim);
                    self.flood(FrameBody::Leader(claim), None);
                }
            }
        }
        self.leader = match self.election {
            Some(_) => None,
            None => self
                .best_claim
                .filter(|c| self.topo_view.contains(c.leader)),
        };
    }

    /// One tick of firmware: state machine, then transmit.
    pub fn on_tick(&mut self, now: u64) -> Vec<(LocalFace, Frame)> {
        if self.phase == Phase::Boot {
            self.phase = Phase::Probing;
            let ports: Vec<_> = self.ports.keys().copied().collect();
            for p in ports {
                self.send(p, FrameBody::Hello { port: p });
            }
        }
        self.refresh_own_lsa();
        let (view, complete) = self.compute_view();
        self.topo_view = view;
        self.phase = if complete {
            Phase::Synced
        } else if matches!(self.phase, Phase::Synced | Phase::Degraded) {
            Phase::Degraded
        } else {
            Phase::Probing
        };
        if self.phase == Phase::Synced {
            self.run_leader_logic();
        } else {
            self.leader = self.leader.filter(|c| self.topo_view.contains(c.leader));
        }
        self.transmit(now)
    }

    fn transmit(&mut self, now: u64) -> Vec<(LocalFace, Frame)> {
        let mut out = Vec::new();
        for (&port, s) in self.ports.iter_mut() {
            let stale = s
                .outbox
                .front()
                .and_then(|p| p.sent_at)
                .is_some_and(|t| now >= t + RETRANSMIT_TICKS);
            for p in s.outbox.iter_mut() {
                if stale || p.sent_at.is_none() {
                    p.sent_at = Some(now);
                    out.push((
                        port,
                        Frame {
                            src: self.id,
                            seq: p.seq,
                            body: p.body.clone(),
                        },
                    ));
                }
            }
            if s.ack_due {
                s.ack_due = false;
                out.push((
                    port,
                    Frame {
                        src: self.id,
                        seq: s.rx_next,
                        body: FrameBody::Ack { next: s.rx_next },
                    },
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire(a: &mut Node, pa: LocalFace, b: &mut Node, pb: LocalFace, ticks: u64) {
        // Lossless two-node exchange over a single link.
        a.on_port_up(pa);
        b.on_port_up(pb);
        for now in 1..=ticks {
            let fa = a.on_tick(now);
            let fb = b.on_tick(now);
            for (_, f) in fa {
                b.on_frame(pb, f);
            }
            for (_, f) in fb {
                a.on_frame(pa, f);
            }
        }
    }

    #[test]
    fn isolated_node_syncs_and_leads_itself() {
        let mut n = Node::new(CubioId(4), 1);
        n.on_tick(1);
        assert_eq!(n.phase(), Phase::Synced);
        n.on_tick(2);
        assert_eq!(n.leader(), Some(CubioId(4)));
    }

    #[test]
    fn pair_discovers_each_other_and_agrees() {
        let mut a = Node::new(CubioId(0), 9);
        let mut b = Node::new(CubioId(1), 9);
        wire(&mut a, 1, &mut b, 0, 10);
        assert_eq!(a.phase(), Phase::Synced);
        assert_eq!(b.phase(), Phase::Synced);
        assert_eq!(a.neighbor_view().get(&1), Some(&CubioId(1)));
        assert_eq!(a.topo_view(), b.topo_view());
        assert!(a.leader().is_some());
        assert_eq!(a.leader(), b.leader());
        assert!(a.is_idle() && b.is_idle());
    }

    #[test]
    fn duplicate_and_out_of_order_frames_are_ignored() {
        let mut a = Node::new(CubioId(0), 3);
        a.on_port_up(1);
        let hello = |seq| Frame {
            src: CubioId(1),
            seq,
            body: FrameBody::Hello { port: 0 },
        };
        a.on_frame(1, hello(1));
        assert!(a.neighbor_view().is_empty());
        a.on_frame(1, hello(0));
        a.on_frame(1, hello(0));
        assert_eq!(a.neighbor_view().get(&1), Some(&CubioId(1)));
    }
}
