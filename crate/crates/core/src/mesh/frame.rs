use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::geometry::{CubioId, LocalFace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameKind {
    Hello,
    Topo,
    Elect,
    Leader,
    Delta,
    Ack,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Hello => "HELLO",
            FrameKind::Topo => "TOPO",
            FrameKind::Elect => "ELECT",
            FrameKind::Leader => "LEADER",
            FrameKind::Delta => "DELTA",
            FrameKind::Ack => "ACK",
        }
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Link-state advertisement: the neighbours `origin` has confirmed on every
/// one of its live ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lsa {
    pub origin: CubioId,
    pub version: u32,
    pub neighbors: BTreeSet<CubioId>,
}

/// Outcome of an election. Claims are totally ordered; every node adopts the
/// greatest claim whose leader it can reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LeaderClaim {
    pub term: u32,
    pub nonce: u64,
    pub leader: CubioId,
}

impl Ord for LeaderClaim {
    fn cmp(&self, other: &Self) -> Ordering {
        // Equal nonces favour the lower id.
        (self.term, self.nonce, std::cmp::Reverse(self.leader)).cmp(&(
            other.term,
            other.nonce,
            std::cmp::Reverse(other.leader),
        ))
    }
}

impl PartialOrd for LeaderClaim {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameBody {
    Hello {
        port: LocalFace,
    },
    Topo(Lsa),
    Elect {
        origin: CubioId,
        term: u32,
        nonce: u64,
    },
    Leader(LeaderClaim),
    /// Ordered by `(term, seq)`: a newer leader's snapshot wins.
    Delta {
        term: u32,
        seq: u64,
        payload: Arc<Vec<u8>>,
    },
    /// Cumulative: every frame below `next` has arrived.
    Ack {
        next: u32,
    },
}

impl FrameBody {
    pub fn kind(&self) -> FrameKind {
        match self {
            FrameBody::Hello { .. } => FrameKind::Hello,
            FrameBody::Topo(_) => FrameKind::Topo,
            FrameBody::Elect { .. } => FrameKind::Elect,
            FrameBody::Leader(_) => FrameKind::Leader,
            FrameBody::Delta { .. } => FrameKind::Delta,
            FrameBody::Ack { .. } => FrameKind::Ack,
        }
    }
}

/// One transmission over a connector link. `src` is the sending hop; `seq`
/// is the per-link sequence number (the acknowledged position for ACKs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub src: CubioId,
    pub seq: u32,
    pub body: FrameBody,
}

impl Frame {
    pub fn kind(&self) -> FrameKind {
        self.body.kind()
    }
}
