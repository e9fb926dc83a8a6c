use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::games::{GameKind, TiltVector};
use crate::geometry::{Axis, CoreKind, CubioId, FaceTurn, LatticePos, Orientation, TurnDir};
use crate::surface::{FacetAddress, GlobalFace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EventKind {
    Turn {
        axis: Axis,
        layer: i8,
        dir: TurnDir,
    },
    Slide {
        face: GlobalFace,
        row: u8,
        col: u8,
    },
    Tilt {
        g: TiltVector,
    },
    Detach {
        id: CubioId,
    },
    Attach {
        id: CubioId,
        pos: LatticePos,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rot: Option<Orientation>,
    },
}

impl EventKind {
    pub fn turn(t: FaceTurn) -> EventKind {
        EventKind::Turn {
            axis: t.axis,
            layer: t.layer,
            dir: t.dir,
        }
    }

    pub fn slide(f: FacetAddress) -> EventKind {
        EventKind::Slide {
            face: f.face,
            row: f.row,
            col: f.col,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Turn { .. } => "turn",
            EventKind::Slide { .. } => "slide",
            EventKind::Tilt { .. } => "tilt",
            EventKind::Detach { .. } => "detach",
            EventKind::Attach { .. } => "attach",
        }
    }

    pub fn is_structural(&self) -> bool {
        matches!(self, EventKind::Detach { .. } | EventKind::Attach { .. })
    }
}

impl SessionEvent {
    pub fn new(tick: u64, kind: EventKind) -> SessionEvent {
        SessionEvent { tick, kind }
    }
}

/// How mid-game attach and detach are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CheatPolicy {
    #[default]
    Accept,
    /// `points` is added to the score (negative to punish) and `time_ticks`
    /// to the reported duration.
    Penalize {
        points: i64,
        time_ticks: u64,
    },
    Forfeit,
}

impl fmt::Display for CheatPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheatPolicy::Accept => f.write_str("accept"),
            CheatPolicy::Penalize { points, time_ticks } => {
                write!(f, "penalize:{points}:{time_ticks}")
            }
            CheatPolicy::Forfeit => f.write_str("forfeit"),
        }
    }
}

impl FromStr for CheatPolicy {
    type Err = String;

    /// `accept`, `forfeit` or `penalize:POINTS[:TICKS]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("accept"), None, _, _) => Ok(CheatPolicy::Accept),
            (Some("forfeit"), None, _, _) => Ok(CheatPolicy::Forfeit),
            (Some("penalize"), Some(p), t, None) => {
                let points = p
                    .parse()
                    .map_err(|e| format!("bad penalty points {p:?}: {e}"))?;
                let time_ticks = match t {
                    Some(t) => t
                        .parse()
                        .map_err(|e| format!("bad penalty ticks {t:?}: {e}"))?,
                    None => 0,
                };
                Ok(CheatPolicy::Penalize { points, time_ticks })
            }
            _ => Err(format!("unknown policy {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub game: GameKind,
    pub seed: u64,
    #[serde(default)]
    pub policy: CheatPolicy,
    #[serde(default)]
    pub loss_rate: f64,
    #[serde(default = "default_core")]
    pub core: CoreKind,
    #[serde(default)]
    pub dictionary_path: Option<String>,
}

fn default_core() -> CoreKind {
    CoreKind::SteelBall
}

impl SessionConfig {
    pub fn new(game: GameKind, seed: u64) -> SessionConfig {
        SessionConfig {
            game,
            seed,
            policy: CheatPolicy::Accept,
            loss_rate: 0.0,
            core: CoreKind::SteelBall,
            dictionary_path: None,
        }
    }

    pub fn with_policy(mut self, policy: CheatPolicy) -> SessionConfig {
        self.policy = policy;
        self
    }

    pub fn with_loss_rate(mut self, loss_rate: f64) -> SessionConfig {
        self.loss_rate = loss_rate;
        self
    }

    pub fn with_core(mut self, core: CoreKind) -> SessionConfig {
        self.core = core;
        self
    }
}
