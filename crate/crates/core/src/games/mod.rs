//! Games that run on the shared surface. The session owns one game, feeds it
//! turns, slides, tilt samples and structural changes, and reads back a full
//! field every tick.

mod colormix;
mod dictionary;
mod pacsurface;
mod twentythree;
mod wordmatch;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::FaceTurn;
use crate::hash::Canonical;
use crate::surface::{FacetAddress, Field};

pub use colormix::{ColorMix, ALPHA};
pub use dictionary::{Dictionary, DictionaryError, DEFAULT_WORDS};
pub use pacsurface::{PacSurface, CELLS_PER_FACE, DEAD_ZONE};
pub use twentythree::{goal_labeling, is_goal, Move, Tile, TwentyThree, SCRAMBLE_MOVES};
pub use wordmatch::{wordmatch_score, Hit, ScanResult, WordMatch, ALPHABET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    TwentyThree,
    WordMatch,
    PacSurface,
    ColorMix,
}

impl GameKind {
    pub const ALL: [GameKind; 4] = [
        GameKind::TwentyThree,
        GameKind::WordMatch,
        GameKind::PacSurface,
        GameKind::ColorMix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::TwentyThree => "twentythree",
            GameKind::WordMatch => "wordmatch",
            GameKind::PacSurface => "pacsurface",
            GameKind::ColorMix => "colormix",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GameKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GameKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown game {s:?}"))
    }
}

/// Out of `Running` there is no way back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GamePhase {
    Running,
    Won,
    Lost,
    Forfeit,
}

impl GamePhase {
    pub fn as_str(self) -> &'static str {
        match self {
            GamePhase::Running => "Running",
            GamePhase::Won => "Won",
            GamePhase::Lost => "Lost",
            GamePhase::Forfeit => "Forfeit",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for GamePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStatus {
    pub score: i64,
    pub phase: GamePhase,
    pub message: String,
}

/// Gravity direction in the global frame; always a unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TiltVector {
    g: [f64; 3],
}

pub const TILT_TOLERANCE: f64 = 1e-6;

impl TiltVector {
    pub fn new(g: [f64; 3]) -> Result<TiltVector, GameError> {
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > TILT_TOLERANCE {
            return Err(GameError::BadTilt(norm));
        }
        Ok(TiltVector { g })
    }

    pub fn g(&self) -> [f64; 3] {
        self.g
    }
}

impl TryFrom<[f64; 3]> for TiltVector {
    type Error = GameError;

    fn try_from(g: [f64; 3]) -> Result<Self, Self::Error> {
        TiltVector::new(g)
    }
}

impl From<TiltVector> for [f64; 3] {
    fn from(t: TiltVector) -> Self {
        t.g
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("{0} is not adjacent to the blank tile")]
    NotAdjacent(FacetAddress),
    #[error("{0} has no display attached")]
    AbsentFacet(FacetAddress),
    #[error("{0} does not support slides")]
    Unsupported(GameKind),
    #[error("letter {0:?} is outside the alphabet")]
    BadAlphabet(char),
    #[error("tilt vector norm {0} is not 1")]
    BadTilt(f64),
}

/// Runtime interface shared by all games. Every method is deterministic in
/// the game's seed and the sequence of calls.
pub trait Game: Send {
    fn kind(&self) -> GameKind;

    fn on_turn(&mut self, t: FaceTurn);

    fn on_slide(&mut self, _from: FacetAddress) -> Result<(), GameError> {
        Err(GameError::Unsupported(self.kind()))
    }

    /// One tick with the currently held tilt sample, if any.
    fn on_tick(&mut self, _tilt: Option<TiltVector>) {}

    /// Facet presence after an attach or detach.
    fn on_structure(&mut self, present: [bool; 24]);

    fn field(&self) -> Field;

    fn status(&self) -> GameStatus;

    /// Logical state, excluding anything derived for display.
    fn encode_state(&self, out: &mut Canonical);

    fn state_bytes(&self) -> Vec<u8> {
        let mut c = Canonical::new();
        c.u8(self.kind() as u8);
        self.encode_state(&mut c);
        c.finish()
    }
}

/// Builds a game in its initial state.
pub fn new_game(kind: GameKind, seed: u64, dictionary: Option<Dictionary>) -> Box<dyn Game> {
    match kind {
        GameKind::TwentyThree => Box::new(TwentyThree::new(seed, SCRAMBLE_MOVES)),
        GameKind::WordMatch => Box::new(WordMatch::new(seed, dictionary.unwrap_or_default())),
        GameKind::PacSurface => Box::new(PacSurface::new(seed)),
        GameKind::ColorMix => Box::new(ColorMix::new(seed)),
    }
}

/// Palette of the six faces in reading order.
pub(crate) const FACE_COLORS: [[u8; 3]; 6] = [
    [240, 240, 240],
    [20, 170, 60],
    [210, 30, 30],
    [30, 70, 210],
    [250, 140, 20],
    [240, 220, 30],
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilt_norm_is_enforced() {
        assert!(TiltVector::new([0.0, -1.0, 0.0]).is_ok());
        assert!(TiltVector::new([0.6, -0.8, 0.0]).is_ok());
        assert!(matches!(
            TiltVector::new([0.0, -2.0, 0.0]),
            Err(GameError::BadTilt(_))
        ));
        assert!(TiltVector::new([f64::NAN, 0.0, 0.0]).is_err());
        let parsed: Result<TiltVector, _> = serde_json::from_str("[0.0,0.5,0.0]");
        assert!(parsed.is_err());
    }

    #[test]
    fn game_names_round_trip() {
        for k in GameKind::ALL {
            assert_eq!(k.as_str().parse::<GameKind>(), Ok(k));
            let j = serde_json::to_string(&k).unwrap();
            assert_eq!(j, format!("\"{}\"", k.as_str()));
        }
    }

    #[test]
    fn every_game_starts_running_at_zero() {
        for k in GameKind::ALL {
            let g = new_game(k, 7, None);
            let s = g.status();
            assert_eq!((s.score, s.phase), (0, GamePhase::Running), "{k}");
        }
    }
}
