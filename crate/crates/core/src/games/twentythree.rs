//! Twenty-three numbered tiles and one blank on the 24 displays. Turns
//! permute tiles; a tile next to the blank can slide into it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{facet_permutation, FaceTurn};
use crate::hash::Canonical;
use crate::surface::{draw_text, facet_neighbors, FacetAddress, Field};

use super::{Game, GameError, GameKind, GamePhase, GameStatus, FACE_COLORS};

pub const SCRAMBLE_MOVES: usize = 100;
const WIN_SCORE: i64 = 100;

/// 0 is the blank; 1–23 are numbered tiles.
pub type Tile = u8;

/// Tile `i + 1` on facet `i` in reading order; blank on the last facet of D.
pub fn goal_labeling() -> [Tile; 24] {
    std::array::from_fn(|i| if i == 23 { 0 } else { i as u8 + 1 })
}

pub fn is_goal(l: &[Tile; 24]) -> bool {
    *l == goal_labeling()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Turn(FaceTurn),
    Slide(FacetAddress),
}

#[derive(Debug, Clone)]
pub struct TwentyThree {
    tiles: [Tile; 24],
    present: [bool; 24],
    phase: GamePhase,
    moves: u64,
    scramble: Vec<Move>,
}

impl TwentyThree {
    /// Goal labeling scrambled by `n` random legal moves, half turns and half
    /// slides on average.
    pub fn new(seed: u64, n: usize) -> TwentyThree {
        let mut g = TwentyThree {
            tiles: goal_labeling(),
            present: [true; 24],
            phase: GamePhase::Running,
            moves: 0,
            scramble: Vec::with_capacity(n),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n {
            let m = if rng.random_bool(0.5) {
                Move::Turn(FaceTurn::all()[rng.random_range(0..12)])
            } else {
                let around = facet_neighbors(g.blank());
                Move::Slide(around[rng.random_range(0..4)])
            };
            g.apply(m).expect("scramble moves are legal");
            g.scramble.push(m);
        }
        g.moves = 0;
        g
    }

    pub fn tiles(&self) -> &[Tile; 24] {
        &self.tiles
    }

    pub fn blank(&self) -> FacetAddress {
        FacetAddress::from_index(self.tiles.iter().position(|&t| t == 0).expect("one blank"))
    }

    /// Moves that undo the scramble, in order.
    pub fn solution(&self) -> Vec<Move> {
        let mut blank = FacetAddress::from_index(23);
        let mut inverse = Vec::with_capacity(self.scramble.len());
        for &m in &self.scramble {
            inverse.push(match m {
                Move::Turn(t) => {
                    blank = facet_permutation(t).image(blank);
                    Move::Turn(t.inverse())
                }
                Move::Slide(from) => {
                    let undo = Move::Slide(blank);
                    blank = from;
                    undo
                }
            });
        }
        inverse.reverse();
        inverse
    }

    fn apply(&mut self, m: Move) -> Result<(), GameError> {
        match m {
            Move::Turn(t) => self.tiles = facet_permutation(t).transport(&self.tiles),
            Move::Slide(from) => {
                let blank = self.blank();
                if !facet_neighbors(blank).contains(&from) {
                    return Err(GameError::NotAdjacent(from));
                }
                if !self.present[from.index()] || !self.present[blank.index()] {
                    return Err(GameError::AbsentFacet(from));
                }
                self.tiles.swap(from.index(), blank.index());
            }
        }
        Ok(())
    }

    fn after_move(&mut self) {
        self.moves += 1;
        if self.phase == GamePhase::Running && is_goal(&self.tiles) {
            self.phase = GamePhase::Won;
        }
    }
}

impl Game for TwentyThree {
    fn kind(&self) -> GameKind {
        GameKind::TwentyThree
    }

    fn on_turn(&mut self, t: FaceTurn) {
        self.present = facet_permutation(t).transport(&self.present);
        self.apply(Move::Turn(t)).expect("turns are always legal");
        self.after_move();
    }

    fn on_slide(&mut self, from: FacetAddress) -> Result<(), GameError> {
        self.apply(Move::Slide(from))?;
        self.after_move();
        Ok(())
    }

    fn on_structure(&mut self, present: [bool; 24]) {
        self.present = present;
    }

    fn field(&self) -> Field {
        let mut field = Field::uniform([0; 3]);
        for f in FacetAddress::all() {
            let tile = self.tiles[f.index()];
            if tile == 0 || !self.present[f.index()] {
                continue;
            }
            let home = FacetAddress::from_index(tile as usize - 1).face;
            field.fill_facet(f, FACE_COLORS[home.index()]);
            let ink = if home.index() == 0 || home.index() == 5 {
                [20, 20, 20]
            } else {
                [255, 255, 255]
            };
            draw_text(&mut field, f, &tile.to_string(), ink, 8);
        }
        field
    }

    fn status(&self) -> GameStatus {
        let placed = self
            .tiles
            .iter()
            .zip(goal_labeling())
            .filter(|(a, b)| *a == b && *a != &0)
            .count();
        GameStatus {
            score: if self.phase == GamePhase::Won {
                WIN_SCORE
            } else {
                0
            },
            phase: self.phase,
            message: format!("{placed}/23 in place"),
        }
    }

    fn encode_state(&self, out: &mut Canonical) {
        for &t in &self.tiles {
            out.u8(t);
        }
        for &p in &self.present {
            out.u8(p as u8);
        }
        out.u8(self.phase.code()).u64(self.moves);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Axis, TurnDir};
    use crate::surface::GlobalFace;

    #[test]
    fn zero_moves_is_the_goal() {
        let g = TwentyThree::new(3, 0);
        assert!(is_goal(g.tiles()));
        assert_eq!(g.blank(), FacetAddress::new(GlobalFace::D, 1, 1));
        assert_eq!(g.status().phase, GamePhase::Running);
    }

    #[test]
    fn one_turn_breaks_the_goal_and_four_restore_it() {
        for t in FaceTurn::all() {
            let mut g = TwentyThree::new(0, 0);
            g.on_turn(t);
            assert!(!is_goal(g.tiles()));
            for _ in 0..3 {
                g.on_turn(t);
            }
            assert!(is_goal(g.tiles()));
            assert_eq!(g.status().phase, GamePhase::Won);
        }
    }

    #[test]
    fn swapped_tiles_are_not_the_goal() {
        let mut l = goal_labeling();
        l.swap(0, 1);
        assert!(!is_goal(&l));
    }

    #[test]
    fn slide_and_back_is_identity() {
        let mut g = TwentyThree::new(0, 0);
        let start = *g.tiles();
        let blank = g.blank();
        let from = facet_neighbors(blank)[0];
        g.on_slide(from).unwrap();
        assert_eq!(g.blank(), from);
        g.on_slide(blank).unwrap();
        assert_eq!(*g.tiles(), start);
    }

    #[test]
    fn slide_from_far_away_is_rejected() {
        let mut g = TwentyThree::new(0, 0);
        let far = FacetAddress::new(GlobalFace::U, 0, 0);
        assert_eq!(g.on_slide(far), Err(GameError::NotAdjacent(far)));
    }

    #[test]
    fn scramble_then_solution_wins() {
        for seed in 0..20 {
            let mut g = TwentyThree::new(seed, SCRAMBLE_MOVES);
            assert!(!is_goal(g.tiles()), "seed {seed}");
            for m in g.solution() {
                match m {
                    Move::Turn(t) => g.on_turn(t),
                    Move::Slide(f) => g.on_slide(f).unwrap(),
                }
            }
            assert!(is_goal(g.tiles()));
            assert_eq!(g.status().phase, GamePhase::Won);
            assert_eq!(g.status().score, WIN_SCORE);
        }
    }

    #[test]
    fn absent_facets_block_slides() {
        let mut g = TwentyThree::new(0, 0);
        let from = facet_neighbors(g.blank())[1];
        let mut present = [true; 24];
        present[from.index()] = false;
        g.on_structure(present);
        assert!(matches!(g.on_slide(from), Err(GameError::AbsentFacet(_))));
        let t = FaceTurn::new(Axis::Y, -1, TurnDir::Cw).unwrap();
        g.on_turn(t);
        assert_eq!(g.present.iter().filter(|p| !**p).count(), 1);
    }
}
