//! Each face starts in its own colour; every turn carries colours onto
//! neighbouring faces and blends each touched face toward its mean.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{facet_permutation, FaceTurn};
use crate::hash::Canonical;
use crate::surface::{FacetAddress, Field};

use super::{Game, GameKind, GamePhase, GameStatus, FACE_COLORS};

pub const ALPHA: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct ColorMix {
    colors: [[f64; 3]; 24],
    present: [bool; 24],
    alpha: f64,
    turns: u64,
}

impl ColorMix {
    /// The six face colours are dealt to the faces in seeded order.
    pub fn new(seed: u64) -> ColorMix {
        let mut palette = FACE_COLORS;
        palette.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        ColorMix {
            colors: std::array::from_fn(|i| palette[i / 4].map(f64::from)),
            present: [true; 24],
            alpha: ALPHA,
            turns: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> ColorMix {
        assert!(
            alpha > 0.0 && alpha < 1.0,
            "alpha must lie strictly between 0 and 1"
        );
        self.alpha = alpha;
        self
    }

    pub fn colors(&self) -> &[[f64; 3]; 24] {
        &self.colors
    }

    /// Per-channel sum over all 24 facets.
    pub fn channel_sums(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for c in &self.colors {
            for k in 0..3 {
                s[k] += c[k];
            }
        }
        s
    }

    fn blend_face(&mut self, face: usize) {
        let idx = face * 4..face * 4 + 4;
        let mut mean = [0.0; 3];
        for c in &self.colors[idx.clone()] {
            for k in 0..3 {
                mean[k] += c[k] / 4.0;
            }
        }
        for c in &mut self.colors[idx] {
            for k in 0..3 {
                c[k] = (1.0 - self.alpha) * c[k] + self.alpha * mean[k];
            }
        }
    }
}

impl Game for ColorMix {
    fn kind(&self) -> GameKind {
        GameKind::ColorMix
    }

    fn on_turn(&mut self, t: FaceTurn) {
        let p = facet_permutation(t);
        self.colors = p.transport(&self.colors);
        self.present = p.transport(&self.present);
        let mut touched = [false; 6];
        for f in FacetAddress::all() {
            if p.image(f) != f {
                touched[f.face.index()] = true;
            }
        }
        for (face, _) in touched.iter().enumerate().filter(|(_, t)| **t) {
            self.blend_face(face);
        }
        self.turns += 1;
    }

    fn on_structure(&mut self, present: [bool; 24]) {
        self.present = present;
    }

    fn field(&self) -> Field {
        let mut field = Field::uniform([0; 3]);
        for f in FacetAddress::all() {
            if self.present[f.index()] {
                let rgb = self.colors[f.index()].map(|x| x.round().clamp(0.0, 255.0) as u8);
                field.fill_facet(f, rgb);
            }
        }
        field
    }

    fn status(&self) -> GameStatus {
        GameStatus {
            score: 0,
            phase: GamePhase::Running,
            message: format!("{} turns", self.turns),
        }
    }

    fn encode_state(&self, out: &mut Canonical) {
        for c in &self.colors {
            for &x in c {
                out.f64(x);
            }
        }
        for &p in &self.present {
            out.u8(p as u8);
        }
        out.f64(self.alpha).u64(self.turns);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn starts_with_six_distinct_uniform_faces() {
        let g = ColorMix::new(11);
        let mut seen = BTreeSet::new();
        for face in 0..6 {
            let c = g.colors()[face * 4];
            assert!(g.colors()[face * 4..face * 4 + 4].iter().all(|x| *x == c));
            seen.insert(c.map(|x| x as u8));
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn a_turn_touches_five_faces() {
        for t in FaceTurn::all() {
            let p = facet_permutation(t);
            let faces: BTreeSet<_> = FacetAddress::all()
                .filter(|&f| p.image(f) != f)
                .map(|f| f.face)
                .collect();
            assert_eq!(faces.len(), 5, "{t}");
        }
    }

    #[test]
    fn uniform_faces_are_a_fixed_point_of_blending() {
        let mut g = ColorMix::new(0);
        g.colors = [[7.0, 8.0, 9.0]; 24];
        g.on_turn(FaceTurn::all()[3]);
        assert!(g.colors.iter().all(|c| *c == [7.0, 8.0, 9.0]));
    }

    #[test]
    fn channel_sums_survive_turns() {
        let mut g = ColorMix::new(2);
        let before = g.channel_sums();
        for (k, t) in FaceTurn::all().into_iter().cycle().take(200).enumerate() {
            g.on_turn(if k % 3 == 0 { t.inverse() } else { t });
        }
        let after = g.channel_sums();
        for k in 0..3 {
            assert!((after[k] - before[k]).abs() <= 1e-6 * before[k]);
        }
        // Some mixing happened.
        assert!(g.colors.iter().any(|c| c.iter().any(|x| x.fract() != 0.0)));
    }
}
