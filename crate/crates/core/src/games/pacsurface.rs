//! Pac-Man on a 16×16 cell grid per face, steered by tilting the cube. The
//! maze, dots and actors ride along with turned layers.

use std::collections::VecDeque;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{facet_permutation, FaceTurn};
use crate::hash::Canonical;
use crate::surface::{FacetAddress, Field, GlobalFace, Grid, Heading, SurfaceCoord};

use super::{Game, GameKind, GamePhase, GameStatus, TiltVector};

pub const CELLS_PER_FACE: u16 = 16;
/// Minimum in-plane tilt that moves Pac-Man.
pub const DEAD_ZONE: f64 = 0.25;
pub const EXTRA_OPENINGS: f64 = 0.15;
pub const POWER_TICKS: u32 = 40;
const GHOST_PERIOD: u64 = 2;
const DOT_POINTS: i64 = 10;
const PELLET_POINTS: i64 = 50;
const GHOST_POINTS: i64 = 200;
const CELL_PX: u16 = 256 / CELLS_PER_FACE;
const GRID: Grid = Grid::new(CELLS_PER_FACE);

const GHOST_COLORS: [[u8; 3]; 4] = [
    [230, 40, 40],
    [250, 150, 200],
    [60, 220, 230],
    [250, 160, 40],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ghost {
    pub cell: SurfaceCoord,
    pub origin: SurfaceCoord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacSurface {
    walls: Vec<u8>,
    dots: Vec<bool>,
    pellets: Vec<bool>,
    pac: SurfaceCoord,
    heading: Heading,
    ghosts: [Ghost; 4],
    present: [bool; 24],
    power: u32,
    tick: u64,
    score: i64,
    eaten: u32,
    phase: GamePhase,
}

fn cell_facet(c: SurfaceCoord) -> FacetAddress {
    let half = CELLS_PER_FACE / 2;
    FacetAddress::new(c.face, (c.v / half) as u8, (c.u / half) as u8)
}

fn wall_bit(h: Heading) -> u8 {
    1 << h.index()
}

impl PacSurface {
    pub fn new(seed: u64) -> PacSurface {
        let n = GRID.len();
        let mut walls = vec![0b1111u8; n];
        let mut edges = Vec::with_capacity(2 * n);
        for c in GRID.coords() {
            for h in Heading::ALL {
                let (d, _) = GRID.step(c, h);
                if GRID.index(c) < GRID.index(d) {
                    edges.push((c, h));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        edges.shuffle(&mut rng);
        let mut sets = UnionFind::<usize>::new(n);
        let mut spare = Vec::new();
        let open = |walls: &mut Vec<u8>, c: SurfaceCoord, h: Heading| {
            let (d, dh) = GRID.step(c, h);
            walls[GRID.index(c)] &= !wall_bit(h);
            walls[GRID.index(d)] &= !wall_bit(dh.reverse());
        };
        for &(c, h) in &edges {
            let d = GRID.step(c, h).0;
            if sets.union(GRID.index(c), GRID.index(d)) {
                open(&mut walls, c, h);
            } else {
                spare.push((c, h));
            }
        }
        let extra = (spare.len() as f64 * EXTRA_OPENINGS).round() as usize;
        for &(c, h) in &spare[..extra] {
            open(&mut walls, c, h);
        }

        let centre = |face, du: u16, dv: u16| SurfaceCoord::new(face, 7 + du, 7 + dv);
        let pac = centre(GlobalFace::F, 0, 0);
        let ghosts = [(0, 0), (1, 0), (0, 1), (1, 1)].map(|(du, dv)| {
            let c = centre(GlobalFace::B, du, dv);
            Ghost { cell: c, origin: c }
        });
        let mut pellets = vec![false; n];
        for face in [GlobalFace::U, GlobalFace::D, GlobalFace::L, GlobalFace::R] {
            pellets[GRID.index(centre(face, 0, 0))] = true;
        }
        let mut dots: Vec<bool> = pellets.iter().map(|p| !p).collect();
        dots[GRID.index(pac)] = false;

        PacSurface {
            walls,
            dots,
            pellets,
            pac,
            heading: Heading::PlusU,
            ghosts,
            present: [true; 24],
            power: 0,
            tick: 0,
            score: 0,
            eaten: 0,
            phase: GamePhase::Running,
        }
    }

    pub fn pac(&self) -> (SurfaceCoord, Heading) {
        (self.pac, self.heading)
    }

    pub fn ghosts(&self) -> &[Ghost; 4] {
        &self.ghosts
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn dots_remaining(&self) -> usize {
        self.dots.iter().filter(|d| **d).count()
    }

    pub fn dots_eaten(&self) -> u32 {
        self.eaten
    }

    pub fn has_dot(&self, c: SurfaceCoord) -> bool {
        self.dots[GRID.index(c)]
    }

    pub fn has_wall(&self, c: SurfaceCoord, h: Heading) -> bool {
        self.walls[GRID.index(c)] & wall_bit(h) != 0
    }

    pub fn is_present(&self, c: SurfaceCoord) -> bool {
        self.present[cell_facet(c).index()]
    }

    #[doc(hidden)]
    pub fn place_pac(&mut self, c: SurfaceCoord, h: Heading) {
        self.pac = c;
        self.heading = h;
    }

    #[doc(hidden)]
    pub fn set_wall(&mut self, c: SurfaceCoord, h: Heading, wall: bool) {
        let (d, dh) = GRID.step(c, h);
        for (cell, side) in [(c, h), (d, dh.reverse())] {
            let w = &mut self.walls[GRID.index(cell)];
            if wall {
                *w |= wall_bit(side);
            } else {
                *w &= !wall_bit(side);
            }
        }
    }

    #[doc(hidden)]
    pub fn park_ghosts(&mut self, c: SurfaceCoord) {
        for g in &mut self.ghosts {
            g.cell = c;
            g.origin = c;
        }
    }

    /// The neighbouring cell reached by heading `h`, unless a wall on either
    /// side or a missing display is in the way.
    pub fn passable(&self, c: SurfaceCoord, h: Heading) -> Option<(SurfaceCoord, Heading)> {
        if self.has_wall(c, h) {
            return None;
        }
        let (d, dh) = GRID.step(c, h);
        if self.has_wall(d, dh.reverse()) || !self.is_present(d) {
            return None;
        }
        Some((d, dh))
    }

    /// Tilt quantized to the nearest heading on face `face`, or nothing
    /// inside the dead zone.
    pub fn steer(face: GlobalFace, tilt: TiltVector) -> Option<Heading> {
        let g = tilt.g();
        let fr = face.frame();
        let comp = |d: crate::geometry::Dir| {
            let v = d.vec();
            g[0] * f64::from(v[0]) + g[1] * f64::from(v[1]) + g[2] * f64::from(v[2])
        };
        let (gu, gv) = (comp(fr.u), comp(fr.v));
        if (gu * gu + gv * gv).sqrt() < DEAD_ZONE {
            return None;
        }
        Some(if gu.abs() >= gv.abs() {
            if gu > 0.0 {
                Heading::PlusU
            } else {
                Heading::MinusU
            }
        } else if gv > 0.0 {
            Heading::PlusV
        } else {
            Heading::MinusV
        })
    }

    fn distances_from(&self, src: SurfaceCoord) -> Vec<u32> {
        let mut dist = vec![u32::MAX; GRID.len()];
        dist[GRID.index(src)] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(c) = queue.pop_front() {
            let dc = dist[GRID.index(c)];
            for h in Heading::ALL {
                if let Some((d, _)) = self.passable(c, h) {
                    let i = GRID.index(d);
                    if dist[i] == u32::MAX {
                        dist[i] = dc + 1;
                        queue.push_back(d);
                    }
                }
            }
        }
        dist
    }

    /// Closest present cell to `c`, ignoring walls.
    fn nearest_present(&self, c: SurfaceCoord) -> SurfaceCoord {
        let mut seen = vec![false; GRID.len()];
        seen[GRID.index(c)] = true;
        let mut queue = VecDeque::from([c]);
        while let Some(x) = queue.pop_front() {
            if self.is_present(x) {
                return x;
            }
            for h in Heading::ALL {
                let d = GRID.step(x, h).0;
                if !std::mem::replace(&mut seen[GRID.index(d)], true) {
                    queue.push_back(d);
                }
            }
        }
        c
    }

    fn eat(&mut self) {
        let i = GRID.index(self.pac);
        if std::mem::take(&mut self.dots[i]) {
            self.score += DOT_POINTS;
            self.eaten += 1;
        }
        if std::mem::take(&mut self.pellets[i]) {
            self.score += PELLET_POINTS;
            self.power = POWER_TICKS;
        }
    }

    fn contact(&mut self) {
        for k in 0..self.ghosts.len() {
            if self.ghosts[k].cell != self.pac {
                continue;
            }
            if self.power > 0 {
                self.score += GHOST_POINTS;
                self.ghosts[k].cell = self.nearest_present(self.ghosts[k].origin);
            } else {
                self.phase = GamePhase::Lost;
                return;
            }
        }
    }

    fn move_ghosts(&mut self) {
        let dist = self.distances_from(self.pac);
        for k in 0..self.ghosts.len() {
            let g = self.ghosts[k].cell;
            let here = dist[GRID.index(g)];
            let best = Heading::ALL
                .into_iter()
                .filter_map(|h| self.passable(g, h).map(|(d, _)| d))
                .min_by_key(|d| dist[GRID.index(*d)]);
            if let Some(d) = best {
                if dist[GRID.index(d)] < here {
                    self.ghosts[k].cell = d;
                }
            }
        }
    }
}

impl Game for PacSurface {
    fn kind(&self) -> GameKind {
        GameKind::PacSurface
    }

    fn on_turn(&mut self, t: FaceTurn) {
        let n = GRID.len();
        let mut walls = vec![0u8; n];
        let mut dots = vec![false; n];
        let mut pellets = vec![false; n];
        for c in GRID.coords() {
            let i = GRID.index(c);
            let j = GRID.index(GRID.transport(c, t));
            dots[j] = self.dots[i];
            pellets[j] = self.pellets[i];
            for h in Heading::ALL {
                if self.walls[i] & wall_bit(h) != 0 {
                    let (d, dh) = GRID.transport_heading(c, h, t);
                    walls[GRID.index(d)] |= wall_bit(dh);
                }
            }
        }
        self.walls = walls;
        self.dots = dots;
        self.pellets = pellets;
        (self.pac, self.heading) = GRID.transport_heading(self.pac, self.heading, t);
        for g in &mut self.ghosts {
            g.cell = GRID.transport(g.cell, t);
            g.origin = GRID.transport(g.origin, t);
        }
        self.present = facet_permutation(t).transport(&self.present);
    }

    fn on_tick(&mut self, tilt: Option<TiltVector>) {
        if self.phase != GamePhase::Running {
            return;
        }
        self.tick += 1;
        if let Some(h) = tilt.and_then(|t| PacSurface::steer(self.pac.face, t)) {
            match self.passable(self.pac, h) {
                Some((d, dh)) => {
                    self.pac = d;
                    self.heading = dh;
                }
                None => self.heading = h,
            }
        }
        self.eat();
        self.contact();
        if self.phase == GamePhase::Running && self.tick.is_multiple_of(GHOST_PERIOD) {
            self.move_ghosts();
            self.contact();
        }
        self.power = self.power.saturating_sub(1);
        if self.phase == GamePhase::Running && self.dots_remaining() == 0 {
            self.phase = GamePhase::Won;
        }
    }

    fn on_structure(&mut self, present: [bool; 24]) {
        self.present = present;
        self.pac = self.nearest_present(self.pac);
        for k in 0..self.ghosts.len() {
            self.ghosts[k].cell = self.nearest_present(self.ghosts[k].cell);
        }
        if self.phase == GamePhase::Running {
            self.contact();
        }
    }

    fn field(&self) -> Field {
        let mut field = Field::uniform([0; 3]);
        let box_at = |field: &mut Field, c: SurfaceCoord, size: u16, rgb| {
            let off = (CELL_PX - size) / 2;
            field.fill_rect(
                c.face,
                c.u * CELL_PX + off,
                c.v * CELL_PX + off,
                size,
                size,
                rgb,
            );
        };
        for c in GRID.coords() {
            if !self.is_present(c) {
                continue;
            }
            let (u0, v0) = (c.u * CELL_PX, c.v * CELL_PX);
            let w = self.walls[GRID.index(c)];
            let blue = [40, 60, 220];
            for h in Heading::ALL {
                if w & wall_bit(h) == 0 {
                    continue;
                }
                let (u, v, du, dv) = match h {
                    Heading::PlusU => (u0 + CELL_PX - 2, v0, 2, CELL_PX),
                    Heading::MinusU => (u0, v0, 2, CELL_PX),
                    Heading::PlusV => (u0, v0 + CELL_PX - 2, CELL_PX, 2),
                    Heading::MinusV => (u0, v0, CELL_PX, 2),
                };
                field.fill_rect(c.face, u, v, du, dv, blue);
            }
            let i = GRID.index(c);
            if self.dots[i] {
                box_at(&mut field, c, 4, [250, 230, 200]);
            }
            if self.pellets[i] {
                box_at(&mut field, c, 8, [255, 160, 60]);
            }
        }
        for (k, g) in self.ghosts.iter().enumerate() {
            let rgb = if self.power > 0 {
                [70, 90, 255]
            } else {
                GHOST_COLORS[k]
            };
            box_at(&mut field, g.cell, 12, rgb);
        }
        box_at(&mut field, self.pac, 12, [255, 230, 0]);
        field
    }

    fn status(&self) -> GameStatus {
        GameStatus {
            score: self.score,
            phase: self.phase,
            message: format!("{} dots left", self.dots_remaining()),
        }
    }

    fn encode_state(&self, out: &mut Canonical) {
        out.buf_mut().extend_from_slice(&self.walls);
        let bits = |v: &[bool]| -> Vec<u8> {
            v.chunks(8)
                .map(|c| {
                    c.iter()
                        .enumerate()
                        .fold(0u8, |a, (i, &b)| a | (u8::from(b) << i))
                })
                .collect()
        };
        out.bytes(&bits(&self.dots)).bytes(&bits(&self.pellets));
        out.u16(GRID.index(self.pac) as u16)
            .u8(self.heading.index() as u8);
        for g in &self.ghosts {
            out.u16(GRID.index(g.cell) as u16)
                .u16(GRID.index(g.origin) as u16);
        }
        out.bytes(&bits(&self.present));
        out.u32(self.power)
            .u64(self.tick)
            .i64(self.score)
            .u32(self.eaten)
            .u8(self.phase.code());
    }
}
