//! The shared game surface: six faces of 256×256 pixels (2×2 displays of
//! 128×128 each) stitched along the twelve cube edges.
//!
//! Every cross-edge transition is computed from a 3D embedding of the
//! surface rather than from hand-written tables. A coordinate on a grid of
//! resolution `res` embeds as `res·n + (2u+1−res)·û + (2v+1−res)·v̂`, where
//! `n` is the face normal and `(û, v̂)` the face frame; cell centres land on
//! odd in-plane coordinates and the face plane sits at `±res`.

mod font;
mod render;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{add, cross, dot, scale, Axis, Dir, FaceTurn, LatticePos, Vec3};

pub use font::draw_text;
pub use render::{
    render, transport_field, write_net_ppm, FacetBuffer, Field, Rendered, Rgb, NET_HEIGHT,
    NET_WIDTH,
};

/// Pixels along one face edge.
pub const FACE_PX: u16 = 256;
/// Pixels along one display edge.
pub const FACET_PX: u16 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GlobalFace {
    U,
    D,
    F,
    B,
    R,
    L,
}

/// In-plane basis of a face: `u` grows to the right, `v` grows downward when
/// the face is viewed from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceFrame {
    pub u: Dir,
    pub v: Dir,
}

impl GlobalFace {
    /// Canonical reading order.
    pub const ALL: [GlobalFace; 6] = [
        GlobalFace::U,
        GlobalFace::F,
        GlobalFace::R,
        GlobalFace::B,
        GlobalFace::L,
        GlobalFace::D,
    ];

    pub fn index(self) -> usize {
        GlobalFace::ALL
            .iter()
            .position(|&f| f == self)
            .expect("listed")
    }

    pub fn normal(self) -> Dir {
        match self {
            GlobalFace::U => Dir::PY,
            GlobalFace::D => Dir::NY,
            GlobalFace::F => Dir::PZ,
            GlobalFace::B => Dir::NZ,
            GlobalFace::R => Dir::PX,
            GlobalFace::L => Dir::NX,
        }
    }

    pub fn from_normal(d: Dir) -> GlobalFace {
        match (d.axis, d.positive) {
            (Axis::Y, true) => GlobalFace::U,
            (Axis::Y, false) => GlobalFace::D,
            (Axis::Z, true) => GlobalFace::F,
            (Axis::Z, false) => GlobalFace::B,
            (Axis::X, true) => GlobalFace::R,
            (Axis::X, false) => GlobalFace::L,
        }
    }

    pub fn frame(self) -> FaceFrame {
        let (u, v) = match self {
            GlobalFace::U => (Dir::PX, Dir::PZ),
            GlobalFace::D => (Dir::PX, Dir::NZ),
            GlobalFace::F => (Dir::PX, Dir::NY),
            GlobalFace::B => (Dir::NX, Dir::NY),
            GlobalFace::R => (Dir::NZ, Dir::NY),
            GlobalFace::L => (Dir::PZ, Dir::NY),
        };
        FaceFrame { u, v }
    }

    pub fn letter(self) -> char {
        match self {
            GlobalFace::U => 'U',
            GlobalFace::D => 'D',
            GlobalFace::F => 'F',
            GlobalFace::B => 'B',
            GlobalFace::R => 'R',
            GlobalFace::L => 'L',
        }
    }

    pub fn from_letter(c: char) -> Option<GlobalFace> {
        GlobalFace::ALL.into_iter().find(|f| f.letter() == c)
    }
}

impl fmt::Display for GlobalFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

pub fn face_frames() -> [(GlobalFace, FaceFrame); 6] {
    GlobalFace::ALL.map(|f| (f, f.frame()))
}

/// One of the 24 displays, addressed by face and 2×2 cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FacetAddress {
    pub face: GlobalFace,
    pub row: u8,
    pub col: u8,
}

impl FacetAddress {
    pub fn new(face: GlobalFace, row: u8, col: u8) -> FacetAddress {
        assert!(row < 2 && col < 2, "facet row/col out of range");
        FacetAddress { face, row, col }
    }

    /// Reading order: faces U,F,R,B,L,D, each row-major.
    pub fn index(self) -> usize {
        self.face.index() * 4 + self.row as usize * 2 + self.col as usize
    }

    pub fn from_index(i: usize) -> FacetAddress {
        FacetAddress {
            face: GlobalFace::ALL[i / 4],
            row: (i % 4 / 2) as u8,
            col: (i % 2) as u8,
        }
    }

    pub fn all() -> impl Iterator<Item = FacetAddress> {
        (0..24).map(FacetAddress::from_index)
    }

    /// The lattice corner whose cubio displays this facet.
    pub fn position(self) -> LatticePos {
        let fr = self.face.frame();
        let p = add(
            add(
                self.face.normal().vec(),
                scale(fr.u.vec(), 2 * i32::from(self.col) - 1),
            ),
            scale(fr.v.vec(), 2 * i32::from(self.row) - 1),
        );
        LatticePos::from_vec(p).expect("facet centre projects onto a corner")
    }
}

impl fmt::Display for FacetAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.face, self.row, self.col)
    }
}

/// A cell on some grid over the surface: pixels, game cells or facets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SurfaceCoord {
    pub face: GlobalFace,
    pub u: u16,
    pub v: u16,
}

impl SurfaceCoord {
    pub fn new(face: GlobalFace, u: u16, v: u16) -> SurfaceCoord {
        SurfaceCoord { face, u, v }
    }
}

impl fmt::Display for SurfaceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.face, self.u, self.v)
    }
}

/// Direction of travel in the frame of the current face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Heading {
    PlusU,
    MinusU,
    PlusV,
    MinusV,
}

impl Heading {
    pub const ALL: [Heading; 4] = [
        Heading::PlusU,
        Heading::MinusU,
        Heading::PlusV,
        Heading::MinusV,
    ];

    pub fn reverse(self) -> Heading {
        match self {
            Heading::PlusU => Heading::MinusU,
            Heading::MinusU => Heading::PlusU,
            Heading::PlusV => Heading::MinusV,
            Heading::MinusV => Heading::PlusV,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Heading::PlusU => 0,
            Heading::MinusU => 1,
            Heading::PlusV => 2,
            Heading::MinusV => 3,
        }
    }

    /// The global direction of this heading on `face`.
    pub fn dir_on(self, face: GlobalFace) -> Dir {
        let fr = face.frame();
        match self {
            Heading::PlusU => fr.u,
            Heading::MinusU => -fr.u,
            Heading::PlusV => fr.v,
            Heading::MinusV => -fr.v,
        }
    }

    /// Re-expresses an in-plane global direction in the frame of `face`.
    pub fn from_dir(face: GlobalFace, d: Dir) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| h.dir_on(face) == d)
    }
}

/// A square grid of `res × res` cells on every face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    res: u16,
}

impl Grid {
    pub const PIXELS: Grid = Grid { res: FACE_PX };
    pub const FACETS: Grid = Grid { res: 2 };

    pub const fn new(res: u16) -> Grid {
        assert!(res >= 1, "grid resolution must be positive");
        Grid { res }
    }

    pub fn res(&self) -> u16 {
        self.res
    }

    pub fn len(&self) -> usize {
        6 * self.res as usize * self.res as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, c: SurfaceCoord) -> usize {
        let r = self.res as usize;
        c.face.index() * r * r + c.v as usize * r + c.u as usize
    }

    pub fn coord(&self, i: usize) -> SurfaceCoord {
        let r = self.res as usize;
        SurfaceCoord {
            face: GlobalFace::ALL[i / (r * r)],
            u: (i % r) as u16,
            v: (i % (r * r) / r) as u16,
        }
    }

    pub fn coords(&self) -> impl Iterator<Item = SurfaceCoord> {
        let g = *self;
        (0..g.len()).map(move |i| g.coord(i))
    }

    pub fn contains(&self, c: SurfaceCoord) -> bool {
        c.u < self.res && c.v < self.res
    }

    /// Scaled 3D position of the cell centre.
    pub fn embed(&self, c: SurfaceCoord) -> Vec3 {
        let r = i32::from(self.res);
        let fr = c.face.frame();
        add(
            add(
                scale(c.face.normal().vec(), r),
                scale(fr.u.vec(), 2 * i32::from(c.u) + 1 - r),
            ),
            scale(fr.v.vec(), 2 * i32::from(c.v) + 1 - r),
        )
    }

    /// Inverse of [`Grid::embed`].
    pub fn locate(&self, p: Vec3) -> Option<SurfaceCoord> {
        let r = i32::from(self.res);
        let i = (0..3).find(|&i| p[i].abs() == r)?;
        let face = GlobalFace::from_normal(Dir {
            axis: Axis::from_index(i),
            positive: p[i] > 0,
        });
        let fr = face.frame();
        let (a, b) = (dot(p, fr.u.vec()), dot(p, fr.v.vec()));
        let in_range = |x: i32| x.abs() < r && (x + r - 1) % 2 == 0;
        (in_range(a) && in_range(b)).then(|| SurfaceCoord {
            face,
            u: ((a + r - 1) / 2) as u16,
            v: ((b + r - 1) / 2) as u16,
        })
    }

    /// Moves one cell. Leaving a face folds over the cube edge onto the
    /// neighbouring face, continuing straight away from the edge.
    pub fn step(&self, c: SurfaceCoord, h: Heading) -> (SurfaceCoord, Heading) {
        let r = i32::from(self.res);
        let p = self.embed(c);
        let hd = h.dir_on(c.face);
        if dot(p, hd.vec()) + 2 < r {
            let q = add(p, scale(hd.vec(), 2));
            return (self.locate(q).expect("interior step stays on face"), h);
        }
        let n = c.face.normal();
        let q = add(add(p, hd.vec()), scale(n.vec(), -1));
        let next = self
            .locate(q)
            .expect("edge step lands on the adjacent face");
        let heading = Heading::from_dir(next.face, -n).expect("inward normal is in-plane");
        (next, heading)
    }

    /// Whether the cell lies in the layer moved by `t`.
    pub fn moved_by(&self, c: SurfaceCoord, t: FaceTurn) -> bool {
        self.embed(c)[t.axis.index()] * i32::from(t.layer) > 0
    }

    /// Where the content of `c` lands after turn `t`.
    pub fn transport(&self, c: SurfaceCoord, t: FaceTurn) -> SurfaceCoord {
        if !self.moved_by(c, t) {
            return c;
        }
        self.locate(t.rotation().apply(self.embed(c)))
            .expect("rotation maps the surface to itself")
    }

    /// Transports a cell together with a heading anchored on it.
    pub fn transport_heading(
        &self,
        c: SurfaceCoord,
        h: Heading,
        t: FaceTurn,
    ) -> (SurfaceCoord, Heading) {
        if !self.moved_by(c, t) {
            return (c, h);
        }
        let dest = self.transport(c, t);
        let d = t.rotation().apply_dir(h.dir_on(c.face));
        (
            dest,
            Heading::from_dir(dest.face, d).expect("rotated heading is in-plane"),
        )
    }
}

/// One pixel step on the pixel grid.
pub fn step(c: SurfaceCoord, h: Heading) -> (SurfaceCoord, Heading) {
    Grid::PIXELS.step(c, h)
}

/// Scaled 3D position of a pixel centre.
pub fn embed(c: SurfaceCoord) -> Vec3 {
    Grid::PIXELS.embed(c)
}

pub fn facet_at(c: SurfaceCoord) -> FacetAddress {
    FacetAddress::new(c.face, (c.v / FACET_PX) as u8, (c.u / FACET_PX) as u8)
}

fn facet_cell(f: FacetAddress) -> SurfaceCoord {
    SurfaceCoord::new(f.face, f.col.into(), f.row.into())
}

fn cell_facet(c: SurfaceCoord) -> FacetAddress {
    FacetAddress::new(c.face, c.v as u8, c.u as u8)
}

/// The four facets sharing a display edge with `f`, in heading order.
pub fn facet_neighbors(f: FacetAddress) -> [FacetAddress; 4] {
    Heading::ALL.map(|h| cell_facet(Grid::FACETS.step(facet_cell(f), h).0))
}

/// The six closed bands of eight facets: for each axis, the band of each
/// layer. Each band runs right-handed about the positive axis.
pub fn facet_rings() -> [[FacetAddress; 8]; 6] {
    let mut rings = [[FacetAddress::from_index(0); 8]; 6];
    let mut k = 0;
    for axis in Axis::ALL {
        for layer in [1, -1] {
            let a = Dir {
                axis,
                positive: true,
            };
            let face = GlobalFace::ALL
                .into_iter()
                .find(|f| f.normal().axis != axis)
                .expect("some face is parallel");
            let start = FacetAddress::all()
                .find(|f| f.face == face && f.position().coord(axis) == layer)
                .expect("two facets per layer");
            let travel = Dir::from_vec(cross(a.vec(), face.normal().vec())).expect("unit");
            let mut c = facet_cell(start);
            let mut h = Heading::from_dir(face, travel).expect("in-plane");
            for slot in rings[k].iter_mut() {
                *slot = cell_facet(c);
                (c, h) = Grid::FACETS.step(c, h);
            }
            debug_assert_eq!(cell_facet(c), start);
            k += 1;
        }
    }
    rings
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn frames_share_one_chirality() {
        for (face, fr) in face_frames() {
            let c = cross(fr.u.vec(), fr.v.vec());
            assert_eq!(c, (-face.normal()).vec(), "{face}");
        }
        assert_eq!(GlobalFace::F.frame().u, Dir::PX);
    }

    #[test]
    fn embed_locate_roundtrip() {
        for res in [1u16, 2, 16, 256] {
            let g = Grid::new(res);
            for c in g.coords() {
                assert_eq!(g.locate(g.embed(c)), Some(c));
            }
        }
        let c = SurfaceCoord::new(GlobalFace::F, 0, 0);
        assert_eq!(Grid::PIXELS.locate(embed(c)), Some(c));
    }

    #[test]
    fn interior_and_edge_steps() {
        let c = SurfaceCoord::new(GlobalFace::F, 10, 10);
        assert_eq!(
            step(c, Heading::PlusU),
            (SurfaceCoord::new(GlobalFace::F, 11, 10), Heading::PlusU)
        );
        let edge = SurfaceCoord::new(GlobalFace::F, 255, 10);
        assert_eq!(
            step(edge, Heading::PlusU),
            (SurfaceCoord::new(GlobalFace::R, 0, 10), Heading::PlusU)
        );
    }

    #[test]
    fn edge_step_matches_embedding_oracle() {
        // The shared-edge point of the source pixel must coincide with the
        // shared-edge point of the destination pixel.
        let src = SurfaceCoord::new(GlobalFace::F, 255, 10);
        let p = embed(src);
        let edge_point = add(p, Dir::PX.vec());
        let dst = step(src, Heading::PlusU).0;
        let q = embed(dst);
        let back_point = add(q, GlobalFace::F.normal().vec());
        assert_eq!(edge_point, back_point);
    }

    #[test]
    fn equator_closes_after_1024_steps() {
        let start = SurfaceCoord::new(GlobalFace::F, 37, 200);
        for h in [Heading::PlusU, Heading::MinusU] {
            let (mut c, mut hh) = (start, h);
            for _ in 0..1024 {
                (c, hh) = step(c, hh);
            }
            assert_eq!((c, hh), (start, h));
        }
    }

    #[test]
    fn facet_at_divides() {
        assert_eq!(
            facet_at(SurfaceCoord::new(GlobalFace::U, 0, 0)),
            FacetAddress::new(GlobalFace::U, 0, 0)
        );
        assert_eq!(
            facet_at(SurfaceCoord::new(GlobalFace::U, 255, 255)),
            FacetAddress::new(GlobalFace::U, 1, 1)
        );
        assert_eq!(
            facet_at(SurfaceCoord::new(GlobalFace::F, 127, 128)),
            FacetAddress::new(GlobalFace::F, 1, 0)
        );
    }

    #[test]
    fn rings_cover_each_facet_twice() {
        let rings = facet_rings();
        let mut count: BTreeMap<FacetAddress, usize> = BTreeMap::new();
        for ring in &rings {
            let distinct: std::collections::BTreeSet<_> = ring.iter().collect();
            assert_eq!(distinct.len(), 8);
            for f in ring {
                *count.entry(*f).or_default() += 1;
            }
        }
        assert_eq!(count.len(), 24);
        assert!(count.values().all(|&n| n == 2));
    }

    #[test]
    fn ring_walk_at_facet_granularity_matches_pixel_walk() {
        // Walking 128 pixels from a facet centre lands in the next ring facet.
        for ring in facet_rings() {
            for w in 0..8 {
                let (a, b) = (ring[w], ring[(w + 1) % 8]);
                let mut c = SurfaceCoord::new(
                    a.face,
                    u16::from(a.col) * 128 + 64,
                    u16::from(a.row) * 128 + 64,
                );
                let mut h = Heading::ALL
                    .into_iter()
                    .find(|&h| {
                        let (mut cc, mut hh) = (c, h);
                        for _ in 0..128 {
                            (cc, hh) = step(cc, hh);
                        }
                        facet_at(cc) == b
                    })
                    .expect("ring neighbour reachable in 128 pixel steps");
                for _ in 0..128 {
                    (c, h) = step(c, h);
                }
                assert_eq!(facet_at(c), b);
            }
        }
    }

    #[test]
    fn facet_neighbors_by_pixel_edge_enumeration() {
        // Oracle: a facet neighbours every facet reached by one pixel step
        // from one of its border pixels.
        for f in FacetAddress::all() {
            let mut oracle = std::collections::BTreeSet::new();
            for du in 0..128u16 {
                for dv in [0u16, 127] {
                    for (u, v) in [(du, dv), (dv, du)] {
                        let c = SurfaceCoord::new(
                            f.face,
                            u16::from(f.col) * 128 + u,
                            u16::from(f.row) * 128 + v,
                        );
                        for h in Heading::ALL {
                            let n = facet_at(step(c, h).0);
                            if n != f {
                                oracle.insert(n);
                            }
                        }
                    }
                }
            }
            let fast: std::collections::BTreeSet<_> = facet_neighbors(f).into_iter().collect();
            assert_eq!(fast, oracle, "{f}");
        }
        let d11 = FacetAddress::new(GlobalFace::D, 1, 1);
        let n = facet_neighbors(d11);
        assert_eq!(n.iter().filter(|x| x.face == GlobalFace::D).count(), 2);
        assert_eq!(n.iter().filter(|x| x.face != GlobalFace::D).count(), 2);
    }

    #[test]
    fn transport_agrees_with_facet_permutation() {
        use crate::geometry::facet_permutation;
        for t in FaceTurn::all() {
            let perm = facet_permutation(t);
            for f in FacetAddress::all() {
                let moved = Grid::FACETS.transport(facet_cell(f), t);
                assert_eq!(cell_facet(moved), perm.image(f), "{t} {f}");
            }
        }
    }
}
