//! The physical 2×2×2 assembly: cubios at the eight lattice corners, the
//! quarter turns that permute them, and the induced action on the 24
//! display facets.

mod enumerate;
mod rotation;

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface::{FacetAddress, GlobalFace};

pub use enumerate::{enumerate_states, StateCount, FULL_STATE_COUNT};
pub use rotation::{add, cross, dot, scale, Axis, Dir, Rotation, Vec3};

/// Per-cubio spin is a rotation; the two names are interchangeable.
pub type Orientation = Rotation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("turning requires a central core")]
    CoreMissing,
    #[error("cubio {0} is not in the assembly")]
    UnknownCubio(CubioId),
    #[error("cubio {0} is already in the assembly")]
    DuplicateCubio(CubioId),
    #[error("lattice position {0} is already occupied")]
    Occupied(LatticePos),
    #[error("coordinates ({0}, {1}, {2}) are not a 2x2x2 corner")]
    NotACorner(i32, i32, i32),
    #[error("an assembly holds at most 8 cubios")]
    TooManyCubios,
}

/// Stable identity of a cubio, independent of where it sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CubioId(pub u8);

impl fmt::Display for CubioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A corner of the 2×2×2 block; every coordinate is −1 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i32; 3]", into = "[i32; 3]")]
pub struct LatticePos {
    x: i8,
    y: i8,
    z: i8,
}

impl LatticePos {
    pub fn new(x: i32, y: i32, z: i32) -> Result<LatticePos, GeometryError> {
        let ok = |c: i32| c == 1 || c == -1;
        if ok(x) && ok(y) && ok(z) {
            Ok(LatticePos {
                x: x as i8,
                y: y as i8,
                z: z as i8,
            })
        } else {
            Err(GeometryError::NotACorner(x, y, z))
        }
    }

    /// Corner `i` in 0..8: bit 0 selects +x, bit 1 +y, bit 2 +z.
    pub fn corner(i: u8) -> LatticePos {
        let s = |bit: u8| if i & bit != 0 { 1 } else { -1 };
        LatticePos {
            x: s(1),
            y: s(2),
            z: s(4),
        }
    }

    pub fn corner_index(self) -> u8 {
        u8::from(self.x > 0) | (u8::from(self.y > 0) << 1) | (u8::from(self.z > 0) << 2)
    }

    pub fn all() -> impl Iterator<Item = LatticePos> {
        (0..8).map(LatticePos::corner)
    }

    pub fn vec(self) -> Vec3 {
        [self.x.into(), self.y.into(), self.z.into()]
    }

    pub fn from_vec(v: Vec3) -> Result<LatticePos, GeometryError> {
        LatticePos::new(v[0], v[1], v[2])
    }

    pub fn coord(self, axis: Axis) -> i32 {
        self.vec()[axis.index()]
    }

    /// The three directions pointing out of the block from this corner.
    pub fn outward(self) -> [Dir; 3] {
        let v = self.vec();
        [0, 1, 2].map(|i| Dir {
            axis: Axis::from_index(i),
            positive: v[i] > 0,
        })
    }

    pub fn is_adjacent(self, other: LatticePos) -> bool {
        let (a, b) = (self.vec(), other.vec());
        (0..3).filter(|&i| a[i] != b[i]).count() == 1
    }

    /// The corner reached by crossing the block along `d`, when `d` points inward.
    pub fn neighbor(self, d: Dir) -> Option<LatticePos> {
        let mut v = self.vec();
        let i = d.axis.index();
        if v[i] == -d.sign() {
            v[i] = d.sign();
            LatticePos::from_vec(v).ok()
        } else {
            None
        }
    }
}

impl TryFrom<[i32; 3]> for LatticePos {
    type Error = GeometryError;

    fn try_from(v: [i32; 3]) -> Result<Self, Self::Error> {
        LatticePos::from_vec(v)
    }
}

impl From<LatticePos> for [i32; 3] {
    fn from(p: LatticePos) -> Self {
        p.vec()
    }
}

impl fmt::Display for LatticePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+}, {:+}, {:+})", self.x, self.y, self.z)
    }
}

/// What sits in the middle of the assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreKind {
    SteelBall,
    PocketCubeCore,
    None,
}

/// Pose of one cubio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub pos: LatticePos,
    pub rot: Orientation,
}

/// Index of a cubio's own face, numbered as [`Dir::ALL`] in the cubio frame.
pub type LocalFace = u8;

/// Corner a cubio was manufactured for. Every cubio carries its connectors on
/// the three local faces pointing at the block centre from that corner;
/// ids beyond 7 (cubios from another set) reuse the layout of `id mod 8`.
pub fn home_corner(id: CubioId) -> LatticePos {
    LatticePos::corner(id.0 % 8)
}

pub fn connector_faces(id: CubioId) -> [LocalFace; 3] {
    home_corner(id).outward().map(|d| (-d).index())
}

pub fn display_faces(id: CubioId) -> [LocalFace; 3] {
    home_corner(id).outward().map(|d| d.index())
}

pub fn is_connector(id: CubioId, face: LocalFace) -> bool {
    connector_faces(id).contains(&face)
}

/// The facet occupied by a display facing `dir` from corner `pos`, if `dir`
/// points out of the block.
pub fn facet_of(pos: LatticePos, dir: Dir) -> Option<FacetAddress> {
    if pos.coord(dir.axis) != dir.sign() {
        return None;
    }
    let face = GlobalFace::from_normal(dir);
    let frame = face.frame();
    let col = (dot(pos.vec(), frame.u.vec()) + 1) / 2;
    let row = (dot(pos.vec(), frame.v.vec()) + 1) / 2;
    Some(FacetAddress::new(face, row as u8, col as u8))
}

/// The set of cubios with their poses, plus the central core.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assembly {
    cubios: BTreeMap<CubioId, Placement>,
    core: CoreKind,
}

/// Labels attached to the physical display faces of cubios.
pub type CubioLabels<L> = BTreeMap<(CubioId, LocalFace), L>;

impl Assembly {
    pub fn empty(core: CoreKind) -> Assembly {
        Assembly {
            cubios: BTreeMap::new(),
            core,
        }
    }

    pub fn from_placements(
        core: CoreKind,
        placements: impl IntoIterator<Item = (CubioId, Placement)>,
    ) -> Result<Assembly, GeometryError> {
        let mut a = Assembly::empty(core);
        for (id, p) in placements {
            a.attach(id, p.pos, p.rot)?;
        }
        Ok(a)
    }

    pub fn core(&self) -> CoreKind {
        self.core
    }

    pub fn len(&self) -> usize {
        self.cubios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubios.is_empty()
    }

    pub fn contains(&self, id: CubioId) -> bool {
        self.cubios.contains_key(&id)
    }

    pub fn placement(&self, id: CubioId) -> Option<Placement> {
        self.cubios.get(&id).copied()
    }

    pub fn cubios(&self) -> impl Iterator<Item = (CubioId, Placement)> + '_ {
        self.cubios.iter().map(|(&id, &p)| (id, p))
    }

    pub fn ids(&self) -> impl Iterator<Item = CubioId> + '_ {
        self.cubios.keys().copied()
    }

    pub fn cubio_at(&self, pos: LatticePos) -> Option<CubioId> {
        self.cubios
            .iter()
            .find(|(_, p)| p.pos == pos)
            .map(|(&id, _)| id)
    }

    pub fn attach(
        &mut self,
        id: CubioId,
        pos: LatticePos,
        rot: Orientation,
    ) -> Result<(), GeometryError> {
        if self.cubios.contains_key(&id) {
            return Err(GeometryError::DuplicateCubio(id));
        }
        if self.cubio_at(pos).is_some() {
            return Err(GeometryError::Occupied(pos));
        }
        if self.cubios.len() >= 8 {
            return Err(GeometryError::TooManyCubios);
        }
        self.cubios.insert(id, Placement { pos, rot });
        Ok(())
    }

    pub fn remove_cubio(&mut self, id: CubioId) -> Result<Placement, GeometryError> {
        self.cubios
            .remove(&id)
            .ok_or(GeometryError::UnknownCubio(id))
    }

    /// Pairs of cubios on adjacent corners, each pair once with the smaller id first.
    pub fn adjacent_pairs(&self) -> Vec<(CubioId, CubioId)> {
        let list: Vec<_> = self.cubios().collect();
        let mut out = Vec::new();
        for (i, (a, pa)) in list.iter().enumerate() {
            for (b, pb) in &list[i + 1..] {
                if pa.pos.is_adjacent(pb.pos) {
                    out.push((*a, *b));
                }
            }
        }
        out
    }

    pub fn degree(&self, id: CubioId) -> usize {
        self.adjacent_pairs()
            .iter()
            .filter(|(a, b)| *a == id || *b == id)
            .count()
    }

    /// Connector pairs that physically touch: both sides must be connector faces
    /// facing each other across the block interior.
    pub fn mated_ports(&self) -> Vec<((CubioId, LocalFace), (CubioId, LocalFace))> {
        let mut out = Vec::new();
        for (a, pa) in self.cubios() {
            for d in pa.pos.outward().map(std::ops::Neg::neg) {
                let Some(npos) = pa.pos.neighbor(d) else {
                    continue;
                };
                let Some(b) = self.cubio_at(npos) else {
                    continue;
                };
                if b <= a {
                    continue;
                }
                let pb = self.cubios[&b];
                let fa = pa.rot.inverse().apply_dir(d).index();
                let fb = pb.rot.inverse().apply_dir(-d).index();
                if is_connector(a, fa) && is_connector(b, fb) {
                    out.push(((a, fa), (b, fb)));
                }
            }
        }
        out
    }

    /// Local display faces of `id` that currently face outward, with the
    /// facet each one occupies.
    pub fn displays(&self, id: CubioId) -> Vec<(LocalFace, FacetAddress)> {
        let Some(p) = self.cubios.get(&id) else {
            return Vec::new();
        };
        display_faces(id)
            .into_iter()
            .filter_map(|lf| {
                let d = p
                    .rot
                    .apply_dir(Dir::from_index(lf).expect("valid local face"));
                facet_of(p.pos, d).map(|f| (lf, f))
            })
            .collect()
    }

    /// The cubio display occupying `facet`, if any.
    pub fn facet_owner(&self, facet: FacetAddress) -> Option<(CubioId, LocalFace)> {
        let pos = facet.position();
        let id = self.cubio_at(pos)?;
        let p = self.cubios[&id];
        let lf = p.rot.inverse().apply_dir(facet.face.normal()).index();
        display_faces(id).contains(&lf).then_some((id, lf))
    }

    pub fn present_facets(&self) -> [bool; 24] {
        let mut out = [false; 24];
        for f in FacetAddress::all() {
            out[f.index()] = self.facet_owner(f).is_some();
        }
        out
    }

    /// Reads per-cubio labels off the surface as a facet labeling.
    pub fn read_facets<L: Clone>(&self, labels: &CubioLabels<L>) -> BTreeMap<FacetAddress, L> {
        FacetAddress::all()
            .filter_map(|f| {
                let owner = self.facet_owner(f)?;
                labels.get(&owner).map(|l| (f, l.clone()))
            })
            .collect()
    }

    /// The home face colour of each display: the fresh solved colouring.
    pub fn home_labels(&self) -> CubioLabels<GlobalFace> {
        let mut out = BTreeMap::new();
        for id in self.ids() {
            for lf in display_faces(id) {
                let d = Dir::from_index(lf).expect("valid local face");
                out.insert((id, lf), GlobalFace::from_normal(d));
            }
        }
        out
    }

    pub fn apply_turn(&self, t: FaceTurn) -> Result<Assembly, GeometryError> {
        if self.core == CoreKind::None {
            return Err(GeometryError::CoreMissing);
        }
        let rot = t.rotation();
        let mut next = self.clone();
        for p in next.cubios.values_mut() {
            if t.contains(p.pos) {
                p.pos = LatticePos::from_vec(rot.apply(p.pos.vec()))
                    .expect("rotation keeps corners on the lattice");
                p.rot = rot.compose(&p.rot);
            }
        }
        Ok(next)
    }

    /// Canonical little-endian serialization for hashing.
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.push(match self.core {
            CoreKind::SteelBall => 0,
            CoreKind::PocketCubeCore => 1,
            CoreKind::None => 2,
        });
        out.push(self.cubios.len() as u8);
        for (id, p) in &self.cubios {
            out.push(id.0);
            out.push(p.pos.corner_index());
            out.push(p.rot.index() as u8);
        }
    }
}

/// Eight cubios at the eight corners, identity orientations.
pub fn new_standard_assembly(core: CoreKind) -> Assembly {
    let mut a = Assembly::empty(core);
    for i in 0..8 {
        a.cubios.insert(
            CubioId(i),
            Placement {
                pos: LatticePos::corner(i),
                rot: Rotation::IDENTITY,
            },
        );
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnDir {
    Cw,
    Ccw,
}

impl TurnDir {
    pub fn reverse(self) -> TurnDir {
        match self {
            TurnDir::Cw => TurnDir::Ccw,
            TurnDir::Ccw => TurnDir::Cw,
        }
    }
}

/// A quarter turn of one layer. Clockwise is judged looking at the layer
/// from outside the block: from the positive end of the axis for layer +1,
/// from the negative end for layer −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceTurn {
    pub axis: Axis,
    pub layer: i8,
    pub dir: TurnDir,
}

impl FaceTurn {
    pub fn new(axis: Axis, layer: i8, dir: TurnDir) -> Option<FaceTurn> {
        (layer == 1 || layer == -1).then_some(FaceTurn { axis, layer, dir })
    }

    /// All 12 generators: 3 axes × 2 layers × 2 directions.
    pub fn all() -> [FaceTurn; 12] {
        let mut out = [FaceTurn {
            axis: Axis::X,
            layer: 1,
            dir: TurnDir::Cw,
        }; 12];
        let mut i = 0;
        for axis in Axis::ALL {
            for layer in [1, -1] {
                for dir in [TurnDir::Cw, TurnDir::Ccw] {
                    out[i] = FaceTurn { axis, layer, dir };
                    i += 1;
                }
            }
        }
        out
    }

    pub fn inverse(self) -> FaceTurn {
        FaceTurn {
            dir: self.dir.reverse(),
            ..self
        }
    }

    /// Signed number of +90° steps about the positive axis.
    pub fn quarters(self) -> i32 {
        let d = match self.dir {
            TurnDir::Cw => 1,
            TurnDir::Ccw => -1,
        };
        -i32::from(self.layer) * d
    }

    pub fn rotation(self) -> Rotation {
        Rotation::quarter(self.axis, self.quarters())
    }

    pub fn contains(self, pos: LatticePos) -> bool {
        pos.coord(self.axis) == i32::from(self.layer)
    }

    /// The global face this layer turns.
    pub fn face(self) -> GlobalFace {
        GlobalFace::from_normal(Dir {
            axis: self.axis,
            positive: self.layer > 0,
        })
    }
}

impl fmt::Display for FaceTurn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.dir {
            TurnDir::Cw => "",
            TurnDir::Ccw => "'",
        };
        write!(f, "{}{}", self.face().letter(), suffix)
    }
}

/// A permutation of the 24 facets; `map[i]` is where the content of facet
/// `i` ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Perm24 {
    map: [u8; 24],
}

impl Perm24 {
    pub fn identity() -> Perm24 {
        let mut map = [0u8; 24];
        for (i, m) in map.iter_mut().enumerate() {
            *m = i as u8;
        }
        Perm24 { map }
    }

    pub fn from_map(map: [u8; 24]) -> Option<Perm24> {
        let mut seen = [false; 24];
        for &m in &map {
            let m = m as usize;
            if m >= 24 || seen[m] {
                return None;
            }
            seen[m] = true;
        }
        Some(Perm24 { map })
    }

    pub fn image(&self, f: FacetAddress) -> FacetAddress {
        FacetAddress::from_index(self.map[f.index()] as usize)
    }

    pub fn as_slice(&self) -> &[u8; 24] {
        &self.map
    }

    /// Apply `self`, then `next`.
    pub fn then(&self, next: &Perm24) -> Perm24 {
        let mut map = [0u8; 24];
        for (i, m) in map.iter_mut().enumerate() {
            *m = next.map[self.map[i] as usize];
        }
        Perm24 { map }
    }

    pub fn inverse(&self) -> Perm24 {
        let mut map = [0u8; 24];
        for (i, &m) in self.map.iter().enumerate() {
            map[m as usize] = i as u8;
        }
        Perm24 { map }
    }

    pub fn moved(&self) -> usize {
        self.map
            .iter()
            .enumerate()
            .filter(|(i, &m)| *i != m as usize)
            .count()
    }

    /// Moves content: `out[map[i]] = items[i]`.
    pub fn transport<T: Clone>(&self, items: &[T; 24]) -> [T; 24] {
        let mut out = items.clone();
        for (i, item) in items.iter().enumerate() {
            out[self.map[i] as usize] = item.clone();
        }
        out
    }
}

/// Induced action of a turn on facets, derived from the 3D rotation.
pub fn facet_permutation(t: FaceTurn) -> Perm24 {
    let rot = t.rotation();
    let mut map = [0u8; 24];
    for f in FacetAddress::all() {
        let pos = f.position();
        let dest = if t.contains(pos) {
            let p = LatticePos::from_vec(rot.apply(pos.vec())).expect("corner maps to corner");
            facet_of(p, rot.apply_dir(f.face.normal())).expect("outward stays outward")
        } else {
            f
        };
        map[f.index()] = dest.index() as u8;
    }
    Perm24::from_map(map).expect("turn induces a bijection")
}

/// `n` uniformly drawn turns from a seeded generator, applied to a fresh
/// steel-ball assembly.
pub fn scramble(seed: u64, n: usize) -> (Assembly, Vec<FaceTurn>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = FaceTurn::all();
    let mut a = new_standard_assembly(CoreKind::SteelBall);
    let mut moves = Vec::with_capacity(n);
    for _ in 0..n {
        let t = gens[rng.random_range(0..gens.len())];
        a = a.apply_turn(t).expect("steel ball core allows turning");
        moves.push(t);
    }
    (a, moves)
}

/// True iff every global face carries a single label across its present facets.
pub fn is_solved<L: PartialEq>(labeling: &BTreeMap<FacetAddress, L>) -> bool {
    GlobalFace::ALL.iter().all(|&face| {
        let mut labels = labeling
            .iter()
            .filter(|(f, _)| f.face == face)
            .map(|(_, l)| l);
        match labels.next() {
            Some(first) => labels.all(|l| l == first),
            None => true,
        }
    })
}
