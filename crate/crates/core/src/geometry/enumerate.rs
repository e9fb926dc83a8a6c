//! Breadth-first enumeration of the pocket-cube group acting on the
//! standard assembly. Cubio 0 at (−1,−1,−1) is held fixed, so only the
//! three +1 layers turn; one move is 1, 2 or 3 quarter turns of one layer.

use super::{Axis, CubioId, FaceTurn, LatticePos, Rotation, TurnDir};

/// Reachable states of the standard assembly modulo whole-body rotation.
pub const FULL_STATE_COUNT: u64 = 3_674_160;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCount {
    pub total: u64,
    /// `by_depth[d]` = number of states first reached after exactly `d` moves.
    pub by_depth: Vec<u64>,
}

struct Tables {
    /// corner -> corner, per move
    corner: [[u8; 8]; 9],
    /// rotation index -> rotation index, per move
    rot: [[u8; 24]; 9],
    /// local axis (0..3) carrying the global Y direction, per rotation index
    twist: [u8; 24],
}

fn tables() -> Tables {
    let mut corner = [[0u8; 8]; 9];
    let mut rot = [[0u8; 24]; 9];
    for (m, (axis, q)) in Axis::ALL
        .iter()
        .flat_map(|&a| (1..=3).map(move |q| (a, q)))
        .enumerate()
    {
        let t = FaceTurn::new(axis, 1, TurnDir::Cw).expect("valid layer");
        let r = Rotation::quarter(axis, t.quarters() * q);
        for c in 0..8u8 {
            let p = LatticePos::corner(c);
            corner[m][c as usize] = if t.contains(p) {
                LatticePos::from_vec(r.apply(p.vec()))
                    .expect("corner")
                    .corner_index()
            } else {
                c
            };
        }
        for (i, cur) in Rotation::all().iter().enumerate() {
            rot[m][i] = r.compose(cur).index() as u8;
        }
    }
    let mut twist = [0u8; 24];
    for (i, r) in Rotation::all().iter().enumerate() {
        let local = r.inverse().apply([0, 1, 0]);
        twist[i] = (0..3).find(|&k| local[k] != 0).expect("unit vector") as u8;
    }
    Tables { corner, rot, twist }
}

// Slot c of the packed word holds (cubio << 5 | rotation) of the cubio at corner c.
type Packed = u64;

fn slot(s: Packed, c: usize) -> (u8, u8) {
    let b = (s >> (c * 8)) as u8;
    (b >> 5, b & 0x1f)
}

fn pack(slots: &[(u8, u8); 8]) -> Packed {
    slots.iter().enumerate().fold(0, |acc, (c, &(id, r))| {
        acc | (u64::from(id << 5 | r) << (c * 8))
    })
}

fn apply(t: &Tables, m: usize, s: Packed) -> Packed {
    let mut out = [(0u8, 0u8); 8];
    for c in 0..8 {
        let (id, r) = slot(s, c);
        let dest = t.corner[m][c] as usize;
        // Every corner of the turned layer moves under 1..=3 quarter turns.
        let r2 = if dest == c { r } else { t.rot[m][r as usize] };
        out[dest] = (id, r2);
    }
    pack(&out)
}

/// Perfect index: Lehmer rank of the cubios on corners 1..8 times 3^7 twists.
fn index(t: &Tables, s: Packed) -> usize {
    let mut ids = [0u8; 7];
    let mut tw = 0usize;
    for c in 1..8 {
        let (id, r) = slot(s, c);
        ids[c - 1] = id;
        tw = tw * 3 + t.twist[r as usize] as usize;
    }
    let mut rank = 0usize;
    for i in 0..7 {
        let smaller = ids[i + 1..].iter().filter(|&&b| b < ids[i]).count();
        rank = rank * (7 - i) + smaller;
    }
    rank * 2187 + tw
}

/// Enumerates distinct states reachable from the standard assembly, up to
/// `limit` moves when given.
pub fn enumerate_states(limit: Option<usize>) -> StateCount {
    let t = tables();
    let mut start = [(0u8, 0u8); 8];
    for c in 0..8u8 {
        let id = CubioId(c);
        start[c as usize] = (id.0, Rotation::IDENTITY.index() as u8);
    }
    let start = pack(&start);

    let mut visited = vec![0u64; (5040 * 2187usize).div_ceil(64)];
    let mark = |v: &mut Vec<u64>, i: usize| -> bool {
        let (w, b) = (i / 64, i % 64);
        let fresh = v[w] & (1 << b) == 0;
        v[w] |= 1 << b;
        fresh
    };
    mark(&mut visited, index(&t, start));

    let mut by_depth = vec![1u64];
    let mut frontier = vec![start];
    while !frontier.is_empty() && limit.is_none_or(|l| by_depth.len() <= l) {
        let mut next = Vec::new();
        for &s in &frontier {
            for m in 0..9 {
                let n = apply(&t, m, s);
                if mark(&mut visited, index(&t, n)) {
                    next.push(n);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        by_depth.push(next.len() as u64);
        frontier = next;
    }
    StateCount {
        total: by_depth.iter().sum(),
        by_depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{new_standard_assembly, CoreKind};
    use std::collections::BTreeSet;

    #[test]
    fn depth_zero_and_one() {
        assert_eq!(enumerate_states(Some(0)).by_depth, vec![1]);
        let one = enumerate_states(Some(1));
        assert_eq!(one.by_depth, vec![1, 9]);
        assert_eq!(one.total, 10);
    }

    #[test]
    fn depth_one_by_explicit_assembly_oracle() {
        // Apply 1..=3 quarter turns of each +1 layer to a real Assembly.
        let a = new_standard_assembly(CoreKind::SteelBall);
        let mut seen = BTreeSet::new();
        for axis in Axis::ALL {
            let t = FaceTurn::new(axis, 1, TurnDir::Cw).unwrap();
            let mut b = a.clone();
            for _ in 0..3 {
                b = b.apply_turn(t).unwrap();
                let key: Vec<_> = b.cubios().map(|(id, p)| (id, p.pos, p.rot)).collect();
                seen.insert(key);
            }
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn packed_move_agrees_with_assembly_turn() {
        let t = tables();
        let a = new_standard_assembly(CoreKind::SteelBall);
        let encode = |a: &crate::geometry::Assembly| {
            let mut slots = [(0u8, 0u8); 8];
            for (id, p) in a.cubios() {
                slots[p.pos.corner_index() as usize] = (id.0, p.rot.index() as u8);
            }
            pack(&slots)
        };
        let mut cur = a.clone();
        let mut packed = encode(&a);
        for (step, axis) in [Axis::X, Axis::Y, Axis::Z, Axis::Y, Axis::X]
            .iter()
            .enumerate()
        {
            let turn = FaceTurn::new(*axis, 1, TurnDir::Cw).unwrap();
            cur = cur.apply_turn(turn).unwrap();
            packed = apply(&t, axis.index() * 3, packed);
            assert_eq!(packed, encode(&cur), "step {step}");
        }
    }
}
