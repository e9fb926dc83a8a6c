use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// One of the three global axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Integer 3-vector. Used both for unit directions and for scaled embedding
/// coordinates on the surface atlas.
pub type Vec3 = [i32; 3];

pub fn dot(a: Vec3, b: Vec3) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, k: i32) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// A signed unit axis: one of the six directions `±X`, `±Y`, `±Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dir {
    pub axis: Axis,
    pub positive: bool,
}

impl Dir {
    pub const PX: Dir = Dir {
        axis: Axis::X,
        positive: true,
    };
    pub const NX: Dir = Dir {
        axis: Axis::X,
        positive: false,
    };
    pub const PY: Dir = Dir {
        axis: Axis::Y,
        positive: true,
    };
    pub const NY: Dir = Dir {
        axis: Axis::Y,
        positive: false,
    };
    pub const PZ: Dir = Dir {
        axis: Axis::Z,
        positive: true,
    };
    pub const NZ: Dir = Dir {
        axis: Axis::Z,
        positive: false,
    };

    /// Local face numbering: 0:+X 1:-X 2:+Y 3:-Y 4:+Z 5:-Z.
    pub const ALL: [Dir; 6] = [Dir::PX, Dir::NX, Dir::PY, Dir::NY, Dir::PZ, Dir::NZ];

    pub fn sign(self) -> i32 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    pub fn vec(self) -> Vec3 {
        let mut v = [0; 3];
        v[self.axis.index()] = self.sign();
        v
    }

    /// Inverse of [`Dir::vec`]; `None` unless `v` is a signed unit axis.
    pub fn from_vec(v: Vec3) -> Option<Dir> {
        let nonzero: Vec<usize> = (0..3).filter(|&i| v[i] != 0).collect();
        match nonzero.as_slice() {
            [i] if v[*i].abs() == 1 => Some(Dir {
                axis: Axis::from_index(*i),
                positive: v[*i] > 0,
            }),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        (self.axis.index() * 2 + usize::from(!self.positive)) as u8
    }

    pub fn from_index(i: u8) -> Option<Dir> {
        Dir::ALL.get(i as usize).copied()
    }
}

impl std::ops::Neg for Dir {
    type Output = Dir;

    fn neg(self) -> Dir {
        Dir {
            axis: self.axis,
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.positive { '+' } else { '-' }, self.axis)
    }
}

/// A proper rotation of the cube: a signed permutation matrix with
/// determinant +1. Row-major, acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[[i8; 3]; 3]", into = "[[i8; 3]; 3]")]
pub struct Rotation {
    m: [[i8; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    };

    /// Validates that `m` is a signed permutation matrix with det +1.
    pub fn from_matrix(m: [[i8; 3]; 3]) -> Option<Rotation> {
        for row in &m {
            let nz = row.iter().filter(|&&e| e != 0).count();
            if nz != 1 || row.iter().any(|&e| e.abs() > 1) {
                return None;
            }
        }
        for c in 0..3 {
            if m.iter().filter(|row| row[c] != 0).count() != 1 {
                return None;
            }
        }
        let r = Rotation { m };
        (r.det() == 1).then_some(r)
    }

    pub fn matrix(&self) -> [[i8; 3]; 3] {
        self.m
    }

    pub fn det(&self) -> i32 {
        let m = |r: usize, c: usize| i32::from(self.m[r][c]);
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    /// Quarter rotation by +90° (right-hand rule) about `axis`, raised to
    /// `quarters` (taken mod 4).
    pub fn quarter(axis: Axis, quarters: i32) -> Rotation {
        let base = match axis {
            Axis::X => [[1, 0, 0], [0, 0, -1], [0, 1, 0]],
            Axis::Y => [[0, 0, 1], [0, 1, 0], [-1, 0, 0]],
            Axis::Z => [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
        };
        let base = Rotation { m: base };
        let mut r = Rotation::IDENTITY;
        for _ in 0..quarters.rem_euclid(4) {
            r = base.compose(&r);
        }
        r
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let mut out = [0; 3];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|c| i32::from(self.m[r][c]) * v[c]).sum();
        }
        out
    }

    pub fn apply_dir(&self, d: Dir) -> Dir {
        Dir::from_vec(self.apply(d.vec())).expect("rotation maps unit axes to unit axes")
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut m = [[0i8; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.m[r][k] * other.m[k][c]).sum();
            }
        }
        Rotation { m }
    }

    pub fn inverse(&self) -> Rotation {
        let mut m = [[0i8; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = self.m[c][r];
            }
        }
        Rotation { m }
    }

    /// All 24 proper rotations in a fixed order.
    pub fn all() -> &'static [Rotation; 24] {
        static ALL: OnceLock<[Rotation; 24]> = OnceLock::new();
        ALL.get_or_init(|| {
            let mut out = Vec::with_capacity(24);
            let perms = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            for p in perms {
                for signs in 0..8u8 {
                    let mut m = [[0i8; 3]; 3];
                    for r in 0..3 {
                        m[r][p[r]] = if signs & (1 << r) != 0 { -1 } else { 1 };
                    }
                    if let Some(rot) = Rotation::from_matrix(m) {
                        out.push(rot);
                    }
                }
            }
            out.try_into().expect("exactly 24 proper rotations")
        })
    }

    /// Position of this rotation in [`Rotation::all`].
    pub fn index(&self) -> usize {
        Rotation::all()
            .iter()
            .position(|r| r == self)
            .expect("every rotation is enumerated")
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Rotation::IDENTITY
    }
}

impl TryFrom<[[i8; 3]; 3]> for Rotation {
    type Error = String;

    fn try_from(m: [[i8; 3]; 3]) -> Result<Self, Self::Error> {
        Rotation::from_matrix(m).ok_or_else(|| format!("not a proper cube rotation: {m:?}"))
    }
}

impl From<Rotation> for [[i8; 3]; 3] {
    fn from(r: Rotation) -> Self {
        r.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_four_distinct_rotations() {
        let all = Rotation::all();
        let set: std::collections::BTreeSet<_> = all.iter().collect();
        assert_eq!(set.len(), 24);
        assert!(all.iter().all(|r| r.det() == 1));
    }

    #[test]
    fn quarter_turn_has_order_four() {
        for axis in Axis::ALL {
            let q = Rotation::quarter(axis, 1);
            assert_ne!(q, Rotation::IDENTITY);
            assert_eq!(Rotation::quarter(axis, 4), Rotation::IDENTITY);
            assert_eq!(q.compose(&q.inverse()), Rotation::IDENTITY);
        }
    }

    #[test]
    fn quarter_about_z_matches_right_hand_rule() {
        // +X goes to +Y under +90° about +Z.
        assert_eq!(Rotation::quarter(Axis::Z, 1).apply([1, 0, 0]), [0, 1, 0]);
        assert_eq!(Rotation::quarter(Axis::X, 1).apply([0, 1, 0]), [0, 0, 1]);
        assert_eq!(Rotation::quarter(Axis::Y, 1).apply([0, 0, 1]), [1, 0, 0]);
    }

    #[test]
    fn rejects_reflections_and_non_permutations() {
        assert!(Rotation::from_matrix([[-1, 0, 0], [0, 1, 0], [0, 0, 1]]).is_none());
        assert!(Rotation::from_matrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]]).is_none());
        assert!(Rotation::from_matrix([[1, 0, 0], [1, 0, 0], [0, 0, 1]]).is_none());
    }

    #[test]
    fn dir_index_roundtrip() {
        for (i, d) in Dir::ALL.iter().enumerate() {
            assert_eq!(d.index() as usize, i);
            assert_eq!(Dir::from_vec(d.vec()), Some(*d));
        }
    }
}
