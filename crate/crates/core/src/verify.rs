//! Self-check suites run by `cubios verify`. Each suite returns the list of
//! properties it established or the first one that failed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::games::GameKind;
use crate::geometry::{
    add, display_faces, enumerate_states, facet_permutation, new_standard_assembly, scramble,
    Assembly, CoreKind, CubioLabels, FaceTurn, Perm24, FULL_STATE_COUNT,
};
use crate::mesh::MeshSim;
use crate::session::{EventKind, Session, SessionConfig, SessionEvent};
use crate::surface::{embed, step, FacetAddress, GlobalFace, Grid, Heading, SurfaceCoord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Group,
    Atlas,
    Mesh,
    FullEnum,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Group, Suite::Atlas, Suite::Mesh, Suite::FullEnum];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Group => "group",
            Suite::Atlas => "atlas",
            Suite::Mesh => "mesh",
            Suite::FullEnum => "full-enum",
        }
    }

    /// Randomized trials run when no budget is given.
    pub fn default_budget(self) -> u64 {
        match self {
            Suite::Group => 1000,
            Suite::Atlas => 100,
            Suite::Mesh => 500,
            Suite::FullEnum => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub property: &'static str,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FAIL {}: {}", self.property, self.detail)
    }
}

/// One established property with a short account of what was checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub property: &'static str,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ok {}: {}", self.property, self.detail)
    }
}

type Outcome = Result<Vec<Check>, Failure>;

fn ensure(
    cond: bool,
    property: &'static str,
    detail: impl FnOnce() -> String,
) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure {
            property,
            detail: detail(),
        })
    }
}

/// `budget` scales the randomized part of a suite; `None` uses the default.
pub fn run_suite(suite: Suite, budget: Option<u64>) -> Outcome {
    let n = budget.unwrap_or(suite.default_budget());
    match suite {
        Suite::Group => group(n),
        Suite::Atlas => atlas(n),
        Suite::Mesh => mesh(n),
        Suite::FullEnum => full_enum(),
    }
}

fn random_labels(a: &Assembly, rng: &mut ChaCha8Rng) -> CubioLabels<u32> {
    a.ids()
        .flat_map(|id| display_faces(id).map(move |lf| (id, lf)))
        .map(|k| (k, rng.random::<u32>()))
        .collect()
}

fn facet_array<L: Clone>(m: &BTreeMap<FacetAddress, L>) -> [L; 24] {
    std::array::from_fn(|i| m[&FacetAddress::from_index(i)].clone())
}

pub fn group(labelings: u64) -> Outcome {
    let a = scramble(0x5eed, 17).0;
    for t in FaceTurn::all() {
        let mut b = a.clone();
        let mut p = Perm24::identity();
        for _ in 0..4 {
            b = b.apply_turn(t).expect("steel ball turns");
            p = p.then(&facet_permutation(t));
        }
        ensure(b == a, "g^4 = id on Assembly", || format!("{t}"))?;
        ensure(p == Perm24::identity(), "g^4 = id on Perm24", || {
            format!("{t}")
        })?;
        ensure(
            facet_permutation(t).moved() == 12,
            "turn moves 12 facets",
            || format!("{t}"),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..labelings {
        let (a, _) = scramble(rng.random(), rng.random_range(0..30));
        let labels = random_labels(&a, &mut rng);
        let t = FaceTurn::all()[rng.random_range(0..12)];
        let moved_then_read = facet_array(&a.apply_turn(t).expect("turns").read_facets(&labels));
        let read_then_moved = facet_permutation(t).transport(&facet_array(&a.read_facets(&labels)));
        ensure(
            moved_then_read == read_then_moved,
            "commuting square",
            || format!("labeling {k}, turn {t}"),
        )?;
    }
    Ok(vec![
        Check {
            property: "g^4 = id",
            detail: "12 generators on Assembly and Perm24".into(),
        },
        Check {
            property: "commuting square",
            detail: format!("{labelings} random labelings"),
        },
    ])
}

pub fn atlas(seeds: u64) -> Outcome {
    let g = Grid::PIXELS;
    let mut steps = 0u64;
    for c in g.coords() {
        for h in Heading::ALL {
            let (d, dh) = step(c, h);
            let back = step(d, dh.reverse());
            ensure(back == (c, h.reverse()), "step invertibility", || {
                format!("{c} {h:?}")
            })?;
            steps += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = g.res();
    for _ in 0..seeds {
        let start = SurfaceCoord::new(
            GlobalFace::ALL[rng.random_range(0..6)],
            rng.random_range(0..r),
            rng.random_range(0..r),
        );
        let h0 = Heading::ALL[rng.random_range(0..4)];
        let (mut c, mut h) = (start, h0);
        for _ in 0..4 * u32::from(r) {
            (c, h) = step(c, h);
        }
        ensure((c, h) == (start, h0), "geodesic closure", || {
            format!("{start} {h0:?}")
        })?;
    }

    // Every pixel leaving its face across an edge must meet its destination
    // at the same 3D point on the shared edge.
    let mut edges: BTreeMap<(GlobalFace, GlobalFace), usize> = BTreeMap::new();
    for c in g.coords() {
        for h in Heading::ALL {
            let (d, _) = step(c, h);
            if d.face == c.face {
                continue;
            }
            let out = add(embed(c), h.dir_on(c.face).vec());
            let back = add(embed(d), c.face.normal().vec());
            ensure(out == back, "edge coincidence", || {
                format!("{c} {h:?} -> {d}")
            })?;
            let key = if c.face < d.face {
                (c.face, d.face)
            } else {
                (d.face, c.face)
            };
            *edges.entry(key).or_default() += 1;
        }
    }
    ensure(edges.len() == 12, "edge coincidence", || {
        format!("{} edges", edges.len())
    })?;
    ensure(
        edges.values().all(|&n| n == 2 * usize::from(r)),
        "edge coincidence",
        || format!("{edges:?}"),
    )?;

    Ok(vec![
        Check {
            property: "step invertibility",
            detail: format!("{steps} pixel steps"),
        },
        Check {
            property: "geodesic closure",
            detail: format!("{seeds} random starts, {} steps each", 4 * r),
        },
        Check {
            property: "edge coincidence",
            detail: format!("12 edges x {r} pixels"),
        },
    ])
}

pub fn mesh(runs: u64) -> Outcome {
    let standard = new_standard_assembly(CoreKind::SteelBall);
    let mut sim = MeshSim::boot(&standard, 0, 0.0);
    let t = sim.run_until(12, MeshSim::is_synced);
    ensure(t.is_some(), "lossless boot", || {
        "not all SYNCED by tick 12".into()
    })?;

    let ok = (0..runs)
        .filter(|&seed| {
            MeshSim::boot(&standard, seed, 0.2)
                .run_until(64, MeshSim::is_synced)
                .is_some()
        })
        .count() as u64;
    ensure(ok * 100 >= runs * 99, "lossy boot", || {
        format!("{ok}/{runs} within 64 ticks")
    })?;

    let churn_runs = runs.div_ceil(25);
    for seed in 0..churn_runs {
        churn_session(seed).map_err(|detail| Failure {
            property: "churn consistency",
            detail: format!("seed {seed}: {detail}"),
        })?;
    }

    Ok(vec![
        Check {
            property: "lossless boot",
            detail: format!("all SYNCED at tick {}", t.unwrap_or_default()),
        },
        Check {
            property: "lossy boot",
            detail: format!("{ok}/{runs} runs SYNCED within 64 ticks at loss 0.2"),
        },
        Check {
            property: "churn consistency",
            detail: format!("{churn_runs} sessions with turns, detaches and reattaches"),
        },
    ])
}

/// Random turns, detaches and reattaches on a live session; after each
/// burst the mesh must settle and pass the consistency check.
pub fn churn_session(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = SessionConfig::new(GameKind::TwentyThree, seed).with_loss_rate(0.1);
    let mut s = Session::new(config).map_err(|e| e.to_string())?;
    let mut away = Vec::new();
    let mut tick = 0;
    for round in 0..6 {
        for _ in 0..4 {
            tick += rng.random_range(1..10);
            let kind = match rng.random_range(0..3) {
                0 if away.is_empty() => EventKind::turn(FaceTurn::all()[rng.random_range(0..12)]),
                0 | 1 if away.len() < 2 => {
                    let ids: Vec<_> = s.assembly().ids().collect();
                    let id = ids[rng.random_range(0..ids.len())];
                    away.push((id, s.assembly().placement(id).expect("present")));
                    EventKind::Detach { id }
                }
                _ => match away.pop() {
                    Some((id, p)) => EventKind::Attach {
                        id,
                        pos: p.pos,
                        rot: Some(p.rot),
                    },
                    None => continue,
                },
            };
            s.apply(SessionEvent::new(tick, kind))
                .map_err(|e| format!("round {round}: {e}"))?;
        }
        s.settle(2000)
            .ok_or_else(|| format!("round {round}: mesh did not settle"))?;
        let r = s.render();
        s.sync_displays(&r);
        if !s.consistency_check() {
            return Err(format!("round {round}: consistency check failed"));
        }
    }
    Ok(())
}

pub fn full_enum() -> Outcome {
    let c = enumerate_states(None);
    ensure(c.total == FULL_STATE_COUNT, "full enumeration", || {
        format!("{} states, expected {FULL_STATE_COUNT}", c.total)
    })?;
    Ok(vec![Check {
        property: "full enumeration",
        detail: format!("{} states, depth {}", c.total, c.by_depth.len() - 1),
    }])
}
