#![allow(dead_code)]

use std::collections::BTreeSet;

use cubios::games::{GameKind, TiltVector};
use cubios::geometry::{FaceTurn, LatticePos, Rotation};
use cubios::session::{CheatPolicy, EventKind, Session, SessionConfig, SessionEvent};
use cubios::surface::{FacetAddress, GlobalFace, FACE_PX, NET_WIDTH};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_tilt(rng: &mut impl Rng) -> TiltVector {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            return TiltVector::new(v.map(|x| x / n)).expect("normalized");
        }
    }
}

pub fn random_policy(rng: &mut impl Rng) -> CheatPolicy {
    match rng.random_range(0..4) {
        0 => CheatPolicy::Forfeit,
        1 => CheatPolicy::Penalize {
            points: -rng.random_range(0..100),
            time_ticks: rng.random_range(0..50),
        },
        _ => CheatPolicy::Accept,
    }
}

/// A session driven by `n` random events. Candidates the session rejects
/// (slides away from the blank, detaching an absent cubio) are dropped, so
/// the recorded log holds only legal events.
pub fn random_session(game: GameKind, seed: u64, n: usize) -> Session {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00ac_ce97);
    let config = SessionConfig::new(game, seed)
        .with_policy(random_policy(&mut rng))
        .with_loss_rate([0.0, 0.05, 0.2][rng.random_range(0..3)]);
    drive(config, &mut rng, n)
}

pub fn random_session_with(config: SessionConfig, seed: u64, n: usize) -> Session {
    drive(config, &mut ChaCha8Rng::seed_from_u64(seed), n)
}

fn drive(config: SessionConfig, rng: &mut ChaCha8Rng, n: usize) -> Session {
    let mut s = Session::new(config).expect("default dictionary");
    let mut tick = 0;
    for _ in 0..n {
        tick += rng.random_range(0..6);
        let kind = match rng.random_range(0..10) {
            0..=3 => EventKind::turn(FaceTurn::all()[rng.random_range(0..12)]),
            4 | 5 => EventKind::slide(FacetAddress::from_index(rng.random_range(0..24))),
            6 | 7 => EventKind::Tilt {
                g: random_tilt(rng),
            },
            8 => EventKind::Detach {
                id: cubios::geometry::CubioId(rng.random_range(0..8)),
            },
            _ => {
                let free: Vec<LatticePos> = LatticePos::all()
                    .filter(|&p| s.assembly().cubio_at(p).is_none())
                    .collect();
                if free.is_empty() {
                    continue;
                }
                let pos = free[rng.random_range(0..free.len())];
                let taken: BTreeSet<_> = s.assembly().ids().collect();
                let id = (0..8u8)
                    .map(cubios::geometry::CubioId)
                    .find(|id| !taken.contains(id))
                    .expect("a free id");
                EventKind::Attach {
                    id,
                    pos,
                    rot: Some(Rotation::all()[rng.random_range(0..24)]),
                }
            }
        };
        let _ = s.apply(SessionEvent::new(tick, kind));
    }
    s.advance_to(tick + rng.random_range(0..20));
    s
}

/// Facets whose pixels differ between two cube-net PPMs.
pub fn net_diff(a: &[u8], b: &[u8]) -> BTreeSet<FacetAddress> {
    assert_eq!(a.len(), b.len());
    let header = a.len() - NET_WIDTH * 3 * FACE_PX as usize * 3;
    assert_eq!(a[..header], b[..header]);
    let s = FACE_PX as usize;
    let origin = |f: GlobalFace| match f {
        GlobalFace::U => (s, 0),
        GlobalFace::L => (0, s),
        GlobalFace::F => (s, s),
        GlobalFace::R => (2 * s, s),
        GlobalFace::B => (3 * s, s),
        GlobalFace::D => (s, 2 * s),
    };
    let mut out = BTreeSet::new();
    for face in GlobalFace::ALL {
        let (x0, y0) = origin(face);
        for v in 0..s {
            for u in 0..s {
                let i = header + ((y0 + v) * NET_WIDTH + x0 + u) * 3;
                if a[i..i + 3] != b[i..i + 3] {
                    out.insert(FacetAddress::new(
                        face,
                        (v / (s / 2)) as u8,
                        (u / (s / 2)) as u8,
                    ));
                }
            }
        }
    }
    out
}

pub fn moved_facets(t: FaceTurn) -> BTreeSet<FacetAddress> {
    let p = cubios::geometry::facet_permutation(t);
    FacetAddress::all().filter(|&f| p.image(f) != f).collect()
}
