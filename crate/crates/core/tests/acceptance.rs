//! Release gate: one PASS/FAIL line per acceptance criterion. Runs as a plain
//! binary so the lines come out in order and unbuffered.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cubios::games::{
    wordmatch_score, ColorMix, Dictionary, Game, GameKind, GamePhase, Move, PacSurface,
    TwentyThree, ALPHABET, SCRAMBLE_MOVES,
};
use cubios::geometry::{new_standard_assembly, CoreKind, FaceTurn};
use cubios::mesh::MeshSim;
use cubios::session::{self, EventKind, SessionEvent};
use cubios::surface::{facet_rings, FacetAddress};
use cubios::verify;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Gate {
    failures: usize,
}

impl Gate {
    fn criterion(&mut self, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if took > b => Err(format!("took {took:.2?}, budget {b:.0?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                self.failures += 1;
                println!("FAIL {name}: {why} [{took:.2?}]");
            }
        }
    }
}

fn from_verify(r: Result<Vec<verify::Check>, verify::Failure>) -> Outcome {
    r.map(|cs| {
        cs.iter()
            .map(|c| c.detail.clone())
            .collect::<Vec<_>>()
            .join("; ")
    })
    .map_err(|f| f.to_string())
}

fn peak_rss_mib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib / 1024)
}

fn full_enumeration() -> Outcome {
    let detail = from_verify(verify::full_enum())?;
    match peak_rss_mib() {
        Some(m) if m > 2048 => Err(format!("peak RSS {m} MiB exceeds 2 GiB")),
        Some(m) => Ok(format!("{detail}; peak RSS {m} MiB")),
        None => Ok(detail),
    }
}

fn mesh_convergence() -> Outcome {
    let standard = new_standard_assembly(CoreKind::SteelBall);
    let mut worst = 0;
    for seed in 0..50 {
        let t = MeshSim::boot(&standard, seed, 0.0)
            .run_until(12, MeshSim::is_synced)
            .ok_or(format!("lossless seed {seed} not SYNCED by tick 12"))?;
        worst = worst.max(t);
    }
    let ok = (0..500)
        .filter(|&seed| {
            MeshSim::boot(&standard, seed, 0.2)
                .run_until(64, MeshSim::is_synced)
                .is_some()
        })
        .count();
    if ok < 495 {
        return Err(format!("{ok}/500 lossy runs converged within 64 ticks"));
    }
    let churn = 40;
    for seed in 0..churn {
        verify::churn_session(seed).map_err(|e| format!("churn seed {seed}: {e}"))?;
    }
    Ok(format!(
        "lossless worst {worst} ticks; {ok}/500 at loss 0.2 within 64; {churn} churn sessions consistent"
    ))
}

fn election_fairness() -> Outcome {
    let standard = new_standard_assembly(CoreKind::SteelBall);
    let mut wins = [0u32; 8];
    for seed in 0..1000 {
        let mut sim = MeshSim::boot(&standard, seed, 0.0);
        sim.run_until(100, MeshSim::is_converged)
            .ok_or(format!("seed {seed} did not converge"))?;
        let l = sim.leader().ok_or(format!("seed {seed}: nodes disagree"))?;
        if !sim.live_nodes().all(|n| n.leader() == Some(l)) {
            return Err(format!("seed {seed}: nodes disagree"));
        }
        wins[l.0 as usize] += 1;
    }
    if wins.iter().all(|w| (80..=170).contains(w)) {
        Ok(format!("wins {wins:?}"))
    } else {
        Err(format!("wins {wins:?} outside [80, 170]"))
    }
}

const FIXTURES: &[&str] = &["colormix", "pacsurface", "twentythree", "wordmatch"];

fn fixture_path(name: &str, ext: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/fixtures/{name}.{ext}"))
}

fn replay_determinism() -> Outcome {
    let mut n = 0;
    for game in GameKind::ALL {
        for seed in 0..50 {
            let s = common::random_session(game, seed, 60);
            let log = s.log();
            let original = s.digest();
            let replayed = session::replay(&log).map_err(|e| format!("{game} seed {seed}: {e}"))?;
            if replayed != original {
                return Err(format!("{game} seed {seed}: {replayed:?} != {original:?}"));
            }
            if replayed.to_json() != original.to_json() {
                return Err(format!("{game} seed {seed}: digest bytes differ"));
            }
            let parsed = session::parse_log(&log).map_err(|e| e.to_string())?;
            let rewritten = session::write_log(
                &parsed.config,
                parsed.dictionary_digest,
                &parsed.events,
                parsed.end_tick,
            );
            if rewritten != log {
                return Err(format!(
                    "{game} seed {seed}: log does not round-trip byte-exact"
                ));
            }
            n += 1;
        }
    }
    for name in FIXTURES {
        let log =
            std::fs::read_to_string(fixture_path(name, "jsonl")).map_err(|e| e.to_string())?;
        let want = std::fs::read_to_string(fixture_path(name, "digest.json"))
            .map_err(|e| e.to_string())?;
        let got = session::replay(&log)
            .map_err(|e| format!("fixture {name}: {e}"))?
            .to_json();
        if got != want.trim_end() {
            return Err(format!("fixture {name}: {got} != {}", want.trim_end()));
        }
    }
    Ok(format!(
        "{n} random sessions and {} committed fixtures",
        FIXTURES.len()
    ))
}

fn twentythree_suite() -> Result<String, String> {
    for seed in 0..20 {
        let mut g = TwentyThree::new(seed, SCRAMBLE_MOVES);
        for m in g.solution() {
            match m {
                Move::Turn(t) => g.on_turn(t),
                Move::Slide(f) => g.on_slide(f).map_err(|e| e.to_string())?,
            }
        }
        if g.status().phase != GamePhase::Won {
            return Err(format!("seed {seed}: solution does not win"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut g = TwentyThree::new(0, SCRAMBLE_MOVES);
    let want: Vec<u8> = (0..24).collect();
    for k in 0..10_000 {
        if rng.random_bool(0.5) {
            g.on_turn(FaceTurn::all()[rng.random_range(0..12)]);
        } else {
            let _ = g.on_slide(FacetAddress::from_index(rng.random_range(0..24)));
        }
        let mut tiles = g.tiles().to_vec();
        tiles.sort();
        if tiles != want {
            return Err(format!("event {k}: tile multiset {tiles:?}"));
        }
    }
    Ok("20 scramble inverses win; 10000 random events keep 23 tiles and one blank".into())
}

/// Ring substrings straight from the definition, both directions, every
/// start and length 3 to 8.
fn ring_oracle(letters: &[u8; 24], dict: &Dictionary) -> (Vec<(String, usize, usize, bool)>, i64) {
    let mut hits = Vec::new();
    let mut points = 0;
    for (r, ring) in facet_rings().iter().enumerate() {
        for forward in [true, false] {
            for start in 0..8 {
                for len in 3..=8 {
                    let w: String = (0..len)
                        .map(|k| {
                            let slot = if forward {
                                (start + k) % 8
                            } else {
                                (start + 8 - k) % 8
                            };
                            letters[ring[slot].index()] as char
                        })
                        .collect();
                    if dict.contains(&w) {
                        points += len as i64;
                        hits.push((w, r, start, forward));
                    }
                }
            }
        }
    }
    hits.sort();
    (hits, points)
}

fn wordmatch_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut total = 0;
    for k in 0..200 {
        let mut letters = *ALPHABET;
        letters.shuffle(&mut rng);
        // Half the dictionary is planted on the rings so there is something
        // to find; the rest is random filler.
        let rings = facet_rings();
        let mut words: BTreeSet<String> = BTreeSet::new();
        while words.len() < 25 {
            let ring = &rings[rng.random_range(0..6)];
            let (start, len) = (rng.random_range(0..8), rng.random_range(3..=8));
            let fwd = rng.random_bool(0.5);
            words.insert(
                (0..len)
                    .map(|j| {
                        let slot = if fwd {
                            (start + j) % 8
                        } else {
                            (start + 8 - j) % 8
                        };
                        letters[ring[slot].index()] as char
                    })
                    .collect(),
            );
        }
        while words.len() < 50 {
            let len = rng.random_range(3..=8);
            words.insert(
                (0..len)
                    .map(|_| ALPHABET[rng.random_range(0..24)] as char)
                    .collect(),
            );
        }
        let dict = Dictionary::from_words(words.iter().map(String::as_str));
        if dict.len() != 50 {
            return Err(format!("labeling {k}: dictionary has {} words", dict.len()));
        }
        let got = wordmatch_score(&letters, &dict).map_err(|e| e.to_string())?;
        let mut readings: Vec<_> = got
            .hits
            .iter()
            .map(|h| (h.word.clone(), h.ring, h.start, h.forward))
            .collect();
        readings.sort();
        let (want, points) = ring_oracle(&letters, &dict);
        if readings != want || got.points != points {
            return Err(format!("labeling {k}: scan disagrees with the oracle"));
        }
        total += want.len();
    }
    Ok(format!("200 labelings, {total} readings match the oracle"))
}

fn pacsurface_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let (mut ticks, mut games) = (0, 0);
    while ticks < 10_000 {
        let mut g = PacSurface::new(games);
        games += 1;
        let initial = g.dots_remaining() as u64;
        let mut score = g.status().score;
        let mut tilt = None;
        while g.status().phase == GamePhase::Running && ticks < 10_000 {
            match rng.random_range(0..40) {
                0 => g.on_turn(FaceTurn::all()[rng.random_range(0..12)]),
                1..=4 => tilt = Some(common::random_tilt(&mut rng)),
                _ => {}
            }
            g.on_tick(tilt);
            ticks += 1;
            let s = g.status().score;
            if s < score {
                return Err(format!(
                    "game {games} tick {ticks}: score fell {score} -> {s}"
                ));
            }
            score = s;
            if g.dots_remaining() as u64 + u64::from(g.dots_eaten()) != initial {
                return Err(format!(
                    "game {games} tick {ticks}: dot count not conserved"
                ));
            }
        }
    }
    Ok(format!("{ticks} ticks over {games} games"))
}

fn colormix_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut g = ColorMix::new(5);
    let before = g.channel_sums();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        g.on_turn(FaceTurn::all()[rng.random_range(0..12)]);
        let now = g.channel_sums();
        for k in 0..3 {
            worst = worst.max((now[k] - before[k]).abs() / before[k]);
        }
    }
    if worst <= 1e-6 {
        Ok(format!("worst relative channel drift {worst:.2e}"))
    } else {
        Err(format!("relative channel drift {worst:.2e} exceeds 1e-6"))
    }
}

fn game_suites() -> Outcome {
    let parts = [
        twentythree_suite()?,
        wordmatch_suite()?,
        pacsurface_suite()?,
        colormix_suite()?,
    ];
    Ok(parts.join("; "))
}

fn cubios_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cubios"))
        .args(args)
        .env_remove("CUBIOS_DICT")
        .output()
        .expect("run cubios")
}

fn cli() -> Outcome {
    let out = cubios_cli(&["verify", "--suite", "full-enum"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    if !out.status.success() || !stdout.lines().any(|l| l.trim() == "3674160") {
        return Err(format!("verify full-enum: {:?} {stdout}", out.status));
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = FaceTurn::all()[4];
    let script = dir.path().join("turn.jsonl");
    let event = SessionEvent::new(5, EventKind::turn(t));
    std::fs::write(&script, serde_json::to_string(&event).unwrap() + "\n")
        .map_err(|e| e.to_string())?;
    let log = dir.path().join("s.jsonl");
    let p = |f: &std::path::Path| f.to_str().unwrap().to_owned();
    let out = cubios_cli(&[
        "sim",
        "--game",
        "twentythree",
        "--seed",
        "3",
        "--script",
        &p(&script),
        "--out",
        &p(&log),
    ]);
    if !out.status.success() {
        return Err(format!("sim: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let mut images = Vec::new();
    for at in ["4", "5"] {
        let img = dir.path().join(format!("{at}.ppm"));
        let out = cubios_cli(&["render", "--log", &p(&log), "--at", at, "--out", &p(&img)]);
        if !out.status.success() {
            return Err(format!(
                "render --at {at}: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        images.push(std::fs::read(&img).map_err(|e| e.to_string())?);
    }
    let changed = common::net_diff(&images[0], &images[1]);
    let moved = common::moved_facets(t);
    if changed != moved {
        return Err(format!("render diff {changed:?} != moved facets {moved:?}"));
    }
    Ok(format!(
        "full-enum prints 3674160; render diff is exactly the 12 facets moved by {t}"
    ))
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    gate.criterion("group suite", Some(Duration::from_secs(5)), || {
        from_verify(verify::group(1000))
    });
    gate.criterion(
        "full enumeration",
        Some(Duration::from_secs(300)),
        full_enumeration,
    );
    gate.criterion("atlas suite", Some(Duration::from_secs(30)), || {
        from_verify(verify::atlas(100))
    });
    gate.criterion("mesh convergence", None, mesh_convergence);
    gate.criterion("election fairness", None, election_fairness);
    gate.criterion("replay determinism", None, replay_determinism);
    gate.criterion("game suites", None, game_suites);
    gate.criterion("cli", None, cli);
    println!("{} of 8 criteria failed", gate.failures);
    if gate.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
