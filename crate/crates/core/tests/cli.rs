mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cubios::games::{Move, TwentyThree, SCRAMBLE_MOVES};
use cubios::geometry::{Axis, FaceTurn, TurnDir};
use cubios::session::{EventKind, SessionDigest, SessionEvent};
use cubios::surface::{GlobalFace, FACE_PX, NET_HEIGHT, NET_WIDTH};

fn cubios(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubios"))
        .args(args)
        .env_remove("CUBIOS_DICT")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_script(dir: &Path, name: &str, events: &[SessionEvent]) -> PathBuf {
    let p = dir.join(name);
    let body: String = events
        .iter()
        .map(|e| serde_json::to_string(e).unwrap() + "\n")
        .collect();
    std::fs::write(&p, body).unwrap();
    p
}

fn digest(out: &Output) -> SessionDigest {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn empty_sim_has_no_ticks() {
    let d = digest(&cubios(&["sim", "--game", "colormix"]));
    assert_eq!(d.tick_count, 0);
    let text = String::from_utf8(cubios(&["sim", "--game", "colormix"]).stdout).unwrap();
    assert!(text.contains("\"tick_count\":0"), "{text}");
}

#[test]
fn sim_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s0 = common::random_session(cubios::games::GameKind::PacSurface, 3, 40);
    let events: Vec<_> = s0.events().to_vec();
    let script = write_script(dir.path(), "p.jsonl", &events);
    let args = [
        "sim",
        "--game",
        "pacsurface",
        "--seed",
        "3",
        "--loss-rate",
        "0.1",
        "--script",
        s(&script),
    ];
    let a = cubios(&args);
    let b = cubios(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scramble_inverse_script_wins() {
    let seed = 11;
    let moves = TwentyThree::new(seed, SCRAMBLE_MOVES).solution();
    let events: Vec<_> = moves
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let kind = match m {
                Move::Turn(t) => EventKind::turn(t),
                Move::Slide(f) => EventKind::slide(f),
            };
            SessionEvent::new(2 * i as u64, kind)
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(dir.path(), "solve.jsonl", &events);
    let out = cubios(&[
        "sim",
        "--game",
        "twentythree",
        "--seed",
        "11",
        "--script",
        s(&script),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"final_phase\":\"Won\""));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let illegal = write_script(
        dir.path(),
        "slide.jsonl",
        &[SessionEvent::new(
            1,
            EventKind::Slide {
                face: GlobalFace::U,
                row: 0,
                col: 0,
            },
        )],
    );
    let out = cubios(&["sim", "--game", "colormix", "--script", s(&illegal)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let garbage = dir.path().join("bad.jsonl");
    std::fs::write(&garbage, "{\"tick\":1,\"kind\":\"spin\"}\n").unwrap();
    assert_eq!(
        cubios(&["sim", "--game", "colormix", "--script", s(&garbage)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cubios(&["sim", "--game", "colormix", "--script", "/nonexistent"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cubios(&["sim", "--game", "colormix", "--frobnicate"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cubios(&["sim", "--game", "chess"]).status.code(), Some(1));
    assert_eq!(
        cubios(&["sim", "--game", "colormix", "--loss-rate", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cubios(&["verify", "--suite", "everything"]).status.code(),
        Some(1)
    );
    assert_eq!(cubios(&["--help"]).status.code(), Some(0));
}

#[test]
fn turning_without_a_core_is_illegal() {
    let dir = tempfile::tempdir().unwrap();
    let t = FaceTurn::new(Axis::Y, 1, TurnDir::Cw).unwrap();
    let script = write_script(
        dir.path(),
        "t.jsonl",
        &[SessionEvent::new(1, EventKind::turn(t))],
    );
    let out = cubios(&[
        "sim",
        "--game",
        "colormix",
        "--no-core",
        "--script",
        s(&script),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for suite in ["group", "atlas"] {
        let out = cubios(&["verify", "--suite", suite]);
        assert!(out.status.success(), "{suite}");
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
    }
    let out = cubios(&["verify", "--suite", "mesh", "--budget", "50"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn verify_full_enum_prints_the_count() {
    let out = cubios(&["verify", "--suite", "full-enum"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout)
        .lines()
        .any(|l| l == "3674160"));
}

fn sim_log(dir: &Path, game: &str, events: &[SessionEvent]) -> PathBuf {
    let script = write_script(dir, "script.jsonl", events);
    let log = dir.join("session.jsonl");
    let out = cubios(&[
        "sim",
        "--game",
        game,
        "--seed",
        "2",
        "--script",
        s(&script),
        "--out",
        s(&log),
    ]);
    assert!(out.status.success());
    log
}

fn render(log: &Path, at: u64, out: &Path) -> Output {
    cubios(&[
        "render",
        "--log",
        s(log),
        "--at",
        &at.to_string(),
        "--out",
        s(out),
    ])
}

#[test]
fn colormix_net_at_tick_zero_is_six_uniform_faces() {
    let dir = tempfile::tempdir().unwrap();
    let log = sim_log(dir.path(), "colormix", &[]);
    let img = dir.path().join("0.ppm");
    assert!(render(&log, 0, &img).status.success());
    let bytes = std::fs::read(&img).unwrap();
    let header = format!("P6\n{NET_WIDTH} {NET_HEIGHT}\n255\n");
    assert!(bytes.starts_with(header.as_bytes()));
    let px = &bytes[header.len()..];
    assert_eq!(px.len(), NET_WIDTH * NET_HEIGHT * 3);
    let side = FACE_PX as usize;
    let mut colours = BTreeSet::new();
    for (x0, y0) in [
        (side, 0),
        (0, side),
        (side, side),
        (2 * side, side),
        (3 * side, side),
        (side, 2 * side),
    ] {
        let at = |x: usize, y: usize| {
            let i = (y * NET_WIDTH + x) * 3;
            [px[i], px[i + 1], px[i + 2]]
        };
        let c = at(x0, y0);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                assert_eq!(at(x, y), c);
            }
        }
        colours.insert(c);
    }
    assert_eq!(colours.len(), 6);
}

#[test]
fn render_is_byte_stable_and_follows_turns() {
    let dir = tempfile::tempdir().unwrap();
    let t = FaceTurn::new(Axis::X, -1, TurnDir::Ccw).unwrap();
    let log = sim_log(
        dir.path(),
        "twentythree",
        &[SessionEvent::new(7, EventKind::turn(t))],
    );
    let (a, b, c) = (
        dir.path().join("a.ppm"),
        dir.path().join("b.ppm"),
        dir.path().join("c.ppm"),
    );
    assert!(render(&log, 6, &a).status.success());
    assert!(render(&log, 6, &b).status.success());
    assert!(render(&log, 7, &c).status.success());
    let (a, b, c) = (
        std::fs::read(a).unwrap(),
        std::fs::read(b).unwrap(),
        std::fs::read(c).unwrap(),
    );
    assert_eq!(a, b);
    assert_eq!(common::net_diff(&a, &c), common::moved_facets(t));
}

#[test]
fn render_past_the_end_fails() {
    let dir = tempfile::tempdir().unwrap();
    let log = sim_log(dir.path(), "colormix", &[]);
    let out = render(&log, 1, &dir.path().join("x.ppm"));
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("x.ppm").exists());
}

#[test]
fn replay_command_matches_sim() {
    let dir = tempfile::tempdir().unwrap();
    let s0 = common::random_session(cubios::games::GameKind::WordMatch, 8, 30);
    let script = write_script(dir.path(), "w.jsonl", s0.events());
    let log = dir.path().join("w.log");
    let sim = cubios(&[
        "sim",
        "--game",
        "wordmatch",
        "--seed",
        "8",
        "--script",
        s(&script),
        "--out",
        s(&log),
    ]);
    let rep = cubios(&["replay", "--log", s(&log)]);
    assert_eq!(digest(&sim), digest(&rep));
}

#[test]
fn dictionary_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let words = dir.path().join("words.txt");
    std::fs::write(&words, "CAT\nDOG\n").unwrap();
    let run = |env: Option<&Path>, flag: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_cubios"));
        c.args(["sim", "--game", "wordmatch", "--dictionary", flag]);
        match env {
            Some(p) => c.env("CUBIOS_DICT", p),
            None => c.env_remove("CUBIOS_DICT"),
        };
        c.output().unwrap()
    };
    assert_eq!(run(None, "/nonexistent/words").status.code(), Some(1));
    assert!(run(Some(&words), "/nonexistent/words").status.success());
    assert_eq!(
        run(Some(Path::new("/nonexistent/env")), s(&words))
            .status
            .code(),
        Some(1)
    );
}
