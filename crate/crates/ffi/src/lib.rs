//! C ABI over the session engine.
//!
//! Every entry point returns a [`CubiosStatus`]; on anything but
//! `CUBIOS_STATUS_OK` the calling thread's last error message explains why.
//! Sessions are opaque handles owned by the caller and released with
//! [`cubios_session_free`]. Strings cross the boundary as NUL-terminated
//! UTF-8; events and configs use the same JSON as the CLI scripts and logs.
//!
//! Variable-size outputs follow one protocol: `*len` always receives the
//! size needed (including the NUL for text), and the buffer is written only
//! when `cap` is large enough. Passing a null buffer with `cap == 0` is the
//! way to ask for the size.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cubios::games::{GameKind, GamePhase};
use cubios::session::{self, Session, SessionConfig, SessionDigest, SessionError, SessionEvent};
use cubios::surface::write_net_ppm;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubiosStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    IllegalEvent = 4,
    CorruptLog = 5,
    OutOfRange = 6,
    Dictionary = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubiosPhase {
    Running = 0,
    Won = 1,
    Lost = 2,
    Forfeit = 3,
}

impl From<GamePhase> for CubiosPhase {
    fn from(p: GamePhase) -> CubiosPhase {
        match p {
            GamePhase::Running => CubiosPhase::Running,
            GamePhase::Won => CubiosPhase::Won,
            GamePhase::Lost => CubiosPhase::Lost,
            GamePhase::Forfeit => CubiosPhase::Forfeit,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubiosDigest {
    pub final_score: i64,
    pub final_phase: CubiosPhase,
    pub state_hash: u64,
    pub tick_count: u64,
}

impl From<SessionDigest> for CubiosDigest {
    fn from(d: SessionDigest) -> CubiosDigest {
        CubiosDigest {
            final_score: d.final_score,
            final_phase: d.final_phase.into(),
            state_hash: d.state_hash,
            tick_count: d.tick_count,
        }
    }
}

/// Opaque session handle.
pub struct CubiosSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(CubiosStatus, String);

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Failure {
        let status = match e {
            SessionError::IllegalEvent { .. } => CubiosStatus::IllegalEvent,
            SessionError::CorruptLog(_) => CubiosStatus::CorruptLog,
            SessionError::TickOutOfRange { .. } => CubiosStatus::OutOfRange,
            SessionError::Dictionary(_) => CubiosStatus::Dictionary,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CubiosStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, recording any failure (or panic) as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CubiosStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".to_owned());
        Err(Failure(CubiosStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            CubiosStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(CubiosStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn session_ref<'a>(s: *const CubiosSession) -> Result<&'a Session, Failure> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("session"))
}

unsafe fn session_mut<'a>(s: *mut CubiosSession) -> Result<&'a mut Session, Failure> {
    s.as_mut()
        .map(|s| &mut s.inner)
        .ok_or_else(|| null("session"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn emit(
    bytes: &[u8],
    nul: bool,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> Result<(), Failure> {
    let need = bytes.len() + usize::from(nul);
    *out(len)? = need;
    if cap < need {
        return Err(Failure(
            CubiosStatus::BufferTooSmall,
            format!("need {need} bytes, have {cap}"),
        ));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
    if nul {
        *buf.add(bytes.len()) = 0;
    }
    Ok(())
}

fn boxed(s: Session) -> *mut CubiosSession {
    Box::into_raw(Box::new(CubiosSession { inner: s }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cubios_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`. Returns the
/// size needed including the NUL; the message is truncated to fit `cap`.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn cubios_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = e.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        e.len() + 1
    })
}

/// New session for a game by name with default policy and a lossless mesh.
///
/// # Safety
/// `game` must be a NUL-terminated string; `out_session` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_new(
    game: *const c_char,
    seed: u64,
    out_session: *mut *mut CubiosSession,
) -> CubiosStatus {
    guard(|| {
        let kind: GameKind = text(game, "game")?
            .parse()
            .map_err(|e| Failure(CubiosStatus::InvalidArgument, e))?;
        let slot = out(out_session)?;
        *slot = boxed(Session::new(SessionConfig::new(kind, seed))?);
        Ok(())
    })
}

/// New session from a JSON config, as found in a log header.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_session` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_new_json(
    config_json: *const c_char,
    out_session: *mut *mut CubiosSession,
) -> CubiosStatus {
    guard(|| {
        let config: SessionConfig = serde_json::from_str(text(config_json, "config")?)
            .map_err(|e| Failure(CubiosStatus::InvalidArgument, format!("config: {e}")))?;
        if !(0.0..=1.0).contains(&config.loss_rate) {
            return Err(Failure(
                CubiosStatus::InvalidArgument,
                format!("loss rate {} is outside [0, 1]", config.loss_rate),
            ));
        }
        let slot = out(out_session)?;
        *slot = boxed(Session::new(config)?);
        Ok(())
    })
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `session` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_free(session: *mut CubiosSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Applies one event given as JSON, e.g.
/// `{"tick":3,"kind":"turn","axis":"X","layer":1,"dir":"cw"}`.
///
/// # Safety
/// `session` must be a live handle; `event_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_apply(
    session: *mut CubiosSession,
    event_json: *const c_char,
) -> CubiosStatus {
    guard(|| {
        let s = session_mut(session)?;
        let event: SessionEvent = serde_json::from_str(text(event_json, "event")?)
            .map_err(|e| Failure(CubiosStatus::InvalidArgument, format!("event: {e}")))?;
        s.apply(event)?;
        Ok(())
    })
}

/// Runs ticks until the clock reaches `tick` or the game ends.
///
/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_advance_to(
    session: *mut CubiosSession,
    tick: u64,
) -> CubiosStatus {
    guard(|| {
        session_mut(session)?.advance_to(tick);
        Ok(())
    })
}

/// # Safety
/// `session` must be a live handle; `out_clock` writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_clock(
    session: *const CubiosSession,
    out_clock: *mut u64,
) -> CubiosStatus {
    guard(|| {
        *out(out_clock)? = session_ref(session)?.clock();
        Ok(())
    })
}

/// # Safety
/// `session` must be a live handle; `out_digest` writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_digest(
    session: *const CubiosSession,
    out_digest: *mut CubiosDigest,
) -> CubiosStatus {
    guard(|| {
        *out(out_digest)? = session_ref(session)?.digest().into();
        Ok(())
    })
}

/// The session log (JSONL) as NUL-terminated text.
///
/// # Safety
/// `session` must be a live handle; `buf` null or valid for `cap` bytes;
/// `len` writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_log(
    session: *const CubiosSession,
    buf: *mut c_char,
    cap: usize,
    len: *mut usize,
) -> CubiosStatus {
    guard(|| {
        emit(
            session_ref(session)?.log().as_bytes(),
            true,
            buf.cast(),
            cap,
            len,
        )
    })
}

/// The cube net as a binary PPM image.
///
/// # Safety
/// `session` must be a live handle; `buf` null or valid for `cap` bytes;
/// `len` writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_session_net_ppm(
    session: *const CubiosSession,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> CubiosStatus {
    guard(|| {
        emit(
            &write_net_ppm(&session_ref(session)?.field()),
            false,
            buf,
            cap,
            len,
        )
    })
}

/// Re-runs a log and reports its digest.
///
/// # Safety
/// `log` must be a NUL-terminated string; `out_digest` writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_replay(
    log: *const c_char,
    out_digest: *mut CubiosDigest,
) -> CubiosStatus {
    guard(|| {
        let d = session::replay(text(log, "log")?)?;
        *out(out_digest)? = d.into();
        Ok(())
    })
}

/// A new session holding the logged state at tick `at`.
///
/// # Safety
/// `log` must be a NUL-terminated string; `out_session` writable.
#[no_mangle]
pub unsafe extern "C" fn cubios_state_at(
    log: *const c_char,
    at: u64,
    out_session: *mut *mut CubiosSession,
) -> CubiosStatus {
    guard(|| {
        let s = session::state_at(text(log, "log")?, at)?;
        *out(out_session)? = boxed(s);
        Ok(())
    })
}
