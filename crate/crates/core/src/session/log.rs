//! JSONL session log: a header with the configuration, one line per event,
//! and a trailer holding an FNV-1a checksum of every byte before it.

use serde::{Deserialize, Serialize};

use crate::hash::fnv1a;

use super::{SessionConfig, SessionError, SessionEvent};

pub const LOG_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    version: u32,
    config: SessionConfig,
    dictionary: String,
}

#[derive(Serialize, Deserialize)]
struct Trailer {
    kind: String,
    events: usize,
    end_tick: u64,
    checksum: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog {
    pub config: SessionConfig,
    pub dictionary_digest: u64,
    pub events: Vec<SessionEvent>,
    /// Session clock when the log was written; never before the last event.
    pub end_tick: u64,
}

pub fn write_log(
    config: &SessionConfig,
    dictionary_digest: u64,
    events: &[SessionEvent],
    end_tick: u64,
) -> String {
    let header = Header {
        kind: "header".into(),
        version: LOG_VERSION,
        config: config.clone(),
        dictionary: format!("{dictionary_digest:016x}"),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    let trailer = Trailer {
        kind: "trailer".into(),
        events: events.len(),
        end_tick,
        checksum: format!("{:016x}", fnv1a(out.as_bytes())),
    };
    out.push_str(&serde_json::to_string(&trailer).expect("trailer serializes"));
    out.push('\n');
    out
}

fn corrupt(msg: impl Into<String>) -> SessionError {
    SessionError::CorruptLog(msg.into())
}

pub fn parse_log(text: &str) -> Result<ParsedLog, SessionError> {
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| corrupt("log has no trailer"))?;
    let (body, trailer_line) = text.split_at(body_end);
    let trailer: Trailer = serde_json::from_str(trailer_line.trim_end())
        .map_err(|e| corrupt(format!("bad trailer: {e}")))?;
    if trailer.kind != "trailer" {
        return Err(corrupt("last line is not a trailer"));
    }
    let want = format!("{:016x}", fnv1a(body.as_bytes()));
    if trailer.checksum != want {
        return Err(corrupt(format!(
            "checksum mismatch: trailer says {}, content hashes to {want}",
            trailer.checksum
        )));
    }
    let mut lines = body.lines();
    let header: Header = serde_json::from_str(lines.next().ok_or_else(|| corrupt("no header"))?)
        .map_err(|e| corrupt(format!("bad header: {e}")))?;
    if header.kind != "header" || header.version != LOG_VERSION {
        return Err(corrupt("unsupported header"));
    }
    let dictionary_digest = u64::from_str_radix(&header.dictionary, 16)
        .map_err(|e| corrupt(format!("bad dictionary digest: {e}")))?;
    let events = lines
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| corrupt(format!("event line {}: {e}", i + 2)))
        })
        .collect::<Result<Vec<SessionEvent>, _>>()?;
    if events.len() != trailer.events {
        return Err(corrupt(format!(
            "trailer counts {} events, log has {}",
            trailer.events,
            events.len()
        )));
    }
    if events.windows(2).any(|w| w[1].tick < w[0].tick)
        || events.last().is_some_and(|e| e.tick > trailer.end_tick)
    {
        return Err(corrupt("event ticks out of order"));
    }
    Ok(ParsedLog {
        config: header.config,
        dictionary_digest,
        events,
        end_tick: trailer.end_tick,
    })
}

/// Reads a script: one event per line, blank lines and `#` comments ignored.
pub fn parse_script(text: &str) -> Result<Vec<SessionEvent>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}
