//! Speedscope "evented" flame graphs of the critical path.
//!
//! Time is measured in metric units: a gate of cost `c` on the path
//! occupies `c` units, and the profile ends at the schedule depth.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::Trace;
use crate::scheduler::{critical_path, Schedule};

pub const SPEEDSCOPE_SCHEMA: &str = "https://www.speedscope.app/file-format-schema.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedscopeFile {
    #[serde(rename = "$schema")]
    pub schema: String,
    pub shared: Shared,
    pub profiles: Vec<Profile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shared {
    pub frames: Vec<Frame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(rename = "type")]
    pub kind: String,
    pub name: String,
    pub unit: String,
    #[serde(rename = "startValue")]
    pub start_value: u64,
    #[serde(rename = "endValue")]
    pub end_value: u64,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub kind: EventKind,
    pub frame: usize,
    pub at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "O")]
    Open,
    #[serde(rename = "C")]
    Close,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlameError {
    #[error("overlapping spans: span starting at {start} begins before {prev_end}")]
    Overlap { start: u64, prev_end: u64 },
    #[error("span ends at {finish} before it starts at {start}")]
    Inverted { start: u64, finish: u64 },
}

/// A time interval attributed to a call stack (outermost frame first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: u64,
    pub finish: u64,
    pub stack: Vec<String>,
}

/// Build an evented profile from time-ordered, non-overlapping spans.
/// Consecutive spans share the longest common stack prefix, so a frame
/// stays open across adjacent spans that both run inside it.
pub fn build_profile(name: &str, spans: &[Span], end_value: u64) -> Result<SpeedscopeFile, FlameError> {
    let mut frames: Vec<Frame> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut events = Vec::new();
    let mut open: Vec<(usize, &str)> = Vec::new();
    let mut now = 0u64;
    for span in spans {
        if span.finish < span.start {
            return Err(FlameError::Inverted { start: span.start, finish: span.finish });
        }
        if span.start < now {
            return Err(FlameError::Overlap { start: span.start, prev_end: now });
        }
        let keep = if span.start == now {
            open.iter().zip(&span.stack).take_while(|((_, a), b)| *a == b.as_str()).count()
        } else {
            0
        };
        while open.len() > keep {
            let (frame, _) = open.pop().expect("non-empty");
            events.push(Event { kind: EventKind::Close, frame, at: now });
        }
        for f in &span.stack[keep..] {
            let id = *index.entry(f.clone()).or_insert_with(|| {
                frames.push(Frame { name: f.clone() });
                frames.len() - 1
            });
            events.push(Event { kind: EventKind::Open, frame: id, at: span.start });
            open.push((id, f.as_str()));
        }
        now = span.finish;
    }
    while let Some((frame, _)) = open.pop() {
        events.push(Event { kind: EventKind::Close, frame, at: now });
    }
    Ok(SpeedscopeFile {
        schema: SPEEDSCOPE_SCHEMA.into(),
        shared: Shared { frames },
        profiles: vec![Profile {
            kind: "evented".into(),
            name: name.into(),
            unit: "none".into(),
            start_value: 0,
            end_value: end_value.max(now),
            events,
        }],
    })
}

/// Spans of the critical path of `sched`, one per positive-cost gate.
pub fn critical_spans(trace: &Trace, sched: &Schedule) -> Vec<Span> {
    critical_path(sched)
        .into_iter()
        .filter_map(|i| {
            let slot = sched.slot(i)?;
            Some(Span {
                start: slot.start,
                finish: slot.finish,
                stack: trace.instructions[i].stack.iter().map(|f| f.to_string()).collect(),
            })
        })
        .collect()
}

/// Flame graph of the critical path of a scheduled trace.
pub fn to_speedscope(trace: &Trace, sched: &Schedule, name: &str) -> SpeedscopeFile {
    build_profile(name, &critical_spans(trace, sched), sched.depth)
        .expect("critical-path spans are ordered and disjoint")
}

pub fn to_json(file: &SpeedscopeFile) -> String {
    serde_json::to_string(file).expect("plain data serialises")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid speedscope file: {0}")]
pub struct InvalidProfile(pub String);

/// Inclusive time per frame name, computed by replaying the events.
pub type FrameTimes = HashMap<String, u64>;

/// Structural check of a speedscope document (the subset this crate
/// writes: evented profiles) followed by a replay of every profile's
/// events. Returns the inclusive time of each frame across all profiles.
pub fn validate_speedscope(json: &str) -> Result<FrameTimes, InvalidProfile> {
    let bad = |m: String| InvalidProfile(m);
    let doc: serde_json::Value = serde_json::from_str(json).map_err(|e| bad(format!("not JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| bad("top level is not an object".into()))?;
    match obj.get("$schema").and_then(|s| s.as_str()) {
        Some(SPEEDSCOPE_SCHEMA) => {}
        other => return Err(bad(format!("unexpected $schema {other:?}"))),
    }
    let file: SpeedscopeFile =
        serde_json::from_value(doc.clone()).map_err(|e| bad(format!("schema mismatch: {e}")))?;
    if file.profiles.is_empty() {
        return Err(bad("no profiles".into()));
    }
    let mut times = FrameTimes::new();
    for (pi, p) in file.profiles.iter().enumerate() {
        if p.kind != "evented" {
            return Err(bad(format!("profile {pi}: unsupported type `{}`", p.kind)));
        }
        if p.end_value < p.start_value {
            return Err(bad(format!("profile {pi}: endValue before startValue")));
        }
        let mut stack: Vec<(usize, u64)> = Vec::new();
        let mut last = p.start_value;
        for (ei, e) in p.events.iter().enumerate() {
            if e.frame >= file.shared.frames.len() {
                return Err(bad(format!("profile {pi} event {ei}: frame {} out of range", e.frame)));
            }
            if e.at < last || e.at > p.end_value {
                return Err(bad(format!("profile {pi} event {ei}: time {} out of order or range", e.at)));
            }
            last = e.at;
            match e.kind {
                EventKind::Open => stack.push((e.frame, e.at)),
                EventKind::Close => match stack.pop() {
                    Some((f, opened)) if f == e.frame => {
                        *times.entry(file.shared.frames[f].name.clone()).or_default() += e.at - opened;
                    }
                    _ => return Err(bad(format!("profile {pi} event {ei}: close does not match innermost open frame"))),
                },
            }
        }
        if !stack.is_empty() {
            return Err(bad(format!("profile {pi}: {} frames left open", stack.len())));
        }
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(start: u64, finish: u64, stack: &[&str]) -> Span {
        Span { start, finish, stack: stack.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn exact_serialisation() {
        let f = build_profile("p", &[span(0, 1, &["Main", "A"]), span(1, 2, &["Main"])], 2).unwrap();
        assert_eq!(
            to_json(&f),
            r#"{"$schema":"https://www.speedscope.app/file-format-schema.json","shared":{"frames":[{"name":"Main"},{"name":"A"}]},"profiles":[{"type":"evented","name":"p","unit":"none","startValue":0,"endValue":2,"events":[{"type":"O","frame":0,"at":0},{"type":"O","frame":1,"at":0},{"type":"C","frame":1,"at":1},{"type":"C","frame":0,"at":2}]}]}"#
        );
    }

    #[test]
    fn merging_and_replay() {
        let spans = [span(0, 2, &["M", "A", "B"]), span(2, 3, &["M", "A", "C"]), span(3, 5, &["M", "D"])];
        let f = build_profile("p", &spans, 5).unwrap();
        let times = validate_speedscope(&to_json(&f)).unwrap();
        assert_eq!(times["M"], 5);
        assert_eq!(times["A"], 3);
        assert_eq!(times["B"], 2);
        assert_eq!(times["D"], 2);
        // closes precede opens at the same timestamp
        let ev = &f.profiles[0].events;
        let at2: Vec<EventKind> = ev.iter().filter(|e| e.at == 2).map(|e| e.kind).collect();
        assert_eq!(at2, [EventKind::Close, EventKind::Open]);
    }

    #[test]
    fn overlapping_spans_rejected() {
        let err = build_profile("p", &[span(0, 3, &["M"]), span(2, 4, &["M"])], 4).unwrap_err();
        assert!(err.to_string().contains("overlapping spans"));
    }

    #[test]
    fn validator_rejects_malformed() {
        assert!(validate_speedscope("{}").is_err());
        assert!(validate_speedscope("[1]").is_err());
        let f = build_profile("p", &[span(0, 1, &["M"])], 1).unwrap();
        let good = to_json(&f);
        assert!(validate_speedscope(&good).is_ok());
        assert!(validate_speedscope(&good.replace(r#""frame":0,"at":1"#, r#""frame":3,"at":1"#)).is_err());
        assert!(validate_speedscope(&good.replace(r#""type":"C""#, r#""type":"O""#)).is_err());
    }
}
