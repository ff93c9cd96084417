//! Parsing of program output into events and the checks run on them.

mod spec;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use spec::{EventTemplate, JoinKey, OrderRelation, TraceSpec, CONSUMPTION, PRODUCTION};

pub const MSG_PRODUCTION_LOCATION: &str = "Production at wrong location";
pub const MSG_CONSUMPTION_LOCATION: &str = "Consumption at wrong location";
pub const MSG_MISSING: &str = "Missing productions/consumptions";
pub const MSG_VALUES: &str = "Produced/consumed values do not match";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("invalid trace spec: {0}")]
    Spec(String),
    /// A line looks like an event but a slot does not hold an integer.
    #[error("line {line_no}: malformed `{label}` event: {raw}")]
    MalformedEvent {
        line_no: usize,
        label: String,
        raw: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Production,
    Consumption,
    Generic(String),
}

impl EventKind {
    fn from_label(label: &str) -> Self {
        match label {
            PRODUCTION => EventKind::Production,
            CONSUMPTION => EventKind::Consumption,
            other => EventKind::Generic(other.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            EventKind::Production => PRODUCTION,
            EventKind::Consumption => CONSUMPTION,
            EventKind::Generic(l) => l,
        }
    }
}

/// One recognised output line. Slots absent from the template read as 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub pid: i64,
    pub value: i64,
    pub position: i64,
    /// 1-based line in the captured output.
    pub line_no: usize,
    pub raw: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceIssue {
    pub code: String,
    pub message: String,
    /// Output line the issue is about, when it concerns a single event.
    pub line_no: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceVerdict {
    pub status: Status,
    pub errors: Vec<TraceIssue>,
}

impl TraceVerdict {
    fn from_errors(errors: Vec<TraceIssue>) -> Self {
        let status = if errors.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        };
        TraceVerdict { status, errors }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Concatenates verdicts, dropping issues already reported with the same
    /// message on the same line.
    pub fn merge(verdicts: impl IntoIterator<Item = TraceVerdict>) -> Self {
        let mut errors: Vec<TraceIssue> = Vec::new();
        for v in verdicts {
            for e in v.errors {
                if !errors
                    .iter()
                    .any(|x| x.message == e.message && x.line_no == e.line_no)
                {
                    errors.push(e);
                }
            }
        }
        Self::from_errors(errors)
    }
}

fn issue(code: &str, message: String, line_no: Option<usize>) -> TraceIssue {
    TraceIssue {
        code: code.to_string(),
        message,
        line_no,
    }
}

/// Extracts events from captured output. Lines that match no template are
/// skipped; a line that starts like a template but does not parse is an
/// error.
pub fn parse_trace(output: &str, spec: &TraceSpec) -> Result<Vec<TraceEvent>, TraceError> {
    let mut events = Vec::new();
    for (i, raw_line) in output.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        let line_no = i + 1;
        let mut suspect = None;
        let mut found = None;
        for t in &spec.events {
            match t.captures(line) {
                Some(caps) => {
                    found = Some((t, caps));
                    break;
                }
                None if t.prefix_matches(line) => suspect = suspect.or(Some(t)),
                None => {}
            }
        }
        let malformed = |t: &EventTemplate| TraceError::MalformedEvent {
            line_no,
            label: t.label.clone(),
            raw: line.to_string(),
        };
        let Some((template, caps)) = found else {
            if let Some(t) = suspect {
                return Err(malformed(t));
            }
            continue;
        };
        let mut event = TraceEvent {
            kind: EventKind::from_label(&template.label),
            pid: 0,
            value: 0,
            position: 0,
            line_no,
            raw: line.to_string(),
        };
        for (slot, text) in caps {
            let n: i64 = text.parse().map_err(|_| malformed(template))?;
            match slot {
                "pid" => event.pid = n,
                "value" => event.value = n,
                _ => event.position = n,
            }
        }
        events.push(event);
    }
    Ok(events)
}

/// The ring-buffer check: every production must write at the tail and every
/// consumption read at the head, both advancing modulo the ring size;
/// afterwards both sides must count `total` and carry the same values.
pub fn evaluate_prod_cons(events: &[TraceEvent], spec: &TraceSpec) -> TraceVerdict {
    let size = spec.size as i64;
    let (mut head, mut tail) = (0i64, 0i64);
    let mut produced = Vec::new();
    let mut consumed = Vec::new();
    let mut errors = Vec::new();
    for e in events {
        match e.kind {
            EventKind::Production => {
                if e.position != tail {
                    errors.push(issue(
                        "production_location",
                        format!(
                            "{MSG_PRODUCTION_LOCATION}: expected {tail}, got {}",
                            e.position
                        ),
                        Some(e.line_no),
                    ));
                }
                produced.push(e.value);
                tail = (tail + 1) % size;
            }
            EventKind::Consumption => {
                if e.position != head {
                    errors.push(issue(
                        "consumption_location",
                        format!(
                            "{MSG_CONSUMPTION_LOCATION}: expected {head}, got {}",
                            e.position
                        ),
                        Some(e.line_no),
                    ));
                }
                consumed.push(e.value);
                head = (head + 1) % size;
            }
            EventKind::Generic(_) => {}
        }
    }
    let total = spec.total as usize;
    if produced.len() != total || consumed.len() != total {
        errors.push(issue(
            "missing_events",
            format!(
                "{MSG_MISSING}: expected {total} of each, got {} productions and {} consumptions",
                produced.len(),
                consumed.len()
            ),
            None,
        ));
    }
    if multiset(&produced) != multiset(&consumed) {
        errors.push(issue("values_mismatch", MSG_VALUES.to_string(), None));
    }
    TraceVerdict::from_errors(errors)
}

fn multiset(values: &[i64]) -> BTreeMap<i64, usize> {
    let mut m = BTreeMap::new();
    for v in values {
        *m.entry(*v).or_insert(0) += 1;
    }
    m
}

fn values_of<'a>(events: &'a [TraceEvent], label: &'a str) -> impl Iterator<Item = &'a TraceEvent> {
    events.iter().filter(move |e| e.kind.label() == label)
}

/// Every label with an expected count must occur exactly that many times.
pub fn check_progress(events: &[TraceEvent], spec: &TraceSpec) -> TraceVerdict {
    let mut errors = Vec::new();
    let mut prod_cons_short = false;
    for t in &spec.events {
        let Some(expected) = spec.expected_count(&t.label) else {
            continue;
        };
        let got = values_of(events, &t.label).count() as u64;
        if got == expected {
            continue;
        }
        if t.label == PRODUCTION || t.label == CONSUMPTION {
            prod_cons_short = true;
        } else {
            errors.push(issue(
                "missing_events",
                format!(
                    "Missing `{}` events: expected {expected}, got {got}",
                    t.label
                ),
                None,
            ));
        }
    }
    if prod_cons_short {
        let count = |l| values_of(events, l).count();
        errors.insert(
            0,
            issue(
                "missing_events",
                format!(
                    "{MSG_MISSING}: expected {} of each, got {} productions and {} consumptions",
                    spec.total,
                    count(PRODUCTION),
                    count(CONSUMPTION)
                ),
                None,
            ),
        );
    }
    TraceVerdict::from_errors(errors)
}

/// Each configured pair of labels must carry equal multisets of values.
pub fn check_values(events: &[TraceEvent], spec: &TraceSpec) -> TraceVerdict {
    let mut errors = Vec::new();
    for (a, b) in &spec.value_pairs {
        let va: Vec<i64> = values_of(events, a).map(|e| e.value).collect();
        let vb: Vec<i64> = values_of(events, b).map(|e| e.value).collect();
        if multiset(&va) != multiset(&vb) {
            let message = if (a.as_str(), b.as_str()) == (PRODUCTION, CONSUMPTION) {
                MSG_VALUES.to_string()
            } else {
                format!("Values of `{a}` and `{b}` events do not match")
            };
            errors.push(issue("values_mismatch", message, None));
        }
    }
    TraceVerdict::from_errors(errors)
}

/// Every later-label event must be preceded by a distinct earlier-label
/// event (with the same value when joined by value).
pub fn check_order(events: &[TraceEvent], spec: &TraceSpec) -> TraceVerdict {
    let mut errors = Vec::new();
    for rel in &spec.order {
        // Unmatched earlier events by join value. Equal-valued earlier events
        // are interchangeable, so counting is an exact matching.
        let mut pending: BTreeMap<i64, usize> = BTreeMap::new();
        for e in events {
            let key = match rel.join {
                JoinKey::Value => e.value,
                JoinKey::None => 0,
            };
            if e.kind.label() == rel.earlier {
                *pending.entry(key).or_insert(0) += 1;
            } else if e.kind.label() == rel.later {
                match pending.get_mut(&key).filter(|n| **n > 0) {
                    Some(n) => *n -= 1,
                    None => {
                        let message = match rel.join {
                            JoinKey::Value => format!(
                                "`{}` of value {} happens before any matching `{}`",
                                rel.later, e.value, rel.earlier
                            ),
                            JoinKey::None => format!(
                                "`{}` happens before any matching `{}`",
                                rel.later, rel.earlier
                            ),
                        };
                        errors.push(issue("order", message, Some(e.line_no)));
                    }
                }
            }
        }
    }
    TraceVerdict::from_errors(errors)
}

/// Every check that applies to `spec`, merged into one verdict.
pub fn check_trace(events: &[TraceEvent], spec: &TraceSpec) -> TraceVerdict {
    let mut verdicts = Vec::new();
    if spec.is_prod_cons() {
        verdicts.push(evaluate_prod_cons(events, spec));
    }
    verdicts.push(check_progress(events, spec));
    verdicts.push(check_values(events, spec));
    verdicts.push(check_order(events, spec));
    TraceVerdict::merge(verdicts)
}

#[cfg(test)]
mod tests;
