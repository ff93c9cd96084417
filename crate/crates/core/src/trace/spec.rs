use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::TraceError;

/// Label of production events in a producer-consumer trace.
pub const PRODUCTION: &str = "production";
/// Label of consumption events in a producer-consumer trace.
pub const CONSUMPTION: &str = "consumption";

const SLOTS: &[&str] = &["pid", "value", "pos"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinKey {
    Value,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderRelation {
    pub earlier: String,
    pub later: String,
    pub join: JoinKey,
}

/// One output-line template, e.g. `[PROD] pid={pid} value={value} pos={pos}`.
#[derive(Debug, Clone)]
pub struct EventTemplate {
    pub label: String,
    pub source: String,
    /// Literal text before the first slot; a line starting with it is
    /// meant to be this event.
    prefix: String,
    regex: Regex,
    slots: Vec<String>,
}

impl PartialEq for EventTemplate {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.source == other.source
    }
}

impl Eq for EventTemplate {}

impl EventTemplate {
    pub fn compile(label: &str, source: &str) -> Result<Self, TraceError> {
        let slot_re = Regex::new(r"\{([A-Za-z_]+)\}").expect("static regex");
        let mut pattern = String::from("^");
        let mut slots = Vec::new();
        let mut last = 0;
        for cap in slot_re.captures_iter(source) {
            let whole = cap.get(0).expect("group 0");
            let name = &cap[1];
            if !SLOTS.contains(&name) {
                return Err(TraceError::Spec(format!(
                    "event `{label}`: unknown slot {{{name}}} (expected one of pid, value, pos)"
                )));
            }
            if slots.iter().any(|s| s == name) {
                return Err(TraceError::Spec(format!(
                    "event `{label}`: slot {{{name}}} appears twice"
                )));
            }
            pattern.push_str(&regex::escape(&source[last..whole.start()]));
            pattern.push_str(r"(\S+)");
            slots.push(name.to_string());
            last = whole.end();
        }
        pattern.push_str(&regex::escape(&source[last..]));
        pattern.push_str(r"\s*$");
        let prefix = match slot_re.find(source) {
            Some(m) => source[..m.start()].to_string(),
            None => source.to_string(),
        };
        if prefix.trim().is_empty() {
            return Err(TraceError::Spec(format!(
                "event `{label}`: template must start with literal text"
            )));
        }
        Ok(EventTemplate {
            label: label.to_string(),
            source: source.to_string(),
            prefix,
            regex: Regex::new(&pattern).expect("escaped template is a valid regex"),
            slots,
        })
    }

    pub fn has_slot(&self, name: &str) -> bool {
        self.slots.iter().any(|s| s == name)
    }

    pub(crate) fn prefix_matches(&self, line: &str) -> bool {
        line.starts_with(&self.prefix)
    }

    /// Slot name to raw captured text, or `None` when the line does not
    /// have the template's shape.
    pub(crate) fn captures<'l>(&self, line: &'l str) -> Option<Vec<(&str, &'l str)>> {
        let caps = self.regex.captures(line)?;
        Some(
            self.slots
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), caps.get(i + 1).map_or("", |m| m.as_str())))
                .collect(),
        )
    }
}

/// What an assignment's output must look like.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSpec {
    /// Ring capacity.
    pub size: u64,
    /// Productions (and consumptions) a complete run performs.
    pub total: u64,
    pub events: Vec<EventTemplate>,
    pub order: Vec<OrderRelation>,
    pub value_pairs: Vec<(String, String)>,
    /// Expected count for labels other than production and consumption.
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    size: u64,
    total: u64,
    events: BTreeMap<String, String>,
    #[serde(default)]
    order: Vec<OrderRelation>,
    #[serde(default)]
    value_pairs: Vec<(String, String)>,
    #[serde(default)]
    counts: BTreeMap<String, u64>,
}

impl TraceSpec {
    pub fn template(&self, label: &str) -> Option<&EventTemplate> {
        self.events.iter().find(|t| t.label == label)
    }

    /// Whether the spec describes a ring-buffer producer-consumer exchange.
    pub fn is_prod_cons(&self) -> bool {
        self.template(PRODUCTION).is_some() && self.template(CONSUMPTION).is_some()
    }

    /// Expected number of events with `label`, if any.
    pub fn expected_count(&self, label: &str) -> Option<u64> {
        if label == PRODUCTION || label == CONSUMPTION {
            Some(self.total)
        } else {
            self.counts.get(label).copied()
        }
    }

    pub fn from_yaml(document: &str) -> Result<Self, TraceError> {
        let raw: RawSpec =
            serde_yaml::from_str(document).map_err(|e| TraceError::Spec(e.to_string()))?;
        if raw.size == 0 {
            return Err(TraceError::Spec("size must be at least 1".into()));
        }
        let events = raw
            .events
            .iter()
            .map(|(label, src)| EventTemplate::compile(label, src))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = TraceSpec {
            size: raw.size,
            total: raw.total,
            events,
            order: raw.order,
            value_pairs: raw.value_pairs,
            counts: raw.counts,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, TraceError> {
        let text = fs::read_to_string(path)
            .map_err(|e| TraceError::Spec(format!("{}: {e}", path.display())))?;
        Self::from_yaml(&text)
    }

    fn validate(&self) -> Result<(), TraceError> {
        let err = |m: String| Err(TraceError::Spec(m));
        for label in [PRODUCTION, CONSUMPTION] {
            if let Some(t) = self.template(label) {
                for slot in SLOTS {
                    if !t.has_slot(slot) {
                        return err(format!("event `{label}` needs a {{{slot}}} slot"));
                    }
                }
            }
        }
        let mut needs_value = BTreeSet::new();
        for r in &self.order {
            for l in [&r.earlier, &r.later] {
                if self.template(l).is_none() {
                    return err(format!("order refers to unknown event `{l}`"));
                }
                if r.join == JoinKey::Value {
                    needs_value.insert(l.as_str());
                }
            }
        }
        for (a, b) in &self.value_pairs {
            for l in [a, b] {
                if self.template(l).is_none() {
                    return err(format!("value_pairs refers to unknown event `{l}`"));
                }
                needs_value.insert(l.as_str());
            }
        }
        for l in needs_value {
            if !self.template(l).is_some_and(|t| t.has_slot("value")) {
                return err(format!(
                    "event `{l}` is compared by value but has no {{value}} slot"
                ));
            }
        }
        for l in self.counts.keys() {
            if self.template(l).is_none() {
                return err(format!("counts refers to unknown event `{l}`"));
            }
        }
        Ok(())
    }
}
