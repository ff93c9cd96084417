//! OS-resource snapshots and leak detection.
//!
//! A snapshot is plain text, one resource per line:
//! `<kind> <key> <id> <owner>`, where kind is `semaphore_set`,
//! `shared_memory` or `message_queue`, key is decimal or `0x` hex and id is
//! decimal. Blank lines, `#` comments and header lines (no numeric field)
//! are skipped.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    SemaphoreSet,
    SharedMemory,
    MessageQueue,
}

impl ResourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::SemaphoreSet => "semaphore_set",
            ResourceKind::SharedMemory => "shared_memory",
            ResourceKind::MessageQueue => "message_queue",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "semaphore_set" => Ok(ResourceKind::SemaphoreSet),
            "shared_memory" => Ok(ResourceKind::SharedMemory),
            "message_queue" => Ok(ResourceKind::MessageQueue),
            _ => Err(()),
        }
    }
}

/// An IPC object. Identity is (kind, os_id); the key is 0 for
/// `IPC_PRIVATE` objects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceId {
    pub kind: ResourceKind,
    pub key: u64,
    pub os_id: u64,
    pub owner: String,
}

impl ResourceId {
    fn identity(&self) -> (ResourceKind, u64) {
        (self.kind, self.os_id)
    }
}

impl PartialEq for ResourceId {
    fn eq(&self, other: &Self) -> bool {
        self.identity() == other.identity()
    }
}

impl Eq for ResourceId {}

impl PartialOrd for ResourceId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ResourceId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.identity().cmp(&other.identity())
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} 0x{:08x} {} {}",
            self.kind, self.key, self.os_id, self.owner
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotLabel {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub resources: BTreeSet<ResourceId>,
    pub taken_at: SnapshotLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("snapshot line {line}: {message}")]
pub struct SnapshotFormatError {
    pub line: usize,
    pub message: String,
}

fn parse_key(text: &str) -> Option<u64> {
    match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        // ipcs prints negative keys for values above i32::MAX.
        None => text
            .parse::<u64>()
            .ok()
            .or_else(|| text.parse::<i32>().ok().map(|k| k as u32 as u64)),
    }
}

fn is_header(fields: &[&str]) -> bool {
    !fields
        .iter()
        .any(|f| f.chars().next().is_some_and(|c| c.is_ascii_digit()))
}

pub fn parse_snapshot(text: &str, label: SnapshotLabel) -> Result<Snapshot, SnapshotFormatError> {
    let mut resources = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| SnapshotFormatError {
            line: line_no,
            message,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let kind = match fields[0].parse::<ResourceKind>() {
            Ok(k) => k,
            Err(()) if is_header(&fields) => continue,
            Err(()) => return Err(err(format!("unknown resource kind `{}`", fields[0]))),
        };
        if fields.len() != 4 {
            return Err(err(format!(
                "expected `<kind> <key> <id> <owner>`, got {} fields",
                fields.len()
            )));
        }
        let key = parse_key(fields[1]).ok_or_else(|| err(format!("bad key `{}`", fields[1])))?;
        let os_id = fields[2]
            .parse()
            .map_err(|_| err(format!("bad id `{}`", fields[2])))?;
        let r = ResourceId {
            kind,
            key,
            os_id,
            owner: fields[3].to_string(),
        };
        if let Some(prev) = resources.get(&r) {
            return Err(err(format!("duplicate resource {prev}")));
        }
        resources.insert(r);
    }
    Ok(Snapshot {
        resources,
        taken_at: label,
    })
}

/// Resources present after but not before, ordered by (kind, id).
/// Objects that disappeared are not reported.
pub fn diff_snapshots(before: &Snapshot, after: &Snapshot) -> Vec<ResourceId> {
    after
        .resources
        .difference(&before.resources)
        .cloned()
        .collect()
}
