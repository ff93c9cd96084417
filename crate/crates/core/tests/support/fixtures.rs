//! Submissions derived from the reference solution by textual edits.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Mutex, MutexGuard};

use tempfile::TempDir;

pub fn assignment_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assignments/io-scheduler")
}

pub fn reference_dir() -> PathBuf {
    assignment_dir().join("reference")
}

pub fn manifest_path() -> PathBuf {
    assignment_dir().join("manifest.yaml")
}

pub fn reference_source() -> String {
    fs::read_to_string(reference_dir().join("prodcons.c")).unwrap()
}

/// `source` with each `(from, to)` applied; every `from` must occur once.
pub fn edit(source: &str, edits: &[(&str, &str)]) -> String {
    let mut s = source.to_string();
    for (from, to) in edits {
        assert_eq!(s.matches(from).count(), 1, "edit target {from:?}");
        s = s.replacen(from, to, 1);
    }
    s
}

/// A copy of the reference with `prodcons.c` edited.
pub fn mutant(edits: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(reference_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let src = edit(&reference_source(), edits);
    fs::write(dir.path().join("prodcons.c"), src).unwrap();
    dir
}

/// Does not compile: missing semicolon on line 55.
pub const BUILD_ERROR: &[(&str, &str)] = &[("q->tail = 0;", "q->tail = 0")];

/// Never removes its semaphore set.
pub const LEAK: &[(&str, &str)] = &[("    semctl(sem_id, 0, IPC_RMID);\n", "\n")];

/// Producers wait on their mutex twice and block forever.
pub const DEADLOCK: &[(&str, &str)] = &[(
    "    Wait_Sem(sem_id, MUTEX_P);\n",
    "    Wait_Sem(sem_id, MUTEX_P); Wait_Sem(sem_id, MUTEX_P);\n",
)];

/// Segfaults after the children finish.
pub const CRASH: &[(&str, &str)] = &[(
    "    removal(q, sem_id);\n",
    "    *(volatile int *) 0 = 0;\n",
)];

/// Initializes the producer mutex to 0 and compensates with an extra
/// signal before forking: runs correctly, but breaks the initialization
/// convention (line 66).
pub const MUTEX_ZERO: &[(&str, &str)] = &[
    (
        "semctl(sem_id, MUTEX_P, SETVAL, 1);",
        "semctl(sem_id, MUTEX_P, SETVAL, 0);",
    ),
    (
        "    q = initialization(&sem_id);\n",
        "    q = initialization(&sem_id); Signal_Sem(sem_id, MUTEX_P);\n",
    ),
];

static IPC_LOCK: Mutex<()> = Mutex::new(());

/// Serializes tests that run submissions: snapshots are system-wide, so
/// two concurrent runs would see each other's objects as leaks.
pub fn ipc_lock() -> MutexGuard<'static, ()> {
    IPC_LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Removes objects reported in leak messages of the form
/// `... <kind> with key 0x... and id <id> was not removed`.
pub fn remove_leaks<'a>(messages: impl IntoIterator<Item = &'a str>) {
    for m in messages {
        let words: Vec<&str> = m.split_whitespace().collect();
        let Some(kind) = words.iter().find_map(|w| match *w {
            "semaphore_set" => Some("-s"),
            "shared_memory" => Some("-m"),
            "message_queue" => Some("-q"),
            _ => None,
        }) else {
            continue;
        };
        let Some(id) = words.windows(2).find(|w| w[0] == "id").map(|w| w[1]) else {
            continue;
        };
        let _ = Command::new("ipcrm").args([kind, id]).status();
    }
}
