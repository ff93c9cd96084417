//! Reference simulator of the producer-consumer exercise.
//!
//! Processes are state machines over counting semaphores (space, items,
//! producer mutex, consumer mutex) sharing a ring buffer. At each step a
//! random runnable process advances one operation, so every generated
//! schedule is one a correct solution could print.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Producer,
    Consumer,
}

struct Proc {
    role: Role,
    pid: u32,
    remaining: u64,
    step: u8,
    value: i64,
}

pub struct Config {
    pub size: u64,
    pub total: u64,
    pub producers: u64,
    pub consumers: u64,
}

fn share(total: u64, n: u64, i: u64) -> u64 {
    total / n + u64::from(i < total % n)
}

/// Output of one valid run, in the `[PROD]`/`[CONS]` line format.
pub fn simulate(cfg: &Config, seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let size = cfg.size as usize;
    let mut buffer = vec![0i64; size];
    let (mut head, mut tail) = (0usize, 0usize);
    // space, items, mutex_p, mutex_c
    let mut sem = [cfg.size, 0, 1, 1];
    let mut procs: Vec<Proc> = (0..cfg.producers)
        .map(|i| (Role::Producer, share(cfg.total, cfg.producers, i)))
        .chain((0..cfg.consumers).map(|i| (Role::Consumer, share(cfg.total, cfg.consumers, i))))
        .enumerate()
        .map(|(i, (role, remaining))| Proc {
            role,
            pid: 1000 + i as u32,
            remaining,
            step: 0,
            value: 0,
        })
        .collect();
    let mut out = String::new();

    loop {
        let runnable: Vec<usize> = (0..procs.len())
            .filter(|&i| {
                let p = &procs[i];
                if p.remaining == 0 {
                    return false;
                }
                let (first, second) = match p.role {
                    Role::Producer => (0, 2),
                    Role::Consumer => (1, 3),
                };
                match p.step {
                    0 => sem[first] > 0,
                    1 => sem[second] > 0,
                    _ => true,
                }
            })
            .collect();
        if runnable.is_empty() {
            assert!(procs.iter().all(|p| p.remaining == 0), "simulated deadlock");
            break;
        }
        let p = &mut procs[runnable[rng.gen_range(0..runnable.len())]];
        match (p.role, p.step) {
            (Role::Producer, 0) => sem[0] -= 1,
            (Role::Producer, 1) => sem[2] -= 1,
            (Role::Producer, 2) => {
                p.value = rng.gen_range(0..10);
                buffer[tail] = p.value;
                out.push_str(&format!(
                    "[PROD] pid={} value={} pos={}\n",
                    p.pid, p.value, tail
                ));
                tail = (tail + 1) % size;
            }
            (Role::Producer, 3) => sem[2] += 1,
            (Role::Producer, _) => sem[1] += 1,
            (Role::Consumer, 0) => sem[1] -= 1,
            (Role::Consumer, 1) => sem[3] -= 1,
            (Role::Consumer, 2) => {
                out.push_str(&format!(
                    "[CONS] pid={} value={} pos={}\n",
                    p.pid, buffer[head], head
                ));
                head = (head + 1) % size;
            }
            (Role::Consumer, 3) => sem[3] += 1,
            (Role::Consumer, _) => sem[0] += 1,
        }
        if rng.gen_bool(0.1) {
            out.push_str("debug: scheduler tick\n");
        }
        p.step += 1;
        if p.step == 5 {
            p.step = 0;
            p.remaining -= 1;
        }
    }
    out
}
