//! Seeded instance families shared by the integration tests.
#![allow(dead_code)]

use moldsched::makespan_oms::makespan_lower_bound;
use moldsched::rational::{q, Rational};
use moldsched::task_model::{SpeedupProfile, Task, TaskSet};
use moldsched::workbench::{generate, GeneratorSpec, ProfilePreset};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational in `[lo, hi]` on a grid of `steps`.
pub fn draw(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, steps: i64) -> Rational {
    lo + &((hi - lo) * q(rng.gen_range(0..=steps), steps))
}

/// Largest fastest execution time: no deadline below it is feasible.
pub fn slowest_fastest_time(tasks: &TaskSet) -> Rational {
    tasks.tasks().iter().map(|t| t.profile.fastest_time(tasks.k())).max().unwrap_or_default()
}

pub fn flat_task(id: u64, workload: Rational, k: usize) -> Task {
    Task::new(id, SpeedupProfile::constant(workload, k))
}

/// Generated instance with piecewise or unified profiles.
pub fn generated(seed: u64, n: usize, delta: usize, k: usize, m: usize, valued: bool) -> TaskSet {
    let mut r = rng(seed ^ 0x5eed);
    let spec = GeneratorSpec {
        n,
        delta,
        k,
        m,
        workload_range: (q(1, 1), q(100, 1)),
        growth_range: (q(0, 1), q(1, 10)),
        value_range: valued.then(|| (q(1, 1), q(20, 1))),
        seed,
        preset: if r.gen_bool(0.25) { ProfilePreset::Unified } else { ProfilePreset::Piecewise },
    };
    generate(&spec).expect("generator spec is valid")
}

/// Tiny instance for the exact oracles: `n <= 4`, `k <= m <= 8`, and
/// `delta <= 5`.
pub fn tiny(seed: u64, valued: bool) -> TaskSet {
    let mut r = rng(seed);
    let delta = r.gen_range(2..=5);
    let k = r.gen_range(delta..=(delta + 2).min(8));
    let m = r.gen_range(k..=8);
    let n = r.gen_range(1..=4);
    let tasks = (0..n as u64)
        .map(|id| {
            let base = draw(&mut r, &q(1, 2), &q(8, 1), 16);
            let limit = r.gen_range(delta..=k);
            let growth = draw(&mut r, &q(0, 1), &q(1, 2), 4);
            let mut task = Task::new(id, SpeedupProfile::piecewise(base, limit, growth));
            if valued {
                task = task.with_value(draw(&mut r, &q(1, 1), &q(10, 1), 9));
            }
            task
        })
        .collect();
    TaskSet::new(delta, k, m, tasks).expect("tiny instance is valid")
}

/// Deadline between half and one-and-a-half times the makespan lower bound,
/// so that capacity binds in a good share of draws.
pub fn tight_deadline(seed: u64, tasks: &TaskSet) -> Rational {
    let mut r = rng(seed.wrapping_mul(31) + 7);
    let lb = makespan_lower_bound(tasks);
    &lb * &draw(&mut r, &q(1, 2), &q(3, 2), 8)
}
