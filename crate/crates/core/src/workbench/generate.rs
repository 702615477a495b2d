//! Seeded random instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::task_model::{ModelError, SpeedupProfile, Task, TaskSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("{0} range is empty or negative")]
    BadRange(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Shape of the generated speedup profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfilePreset {
    /// Constant workload up to a per-task limit drawn from `[delta, k]`, then
    /// relative growth drawn from `growth_range` per extra processor.
    #[default]
    Piecewise,
    /// Communication-overhead model `t_p = D_1/p + (p-1)·c` with `c` drawn
    /// from `growth_range`, tabulated with the workload held at `D_1` up to
    /// `delta` so the profile is valid.
    Unified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub delta: usize,
    pub k: usize,
    pub m: usize,
    /// Range of one-processor workloads.
    pub workload_range: (Rational, Rational),
    pub growth_range: (Rational, Rational),
    #[serde(default)]
    pub value_range: Option<(Rational, Rational)>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub preset: ProfilePreset,
}

/// Number of grid steps used when drawing a rational from a range.
const GRID: i64 = 1000;

fn draw(rng: &mut impl Rng, (lo, hi): &(Rational, Rational)) -> Rational {
    let step = rng.gen_range(0..=GRID);
    lo + &((hi - lo) * Rational::new(step, GRID))
}

fn check_range(name: &'static str, (lo, hi): &(Rational, Rational), positive: bool) -> Result<(), GeneratorError> {
    let low_ok = if positive { lo.is_positive() } else { !lo.is_negative() };
    if !low_ok || lo > hi {
        return Err(GeneratorError::BadRange(name));
    }
    Ok(())
}

pub fn generate(spec: &GeneratorSpec) -> Result<TaskSet, GeneratorError> {
    check_range("workload", &spec.workload_range, true)?;
    check_range("growth", &spec.growth_range, false)?;
    if let Some(values) = &spec.value_range {
        check_range("value", values, false)?;
    }
    if spec.k < spec.delta {
        return Err(ModelError::BoundBelowDelta { delta: spec.delta, k: spec.k }.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut tasks = Vec::with_capacity(spec.n);
    for id in 0..spec.n {
        let base = draw(&mut rng, &spec.workload_range);
        let growth = draw(&mut rng, &spec.growth_range);
        let profile = match spec.preset {
            ProfilePreset::Piecewise => {
                let limit = rng.gen_range(spec.delta.max(1)..=spec.k);
                SpeedupProfile::piecewise(base, limit, growth)
            }
            ProfilePreset::Unified => unified_table(&base, &growth, spec.delta, spec.k),
        };
        let mut task = Task::new(id as u64, profile);
        if let Some(values) = &spec.value_range {
            task = task.with_value(draw(&mut rng, values));
        }
        tasks.push(task);
    }
    Ok(TaskSet::new(spec.delta, spec.k, spec.m, tasks)?)
}

/// Workload `D_1 + p(p-1)·c` for `p > delta`, `D_1` below.
fn unified_table(base: &Rational, overhead: &Rational, delta: usize, k: usize) -> SpeedupProfile {
    let workloads = (1..=k)
        .map(|p| if p <= delta { base.clone() } else { base + &overhead.scale(p * (p - 1)) })
        .collect();
    SpeedupProfile::table(workloads)
}
