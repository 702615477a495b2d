//! Exact solvers for tiny instances, by enumeration.
//!
//! Every ordering of the tasks and every width assignment is expanded into a
//! list schedule: each task starts as soon as `width` processors are free,
//! given the tasks before it. Taking the tasks of any optimal schedule in
//! order of start time reproduces it with no later starts, so the minimum
//! over all expansions is optimal.
//!
//! Widths that are no faster than some smaller width are skipped (the
//! smaller width does the same job on fewer processors), and times are
//! converted to integer ticks so the search runs on machine integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::rational::Rational;
use crate::task_model::{ModelError, TaskId, TaskSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} = {actual} exceeds the oracle limit {limit}")]
    TooLarge { what: &'static str, actual: usize, limit: usize },
    #[error("task {0} has no value")]
    MissingValue(TaskId),
    #[error("execution times do not fit the integer tick grid")]
    Overflow,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_tasks: usize,
    pub max_procs: usize,
    /// Widest allotment tried; `None` means `min(k, m)`.
    pub max_width: Option<usize>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_tasks: 4, max_procs: 8, max_width: None }
    }
}

impl OracleLimits {
    fn admit(&self, tasks: &TaskSet) -> Result<usize, OracleError> {
        if tasks.len() > self.max_tasks {
            return Err(OracleError::TooLarge { what: "n", actual: tasks.len(), limit: self.max_tasks });
        }
        if tasks.m() > self.max_procs {
            return Err(OracleError::TooLarge { what: "m", actual: tasks.m(), limit: self.max_procs });
        }
        let natural = tasks.k().min(tasks.m());
        Ok(self.max_width.map_or(natural, |w| w.min(natural)))
    }
}

/// Per-task useful `(width, ticks)` options, widest last.
struct TickInstance {
    options: Vec<Vec<(usize, i128)>>,
    scale: BigInt,
}

impl TickInstance {
    fn build(tasks: &TaskSet, max_width: usize, extra: &[Rational]) -> Result<Self, OracleError> {
        let mut times = Vec::with_capacity(tasks.len());
        for task in tasks.tasks() {
            let mut opts: Vec<(usize, Rational)> = Vec::new();
            for p in 1..=max_width {
                let t = tasks.exec_time(task, p)?;
                if opts.last().map_or(true, |(_, best)| t < *best) {
                    opts.push((p, t));
                }
            }
            times.push(opts);
        }
        let mut scale = BigInt::one();
        for t in times.iter().flatten().map(|(_, t)| t).chain(extra) {
            scale = scale.lcm(t.denom());
        }
        let to_ticks = |t: &Rational| -> Result<i128, OracleError> {
            (t.numer() * (&scale / t.denom())).to_i128().ok_or(OracleError::Overflow)
        };
        let options = times
            .iter()
            .map(|opts| opts.iter().map(|(p, t)| Ok((*p, to_ticks(t)?))).collect())
            .collect::<Result<_, OracleError>>()?;
        Ok(TickInstance { options, scale })
    }

    fn ticks(&self, t: &Rational) -> Result<i128, OracleError> {
        (t.numer() * (&self.scale / t.denom())).to_i128().ok_or(OracleError::Overflow)
    }

    fn to_time(&self, ticks: i128) -> Rational {
        Rational::from_big(BigInt::from(ticks), self.scale.clone())
    }
}

/// Minimum makespan over the tasks whose indices are set in `mask`, among
/// schedules finishing strictly before `cutoff`; `None` when there is none.
/// With `first_only` the search stops at the first such schedule.
fn min_makespan(inst: &TickInstance, mask: u32, m: usize, cutoff: i128, first_only: bool) -> Option<i128> {
    struct Search<'a> {
        inst: &'a TickInstance,
        best: i128,
        found: bool,
        first_only: bool,
    }
    impl Search<'_> {
        // `free` holds per-processor free times, sorted ascending
        fn go(&mut self, remaining: u32, free: &[i128], span: i128) {
            if remaining == 0 {
                self.best = span;
                self.found = true;
                return;
            }
            let mut bits = remaining;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for &(p, t) in &self.inst.options[j] {
                    if p > free.len() || (self.found && self.first_only) {
                        break;
                    }
                    let end = free[p - 1] + t;
                    if end >= self.best {
                        continue;
                    }
                    let mut next = free.to_vec();
                    next[..p].fill(end);
                    next.sort_unstable();
                    self.go(remaining & !(1 << j), &next, span.max(end));
                }
            }
        }
    }
    let mut search = Search { inst, best: cutoff, found: false, first_only };
    search.go(mask, &vec![0; m], 0);
    search.found.then_some(search.best)
}

pub fn brute_makespan(tasks: &TaskSet, limits: &OracleLimits) -> Result<Rational, OracleError> {
    let width = limits.admit(tasks)?;
    if tasks.is_empty() {
        return Ok(Rational::zero());
    }
    let inst = TickInstance::build(tasks, width, &[])?;
    let mask = (1u32 << tasks.len()) - 1;
    let best = min_makespan(&inst, mask, tasks.m(), i128::MAX, false).expect("width-1 sequencing is always feasible");
    Ok(inst.to_time(best))
}

/// Largest total value of a subset that can all finish by `tau`.
pub fn brute_welfare(tasks: &TaskSet, tau: &Rational, limits: &OracleLimits) -> Result<Rational, OracleError> {
    let width = limits.admit(tasks)?;
    if !tau.is_positive() {
        return Err(ModelError::NonPositiveDeadline(tau.clone()).into());
    }
    let values: Vec<Rational> = tasks
        .tasks()
        .iter()
        .map(|t| t.value.clone().ok_or(OracleError::MissingValue(t.id)))
        .collect::<Result<_, _>>()?;
    let inst = TickInstance::build(tasks, width, std::slice::from_ref(tau))?;
    let limit = inst.ticks(tau)?;
    let mut best = Rational::zero();
    for mask in 1u32..(1 << tasks.len()) {
        let value: Rational = (0..tasks.len()).filter(|j| mask & (1 << j) != 0).map(|j| &values[j]).sum();
        if value <= best {
            continue;
        }
        if min_makespan(&inst, mask, tasks.m(), limit + 1, true).is_some() {
            best = value;
        }
    }
    Ok(best)
}
