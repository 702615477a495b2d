//! Makespan minimization by bisection over the deadline, using the
//! single-deadline scheduler as the feasibility test.

use thiserror::Error;

use crate::params::ParamSet;
use crate::rational::Rational;
use crate::scheduler::{unit_algo, Schedule};
use crate::task_model::{ModelError, TaskSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OmsError {
    #[error("epsilon must lie in (0, 1) (got {0})")]
    EpsilonOutOfRange(Rational),
    #[error("task set is empty")]
    NoTasks,
    #[error("scheduler fails even at the initial upper bound {0} (too few processors for a group?)")]
    InfeasibleAtInitialUpper(Rational),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn default_epsilon() -> Rational {
    Rational::new(1, 100)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmsResult {
    /// Schedule found at `upper`.
    pub schedule: Schedule,
    /// Smallest deadline at which the scheduler succeeded.
    pub upper: Rational,
    /// Largest deadline at which it failed (or the lower bound on fast exit).
    pub lower: Rational,
    pub initial_upper: Rational,
    pub initial_lower: Rational,
    pub iterations: usize,
    pub epsilon: Rational,
    /// The scheduler already succeeded at the makespan lower bound, so the
    /// schedule is optimal and no bisection ran.
    pub fast_exit: bool,
    pub lower_bound: Rational,
}

impl OmsResult {
    /// Stop rule `U <= L·(1+ε)`.
    pub fn converged(&self) -> bool {
        self.fast_exit || self.upper <= &self.lower * &(Rational::one() + &self.epsilon)
    }

    pub fn ratio_to_lower_bound(&self) -> Rational {
        &self.upper / &self.lower_bound
    }
}

/// `max( max_j min_p t_{j,p}, Σ_j D_{j,1} / m )`: no task finishes faster than
/// its fastest time, and no task processes less than its one-processor
/// workload.
pub fn makespan_lower_bound(tasks: &TaskSet) -> Rational {
    let fastest = tasks
        .tasks()
        .iter()
        .map(|t| t.profile.fastest_time(tasks.k()))
        .max()
        .unwrap_or_default();
    let area: Rational = tasks.tasks().iter().map(|t| t.profile.base_workload()).sum();
    fastest.max(area.div_int(tasks.m()))
}

/// Deadline at which everything fits one processor group: `2·n·max_j t_{j,1}`.
pub fn initial_upper(tasks: &TaskSet) -> Rational {
    let slowest = tasks
        .tasks()
        .iter()
        .map(|t| t.profile.base_workload())
        .max()
        .unwrap_or_default();
    slowest.scale(2 * tasks.len())
}

/// Smallest `i` with `(U0 - L0) / 2^i <= ε·L0`; bisection never needs more.
pub fn max_iterations(initial_upper: &Rational, initial_lower: &Rational, epsilon: &Rational) -> usize {
    let target = initial_lower * epsilon;
    let mut gap = initial_upper - initial_lower;
    let mut i = 0;
    while gap > target && target.is_positive() {
        gap = gap.div_int(2);
        i += 1;
    }
    i
}

pub fn oms(tasks: &TaskSet, params: &ParamSet, epsilon: &Rational) -> Result<OmsResult, OmsError> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(OmsError::EpsilonOutOfRange(epsilon.clone()));
    }
    if tasks.is_empty() {
        return Err(OmsError::NoTasks);
    }
    let lower_bound = makespan_lower_bound(tasks);
    let u0 = initial_upper(tasks);

    let at_bound = unit_algo(tasks, &lower_bound, params)?;
    if at_bound.is_complete() {
        return Ok(OmsResult {
            schedule: at_bound,
            upper: lower_bound.clone(),
            lower: lower_bound.clone(),
            initial_upper: u0,
            initial_lower: lower_bound.clone(),
            iterations: 0,
            epsilon: epsilon.clone(),
            fast_exit: true,
            lower_bound,
        });
    }

    let mut best = unit_algo(tasks, &u0, params)?;
    if !best.is_complete() {
        return Err(OmsError::InfeasibleAtInitialUpper(u0));
    }
    let one_plus_eps = Rational::one() + epsilon;
    let (mut lower, mut upper) = (lower_bound.clone(), u0.clone());
    let mut iterations = 0;
    while upper > &lower * &one_plus_eps {
        let mid = (&upper + &lower).div_int(2);
        iterations += 1;
        let s = unit_algo(tasks, &mid, params)?;
        if s.is_complete() {
            upper = mid;
            best = s;
        } else {
            lower = mid;
        }
    }
    Ok(OmsResult {
        schedule: best,
        upper,
        lower,
        initial_upper: u0,
        initial_lower: lower_bound.clone(),
        iterations,
        epsilon: epsilon.clone(),
        fast_exit: false,
        lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::search_params;
    use crate::rational::q;
    use crate::task_model::{SpeedupProfile, Task};

    fn flat_set(k: usize, m: usize, ws: &[Rational]) -> TaskSet {
        let tasks = ws
            .iter()
            .enumerate()
            .map(|(i, w)| Task::new(i as u64, SpeedupProfile::constant(w.clone(), k)))
            .collect();
        TaskSet::new(k, k, m, tasks).unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(makespan_lower_bound(&flat_set(5, 5, &[q(10, 1)])), q(2, 1));
        assert_eq!(makespan_lower_bound(&flat_set(3, 3, &[q(6, 1), q(6, 1)])), q(4, 1));
        assert_eq!(makespan_lower_bound(&flat_set(3, 1000, &[q(6, 1), q(6, 1)])), q(2, 1));
    }

    #[test]
    fn single_task_hits_its_fastest_time() {
        let ts = flat_set(5, 5, &[q(10, 1)]);
        let res = oms(&ts, &search_params(5).unwrap(), &default_epsilon()).unwrap();
        assert!(res.upper >= q(2, 1) && res.upper <= q(202, 100));
        assert_eq!(res.schedule.placements[0].width, 5);
        assert_eq!(res.schedule.placements[0].end, q(2, 1));
    }

    #[test]
    fn rejects_bad_epsilon_and_empty_sets() {
        let p = search_params(5).unwrap();
        let ts = flat_set(5, 5, &[q(10, 1)]);
        assert!(matches!(oms(&ts, &p, &q(0, 1)), Err(OmsError::EpsilonOutOfRange(_))));
        assert!(matches!(oms(&ts, &p, &q(1, 1)), Err(OmsError::EpsilonOutOfRange(_))));
        let empty = flat_set(5, 5, &[]);
        assert_eq!(oms(&empty, &p, &default_epsilon()), Err(OmsError::NoTasks));
    }

    #[test]
    fn iteration_bound_arithmetic() {
        assert_eq!(max_iterations(&q(12, 1), &q(1, 1), &q(1, 2)), 5);
        assert_eq!(max_iterations(&q(2, 1), &q(1, 1), &q(1, 1)), 0);
        assert_eq!(max_iterations(&q(3, 1), &q(1, 1), &q(1, 1)), 1);
    }
}
