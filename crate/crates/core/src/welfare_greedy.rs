//! Greedy social-welfare maximization: accept tasks in order of value per
//! unit of minimal workload for as long as the scheduler can fit the prefix
//! by the deadline.

use thiserror::Error;

use crate::params::ParamSet;
use crate::rational::Rational;
use crate::scheduler::{unit_algo, utilization, ExitReason, Schedule};
use crate::task_model::{ModelError, TaskId, TaskSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WelfareError {
    #[error("task {0} has no value")]
    MissingValue(TaskId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub id: TaskId,
    /// Canonical count at the deadline.
    pub canonical: usize,
    /// Workload on the canonical count, the least any on-time run processes.
    pub min_workload: Rational,
    pub value: Rational,
}

impl Candidate {
    pub fn marginal_value(&self) -> Rational {
        &self.value / &self.min_workload
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalOrder {
    pub candidates: Vec<Candidate>,
    /// Tasks that cannot meet the deadline on any processor count.
    pub dropped: Vec<TaskId>,
}

/// Tasks sorted by `value / min_workload` descending, ties by id.
pub fn marginal_order(tasks: &TaskSet, tau: &Rational) -> Result<MarginalOrder, WelfareError> {
    if !tau.is_positive() {
        return Err(ModelError::NonPositiveDeadline(tau.clone()).into());
    }
    let mut candidates = Vec::new();
    let mut dropped = Vec::new();
    for task in tasks.tasks() {
        let value = task.value.clone().ok_or(WelfareError::MissingValue(task.id))?;
        match tasks.canonical_processors(task, tau) {
            Some(canonical) => candidates.push(Candidate {
                id: task.id,
                canonical,
                min_workload: tasks.workload(task, canonical)?,
                value,
            }),
            None => dropped.push(task.id),
        }
    }
    let mut keyed: Vec<(Rational, Candidate)> =
        candidates.into_iter().map(|c| (c.marginal_value(), c)).collect();
    keyed.sort_by(|(va, a), (vb, b)| vb.cmp(va).then(a.id.cmp(&b.id)));
    dropped.sort_unstable();
    Ok(MarginalOrder { candidates: keyed.into_iter().map(|(_, c)| c).collect(), dropped })
}

/// Fractional-knapsack relaxation with capacity `m·τ` over minimal workloads;
/// bounds the best achievable welfare from above.
pub fn knapsack_upper_bound(tasks: &TaskSet, tau: &Rational) -> Result<Rational, WelfareError> {
    let order = marginal_order(tasks, tau)?;
    Ok(fractional_fill(&order.candidates, tau.scale(tasks.m())))
}

fn fractional_fill(candidates: &[Candidate], capacity: Rational) -> Rational {
    let mut room = capacity;
    let mut total = Rational::zero();
    for c in candidates {
        if c.min_workload <= room {
            room -= &c.min_workload;
            total += &c.value;
        } else {
            total += &c.value * &room / &c.min_workload;
            break;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WelfareResult {
    pub tau: Rational,
    /// Number of tasks accepted, always a prefix of the marginal order.
    pub accepted_prefix_len: usize,
    pub accepted: Vec<TaskId>,
    /// Schedule of the accepted prefix.
    pub schedule: Schedule,
    pub welfare: Rational,
    /// Utilization of `schedule`.
    pub omega: Rational,
    /// Least ratio of minimal to processed workload over accepted tasks.
    pub alpha: Rational,
    pub upper_bound: Rational,
    pub dropped_infeasible: Vec<TaskId>,
    /// The first prefix that did not fit, if any.
    pub failed_prefix: Option<Schedule>,
    pub scheduler_runs: usize,
}

impl WelfareResult {
    /// Some task that could meet τ on its own was turned away.
    pub fn rejected_feasible(&self) -> bool {
        self.failed_prefix.is_some()
    }
}

pub fn gen_greedy(tasks: &TaskSet, tau: &Rational, params: &ParamSet) -> Result<WelfareResult, WelfareError> {
    let order = marginal_order(tasks, tau)?;
    let mut accepted_schedule = Schedule {
        d: tau.clone(),
        m: tasks.m(),
        exit_reason: ExitReason::AllPlaced,
        placements: Vec::new(),
        rejected: Vec::new(),
    };
    let mut accepted_len = 0;
    let mut failed_prefix = None;
    let mut runs = 0;
    for i in 1..=order.candidates.len() {
        let prefix = tasks.subset(
            order.candidates[..i].iter().map(|c| tasks.get(c.id).expect("candidate from task set")),
        );
        let s = unit_algo(&prefix, tau, params)?;
        runs += 1;
        if !s.is_complete() {
            failed_prefix = Some(s);
            break;
        }
        accepted_schedule = s;
        accepted_len = i;
    }
    let accepted: Vec<&Candidate> = order.candidates[..accepted_len].iter().collect();
    let welfare = accepted.iter().map(|c| &c.value).sum();
    let mut alpha = Rational::one();
    for c in &accepted {
        let width = accepted_schedule.placement(c.id).expect("accepted task is placed").width;
        let processed = tasks.workload(tasks.get(c.id).expect("known id"), width)?;
        alpha = alpha.min(&c.min_workload / &processed);
    }
    Ok(WelfareResult {
        tau: tau.clone(),
        accepted_prefix_len: accepted_len,
        accepted: accepted.iter().map(|c| c.id).collect(),
        omega: utilization(&accepted_schedule),
        schedule: accepted_schedule,
        welfare,
        alpha,
        upper_bound: fractional_fill(&order.candidates, tau.scale(tasks.m())),
        dropped_infeasible: order.dropped,
        failed_prefix,
        scheduler_runs: runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::search_params;
    use crate::rational::q;
    use crate::task_model::{SpeedupProfile, Task};

    fn valued(id: TaskId, w: Rational, v: i64) -> Task {
        Task::new(id, SpeedupProfile::constant(w, 5)).with_value(Rational::from(v))
    }

    fn three(m: usize) -> TaskSet {
        TaskSet::new(5, 5, m, vec![valued(1, q(5, 2), 1), valued(2, q(5, 2), 3), valued(3, q(5, 2), 2)]).unwrap()
    }

    #[test]
    fn order_by_value_density() {
        let order = marginal_order(&three(5), &Rational::one()).unwrap();
        let ids: Vec<_> = order.candidates.iter().map(|c| c.id).collect();
        assert_eq!(ids, vec![2, 3, 1]);

        let ts = TaskSet::new(5, 5, 5, vec![valued(1, q(1, 1), 2), valued(2, q(2, 1), 3)]).unwrap();
        let ids: Vec<_> = marginal_order(&ts, &q(10, 1)).unwrap().candidates.iter().map(|c| c.id).collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn drops_infeasible_and_requires_values() {
        let ts = TaskSet::new(5, 5, 5, vec![valued(1, q(7, 1), 9), valued(2, q(1, 2), 1)]).unwrap();
        let order = marginal_order(&ts, &Rational::one()).unwrap();
        assert_eq!(order.dropped, vec![1]);
        assert_eq!(order.candidates.len(), 1);

        let unvalued = TaskSet::new(5, 5, 5, vec![Task::new(4, SpeedupProfile::constant(q(1, 1), 5))]).unwrap();
        assert_eq!(marginal_order(&unvalued, &Rational::one()), Err(WelfareError::MissingValue(4)));
    }

    #[test]
    fn knapsack_examples() {
        assert_eq!(knapsack_upper_bound(&three(5), &Rational::one()).unwrap(), q(5, 1));
        assert_eq!(knapsack_upper_bound(&three(4), &Rational::one()).unwrap(), q(21, 5));
        assert_eq!(knapsack_upper_bound(&three(50), &Rational::one()).unwrap(), q(6, 1));
    }

    #[test]
    fn greedy_stops_at_first_failing_prefix() {
        let res = gen_greedy(&three(5), &Rational::one(), &search_params(5).unwrap()).unwrap();
        assert_eq!(res.accepted_prefix_len, 1);
        assert_eq!(res.accepted, vec![2]);
        assert_eq!(res.welfare, q(3, 1));
        assert_eq!(res.alpha, Rational::one());
        assert_eq!(res.upper_bound, q(5, 1));
        assert_eq!(res.failed_prefix.unwrap().exit_reason, ExitReason::NoRoomForDedicated);
        assert_eq!(res.scheduler_runs, 2);
    }

    #[test]
    fn empty_after_dropping() {
        let ts = TaskSet::new(5, 5, 5, vec![valued(1, q(7, 1), 9)]).unwrap();
        let res = gen_greedy(&ts, &Rational::one(), &search_params(5).unwrap()).unwrap();
        assert_eq!(res.welfare, Rational::zero());
        assert_eq!(res.accepted_prefix_len, 0);
        assert!(!res.rejected_feasible());
    }
}
