//! Algorithm-versus-oracle comparison over seeded tiny instances.

use std::ops::Range;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::makespan_oms::{makespan_lower_bound, oms};
use crate::oracle::{brute_makespan, brute_welfare, OracleError, OracleLimits};
use crate::params::{search_params, theta_bound, ParamsError};
use crate::rational::Rational;
use crate::task_model::{SpeedupProfile, Task, TaskSet};
use crate::welfare_greedy::gen_greedy;
use crate::workbench::Report;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub makespan_ratio: Rational,
    pub makespan_bound_ok: bool,
    pub welfare_sandwich_ok: bool,
    pub alpha_ok: bool,
    /// `None` when greedy turned nothing feasible away (no ratio claimed).
    pub welfare_ratio_ok: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifySummary {
    pub outcomes: Vec<SeedOutcome>,
}

impl VerifySummary {
    /// Count of seeds where the makespan bound, the welfare sandwich, or α = 1
    /// failed.
    pub fn hard_failures(&self) -> usize {
        self.outcomes.iter().filter(|o| !(o.makespan_bound_ok && o.welfare_sandwich_ok && o.alpha_ok)).count()
    }

    pub fn welfare_ratio_failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.welfare_ratio_ok == Some(false)).count()
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new();
        let worst = self.outcomes.iter().map(|o| o.makespan_ratio.clone()).max().unwrap_or_default();
        r.count("instances", self.outcomes.len())
            .count("makespan_bound_violations", self.outcomes.iter().filter(|o| !o.makespan_bound_ok).count())
            .count("welfare_sandwich_violations", self.outcomes.iter().filter(|o| !o.welfare_sandwich_ok).count())
            .count("alpha_violations", self.outcomes.iter().filter(|o| !o.alpha_ok).count())
            .count("welfare_rejecting_runs", self.outcomes.iter().filter(|o| o.welfare_ratio_ok.is_some()).count())
            .count("welfare_ratio_violations", self.welfare_ratio_failures())
            .rational("worst_makespan_over_optimum", &worst);
        r
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("seed {seed}: {message}")]
    Run { seed: u64, message: String },
}

fn draw(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(lo * den..=hi * den), den)
}

/// Tiny valued instance within `limits`, with `k <= m` and δ in `[2, 5]`.
pub fn tiny_instance(seed: u64, limits: &OracleLimits) -> TaskSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_procs = limits.max_procs.max(2);
    let delta = rng.gen_range(2..=5.min(max_procs));
    let k = rng.gen_range(delta..=(delta + 2).min(max_procs));
    let m = rng.gen_range(k..=max_procs);
    let n = rng.gen_range(1..=limits.max_tasks.max(1));
    let tasks = (0..n as u64)
        .map(|id| {
            let base = draw(&mut rng, 1, 8, 4);
            let limit = rng.gen_range(delta..=k);
            let growth = draw(&mut rng, 0, 1, 4) / Rational::from(2);
            Task::new(id, SpeedupProfile::piecewise(base, limit, growth)).with_value(draw(&mut rng, 1, 10, 1))
        })
        .collect();
    TaskSet::new(delta, k, m, tasks).expect("drawn profiles are valid")
}

pub fn verify_seeds(seeds: Range<u64>, limits: &OracleLimits, epsilon: &Rational) -> Result<VerifySummary, VerifyError> {
    let mut summary = VerifySummary::default();
    for seed in seeds {
        let tasks = tiny_instance(seed, limits);
        let params = search_params(tasks.delta())?;
        let theta = theta_bound(&params, tasks.k()).theta(tasks.m());
        let run_err = |message: String| VerifyError::Run { seed, message };

        let res = oms(&tasks, &params, epsilon).map_err(|e| run_err(e.to_string()))?;
        let opt = brute_makespan(&tasks, limits)?;
        let bound = &(&Rational::one() + epsilon) * &opt / &theta;
        let makespan_bound_ok = theta.is_positive() && res.upper <= bound && res.upper >= opt;

        // deadline from half to one-and-a-half times the lower bound
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a0);
        let tau = &makespan_lower_bound(&tasks) * &draw(&mut rng, 1, 3, 4) / Rational::from(2);
        let w = gen_greedy(&tasks, &tau, &params).map_err(|e| run_err(e.to_string()))?;
        let best = brute_welfare(&tasks, &tau, limits)?;
        summary.outcomes.push(SeedOutcome {
            seed,
            makespan_ratio: &res.upper / &opt,
            makespan_bound_ok,
            welfare_sandwich_ok: w.upper_bound >= best && best >= w.welfare,
            alpha_ok: w.alpha == Rational::one(),
            welfare_ratio_ok: w.rejected_feasible().then(|| w.welfare >= &theta * &best),
        });
    }
    Ok(summary)
}
