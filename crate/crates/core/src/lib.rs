//! Scheduling (δ, k)-monotonic moldable tasks on `m` identical processors.
//!
//! Tasks have linear speedup up to δ processors and non-decreasing workload
//! beyond, up to a parallelism bound `k`. The crate provides:
//!
//! * [`scheduler::unit_algo`]: a classification-based single-deadline
//!   scheduler with a worst-case utilization guarantee when it rejects work,
//! * [`makespan_oms::oms`]: bisection over deadlines for makespan,
//! * [`welfare_greedy::gen_greedy`]: greedy value maximization by a deadline,
//! * [`oracle`]: exact brute-force solvers for tiny instances,
//! * [`workbench`]: generators and JSON file formats.
//!
//! All times and workloads are exact rationals.

pub mod classifier;
pub mod makespan_oms;
pub mod oracle;
pub mod params;
pub mod rational;
pub mod report;
pub mod scheduler;
pub mod task_model;
pub mod welfare_greedy;
pub mod workbench;

pub use classifier::{classify, Classification, TaskClass};
pub use makespan_oms::{makespan_lower_bound, oms, OmsError, OmsResult};
pub use params::{search_params, search_params_exact, theta_bound, ParamSet, ThetaBound};
pub use rational::Rational;
pub use report::ValidationReport;
pub use scheduler::{unit_algo, utilization, ExitReason, Placement, Schedule};
pub use task_model::{SpeedupProfile, Task, TaskId, TaskSet};
pub use welfare_greedy::{gen_greedy, knapsack_upper_bound, WelfareResult};
