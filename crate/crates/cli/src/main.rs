//! `moldsched`: schedule (δ, k)-monotonic moldable tasks from the command line.
//!
//! Every subcommand prints a flat JSON report on stdout. Exit codes: 0 ok,
//! 2 infeasible input, 3 malformed or invalid file, 4 internal invariant
//! violation.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use moldsched::classifier::{classify, interval_check, partition_check};
use moldsched::makespan_oms::{oms, OmsError};
use moldsched::oracle::OracleLimits;
use moldsched::params::{search_params_with, theta_bound, verify_tables, ParamSet, SearchMode};
use moldsched::rational::Rational;
use moldsched::scheduler::{
    min_workload_check, unit_algo_with, utilization, validate_schedule, width_check, Schedule, UnitAlgoOptions,
};
use moldsched::task_model::{ModelError, TaskSet};
use moldsched::welfare_greedy::{gen_greedy, WelfareError};
use moldsched::workbench::verify::verify_seeds;
use moldsched::workbench::{generate, load_instance, save_instance, save_schedule, GeneratorSpec, Report};

#[derive(Parser)]
#[command(name = "moldsched", version, about = "Schedule (delta, k)-monotonic moldable tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Scheduling constants and utilization bound for a given delta.
    Params {
        #[arg(long)]
        delta: usize,
        /// Parallelism bound used for theta (defaults to delta).
        #[arg(short, long)]
        k: Option<usize>,
        /// Processor count used for theta.
        #[arg(short, long)]
        m: Option<usize>,
        /// Exact-arithmetic search instead of the published procedure.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Partition the tasks of an instance at deadline D.
    Classify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        d: Rational,
        #[command(flatten)]
        out: Output,
    },
    /// Schedule an instance against a single deadline D.
    Schedule {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        d: Rational,
        /// Shuffle tasks within each class using this seed.
        #[arg(long)]
        shuffle_seed: Option<u64>,
        /// Write the schedule here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Minimize makespan by bisection over the deadline.
    Makespan {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value = "1/100")]
        epsilon: Rational,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Greedy value maximization by deadline TAU.
    Welfare {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        tau: Rational,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Generate an instance from a generator spec file.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long, env = "MOLDSCHED_SEED")]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare algorithms against exact oracles on seeded tiny instances.
    Verify {
        /// Seed range `A..B` (B exclusive).
        #[arg(long, value_parser = parse_seeds, default_value = "0..100")]
        seeds: Range<u64>,
        #[arg(long, default_value_t = 4)]
        max_tasks: usize,
        #[arg(long, default_value_t = 8)]
        max_procs: usize,
        #[arg(long, default_value = "1/100")]
        epsilon: Rational,
        /// Treat greedy-welfare ratio shortfalls as invariant violations.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Derive the published mu / beta constants and compare.
    Tables {
        #[command(flatten)]
        out: Output,
    },
}

fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a >= b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(a..b)
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn infeasible(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }

    fn schema(message: impl ToString) -> Self {
        Failure { code: 3, message: message.to_string() }
    }

    fn invariant(message: impl ToString) -> Self {
        Failure { code: 4, message: message.to_string() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonPositiveDeadline(_) => Failure::infeasible(e),
            _ => Failure::schema(e),
        }
    }
}

fn load(path: &Path) -> Result<TaskSet, Failure> {
    load_instance(path).map_err(Failure::schema)
}

fn params_for(delta: usize) -> Result<ParamSet, Failure> {
    search_params_with(delta, SearchMode::Published).map_err(Failure::invariant)
}

fn emit(report: &Report, out: &Output) -> Result<(), Failure> {
    println!("{}", report.to_json());
    if let Some(path) = &out.report {
        report.save(path).map_err(|e| Failure::schema(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn write_schedule(s: &Schedule, path: &Option<PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => save_schedule(s, p).map_err(Failure::schema),
        None => Ok(()),
    }
}

fn check_schedule(s: &Schedule, tasks: &TaskSet, params: &ParamSet) -> Result<(), Failure> {
    for report in [validate_schedule(s, tasks), width_check(s, tasks, params), min_workload_check(s, tasks, &s.d)] {
        if !report.is_valid() {
            return Err(Failure::invariant(report));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Params { delta, k, m, exact, out } => {
            let mode = if exact { SearchMode::Exact } else { SearchMode::Published };
            let params = search_params_with(delta, mode).map_err(Failure::infeasible)?;
            let k = k.unwrap_or(delta);
            if k < delta {
                return Err(Failure::infeasible(format!("k={k} is below delta={delta}")));
            }
            let bound = theta_bound(&params, k);
            let mut report = Report::new();
            report.params(&params, &bound, m.unwrap_or(1)).count("k", k).text("search", format!("{mode:?}"));
            match m {
                Some(m) => report.count("m", m),
                // theta depends on m; leave it out when none was given
                None => report.text("theta", "requires -m"),
            };
            emit(&report, &out)
        }
        Command::Classify { input, d, out } => {
            let tasks = load(&input)?;
            if !d.is_positive() {
                return Err(Failure::infeasible(format!("deadline must be positive (got {d})")));
            }
            let params = params_for(tasks.delta())?;
            let cls = classify(&tasks, &d, &params);
            let checks = [partition_check(&cls, &tasks), interval_check(&cls, &tasks, &params)];
            if let Some(bad) = checks.iter().find(|r| !r.is_valid()) {
                return Err(Failure::invariant(bad));
            }
            let mut report = Report::new();
            report.params(&params, &theta_bound(&params, tasks.k()), tasks.m()).rational("d", &d);
            let dedicated: Vec<u64> = cls.dedicated.iter().map(|(id, _)| *id).collect();
            let widths: Vec<u64> = cls.dedicated.iter().map(|(_, w)| *w as u64).collect();
            report.ids("dedicated", &dedicated).ids("dedicated_widths", &widths);
            for (h, ids) in &cls.classes {
                report.ids(&format!("class_{h}"), ids);
            }
            report.ids("short", &cls.short).ids("infeasible", &cls.infeasible);
            emit(&report, &out)
        }
        Command::Schedule { input, d, shuffle_seed, output, out } => {
            let tasks = load(&input)?;
            let params = params_for(tasks.delta())?;
            let options = UnitAlgoOptions { shuffle_seed };
            let (s, trace) = unit_algo_with(&tasks, &d, &params, &options)?;
            check_schedule(&s, &tasks, &params)?;
            let bound = theta_bound(&params, tasks.k());
            let u = utilization(&s);
            let mut report = Report::new();
            report
                .params(&params, &bound, tasks.m())
                .rational("d", &d)
                .text("exit_reason", s.exit_reason.as_str())
                .count("placed", s.placements.len())
                .ids("rejected", &s.rejected)
                .count("groups", trace.groups.len())
                .rational("utilization", &u);
            if !s.rejected.is_empty() {
                report.flag("utilization_meets_theta", u >= bound.theta(tasks.m()));
            }
            write_schedule(&s, &output)?;
            emit(&report, &out)
        }
        Command::Makespan { input, epsilon, output, out } => {
            let tasks = load(&input)?;
            let params = params_for(tasks.delta())?;
            let res = oms(&tasks, &params, &epsilon).map_err(|e| match e {
                OmsError::Model(m) => Failure::from(m),
                other => Failure::infeasible(other),
            })?;
            check_schedule(&res.schedule, &tasks, &params)?;
            if !res.converged() || !res.schedule.is_complete() {
                return Err(Failure::invariant("bisection ended without a converged complete schedule"));
            }
            let mut report = Report::new();
            report
                .params(&params, &theta_bound(&params, tasks.k()), tasks.m())
                .rational("U", &res.upper)
                .rational("L", &res.lower)
                .rational("U0", &res.initial_upper)
                .rational("L0", &res.initial_lower)
                .count("iterations", res.iterations)
                .rational("epsilon", &res.epsilon)
                .flag("fast_exit", res.fast_exit)
                .rational("lower_bound", &res.lower_bound)
                .rational("ratio_to_lower_bound", &res.ratio_to_lower_bound())
                .rational("utilization", &utilization(&res.schedule));
            write_schedule(&res.schedule, &output)?;
            emit(&report, &out)
        }
        Command::Welfare { input, tau, output, out } => {
            let tasks = load(&input)?;
            let params = params_for(tasks.delta())?;
            let res = gen_greedy(&tasks, &tau, &params).map_err(|e| match e {
                WelfareError::Model(m) => Failure::from(m),
                other => Failure::schema(other),
            })?;
            check_schedule(&res.schedule, &tasks.subset(res.accepted.iter().filter_map(|id| tasks.get(*id))), &params)?;
            if res.alpha != Rational::one() {
                return Err(Failure::invariant(format!("alpha = {} (expected 1)", res.alpha)));
            }
            let ratio = if res.upper_bound.is_positive() { &res.welfare / &res.upper_bound } else { Rational::one() };
            let mut report = Report::new();
            report
                .params(&params, &theta_bound(&params, tasks.k()), tasks.m())
                .rational("tau", &tau)
                .count("accepted_prefix_len", res.accepted_prefix_len)
                .ids("accepted", &res.accepted)
                .ids("dropped_infeasible", &res.dropped_infeasible)
                .rational("welfare", &res.welfare)
                .rational("omega", &res.omega)
                .rational("alpha", &res.alpha)
                .rational("upper_bound", &res.upper_bound)
                .rational("welfare_over_upper_bound", &ratio)
                .flag("rejected_feasible", res.rejected_feasible());
            write_schedule(&res.schedule, &output)?;
            emit(&report, &out)
        }
        Command::Gen { spec, seed, output } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| Failure::schema(format!("{}: {e}", spec.display())))?;
            let mut spec: GeneratorSpec = serde_json::from_str(&text).map_err(Failure::schema)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let tasks = generate(&spec).map_err(Failure::schema)?;
            save_instance(&tasks, &output).map_err(Failure::schema)?;
            let mut report = Report::new();
            report
                .count("n", tasks.len())
                .count("delta", tasks.delta())
                .count("k", tasks.k())
                .count("m", tasks.m())
                .text("seed", spec.seed.to_string())
                .text("output", output.display().to_string());
            println!("{}", report.to_json());
            Ok(())
        }
        Command::Verify { seeds, max_tasks, max_procs, epsilon, strict, out } => {
            let limits = OracleLimits { max_tasks, max_procs, max_width: None };
            let summary = verify_seeds(seeds.clone(), &limits, &epsilon).map_err(Failure::infeasible)?;
            let mut report = summary.report();
            report.text("seeds", format!("{}..{}", seeds.start, seeds.end)).rational("epsilon", &epsilon);
            emit(&report, &out)?;
            if summary.hard_failures() > 0 || (strict && summary.welfare_ratio_failures() > 0) {
                return Err(Failure::invariant("oracle comparison failed; see report"));
            }
            Ok(())
        }
        Command::Tables { out } => {
            let checks = verify_tables().map_err(Failure::invariant)?;
            let mut report = Report::new();
            for c in &checks {
                eprintln!("{c}");
                let key = format!("delta_{:03}", c.delta);
                report
                    .rational(&format!("{key}_mu"), &c.bound.mu)
                    .rational(&format!("{key}_beta1"), &c.bound.beta1)
                    .rational(&format!("{key}_beta2"), &c.bound.beta2)
                    .flag(&format!("{key}_matches"), c.matches());
            }
            report
                .count("mu_mismatches", checks.iter().filter(|c| !c.mu_matches).count())
                .count("beta_mismatches", checks.iter().filter(|c| !(c.beta1_matches && c.beta2_matches)).count());
            emit(&report, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
