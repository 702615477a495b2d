//! Scheduling constants and the worst-case utilization bound.
//!
//! For a linear-speedup bound δ the scheduler needs:
//!
//! * `class_limit` (H): tasks whose canonical count reaches H run alone;
//!   the target utilization is `r = (H-1)/H`.
//! * `group_width` (δ′): width of the processor groups that stack the
//!   remaining tasks sequentially.
//! * `lowest_class` (ν): tasks with canonical count below ν are "short" on a
//!   group (execution time `< (1-r)·d`).
//! * `batch_sizes` (x_h): for each class `h` in `[ν, H-1]`, any `x_h` class-`h`
//!   tasks stacked on a group take between `r·d` and `d`.
//!
//! They are found by exhaustive search for the largest feasible H.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::rational::Rational;
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("delta must be >= 1 (got {0})")]
    DeltaTooSmall(usize),
    #[error("no feasible scheduling parameters for delta={0}")]
    NoFeasibleParameters(usize),
}

/// How the search evaluates its inequality tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// IEEE-754 double evaluation in the procedure's own expression order.
    /// This reproduces the published μ(δ) table: exact ties such as
    /// `(1-r)·x = r` round to "infeasible" for some δ. Candidates that pass
    /// are re-checked exactly, so the result is always exactly feasible.
    #[default]
    Published,
    /// Exact rational evaluation. Finds the true maximum H, which exceeds the
    /// published value for some δ (e.g. δ = 14, 16, 57, 101).
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSet {
    pub delta: usize,
    /// H.
    pub class_limit: usize,
    /// ν.
    pub lowest_class: usize,
    /// δ′.
    pub group_width: usize,
    /// r = (H-1)/H.
    pub target_utilization: Rational,
    /// x_h for h in `[lowest_class, class_limit - 1]`.
    pub batch_sizes: BTreeMap<usize, usize>,
}

impl ParamSet {
    /// Stacked classes `h`, highest first (the order groups consume them).
    pub fn classes_desc(&self) -> impl Iterator<Item = usize> + '_ {
        (self.lowest_class..self.class_limit).rev()
    }

    /// Re-substitutes every constraint in exact arithmetic.
    pub fn check(&self) -> ValidationReport<String> {
        let mut report = ValidationReport::new();
        let (h_lim, nu, gw, delta) =
            (self.class_limit, self.lowest_class, self.group_width, self.delta);
        if !(1 <= nu && nu < h_lim && h_lim - 1 <= gw && gw <= delta) {
            report.push(format!("ordering 1 <= {nu} <= {} <= {gw} <= {delta} fails", h_lim - 1));
            return report;
        }
        let r = Rational::new(h_lim as i64 - 1, h_lim as i64);
        if self.target_utilization != r {
            report.push(format!("r = {} but (H-1)/H = {r}", self.target_utilization));
        }
        if !exact_split_ok(&r, gw, nu) {
            report.push(format!("short-task split fails for nu={nu}, group width={gw}"));
        }
        for h in nu..h_lim {
            match self.batch_sizes.get(&h) {
                Some(&x) if exact_batch_ok(&r, gw, h, x) => {}
                Some(&x) => report.push(format!("batch size x_{h}={x} violates its bounds")),
                None => report.push(format!("missing batch size for class {h}")),
            }
        }
        if self.batch_sizes.keys().any(|&h| h < nu || h >= h_lim) {
            report.push("batch size recorded for a class outside [nu, H-1]".to_string());
        }
        report
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={} H={} nu={} delta'={} r={}",
            self.delta,
            self.class_limit,
            self.lowest_class,
            self.group_width,
            self.target_utilization
        )?;
        for (h, x) in self.batch_sizes.iter().rev() {
            write!(f, " x_{h}={x}")?;
        }
        Ok(())
    }
}

// (nu/gw)·r >= 1-r  and  ((nu-1)/gw)·r < 1-r
fn exact_split_ok(r: &Rational, gw: usize, nu: usize) -> bool {
    let one_minus_r = Rational::one() - r;
    r.scale(nu).div_int(gw) >= one_minus_r && r.scale(nu - 1).div_int(gw) < one_minus_r
}

// (h/gw)·r·x <= 1  and  max{1-r, (h-1)/gw}·x >= r
fn exact_batch_ok(r: &Rational, gw: usize, h: usize, x: usize) -> bool {
    let upper = r.scale(h * x).div_int(gw);
    let slack = std::cmp::max(Rational::one() - r, Rational::new(h as i64 - 1, gw as i64));
    upper <= Rational::one() && slack.scale(x) >= *r
}

fn float_split_ok(r: f64, gw: usize, nu: usize) -> bool {
    let temp1 = nu as f64 / gw as f64 * r + r;
    let temp2 = (nu as f64 - 1.0) / gw as f64 * r + r;
    temp1 >= 1.0 && temp2 < 1.0
}

fn float_batch_ok(r: f64, gw: usize, h: usize, x: usize) -> bool {
    let temp3 = h as f64 / gw as f64 * r * x as f64;
    let temp4 = f64::max(1.0 - r, (h as f64 - 1.0) / gw as f64) * x as f64;
    temp3 <= 1.0 && temp4 >= r
}

fn batch_upper_limit(mode: SearchMode, r: &Rational, r_f: f64, gw: usize, h: usize) -> usize {
    match mode {
        SearchMode::Published => (gw as f64 / (r_f * h as f64)).ceil() as usize,
        SearchMode::Exact => (Rational::from(gw) / r.scale(h))
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX),
    }
}

/// Parameters under [`SearchMode::Published`].
pub fn search_params(delta: usize) -> Result<ParamSet, ParamsError> {
    search_params_with(delta, SearchMode::Published)
}

/// Parameters under [`SearchMode::Exact`].
pub fn search_params_exact(delta: usize) -> Result<ParamSet, ParamsError> {
    search_params_with(delta, SearchMode::Exact)
}

/// Largest H with feasible (δ′, ν, x_h). Loop order fixes ties: H descending,
/// δ′ descending from δ, ν ascending, each x_h ascending; the first fully
/// feasible assignment wins.
pub fn search_params_with(delta: usize, mode: SearchMode) -> Result<ParamSet, ParamsError> {
    if delta == 0 {
        return Err(ParamsError::DeltaTooSmall(delta));
    }
    for class_limit in (2..=delta + 1).rev() {
        let r = Rational::new(class_limit as i64 - 1, class_limit as i64);
        let r_f = (class_limit as f64 - 1.0) / class_limit as f64;
        for group_width in (class_limit - 1..=delta).rev() {
            for lowest_class in 1..class_limit {
                let split_ok = match mode {
                    SearchMode::Published => {
                        float_split_ok(r_f, group_width, lowest_class)
                            && exact_split_ok(&r, group_width, lowest_class)
                    }
                    SearchMode::Exact => exact_split_ok(&r, group_width, lowest_class),
                };
                if !split_ok {
                    continue;
                }
                let mut batch_sizes = BTreeMap::new();
                for h in lowest_class..class_limit {
                    let limit = batch_upper_limit(mode, &r, r_f, group_width, h);
                    let found = (1..=limit).find(|&x| match mode {
                        SearchMode::Published => {
                            float_batch_ok(r_f, group_width, h, x) && exact_batch_ok(&r, group_width, h, x)
                        }
                        SearchMode::Exact => exact_batch_ok(&r, group_width, h, x),
                    });
                    match found {
                        Some(x) => {
                            batch_sizes.insert(h, x);
                        }
                        None => break,
                    }
                }
                if batch_sizes.len() == class_limit - lowest_class {
                    return Ok(ParamSet {
                        delta,
                        class_limit,
                        lowest_class,
                        group_width,
                        target_utilization: r,
                        batch_sizes,
                    });
                }
            }
        }
    }
    Err(ParamsError::NoFeasibleParameters(delta))
}

/// Worst-case utilization of the scheduler when it has to reject tasks:
/// `theta(m) = mu - max{beta1·(k-1), beta2} / m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaBound {
    pub mu: Rational,
    pub beta1: Rational,
    pub beta2: Rational,
    pub k: usize,
}

impl ThetaBound {
    pub fn theta(&self, m: usize) -> Rational {
        let dedicated_loss = self.beta1.scale(self.k.saturating_sub(1));
        let loss = std::cmp::max(dedicated_loss, self.beta2.clone());
        &self.mu - loss.div_int(m.max(1))
    }
}

pub fn theta_bound(params: &ParamSet, k: usize) -> ThetaBound {
    let r = params.target_utilization.clone();
    let gw = params.group_width;
    let beta2 = if params.lowest_class + 1 == params.class_limit {
        Rational::zero()
    } else {
        // idle tail of the last group plus the shortfall of one mixed group per
        // class transition
        let tail = r.scale(gw - 1);
        let mixed: Rational = (params.lowest_class..params.class_limit - 1)
            .map(|h| (&r + &r.scale(h).div_int(gw) - Rational::one()).scale(gw))
            .sum();
        tail + mixed
    };
    ThetaBound { mu: r.clone(), beta1: r, beta2, k }
}

/// Published constants, one row per δ range: exact μ, the printed μ, and the
/// printed β2 (β1 equals μ).
pub mod published {
    use crate::rational::Rational;

    #[derive(Debug, Clone, Copy)]
    pub struct Row {
        pub lo: usize,
        pub hi: usize,
        pub mu: (i64, i64),
        pub mu_printed: &'static str,
        pub beta2_printed: &'static str,
    }

    pub const ROWS: [Row; 9] = [
        Row { lo: 5, hi: 9, mu: (3, 4), mu_printed: "0.7500", beta2_printed: "3.25" },
        Row { lo: 10, hi: 16, mu: (4, 5), mu_printed: "0.8000", beta2_printed: "7.6" },
        Row { lo: 17, hi: 21, mu: (5, 6), mu_printed: "0.8333", beta2_printed: "13.83" },
        Row { lo: 22, hi: 26, mu: (6, 7), mu_printed: "0.8571", beta2_printed: "19.43" },
        Row { lo: 27, hi: 37, mu: (7, 8), mu_printed: "0.8750", beta2_printed: "25.75" },
        Row { lo: 38, hi: 57, mu: (8, 9), mu_printed: "0.8889", beta2_printed: "36.22" },
        Row { lo: 58, hi: 58, mu: (9, 10), mu_printed: "0.9000", beta2_printed: "53.2" },
        Row { lo: 59, hi: 74, mu: (10, 11), mu_printed: "0.9091", beta2_printed: "58.55" },
        Row { lo: 75, hi: 101, mu: (11, 12), mu_printed: "0.9167", beta2_printed: "74" },
    ];

    /// The endpoints of every row.
    pub const REPRESENTATIVE_DELTAS: [usize; 17] =
        [5, 9, 10, 16, 17, 21, 22, 26, 27, 37, 38, 57, 58, 59, 74, 75, 101];

    pub fn row_for(delta: usize) -> Option<&'static Row> {
        ROWS.iter().find(|row| row.lo <= delta && delta <= row.hi)
    }

    impl Row {
        pub fn mu(&self) -> Rational {
            Rational::new(self.mu.0, self.mu.1)
        }

        /// Decimal places used by the printed β2.
        pub fn beta2_places(&self) -> u32 {
            self.beta2_printed.split_once('.').map_or(0, |(_, frac)| frac.len() as u32)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableCheck {
    pub delta: usize,
    pub params: ParamSet,
    pub bound: ThetaBound,
    pub expected_mu: Rational,
    pub expected_beta2: &'static str,
    pub mu_matches: bool,
    pub beta1_matches: bool,
    /// β2 rounded to the printed precision equals the printed value.
    pub beta2_matches: bool,
}

impl TableCheck {
    pub fn matches(&self) -> bool {
        self.mu_matches && self.beta1_matches && self.beta2_matches
    }
}

impl fmt::Display for TableCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={:>3} mu={} (table {}) beta1={} beta2={} ~ {} (table {}) [{}]",
            self.delta,
            self.bound.mu,
            self.expected_mu,
            self.bound.beta1,
            self.bound.beta2,
            self.bound.beta2.to_decimal_string(2),
            self.expected_beta2,
            if self.matches() { "match" } else { "MISMATCH" }
        )
    }
}

pub fn verify_tables() -> Result<Vec<TableCheck>, ParamsError> {
    verify_tables_with(SearchMode::Published, &published::REPRESENTATIVE_DELTAS)
}

/// Derives μ, β1, β2 for each δ and compares them with the published rows.
pub fn verify_tables_with(mode: SearchMode, deltas: &[usize]) -> Result<Vec<TableCheck>, ParamsError> {
    deltas
        .iter()
        .filter_map(|&delta| published::row_for(delta).map(|row| (delta, row)))
        .map(|(delta, row)| {
            let params = search_params_with(delta, mode)?;
            let bound = theta_bound(&params, delta);
            let expected_mu = row.mu();
            let beta2_matches =
                bound.beta2.to_decimal_string(row.beta2_places()) == row.beta2_printed;
            Ok(TableCheck {
                delta,
                mu_matches: bound.mu == expected_mu,
                beta1_matches: bound.beta1 == expected_mu,
                beta2_matches,
                expected_mu,
                expected_beta2: row.beta2_printed,
                params,
                bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn delta_five_matches_worked_example() {
        let p = search_params(5).unwrap();
        assert_eq!(
            (p.class_limit, p.lowest_class, p.group_width),
            (4, 2, 5)
        );
        assert_eq!(p.target_utilization, q(3, 4));
        assert_eq!(p.batch_sizes, BTreeMap::from([(2, 3), (3, 2)]));
        assert!(p.check().is_valid());
    }

    #[test]
    fn table_one_spot_values() {
        assert_eq!(search_params(8).unwrap().target_utilization, q(3, 4));
        assert_eq!(search_params(10).unwrap().target_utilization, q(4, 5));
        assert_eq!(search_params(64).unwrap().target_utilization, q(10, 11));
        assert_eq!(search_params(38).unwrap().target_utilization, q(8, 9));
    }

    #[test]
    fn small_deltas_degenerate_gracefully() {
        let two = search_params(2).unwrap();
        assert_eq!((two.class_limit, two.lowest_class, two.group_width), (2, 1, 1));
        let three = search_params(3).unwrap();
        assert_eq!(three.target_utilization, q(2, 3));
        let one = search_params(1).unwrap();
        assert_eq!((one.class_limit, one.group_width), (2, 1));
        assert_eq!(search_params(0), Err(ParamsError::DeltaTooSmall(0)));
    }

    #[test]
    fn exact_mode_can_beat_published_mode() {
        assert_eq!(search_params(16).unwrap().class_limit, 5);
        let exact = search_params_exact(16).unwrap();
        assert_eq!(exact.class_limit, 6);
        assert_eq!(exact.group_width, 14);
        assert!(exact.check().is_valid());
    }

    #[test]
    fn theta_examples() {
        let b = theta_bound(&search_params(5).unwrap(), 5);
        assert_eq!(b.beta1, q(3, 4));
        assert_eq!(b.beta2, q(13, 4));
        // 3/4 - max{(3/4)·4, 13/4}/11 = 3/4 - (13/4)/11
        assert_eq!(b.theta(11), q(5, 11));
        assert_eq!(theta_bound(&search_params(10).unwrap(), 10).beta2, q(38, 5));
    }

    #[test]
    fn beta2_vanishes_when_only_one_class() {
        let p = search_params(8).unwrap();
        assert_eq!(p.lowest_class + 1, p.class_limit);
        let b = theta_bound(&p, 20);
        assert_eq!(b.beta2, q(0, 1));
        assert_eq!(b.theta(100), q(3, 4) - q(3, 4) * q(19, 100));
    }

    #[test]
    fn check_flags_broken_params() {
        let mut p = search_params(5).unwrap();
        p.batch_sizes.insert(3, 5);
        assert!(!p.check().is_valid());
        let mut p = search_params(5).unwrap();
        p.lowest_class = 1;
        assert!(!p.check().is_valid());
    }

    #[test]
    fn published_rows_are_consistent_with_exact_fractions() {
        for row in published::ROWS {
            assert_eq!(row.mu().to_decimal_string(4), row.mu_printed);
        }
    }
}
