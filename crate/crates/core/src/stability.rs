//! The four stability criteria, evaluated per window against the threshold
//! matrix.
//!
//! "For all t" is read on the discrete window grid: a criterion passes when
//! the fraction of violating windows does not exceed the violation tolerance
//! (0 by default, i.e. any violation fails). Windows whose component is
//! inactive are skipped and counted separately, so silence never masquerades
//! as health or failure.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::metrics::{estimate_derivative, MetricSeries};
use crate::model::{Criterion, StabilityConfig, Window};

/// Which bound a window violated (or came closest to violating).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Coefficient of variation of daily commits above `alpha_c`.
    CvAboveMax,
    /// Resolution / merge rate below its minimum.
    RateBelowMin,
    /// Mean handling time above its maximum.
    TimeAboveMax,
    /// Engagement value below `gamma_a`.
    EngagementBelowMin,
    /// Active-user ratio below `delta_a`.
    ParticipationBelowMin,
}

/// One bound observation in one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub window: Window,
    pub bound: BoundKind,
    pub observed: f64,
    pub limit: f64,
}

impl Observation {
    /// Signed breach margin in the bound's own units; positive means the
    /// bound is violated.
    fn margin(&self) -> f64 {
        match self.bound {
            BoundKind::CvAboveMax | BoundKind::TimeAboveMax => self.observed - self.limit,
            _ => self.limit - self.observed,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.margin() > 0.0
    }
}

/// Result of one criterion over the whole series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: Criterion,
    pub passed: bool,
    /// Every violating observation, in window order.
    pub violations: Vec<Observation>,
    /// The observation closest to (or deepest into) violation, present
    /// whenever at least one window was evaluated.
    pub worst: Option<Observation>,
    pub windows_evaluated: usize,
    /// Windows skipped because the component was inactive.
    pub windows_skipped: usize,
    /// Max |dc/dt| over the series (commits/day^2); reported for the commit
    /// criterion as a diagnostic only — the CV form is normative.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_abs_dcdt: Option<f64>,
}

/// Per-criterion results and their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub commit_pattern: CriterionResult,
    pub issue_management: CriterionResult,
    pub pr_processing: CriterionResult,
    pub engagement: CriterionResult,
    /// True iff all four criteria pass.
    pub overall: bool,
    /// The thresholds the verdict was computed against.
    pub config: StabilityConfig,
}

impl StabilityVerdict {
    pub fn results(&self) -> [&CriterionResult; 4] {
        [
            &self.commit_pattern,
            &self.issue_management,
            &self.pr_processing,
            &self.engagement,
        ]
    }

    pub fn result(&self, criterion: Criterion) -> &CriterionResult {
        match criterion {
            Criterion::CommitPattern => &self.commit_pattern,
            Criterion::IssueManagement => &self.issue_management,
            Criterion::PrProcessing => &self.pr_processing,
            Criterion::Engagement => &self.engagement,
        }
    }
}

/// Fold per-window observations into a criterion result. A window violates
/// when any of its observations does; a criterion passes when the violating
/// fraction of evaluated windows stays within the tolerance.
fn fold(
    criterion: Criterion,
    windows: Vec<Vec<Observation>>,
    skipped: usize,
    tolerance: f64,
) -> CriterionResult {
    let evaluated = windows.len();
    let mut violations = Vec::new();
    let mut worst: Option<Observation> = None;
    let mut violating_windows = 0usize;
    for obs in &windows {
        let mut window_violates = false;
        for o in obs {
            if o.is_violation() {
                window_violates = true;
                violations.push(*o);
            }
            if worst.map_or(true, |w| o.margin() > w.margin()) {
                worst = Some(*o);
            }
        }
        if window_violates {
            violating_windows += 1;
        }
    }
    let passed = if evaluated == 0 {
        true // nothing to judge: annotated by windows_skipped
    } else {
        violating_windows as f64 <= tolerance * evaluated as f64
    };
    CriterionResult {
        criterion,
        passed,
        violations,
        worst,
        windows_evaluated: evaluated,
        windows_skipped: skipped,
        max_abs_dcdt: None,
    }
}

/// Criterion 1: commit pattern stability. Normative form: `cv_c <= alpha_c`
/// in every window; an infinite CV (no commits) violates by definition.
pub fn check_commit_pattern(
    series: &MetricSeries,
    alpha_c: f64,
    tolerance: f64,
) -> CriterionResult {
    let windows = series
        .samples()
        .iter()
        .map(|s| {
            alloc::vec![Observation {
                window: s.window,
                bound: BoundKind::CvAboveMax,
                observed: s.cv_c,
                limit: alpha_c,
            }]
        })
        .collect();
    let mut result = fold(Criterion::CommitPattern, windows, 0, tolerance);
    let stride = series.config().stride_days;
    result.max_abs_dcdt = estimate_derivative(&series.commit_frequencies(), stride)
        .ok()
        .map(|d| d.iter().fold(0.0, |acc: f64, &x| acc.max(libm::fabs(x))));
    result
}

/// Criterion 2: issue management stability. `i >= beta_i` and
/// `t_res <= tau_i` in every window with issue activity.
pub fn check_issue_management(
    series: &MetricSeries,
    beta_i: f64,
    tau_i_days: f64,
    tolerance: f64,
) -> CriterionResult {
    let mut windows = Vec::new();
    let mut skipped = 0;
    for s in series.samples() {
        match (s.i, s.t_res) {
            (Some(i), Some(t_res)) => windows.push(alloc::vec![
                Observation {
                    window: s.window,
                    bound: BoundKind::RateBelowMin,
                    observed: i,
                    limit: beta_i,
                },
                Observation {
                    window: s.window,
                    bound: BoundKind::TimeAboveMax,
                    observed: t_res,
                    limit: tau_i_days,
                },
            ]),
            _ => skipped += 1,
        }
    }
    fold(Criterion::IssueManagement, windows, skipped, tolerance)
}

/// Criterion 3: pull request processing stability. `p >= beta_p` and
/// `t_rev <= tau_p` in every window with PR activity.
pub fn check_pr_processing(
    series: &MetricSeries,
    beta_p: f64,
    tau_p_days: f64,
    tolerance: f64,
) -> CriterionResult {
    let mut windows = Vec::new();
    let mut skipped = 0;
    for s in series.samples() {
        match (s.p, s.t_rev) {
            (Some(p), Some(t_rev)) => windows.push(alloc::vec![
                Observation {
                    window: s.window,
                    bound: BoundKind::RateBelowMin,
                    observed: p,
                    limit: beta_p,
                },
                Observation {
                    window: s.window,
                    bound: BoundKind::TimeAboveMax,
                    observed: t_rev,
                    limit: tau_p_days,
                },
            ]),
            _ => skipped += 1,
        }
    }
    fold(Criterion::PrProcessing, windows, skipped, tolerance)
}

/// Criterion 4: community engagement stability. `a >= gamma_a` and
/// `active_ratio >= delta_a` in every window with open items and users.
pub fn check_engagement(
    series: &MetricSeries,
    gamma_a: f64,
    delta_a: f64,
    tolerance: f64,
) -> CriterionResult {
    let mut windows = Vec::new();
    let mut skipped = 0;
    for s in series.samples() {
        match (s.a, s.active_ratio) {
            (Some(a), Some(ratio)) => windows.push(alloc::vec![
                Observation {
                    window: s.window,
                    bound: BoundKind::EngagementBelowMin,
                    observed: a,
                    limit: gamma_a,
                },
                Observation {
                    window: s.window,
                    bound: BoundKind::ParticipationBelowMin,
                    observed: ratio,
                    limit: delta_a,
                },
            ]),
            _ => skipped += 1,
        }
    }
    fold(Criterion::Engagement, windows, skipped, tolerance)
}

/// Run all four criteria; overall pass iff all pass.
pub fn evaluate(series: &MetricSeries, config: &StabilityConfig) -> StabilityVerdict {
    let tol = config.violation_tolerance;
    let commit_pattern = check_commit_pattern(series, config.alpha_c, tol);
    let issue_management =
        check_issue_management(series, config.beta_i, config.tau_i_days, tol);
    let pr_processing = check_pr_processing(series, config.beta_p, config.tau_p_days, tol);
    let engagement = check_engagement(series, config.gamma_a, config.delta_a, tol);
    let overall = commit_pattern.passed
        && issue_management.passed
        && pr_processing.passed
        && engagement.passed;
    StabilityVerdict {
        commit_pattern,
        issue_management,
        pr_processing,
        engagement,
        overall,
        config: config.clone(),
    }
}
