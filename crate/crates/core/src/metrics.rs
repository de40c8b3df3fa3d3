//! Windowed activity metrics: the four state functions plus auxiliary
//! statistics, computed over a sliding window grid.
//!
//! Window semantics are half-open (`[start, start + dt)`): an event at
//! exactly `start + dt` belongs to the next window, so a partition of the
//! span with stride = window counts every event exactly once. An item is
//! "open at" an instant `t` when it was opened strictly before `t` and not
//! closed strictly before `t`.
//!
//! Degenerate windows (no issue candidates, no PRs, no open items, no users)
//! flag the affected component instead of inventing a value; downstream
//! normalization treats flagged components as neutral.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{DampeningMode, Event, EventKind, MetricSample, RepositoryLog, StabilityConfig, Window};
use crate::time::{seconds_from_days, DAY_SECONDS};

/// Metric computation failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("log spans {span_days} days, shorter than the {window_days}-day window")]
    SpanTooShort { span_days: f64, window_days: f64 },
    #[error("window of {days} days is too short for daily statistics (need >= 2 whole days)")]
    WindowTooShort { days: f64 },
    #[error("series of length {len} is too short (need >= {min})")]
    SeriesTooShort { len: usize, min: usize },
}

/// The metric samples for every grid window, with the configuration that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    samples: Vec<MetricSample>,
    config: StabilityConfig,
}

impl MetricSeries {
    /// Assemble a series from already-computed samples, e.g. loaded from a
    /// report. Samples must be in grid order (strictly increasing window
    /// starts, uniform stride).
    pub fn from_samples(samples: Vec<MetricSample>, config: StabilityConfig) -> Self {
        debug_assert!(samples
            .windows(2)
            .all(|w| w[0].window.start < w[1].window.start));
        MetricSeries { samples, config }
    }

    pub fn samples(&self) -> &[MetricSample] {
        &self.samples
    }

    pub fn config(&self) -> &StabilityConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Commit frequencies per window, in grid order.
    pub fn commit_frequencies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.c).collect()
    }
}

/// Issue resolution metrics for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssueResolution {
    /// Closure fraction dampened by mean resolution time.
    pub rate: f64,
    /// Mean resolution time of issues closed in the window, days.
    pub mean_days: f64,
}

/// Pull request merge metrics for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrMerge {
    pub rate: f64,
    /// Mean open-to-merge time of PRs merged in the window, days.
    pub mean_days: f64,
}

/// Engagement metrics for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engagement {
    /// Comment density over open items times the active-user ratio.
    pub a: f64,
    pub active_ratio: f64,
}

/// The uniform window grid covering a log's span.
///
/// Starts are `t_min + k * stride` for every `k >= 0` with
/// `start + window <= t_max`; the count is
/// `floor((span - window) / stride) + 1`.
pub fn window_grid(
    log: &RepositoryLog,
    window_days: f64,
    stride_days: f64,
) -> Result<Vec<Window>, MetricsError> {
    let window_secs = seconds_from_days(window_days);
    let stride_secs = seconds_from_days(stride_days);
    assert!(window_secs > 0 && stride_secs > 0, "durations must be positive");
    let (t_min, t_max) = log.span();
    if t_min.plus_seconds(window_secs) > t_max {
        return Err(MetricsError::SpanTooShort {
            span_days: log.span_days(),
            window_days,
        });
    }
    let count = (t_max.unix() - t_min.unix() - window_secs) / stride_secs + 1;
    let mut grid = Vec::with_capacity(count as usize);
    for k in 0..count {
        grid.push(Window::new(
            t_min.plus_seconds(k * stride_secs),
            window_days,
        ));
    }
    Ok(grid)
}

/// Commits per day within the window.
pub fn commit_frequency(log: &RepositoryLog, window: Window) -> f64 {
    LogIndex::new(log).commit_frequency(window)
}

/// Issue resolution rate for the window; `None` when there are no candidate
/// issues (neither open at the window start nor opened within it).
pub fn issue_resolution_rate(
    log: &RepositoryLog,
    window: Window,
    tau_i_days: f64,
    mode: DampeningMode,
) -> Option<IssueResolution> {
    LogIndex::new(log).issue_resolution(window, tau_i_days, mode)
}

/// PR merge rate for the window; `None` when there are no candidate PRs.
pub fn pr_merge_rate(
    log: &RepositoryLog,
    window: Window,
    tau_p_days: f64,
    mode: DampeningMode,
) -> Option<PrMerge> {
    LogIndex::new(log).pr_merge(window, tau_p_days, mode)
}

/// Activity engagement for the window; `None` when there are no open items
/// at the window start or no users seen yet.
pub fn activity_engagement(log: &RepositoryLog, window: Window) -> Option<Engagement> {
    LogIndex::new(log).engagement(window)
}

/// Coefficient of variation of daily commit counts within the window.
///
/// Days are bucketed from the window start (not calendar midnight) and only
/// whole days count, so the result is timezone-independent. Uses the
/// population standard deviation. A window with zero commits returns
/// `f64::INFINITY`: dormancy is a violation by definition, not a degenerate
/// case.
pub fn commit_cv(log: &RepositoryLog, window: Window) -> Result<f64, MetricsError> {
    LogIndex::new(log).commit_cv(window)
}

/// One metric sample per grid window.
pub fn compute_series(
    log: &RepositoryLog,
    config: &StabilityConfig,
) -> Result<MetricSeries, MetricsError> {
    let grid = window_grid(log, config.window_days, config.stride_days)?;
    let index = LogIndex::new(log);
    let mut samples = Vec::with_capacity(grid.len());
    for window in grid {
        samples.push(index.sample(window, config)?);
    }
    Ok(MetricSeries {
        samples,
        config: config.clone(),
    })
}

/// Per-day rate of change of a uniformly spaced series: central differences
/// on interior points, one-sided at the ends.
pub fn estimate_derivative(values: &[f64], stride_days: f64) -> Result<Vec<f64>, MetricsError> {
    let n = values.len();
    if n < 2 {
        return Err(MetricsError::SeriesTooShort { len: n, min: 2 });
    }
    let mut out = Vec::with_capacity(n);
    out.push((values[1] - values[0]) / stride_days);
    for k in 1..n - 1 {
        out.push((values[k + 1] - values[k - 1]) / (2.0 * stride_days));
    }
    out.push((values[n - 1] - values[n - 2]) / stride_days);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Indexed log view
// ---------------------------------------------------------------------------

/// Sorted projections of a log for O(log n) window queries. Built once per
/// analysis; all windows then query the same immutable arrays, so per-window
/// computation is order-independent and may run in parallel.
struct LogIndex {
    commits: Vec<i64>,
    issue_opens: Vec<i64>,
    /// (close_ts, resolution_days), sorted by close_ts.
    issue_closes: Vec<(i64, f64)>,
    issue_close_dur_prefix: Vec<f64>,
    pr_opens: Vec<i64>,
    /// Merge or close instants, sorted.
    pr_terminals: Vec<i64>,
    /// (merge_ts, review_days), sorted by merge_ts.
    pr_merges: Vec<(i64, f64)>,
    pr_merge_dur_prefix: Vec<f64>,
    comments: Vec<i64>,
    /// (ts, actor) for events that make an actor active: comments, commits,
    /// and PR openings.
    qualifying: Vec<(i64, u32)>,
    /// First appearance instant of every distinct actor, sorted.
    first_seen: Vec<i64>,
    actor_count: usize,
}

fn count_below(sorted: &[i64], bound: i64) -> usize {
    sorted.partition_point(|&t| t < bound)
}

fn count_in(sorted: &[i64], lo: i64, hi: i64) -> usize {
    count_below(sorted, hi) - count_below(sorted, lo)
}

impl LogIndex {
    fn new(log: &RepositoryLog) -> Self {
        let events = log.events();
        let mut commits = Vec::new();
        let mut issue_open_by_id: BTreeMap<&str, i64> = BTreeMap::new();
        let mut pr_open_by_id: BTreeMap<&str, i64> = BTreeMap::new();
        let mut comments = Vec::new();
        for e in events {
            match e.kind {
                EventKind::Commit => commits.push(e.ts.unix()),
                EventKind::IssueOpened => {
                    issue_open_by_id.insert(e.id.as_str(), e.ts.unix());
                }
                EventKind::PrOpened => {
                    pr_open_by_id.insert(e.id.as_str(), e.ts.unix());
                }
                EventKind::Comment => comments.push(e.ts.unix()),
                _ => {}
            }
        }

        let resolution =
            |e: &Event, opens: &BTreeMap<&str, i64>| -> (i64, f64) {
                // The log is validated: the target exists and opened first.
                let open = opens[e.target.as_deref().unwrap_or_default()];
                let days = (e.ts.unix() - open) as f64 / DAY_SECONDS as f64;
                (e.ts.unix(), days)
            };
        let mut issue_closes = Vec::new();
        let mut pr_terminals = Vec::new();
        let mut pr_merges = Vec::new();
        for e in events {
            match e.kind {
                EventKind::IssueClosed => issue_closes.push(resolution(e, &issue_open_by_id)),
                EventKind::PrMerged => {
                    let (ts, days) = resolution(e, &pr_open_by_id);
                    pr_terminals.push(ts);
                    pr_merges.push((ts, days));
                }
                EventKind::PrClosed => pr_terminals.push(e.ts.unix()),
                _ => {}
            }
        }

        let mut actor_ids: BTreeMap<&str, u32> = BTreeMap::new();
        let mut first_seen = Vec::new();
        let mut qualifying = Vec::new();
        for e in events {
            let next = actor_ids.len() as u32;
            let id = *actor_ids.entry(e.actor.as_str()).or_insert(next);
            if id == next && first_seen.len() == next as usize {
                first_seen.push(e.ts.unix()); // events are ts-sorted
            }
            if matches!(
                e.kind,
                EventKind::Comment | EventKind::Commit | EventKind::PrOpened
            ) {
                qualifying.push((e.ts.unix(), id));
            }
        }

        let issue_opens: Vec<i64> = {
            let mut v: Vec<i64> = issue_open_by_id.into_values().collect();
            v.sort_unstable();
            v
        };
        let pr_opens: Vec<i64> = {
            let mut v: Vec<i64> = pr_open_by_id.into_values().collect();
            v.sort_unstable();
            v
        };
        issue_closes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pr_merges.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pr_terminals.sort_unstable();

        let prefix = |items: &[(i64, f64)]| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(items.len() + 1);
            out.push(0.0);
            for &(_, d) in items {
                acc += d;
                out.push(acc);
            }
            out
        };
        let issue_close_dur_prefix = prefix(&issue_closes);
        let pr_merge_dur_prefix = prefix(&pr_merges);
        let actor_count = actor_ids.len();

        LogIndex {
            commits,
            issue_opens,
            issue_closes,
            issue_close_dur_prefix,
            pr_opens,
            pr_terminals,
            pr_merges,
            pr_merge_dur_prefix,
            comments,
            qualifying,
            first_seen,
            actor_count,
        }
    }

    fn commit_frequency(&self, w: Window) -> f64 {
        count_in(&self.commits, w.start.unix(), w.end().unix()) as f64 / w.days()
    }

    fn commit_cv(&self, w: Window) -> Result<f64, MetricsError> {
        let whole_days = (w.end().unix() - w.start.unix()) / DAY_SECONDS;
        if whole_days < 2 {
            return Err(MetricsError::WindowTooShort { days: w.days() });
        }
        let mut counts = Vec::with_capacity(whole_days as usize);
        for d in 0..whole_days {
            let lo = w.start.unix() + d * DAY_SECONDS;
            counts.push(count_in(&self.commits, lo, lo + DAY_SECONDS) as f64);
        }
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        if mean == 0.0 {
            return Ok(f64::INFINITY);
        }
        let var = counts.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Ok(libm::sqrt(var) / mean)
    }

    /// Issues open at `t`: opened strictly before `t` and not closed
    /// strictly before `t`. Every close follows its open, so the difference
    /// of prefix counts is exact.
    fn issues_open_at(&self, t: i64) -> usize {
        count_below(&self.issue_opens, t)
            - self.issue_closes.partition_point(|&(c, _)| c < t)
    }

    fn prs_open_at(&self, t: i64) -> usize {
        count_below(&self.pr_opens, t) - count_below(&self.pr_terminals, t)
    }

    fn issue_resolution(
        &self,
        w: Window,
        tau_days: f64,
        mode: DampeningMode,
    ) -> Option<IssueResolution> {
        let (lo, hi) = (w.start.unix(), w.end().unix());
        let candidates = self.issues_open_at(lo) + count_in(&self.issue_opens, lo, hi);
        if candidates == 0 {
            return None;
        }
        let a = self.issue_closes.partition_point(|&(c, _)| c < lo);
        let b = self.issue_closes.partition_point(|&(c, _)| c < hi);
        let closed = b - a;
        let mean_days = if closed == 0 {
            0.0
        } else {
            (self.issue_close_dur_prefix[b] - self.issue_close_dur_prefix[a]) / closed as f64
        };
        Some(IssueResolution {
            rate: closed as f64 / candidates as f64 * mode.factor(mean_days, tau_days),
            mean_days,
        })
    }

    fn pr_merge(&self, w: Window, tau_days: f64, mode: DampeningMode) -> Option<PrMerge> {
        let (lo, hi) = (w.start.unix(), w.end().unix());
        let candidates = self.prs_open_at(lo) + count_in(&self.pr_opens, lo, hi);
        if candidates == 0 {
            return None;
        }
        let a = self.pr_merges.partition_point(|&(m, _)| m < lo);
        let b = self.pr_merges.partition_point(|&(m, _)| m < hi);
        let merged = b - a;
        let mean_days = if merged == 0 {
            0.0
        } else {
            (self.pr_merge_dur_prefix[b] - self.pr_merge_dur_prefix[a]) / merged as f64
        };
        Some(PrMerge {
            rate: merged as f64 / candidates as f64 * mode.factor(mean_days, tau_days),
            mean_days,
        })
    }

    fn engagement(&self, w: Window) -> Option<Engagement> {
        let (lo, hi) = (w.start.unix(), w.end().unix());
        let open_items = self.issues_open_at(lo) + self.prs_open_at(lo);
        let total = count_below(&self.first_seen, hi);
        if open_items == 0 || total == 0 {
            return None;
        }
        let comments = count_in(&self.comments, lo, hi);
        let a = self.qualifying.partition_point(|&(t, _)| t < lo);
        let b = self.qualifying.partition_point(|&(t, _)| t < hi);
        let mut seen = vec![false; self.actor_count];
        let mut active = 0usize;
        for &(_, actor) in &self.qualifying[a..b] {
            if !seen[actor as usize] {
                seen[actor as usize] = true;
                active += 1;
            }
        }
        Some(Engagement {
            a: comments as f64 / open_items as f64 * (active as f64 / total as f64),
            active_ratio: active as f64 / total as f64,
        })
    }

    fn sample(&self, w: Window, config: &StabilityConfig) -> Result<MetricSample, MetricsError> {
        let issues = self.issue_resolution(w, config.tau_i_days, config.dampening_mode);
        let prs = self.pr_merge(w, config.tau_p_days, config.dampening_mode);
        let engagement = self.engagement(w);
        Ok(MetricSample {
            window: w,
            c: self.commit_frequency(w),
            cv_c: self.commit_cv(w)?,
            i: issues.map(|v| v.rate),
            t_res: issues.map(|v| v.mean_days),
            p: prs.map(|v| v.rate),
            t_rev: prs.map(|v| v.mean_days),
            a: engagement.map(|v| v.a),
            active_ratio: engagement.map(|v| v.active_ratio),
        })
    }
}
