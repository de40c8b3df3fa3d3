//! Shared domain types: events, validated logs, windows, metric samples, and
//! the analysis configuration.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; construction enforces the invariants the rest of the crate relies
//! on (ordering, referential integrity, configuration sanity).

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::time::{seconds_from_days, Timestamp};

/// The kind of repository action an event records.
///
/// The declaration order is the tie-breaking order for events that share a
/// timestamp, so results are deterministic for any input permutation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Commit,
    IssueOpened,
    IssueClosed,
    PrOpened,
    PrMerged,
    PrClosed,
    Comment,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Commit => "commit",
            EventKind::IssueOpened => "issue_opened",
            EventKind::IssueClosed => "issue_closed",
            EventKind::PrOpened => "pr_opened",
            EventKind::PrMerged => "pr_merged",
            EventKind::PrClosed => "pr_closed",
            EventKind::Comment => "comment",
        }
    }

    /// True for kinds that resolve a previously opened item and therefore
    /// must carry a `target`.
    pub fn is_closing(self) -> bool {
        matches!(
            self,
            EventKind::IssueClosed | EventKind::PrMerged | EventKind::PrClosed
        )
    }
}

/// One timestamped repository action.
///
/// `id` is unique per kind-stream; `target` carries the id of the referred
/// item for closing events and comments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub kind: EventKind,
    pub id: String,
    pub ts: Timestamp,
    pub actor: String,
    pub target: Option<String>,
}

impl Event {
    pub fn new(kind: EventKind, id: &str, ts: Timestamp, actor: &str) -> Self {
        Event {
            kind,
            id: id.into(),
            ts,
            actor: actor.into(),
            target: None,
        }
    }

    pub fn with_target(mut self, target: &str) -> Self {
        self.target = Some(target.into());
        self
    }

    fn sort_key(&self) -> (Timestamp, EventKind, &str) {
        (self.ts, self.kind, self.id.as_str())
    }
}

/// Why a list of events does not form a valid [`RepositoryLog`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    /// A closing event references an item that was never opened.
    #[error("event {event_id}: close references unknown item {target}")]
    DanglingRef { event_id: String, target: String },
    /// Two events share a (kind, id) pair, or an item is closed twice.
    #[error("duplicate event: {kind} {id}")]
    DuplicateEvent { kind: &'static str, id: String },
    /// An item is closed or merged before it was opened.
    #[error("event {event_id}: close at {close} precedes open at {open}")]
    CloseBeforeOpen {
        event_id: String,
        open: Timestamp,
        close: Timestamp,
    },
    /// A closing event carries no target reference.
    #[error("event {event_id}: closing event without a ref")]
    MissingRef { event_id: String },
    /// An event has an empty actor.
    #[error("event {event_id}: empty actor")]
    EmptyActor { event_id: String },
    /// No events at all; a log must span at least one instant.
    #[error("no events to validate")]
    EmptyLog,
}

/// A validated, time-ordered event collection with resolved open/close
/// linkage — the input to every analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepositoryLog {
    events: Vec<Event>,
    span: (Timestamp, Timestamp),
}

/// Validate and order a raw event list. The input may be arbitrarily
/// shuffled; any permutation of the same events yields the same log.
pub fn validate_log(mut events: Vec<Event>) -> Result<RepositoryLog, ValidationError> {
    if events.is_empty() {
        return Err(ValidationError::EmptyLog);
    }
    events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    // Uniqueness of (kind, id); a sorted scan sees duplicates adjacently
    // only within equal timestamps, so use a set keyed by kind and id.
    let mut seen: alloc::collections::BTreeSet<(EventKind, &str)> =
        alloc::collections::BTreeSet::new();
    for e in &events {
        if e.actor.is_empty() {
            return Err(ValidationError::EmptyActor {
                event_id: e.id.clone(),
            });
        }
        if !seen.insert((e.kind, e.id.as_str())) {
            return Err(ValidationError::DuplicateEvent {
                kind: e.kind.as_str(),
                id: e.id.clone(),
            });
        }
    }

    // Referential integrity: closes resolve to opens, close >= open, one
    // terminal event per item.
    let mut issue_opens: alloc::collections::BTreeMap<&str, Timestamp> =
        alloc::collections::BTreeMap::new();
    let mut pr_opens: alloc::collections::BTreeMap<&str, Timestamp> =
        alloc::collections::BTreeMap::new();
    for e in &events {
        match e.kind {
            EventKind::IssueOpened => {
                issue_opens.insert(e.id.as_str(), e.ts);
            }
            EventKind::PrOpened => {
                pr_opens.insert(e.id.as_str(), e.ts);
            }
            _ => {}
        }
    }
    let mut issue_closed: alloc::collections::BTreeSet<&str> = alloc::collections::BTreeSet::new();
    let mut pr_terminal: alloc::collections::BTreeSet<&str> = alloc::collections::BTreeSet::new();
    for e in &events {
        if !e.kind.is_closing() {
            continue;
        }
        let target = e.target.as_deref().ok_or(ValidationError::MissingRef {
            event_id: e.id.clone(),
        })?;
        let (opens, closed): (_, &mut alloc::collections::BTreeSet<&str>) = match e.kind {
            EventKind::IssueClosed => (&issue_opens, &mut issue_closed),
            _ => (&pr_opens, &mut pr_terminal),
        };
        let open_ts = *opens.get(target).ok_or_else(|| ValidationError::DanglingRef {
            event_id: e.id.clone(),
            target: target.into(),
        })?;
        if e.ts < open_ts {
            return Err(ValidationError::CloseBeforeOpen {
                event_id: e.id.clone(),
                open: open_ts,
                close: e.ts,
            });
        }
        if !closed.insert(target) {
            return Err(ValidationError::DuplicateEvent {
                kind: e.kind.as_str(),
                id: e.id.clone(),
            });
        }
    }

    let span = (events[0].ts, events[events.len() - 1].ts);
    Ok(RepositoryLog { events, span })
}

impl RepositoryLog {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Closed interval [t_min, t_max] covered by the log.
    pub fn span(&self) -> (Timestamp, Timestamp) {
        self.span
    }

    pub fn span_days(&self) -> f64 {
        self.span.1.days_since(self.span.0)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

/// One analysis window: `[start, start + dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Timestamp,
    duration_secs: i64,
}

impl Window {
    /// A window of `days` fractional days. `days` must be positive.
    pub fn new(start: Timestamp, days: f64) -> Self {
        let duration_secs = seconds_from_days(days);
        debug_assert!(duration_secs > 0, "window duration must be positive");
        Window {
            start,
            duration_secs,
        }
    }

    pub fn end(&self) -> Timestamp {
        self.start.plus_seconds(self.duration_secs)
    }

    pub fn days(&self) -> f64 {
        self.duration_secs as f64 / crate::time::DAY_SECONDS as f64
    }

    /// Half-open membership: an event at exactly `end` belongs to the next
    /// window.
    pub fn contains(&self, ts: Timestamp) -> bool {
        ts >= self.start && ts < self.end()
    }
}

/// Which metric components had an empty denominator in a window and were
/// flagged neutral instead of scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InactiveComponents {
    pub issues: bool,
    pub prs: bool,
    pub engagement: bool,
}

impl InactiveComponents {
    pub fn any(self) -> bool {
        self.issues || self.prs || self.engagement
    }
}

mod cv_serde {
    //! `cv_c` may legitimately be infinite (no commits in the window, a
    //! violation by definition); JSON has no infinity literal, so it travels
    //! as the string `"inf"`.
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            v.serialize(s)
        } else {
            "inf".serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(alloc::string::String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(alloc::format!(
                "invalid cv value: {s}"
            ))),
        }
    }
}

/// The windowed state vector plus auxiliary statistics for one window.
///
/// Inactive components are represented by `None` in their value fields:
/// `i`/`t_res` are both present or both absent, likewise `p`/`t_rev` and
/// `a`/`active_ratio`. `cv_c` is infinite when the window has no commits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub window: Window,
    /// Commit frequency, commits per day.
    pub c: f64,
    /// Coefficient of variation of daily commit counts within the window.
    #[serde(with = "cv_serde")]
    pub cv_c: f64,
    /// Issue resolution rate (closure fraction x time dampening).
    pub i: Option<f64>,
    /// Mean resolution time of issues closed in the window, days.
    pub t_res: Option<f64>,
    /// Pull request merge rate.
    pub p: Option<f64>,
    /// Mean open-to-merge time of PRs merged in the window, days.
    pub t_rev: Option<f64>,
    /// Activity engagement (comment density x participation ratio).
    pub a: Option<f64>,
    /// Active users / total users seen so far.
    pub active_ratio: Option<f64>,
}

impl MetricSample {
    pub fn inactive_components(&self) -> InactiveComponents {
        InactiveComponents {
            issues: self.i.is_none(),
            prs: self.p.is_none(),
            engagement: self.a.is_none(),
        }
    }
}

/// How mean handling times dampen the issue/PR rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampeningMode {
    /// `1 / (1 + T/tau)`: the factor is 1/2 when the mean handling time
    /// sits exactly at its threshold. Default.
    Normalized,
    /// `1 / (1 + T)` with `T` in raw days, for fidelity experiments.
    RawDays,
}

impl DampeningMode {
    pub fn factor(self, mean_days: f64, tau_days: f64) -> f64 {
        match self {
            DampeningMode::Normalized => 1.0 / (1.0 + mean_days / tau_days),
            DampeningMode::RawDays => 1.0 / (1.0 + mean_days),
        }
    }
}

/// A metric component / stability criterion identifier.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    CommitPattern,
    IssueManagement,
    PrProcessing,
    Engagement,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::CommitPattern,
        Criterion::IssueManagement,
        Criterion::PrProcessing,
        Criterion::Engagement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::CommitPattern => "commit_pattern",
            Criterion::IssueManagement => "issue_management",
            Criterion::PrProcessing => "pr_processing",
            Criterion::Engagement => "engagement",
        }
    }
}

impl core::fmt::Display for Criterion {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Invalid [`StabilityConfig`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("weights must sum to 1 (got {sum})")]
    WeightSum { sum: f64 },
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("csi_threshold must lie strictly inside (0, 1) (got {value})")]
    ThresholdRange { value: f64 },
}

/// Thresholds, weights, normalization targets, and windowing for an analysis.
///
/// The defaults are the framework's proposed values: threshold matrix
/// `[0.5, 0.3, 14, 0.4, 5, 0.25, 0.15]`, weights `[0.3, 0.25, 0.25, 0.2]`,
/// targets (0.25, 0.25), (0.4, 0.1), (0.5, 0.1), (0.35, 0.1), and a CSI
/// threshold of 0.7.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    /// Max allowed coefficient of variation of daily commits.
    pub alpha_c: f64,
    /// Min acceptable issue resolution rate.
    pub beta_i: f64,
    /// Max acceptable mean issue resolution time, days.
    pub tau_i_days: f64,
    /// Min acceptable PR merge rate.
    pub beta_p: f64,
    /// Max acceptable mean PR review time, days.
    pub tau_p_days: f64,
    /// Min acceptable activity engagement.
    pub gamma_a: f64,
    /// Min acceptable active-user ratio.
    pub delta_a: f64,
    pub w_c: f64,
    pub w_i: f64,
    pub w_p: f64,
    pub w_a: f64,
    pub mu_c: f64,
    pub sigma_c: f64,
    pub mu_i: f64,
    pub sigma_i: f64,
    pub mu_p: f64,
    pub sigma_p: f64,
    pub mu_a: f64,
    pub sigma_a: f64,
    /// CSI at or above this classifies a window as stable.
    pub csi_threshold: f64,
    pub window_days: f64,
    pub stride_days: f64,
    pub dampening_mode: DampeningMode,
    /// Fraction of evaluated windows a criterion may violate and still pass.
    /// 0 (the default) fails on any violation; nonzero values are an
    /// extension beyond the framework.
    pub violation_tolerance: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            alpha_c: 0.5,
            beta_i: 0.3,
            tau_i_days: 14.0,
            beta_p: 0.4,
            tau_p_days: 5.0,
            gamma_a: 0.25,
            delta_a: 0.15,
            w_c: 0.30,
            w_i: 0.25,
            w_p: 0.25,
            w_a: 0.20,
            mu_c: 0.25,
            sigma_c: 0.25,
            mu_i: 0.40,
            sigma_i: 0.10,
            mu_p: 0.50,
            sigma_p: 0.10,
            mu_a: 0.35,
            sigma_a: 0.10,
            csi_threshold: 0.7,
            window_days: 14.0,
            stride_days: 1.0,
            dampening_mode: DampeningMode::Normalized,
            violation_tolerance: 0.0,
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let sum = self.w_c + self.w_i + self.w_p + self.w_a;
        if libm::fabs(sum - 1.0) > 1e-12 {
            return Err(ConfigError::WeightSum { sum });
        }
        let positive = [
            ("w_c", self.w_c),
            ("w_i", self.w_i),
            ("w_p", self.w_p),
            ("w_a", self.w_a),
            ("alpha_c", self.alpha_c),
            ("beta_i", self.beta_i),
            ("tau_i_days", self.tau_i_days),
            ("beta_p", self.beta_p),
            ("tau_p_days", self.tau_p_days),
            ("gamma_a", self.gamma_a),
            ("delta_a", self.delta_a),
            ("sigma_c", self.sigma_c),
            ("sigma_i", self.sigma_i),
            ("sigma_p", self.sigma_p),
            ("sigma_a", self.sigma_a),
            ("window_days", self.window_days),
            ("stride_days", self.stride_days),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if !(self.csi_threshold > 0.0 && self.csi_threshold < 1.0) {
            return Err(ConfigError::ThresholdRange {
                value: self.csi_threshold,
            });
        }
        Ok(())
    }

    /// Weight of a component in the CSI.
    pub fn weight(&self, k: Criterion) -> f64 {
        match k {
            Criterion::CommitPattern => self.w_c,
            Criterion::IssueManagement => self.w_i,
            Criterion::PrProcessing => self.w_p,
            Criterion::Engagement => self.w_a,
        }
    }

    /// Normalization target and acceptable deviation of a component.
    pub fn target(&self, k: Criterion) -> (f64, f64) {
        match k {
            Criterion::CommitPattern => (self.mu_c, self.sigma_c),
            Criterion::IssueManagement => (self.mu_i, self.sigma_i),
            Criterion::PrProcessing => (self.mu_p, self.sigma_p),
            Criterion::Engagement => (self.mu_a, self.sigma_a),
        }
    }
}
