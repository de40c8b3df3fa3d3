//! Oracle equivalence: every windowed metric must match an independent,
//! naive per-event-scan implementation exactly (1e-12) on small logs.
//!
//! The oracle below shares no code with the indexed engine: it filters the
//! raw event slice per window, resolves references by linear search, and
//! collects actor sets with hash sets. Slow and obvious on purpose.

use std::collections::HashSet;

use proptest::prelude::*;
use repo_stability_core::metrics::{compute_series, window_grid};
use repo_stability_core::model::{validate_log, DampeningMode, Event, EventKind, Window};
use repo_stability_core::{RepositoryLog, StabilityConfig, Timestamp};

const DAY: i64 = 86_400;
const TOL: f64 = 1e-12;

fn ts(day: f64) -> Timestamp {
    Timestamp::from_unix((day * DAY as f64).round() as i64)
}

// ---------------------------------------------------------------------------
// The naive oracle
// ---------------------------------------------------------------------------

struct NaiveSample {
    c: f64,
    cv: Option<f64>, // None when the window has < 2 whole days
    i: Option<(f64, f64)>,
    p: Option<(f64, f64)>,
    a: Option<(f64, f64)>,
}

fn in_window(e: &Event, w: Window) -> bool {
    e.ts >= w.start && e.ts < w.end()
}

fn open_ts_of(events: &[Event], kind: EventKind, id: &str) -> Timestamp {
    events
        .iter()
        .find(|e| e.kind == kind && e.id == id)
        .expect("oracle input is validated")
        .ts
}

/// Is the item (issue or PR) open at instant `t`: opened strictly before,
/// not terminated strictly before.
fn item_open_at(events: &[Event], open_kind: EventKind, id: &str, t: Timestamp) -> bool {
    let opened = open_ts_of(events, open_kind, id) < t;
    let terminated_before = events.iter().any(|e| {
        e.target.as_deref() == Some(id)
            && e.ts < t
            && match open_kind {
                EventKind::IssueOpened => e.kind == EventKind::IssueClosed,
                _ => matches!(e.kind, EventKind::PrMerged | EventKind::PrClosed),
            }
    });
    opened && !terminated_before
}

fn naive(events: &[Event], w: Window, cfg: &StabilityConfig) -> NaiveSample {
    let days = w.days();

    let commits: Vec<&Event> = events
        .iter()
        .filter(|e| e.kind == EventKind::Commit && in_window(e, w))
        .collect();
    let c = commits.len() as f64 / days;

    let whole_days = ((w.end().unix() - w.start.unix()) / DAY) as usize;
    let cv = if whole_days >= 2 {
        let counts: Vec<f64> = (0..whole_days)
            .map(|d| {
                let lo = w.start.plus_seconds(d as i64 * DAY);
                let hi = lo.plus_seconds(DAY);
                events
                    .iter()
                    .filter(|e| e.kind == EventKind::Commit && e.ts >= lo && e.ts < hi)
                    .count() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        if mean == 0.0 {
            Some(f64::INFINITY)
        } else {
            let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                / counts.len() as f64;
            Some(var.sqrt() / mean)
        }
    } else {
        None
    };

    // Issues.
    let issue_ids: Vec<&str> = events
        .iter()
        .filter(|e| e.kind == EventKind::IssueOpened)
        .map(|e| e.id.as_str())
        .collect();
    let candidates = issue_ids
        .iter()
        .filter(|id| {
            item_open_at(events, EventKind::IssueOpened, id, w.start)
                || events.iter().any(|e| {
                    e.kind == EventKind::IssueOpened && &e.id == *id && in_window(e, w)
                })
        })
        .count();
    let closed: Vec<f64> = events
        .iter()
        .filter(|e| e.kind == EventKind::IssueClosed && in_window(e, w))
        .map(|e| {
            let open = open_ts_of(events, EventKind::IssueOpened, e.target.as_deref().unwrap());
            e.ts.days_since(open)
        })
        .collect();
    let i = (candidates > 0).then(|| {
        let t_res = if closed.is_empty() {
            0.0
        } else {
            closed.iter().sum::<f64>() / closed.len() as f64
        };
        let damp = match cfg.dampening_mode {
            DampeningMode::Normalized => 1.0 / (1.0 + t_res / cfg.tau_i_days),
            DampeningMode::RawDays => 1.0 / (1.0 + t_res),
        };
        (closed.len() as f64 / candidates as f64 * damp, t_res)
    });

    // Pull requests.
    let pr_ids: Vec<&str> = events
        .iter()
        .filter(|e| e.kind == EventKind::PrOpened)
        .map(|e| e.id.as_str())
        .collect();
    let pr_candidates = pr_ids
        .iter()
        .filter(|id| {
            item_open_at(events, EventKind::PrOpened, id, w.start)
                || events
                    .iter()
                    .any(|e| e.kind == EventKind::PrOpened && &e.id == *id && in_window(e, w))
        })
        .count();
    let merged: Vec<f64> = events
        .iter()
        .filter(|e| e.kind == EventKind::PrMerged && in_window(e, w))
        .map(|e| {
            let open = open_ts_of(events, EventKind::PrOpened, e.target.as_deref().unwrap());
            e.ts.days_since(open)
        })
        .collect();
    let p = (pr_candidates > 0).then(|| {
        let t_rev = if merged.is_empty() {
            0.0
        } else {
            merged.iter().sum::<f64>() / merged.len() as f64
        };
        let damp = match cfg.dampening_mode {
            DampeningMode::Normalized => 1.0 / (1.0 + t_rev / cfg.tau_p_days),
            DampeningMode::RawDays => 1.0 / (1.0 + t_rev),
        };
        (merged.len() as f64 / pr_candidates as f64 * damp, t_rev)
    });

    // Engagement.
    let open_items = issue_ids
        .iter()
        .filter(|id| item_open_at(events, EventKind::IssueOpened, id, w.start))
        .count()
        + pr_ids
            .iter()
            .filter(|id| item_open_at(events, EventKind::PrOpened, id, w.start))
            .count();
    let comments = events
        .iter()
        .filter(|e| e.kind == EventKind::Comment && in_window(e, w))
        .count();
    let active: HashSet<&str> = events
        .iter()
        .filter(|e| {
            in_window(e, w)
                && matches!(
                    e.kind,
                    EventKind::Comment | EventKind::Commit | EventKind::PrOpened
                )
        })
        .map(|e| e.actor.as_str())
        .collect();
    let total: HashSet<&str> = events
        .iter()
        .filter(|e| e.ts < w.end())
        .map(|e| e.actor.as_str())
        .collect();
    let a = (open_items > 0 && !total.is_empty()).then(|| {
        let ratio = active.len() as f64 / total.len() as f64;
        (comments as f64 / open_items as f64 * ratio, ratio)
    });

    NaiveSample { c, cv, i, p, a }
}

// ---------------------------------------------------------------------------
// Comparison driver
// ---------------------------------------------------------------------------

fn close(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= TOL
}

fn assert_log_matches_oracle(log: &RepositoryLog, cfg: &StabilityConfig) {
    let series = compute_series(log, cfg).expect("grid fits");
    let grid = window_grid(log, cfg.window_days, cfg.stride_days).unwrap();
    assert_eq!(series.len(), grid.len());
    for (sample, w) in series.samples().iter().zip(grid) {
        let expect = naive(log.events(), w, cfg);
        assert!(close(sample.c, expect.c), "c: {} vs {}", sample.c, expect.c);
        let cv = expect.cv.expect("window has >= 2 days");
        assert!(close(sample.cv_c, cv), "cv: {} vs {}", sample.cv_c, cv);
        match (sample.i, sample.t_res, expect.i) {
            (Some(i), Some(t), Some((oi, ot))) => {
                assert!(close(i, oi), "i: {i} vs {oi}");
                assert!(close(t, ot), "t_res: {t} vs {ot}");
            }
            (None, None, None) => {}
            other => panic!("issue activity mismatch: {other:?}"),
        }
        match (sample.p, sample.t_rev, expect.p) {
            (Some(p), Some(t), Some((op, ot))) => {
                assert!(close(p, op), "p: {p} vs {op}");
                assert!(close(t, ot), "t_rev: {t} vs {ot}");
            }
            (None, None, None) => {}
            other => panic!("pr activity mismatch: {other:?}"),
        }
        match (sample.a, sample.active_ratio, expect.a) {
            (Some(a), Some(r), Some((oa, or))) => {
                assert!(close(a, oa), "a: {a} vs {oa}");
                assert!(close(r, or), "ratio: {r} vs {or}");
                assert!((0.0..=1.0).contains(&r), "active_ratio out of range: {r}");
            }
            (None, None, None) => {}
            other => panic!("engagement mismatch: {other:?}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Twenty hand-crafted logs
// ---------------------------------------------------------------------------

struct Builder {
    events: Vec<Event>,
    n: usize,
}

impl Builder {
    fn new() -> Self {
        Builder { events: Vec::new(), n: 0 }
    }

    fn commit(mut self, day: f64, who: &str) -> Self {
        self.n += 1;
        self.events
            .push(Event::new(EventKind::Commit, &format!("c{}", self.n), ts(day), who));
        self
    }

    fn issue(mut self, day: f64, close: Option<f64>, who: &str) -> Self {
        self.n += 1;
        let id = format!("i{}", self.n);
        self.events
            .push(Event::new(EventKind::IssueOpened, &id, ts(day), who));
        if let Some(c) = close {
            self.events.push(
                Event::new(EventKind::IssueClosed, &id, ts(c), "maint").with_target(&id),
            );
        }
        self
    }

    fn pr(mut self, day: f64, terminal: Option<(f64, bool)>, who: &str) -> Self {
        self.n += 1;
        let id = format!("pr{}", self.n);
        self.events.push(Event::new(EventKind::PrOpened, &id, ts(day), who));
        if let Some((c, merged)) = terminal {
            let kind = if merged { EventKind::PrMerged } else { EventKind::PrClosed };
            self.events
                .push(Event::new(kind, &id, ts(c), "maint").with_target(&id));
        }
        self
    }

    fn comment(mut self, day: f64, who: &str) -> Self {
        self.n += 1;
        self.events
            .push(Event::new(EventKind::Comment, &format!("m{}", self.n), ts(day), who));
        self
    }

    fn build(self) -> RepositoryLog {
        validate_log(self.events).unwrap()
    }
}

fn hand_crafted_logs() -> Vec<RepositoryLog> {
    let mut logs = Vec::new();
    // 1: commits only, even spread
    logs.push((0..20).fold(Builder::new(), |b, k| b.commit(k as f64, "ann")).build());
    // 2: commits clustered in bursts
    logs.push(
        (0..16)
            .fold(Builder::new(), |b, k| b.commit((k / 4 * 7) as f64 + 0.25 * (k % 4) as f64, "bo"))
            .commit(27.9, "bo")
            .build(),
    );
    // 3: one issue closed instantly
    logs.push(Builder::new().commit(0.0, "a").issue(3.0, Some(3.0), "r").commit(14.0, "a").build());
    // 4: issues opened and closed across window edges
    logs.push(
        Builder::new()
            .commit(0.0, "a")
            .issue(1.0, Some(7.0), "r1")
            .issue(6.9, Some(7.1), "r2")
            .issue(7.0, None, "r3")
            .issue(13.99, Some(14.0), "r4")
            .commit(21.0, "a")
            .build(),
    );
    // 5: events exactly at window boundaries
    logs.push(
        Builder::new()
            .commit(0.0, "a")
            .commit(7.0, "b")
            .commit(14.0, "c")
            .commit(21.0, "d")
            .build(),
    );
    // 6: PR merged, PR closed, PR left open
    logs.push(
        Builder::new()
            .commit(0.0, "a")
            .pr(1.0, Some((2.5, true)), "a")
            .pr(2.0, Some((9.0, false)), "b")
            .pr(3.0, None, "c")
            .commit(18.0, "a")
            .build(),
    );
    // 7: comment-heavy, few items
    logs.push(
        (0..12)
            .fold(
                Builder::new().issue(0.5, None, "r").pr(0.75, None, "d"),
                |b, k| b.comment(1.0 + k as f64 * 1.5, if k % 3 == 0 { "x" } else { "y" }),
            )
            .build(),
    );
    // 8: same-second ties of different kinds
    logs.push(
        Builder::new()
            .commit(5.0, "a")
            .issue(5.0, Some(5.0), "r")
            .pr(5.0, Some((5.0, true)), "a")
            .comment(5.0, "z")
            .commit(0.0, "a")
            .commit(19.0, "a")
            .build(),
    );
    // 9: long-open issues dominating the candidate pool
    logs.push(
        (0..8)
            .fold(Builder::new().commit(0.0, "a").commit(25.0, "a"), |b, k| {
                b.issue(0.5 + k as f64 * 0.1, (k == 0).then_some(20.0), &format!("r{k}"))
            })
            .build(),
    );
    // 10: alternating quiet and busy days
    logs.push(
        (0..10)
            .fold(Builder::new(), |b, k| {
                let day = (k * 2) as f64;
                b.commit(day + 0.1, "a").commit(day + 0.2, "b").commit(day + 0.3, "a")
            })
            .build(),
    );
    // 11: single actor everything
    logs.push(
        Builder::new()
            .commit(0.0, "solo")
            .issue(1.0, Some(4.0), "solo")
            .pr(2.0, Some((3.0, true)), "solo")
            .comment(5.0, "solo")
            .commit(16.0, "solo")
            .build(),
    );
    // 12: many actors, one event each
    logs.push(
        (0..24)
            .fold(Builder::new(), |b, k| b.commit(k as f64 * 0.9, &format!("dev{k}")))
            .build(),
    );
    // 13: issue closed in a later window than opened
    logs.push(
        Builder::new()
            .commit(0.0, "a")
            .issue(2.0, Some(16.0), "r")
            .issue(3.0, Some(23.5), "s")
            .commit(24.0, "a")
            .build(),
    );
    // 14: PRs merged same window they opened
    logs.push(
        (0..6)
            .fold(Builder::new().commit(0.0, "a").commit(15.0, "a"), |b, k| {
                let d = 1.0 + k as f64;
                b.pr(d, Some((d + 0.4, k % 2 == 0)), &format!("d{k}"))
            })
            .build(),
    );
    // 15: zero-commit stretch in the middle
    logs.push(
        Builder::new()
            .commit(0.5, "a")
            .commit(1.5, "a")
            .commit(12.5, "a")
            .commit(13.5, "a")
            .issue(1.0, Some(12.8), "r")
            .build(),
    );
    // 16: comments racing closes (comment after item closed)
    logs.push(
        Builder::new()
            .issue(0.5, Some(2.0), "r")
            .comment(3.0, "x")
            .comment(4.0, "x")
            .commit(0.0, "a")
            .commit(16.0, "b")
            .build(),
    );
    // 17: dense one-day burst
    logs.push(
        (0..30)
            .fold(Builder::new().commit(0.0, "z").commit(14.0, "z"), |b, k| {
                b.commit(6.0 + 0.01 * k as f64, &format!("d{}", k % 3))
            })
            .build(),
    );
    // 18: issue opened at the exact start of a window
    logs.push(
        Builder::new()
            .commit(0.0, "a")
            .issue(7.0, Some(10.0), "r")
            .issue(14.0, None, "s")
            .commit(21.0, "a")
            .build(),
    );
    // 19: mixed full-pipeline traffic
    logs.push(
        Builder::new()
            .commit(0.2, "a")
            .commit(1.7, "b")
            .issue(0.4, Some(5.5), "r1")
            .issue(2.2, None, "r2")
            .issue(8.8, Some(9.0), "r3")
            .pr(0.9, Some((4.0, true)), "a")
            .pr(6.6, Some((12.0, false)), "b")
            .pr(10.0, None, "c")
            .comment(1.1, "a")
            .comment(3.3, "r1")
            .comment(9.9, "c")
            .commit(13.4, "c")
            .commit(20.0, "a")
            .build(),
    );
    // 20: fractional-second adjacency (sub-day packing)
    logs.push(
        (0..40)
            .fold(Builder::new(), |b, k| {
                b.commit(k as f64 * 0.51, if k % 2 == 0 { "e" } else { "f" })
            })
            .build(),
    );
    logs
}

#[test]
fn twenty_hand_crafted_logs_match_naive_oracle() {
    let logs = hand_crafted_logs();
    assert_eq!(logs.len(), 20);
    let mut cfg = StabilityConfig::default();
    cfg.window_days = 7.0;
    cfg.stride_days = 2.5;
    for (k, log) in logs.iter().enumerate() {
        assert!(log.len() <= 50, "log {k} has {} events", log.len());
        assert_log_matches_oracle(log, &cfg);
    }
}

#[test]
fn hand_crafted_logs_match_under_raw_days_dampening() {
    let mut cfg = StabilityConfig::default();
    cfg.window_days = 10.0;
    cfg.stride_days = 5.0;
    cfg.dampening_mode = DampeningMode::RawDays;
    for log in hand_crafted_logs() {
        assert_log_matches_oracle(&log, &cfg);
    }
}

// ---------------------------------------------------------------------------
// Property: random small logs match the oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Item {
    Commit { day: f64, who: u8 },
    Issue { day: f64, close_after: Option<f64>, who: u8 },
    Pr { day: f64, close_after: Option<(f64, bool)>, who: u8 },
    Comment { day: f64, who: u8 },
}

fn item_strategy() -> impl Strategy<Value = Item> {
    let day = 0.0..20.0f64;
    let who = 0u8..6;
    prop_oneof![
        (day.clone(), who.clone()).prop_map(|(day, who)| Item::Commit { day, who }),
        (day.clone(), proptest::option::of(0.0..15.0f64), who.clone())
            .prop_map(|(day, close_after, who)| Item::Issue { day, close_after, who }),
        (
            day.clone(),
            proptest::option::of((0.0..15.0f64, any::<bool>())),
            who.clone()
        )
            .prop_map(|(day, close_after, who)| Item::Pr { day, close_after, who }),
        (day, who).prop_map(|(day, who)| Item::Comment { day, who }),
    ]
}

fn log_from_items(items: &[Item]) -> RepositoryLog {
    let mut b = Builder::new();
    // actors deliberately collide across roles
    let name = |w: u8| format!("actor{w}");
    for item in items {
        b = match *item {
            Item::Commit { day, who } => b.commit(day, &name(who)),
            Item::Issue { day, close_after, who } => {
                b.issue(day, close_after.map(|d| day + d), &name(who))
            }
            Item::Pr { day, close_after, who } => {
                b.pr(day, close_after.map(|(d, m)| (day + d, m)), &name(who))
            }
            Item::Comment { day, who } => b.comment(day, &name(who)),
        };
    }
    // pin a span long enough for at least one window
    b.comment(-1.0, "pin").comment(36.0, "pin").build()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn random_small_logs_match_naive_oracle(
        items in proptest::collection::vec(item_strategy(), 1..24),
        window_days in 2..9i32,
        stride in 1..5i32,
    ) {
        let log = log_from_items(&items);
        prop_assume!(log.len() <= 50);
        let mut cfg = StabilityConfig::default();
        cfg.window_days = f64::from(window_days);
        cfg.stride_days = f64::from(stride);
        assert_log_matches_oracle(&log, &cfg);
    }
}
