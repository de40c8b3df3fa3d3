//! Synthetic repository event logs from a seeded stochastic model.
//!
//! Daily event counts are Poisson at the configured rates; issue and PR
//! handling delays are exponential. Disturbances perturb the rates and relax
//! exponentially (bug influxes, feature-request spikes) or permanently remove
//! contributors (departures, which are not self-healing). Identical seed and
//! config produce an identical log on every platform; see [`crate::rng`] for
//! the pinned generator.
//!
//! Population model: `contributors` developers (they commit, open and merge
//! PRs, close issues, and comment) plus a casual reporter pool fixed at twice
//! the contributor count (reporters only open issues). Reporters therefore
//! count into the total-users denominator of the engagement ratio but never
//! into the active set.
//!
//! Timeline starts at 2024-01-01T00:00:00Z; each simulated day is one whole
//! UTC day, with event instants drawn uniformly within the day at second
//! resolution.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{validate_log, Event, EventKind, RepositoryLog};
use crate::rng::Rng;
use crate::time::{Timestamp, DAY_SECONDS};

/// First instant of the simulated timeline.
const EPOCH: i64 = 1_704_067_200; // 2024-01-01T00:00:00Z

/// The disturbance taxonomy: sudden bug-report influxes, key-contributor
/// departures, and feature-request spikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    BugInflux,
    ContributorDeparture,
    FeatureRequestSpike,
}

/// One injected disturbance.
///
/// `magnitude` is kind-specific: an issue count for influxes and spikes, a
/// fraction of contributors removed for departures. Influx/spike semantics:
/// a one-day mass of `magnitude` issues whose handling takes
/// `recovery_days` on average (the un-triaged pile), plus a temporary
/// opening-rate elevation integrating to roughly another `magnitude` that
/// decays as `exp(-t / recovery_days)`. Departures are permanent;
/// `recovery_days` is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    pub at_day: u32,
    pub magnitude: f64,
    pub recovery_days: f64,
}

/// Commit-rate gating for burst/dormancy regimes: `on_weeks` weeks at the
/// configured rate followed by `off_weeks` weeks of silence, repeating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurstCycle {
    pub on_weeks: u32,
    pub off_weeks: u32,
}

impl BurstCycle {
    fn is_active(&self, day: u32) -> bool {
        let cycle = self.on_weeks + self.off_weeks;
        if cycle == 0 {
            return true;
        }
        (day / 7) % cycle < self.on_weeks
    }
}

/// Generative-model parameters for one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub days: u32,
    pub seed: u64,
    pub contributors: u32,
    /// Commits per contributor per day.
    pub commit_rate: f64,
    /// Issues opened per day.
    pub issue_open_rate: f64,
    /// Mean issue resolution delay, days (exponential).
    pub issue_close_delay: f64,
    /// PRs opened per day.
    pub pr_open_rate: f64,
    /// Mean PR handling delay, days (exponential).
    pub pr_merge_delay: f64,
    /// Probability a PR is merged rather than closed.
    pub pr_merge_prob: f64,
    /// Comments per open item per day.
    pub comment_rate: f64,
    /// Optional commit burst/dormancy gating.
    pub commit_burst: Option<BurstCycle>,
    pub disturbances: Vec<DisturbanceSpec>,
}

/// Invalid [`SimulationConfig`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulateError {
    #[error("days must be at least 1")]
    NoDays,
    #[error("{name} must be non-negative (got {value})")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("pr_merge_prob must lie in [0, 1] (got {value})")]
    ProbabilityRange { value: f64 },
    #[error("disturbance at day {at_day} is outside the {days}-day run")]
    DisturbanceOutOfRange { at_day: u32, days: u32 },
    #[error("disturbance magnitude must be positive (got {value})")]
    MagnitudeRange { value: f64 },
    #[error("departure fraction must lie in (0, 1] (got {value})")]
    DepartureFraction { value: f64 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.days == 0 {
            return Err(SimulateError::NoDays);
        }
        for (name, value) in [
            ("commit_rate", self.commit_rate),
            ("issue_open_rate", self.issue_open_rate),
            ("issue_close_delay", self.issue_close_delay),
            ("pr_open_rate", self.pr_open_rate),
            ("pr_merge_delay", self.pr_merge_delay),
            ("comment_rate", self.comment_rate),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(SimulateError::NegativeRate { name, value });
            }
        }
        if !(0.0..=1.0).contains(&self.pr_merge_prob) {
            return Err(SimulateError::ProbabilityRange {
                value: self.pr_merge_prob,
            });
        }
        for d in &self.disturbances {
            if d.at_day >= self.days {
                return Err(SimulateError::DisturbanceOutOfRange {
                    at_day: d.at_day,
                    days: self.days,
                });
            }
            if !(d.magnitude > 0.0) {
                return Err(SimulateError::MagnitudeRange { value: d.magnitude });
            }
            if d.kind == DisturbanceKind::ContributorDeparture && d.magnitude > 1.0 {
                return Err(SimulateError::DepartureFraction { value: d.magnitude });
            }
        }
        Ok(())
    }
}

/// Named scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Busy, steady, commits-only equilibrium: passes all criteria and the
    /// CSI converges above the classification threshold.
    Stable,
    /// Two weeks of heavy committing, one week of dormancy: the commit CV
    /// breaches its threshold while everything else stays healthy.
    Bursty,
    /// Steady triage overwhelmed by a one-day pile of 50 bug reports at day
    /// 50 (14-day recovery constant).
    BugInflux,
    /// 60% of contributors leave at day 100; participation collapses and
    /// does not recover.
    Departure,
    /// A feature-request wave: 80 issues at day 60, 10-day recovery.
    FeatureSpike,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Stable,
        Scenario::Bursty,
        Scenario::BugInflux,
        Scenario::Departure,
        Scenario::FeatureSpike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Stable => "stable",
            Scenario::Bursty => "bursty",
            Scenario::BugInflux => "bug-influx",
            Scenario::Departure => "departure",
            Scenario::FeatureSpike => "feature-spike",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, SimulateError> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| SimulateError::UnknownScenario(name.into()))
    }
}

/// The preset configuration for a named scenario (365 days, seed 42; both
/// are meant to be overridden freely).
pub fn scenario(which: Scenario) -> SimulationConfig {
    let base = SimulationConfig {
        days: 365,
        seed: 42,
        contributors: 0,
        commit_rate: 0.0,
        issue_open_rate: 0.0,
        issue_close_delay: 0.0,
        pr_open_rate: 0.0,
        pr_merge_delay: 0.0,
        pr_merge_prob: 0.0,
        comment_rate: 0.0,
        commit_burst: None,
        disturbances: Vec::new(),
    };
    match which {
        // ~480 commits/day keeps the windowed CV small and tight, so the
        // index converges; issue/PR/engagement components stay inactive
        // (flagged neutral) rather than injecting sampling noise.
        Scenario::Stable => SimulationConfig {
            contributors: 24,
            commit_rate: 20.0,
            ..base
        },
        // A 21-day cycle makes 14-day windows sweep through compositions
        // from half-dormant to fully active, so the CV (and the index)
        // oscillates with window alignment instead of freezing. Issues are
        // handled so fast (i ~ 0.77) that phi_i pins at 0 while the
        // resolution-rate criterion keeps a wide margin.
        Scenario::Bursty => SimulationConfig {
            contributors: 10,
            commit_rate: 6.0,
            issue_open_rate: 30.0,
            issue_close_delay: 2.0,
            comment_rate: 0.171,
            commit_burst: Some(BurstCycle {
                on_weeks: 2,
                off_weeks: 1,
            }),
            ..base
        },
        // Issue equilibrium parked on the ascending phi branch (i ~ 0.35)
        // so the backlog shock pushes phi_i monotonically down.
        Scenario::BugInflux => SimulationConfig {
            contributors: 20,
            commit_rate: 5.0,
            issue_open_rate: 12.0,
            issue_close_delay: 9.66,
            pr_open_rate: 10.0,
            pr_merge_delay: 0.5,
            pr_merge_prob: 0.9,
            disturbances: alloc::vec![DisturbanceSpec {
                kind: DisturbanceKind::BugInflux,
                at_day: 50,
                magnitude: 50.0,
                recovery_days: 14.0,
            }],
            ..base
        },
        // Reporters outnumber developers 2:1; once 60% of developers leave,
        // active/total drops to ~0.13, under the participation floor.
        Scenario::Departure => SimulationConfig {
            contributors: 25,
            commit_rate: 2.0,
            issue_open_rate: 6.0,
            issue_close_delay: 3.0,
            comment_rate: 0.5,
            disturbances: alloc::vec![DisturbanceSpec {
                kind: DisturbanceKind::ContributorDeparture,
                at_day: 100,
                magnitude: 0.6,
                recovery_days: 0.0,
            }],
            ..base
        },
        Scenario::FeatureSpike => SimulationConfig {
            contributors: 20,
            commit_rate: 5.0,
            issue_open_rate: 12.0,
            issue_close_delay: 9.66,
            pr_open_rate: 10.0,
            pr_merge_delay: 0.5,
            pr_merge_prob: 0.9,
            disturbances: alloc::vec![DisturbanceSpec {
                kind: DisturbanceKind::FeatureRequestSpike,
                at_day: 60,
                magnitude: 80.0,
                recovery_days: 10.0,
            }],
            ..base
        },
    }
}

struct OpenItem {
    id: String,
    /// Day index of the close event, `u32::MAX` when it never closes.
    close_day: u32,
}

/// Generate one event log. The per-day draw order (commit count, commits,
/// issue count, issues, PRs, comments) is fixed and part of the
/// reproducibility contract.
pub fn simulate(config: &SimulationConfig) -> RepositoryLog {
    config
        .validate()
        .expect("simulate requires a validated SimulationConfig");
    let mut rng = Rng::seed_from(config.seed);
    let horizon = EPOCH + i64::from(config.days) * DAY_SECONDS;
    let dev_count = config.contributors as usize;
    let reporter_count = dev_count * 2;
    let mut active_devs = dev_count;

    let mut events: Vec<Event> = Vec::new();
    let mut open_items: Vec<OpenItem> = Vec::new();
    let (mut commit_seq, mut issue_seq, mut pr_seq, mut comment_seq) = (0u64, 0u64, 0u64, 0u64);

    let dev = |idx: u64| format!("dev{:02}", idx + 1);
    let reporter = |idx: u64| format!("user{:02}", idx + 1);

    for day in 0..config.days {
        let day_start = EPOCH + i64::from(day) * DAY_SECONDS;
        open_items.retain(|item| item.close_day >= day);
        // Items open when the day begins; everything appended below opened
        // today and is not yet visible to commenters.
        let backlog = open_items.len();

        // Disturbance bookkeeping for this day.
        let mut burst: Option<(u64, f64)> = None; // (mass, handling delay)
        let mut elevation = 0.0;
        for d in &config.disturbances {
            match d.kind {
                DisturbanceKind::ContributorDeparture => {
                    if day == d.at_day {
                        let leaving =
                            libm::round(d.magnitude * dev_count as f64) as usize;
                        active_devs = active_devs.saturating_sub(leaving).max(0);
                    }
                }
                DisturbanceKind::BugInflux | DisturbanceKind::FeatureRequestSpike => {
                    if day == d.at_day {
                        burst = Some((libm::round(d.magnitude) as u64, d.recovery_days));
                    }
                    if day >= d.at_day && d.recovery_days > 0.0 {
                        let age = f64::from(day - d.at_day);
                        elevation +=
                            d.magnitude / d.recovery_days * libm::exp(-age / d.recovery_days);
                    }
                }
            }
        }

        // Commits.
        let gate_open = config
            .commit_burst
            .map_or(true, |cycle| cycle.is_active(day));
        let commit_lambda = if gate_open && active_devs > 0 {
            config.commit_rate * active_devs as f64
        } else {
            0.0
        };
        for _ in 0..rng.next_poisson(commit_lambda) {
            let ts = Timestamp::from_unix(day_start + rng.next_below(DAY_SECONDS as u64) as i64);
            let actor = dev(rng.next_below(active_devs as u64));
            commit_seq += 1;
            events.push(Event::new(EventKind::Commit, &format!("c{commit_seq}"), ts, &actor));
        }

        // Issues: the base rate plus decaying elevation, then any one-day
        // burst mass (which digests on the disturbance's recovery scale).
        let normal = rng.next_poisson(config.issue_open_rate + elevation);
        let (mass, mass_delay) = burst.unwrap_or((0, 0.0));
        for n in 0..normal + mass {
            let ts = Timestamp::from_unix(day_start + rng.next_below(DAY_SECONDS as u64) as i64);
            let opener = if reporter_count > 0 {
                reporter(rng.next_below(reporter_count as u64))
            } else {
                dev(0)
            };
            issue_seq += 1;
            let id = format!("i{issue_seq}");
            events.push(Event::new(EventKind::IssueOpened, &id, ts, &opener));
            let mean = if n < normal { config.issue_close_delay } else { mass_delay };
            let delay_secs =
                libm::round(rng.next_exponential(mean) * DAY_SECONDS as f64) as i64;
            let close_unix = ts.unix() + delay_secs;
            let close_day = if close_unix < horizon && active_devs > 0 {
                let closer = dev(rng.next_below(active_devs as u64));
                events.push(
                    Event::new(
                        EventKind::IssueClosed,
                        &id,
                        Timestamp::from_unix(close_unix),
                        &closer,
                    )
                    .with_target(&id),
                );
                ((close_unix - EPOCH) / DAY_SECONDS) as u32
            } else {
                u32::MAX
            };
            open_items.push(OpenItem { id, close_day });
        }

        // Pull requests.
        for _ in 0..rng.next_poisson(if active_devs > 0 { config.pr_open_rate } else { 0.0 }) {
            let ts = Timestamp::from_unix(day_start + rng.next_below(DAY_SECONDS as u64) as i64);
            let opener = dev(rng.next_below(active_devs as u64));
            pr_seq += 1;
            let id = format!("pr{pr_seq}");
            events.push(Event::new(EventKind::PrOpened, &id, ts, &opener));
            let delay_secs =
                libm::round(rng.next_exponential(config.pr_merge_delay) * DAY_SECONDS as f64)
                    as i64;
            let merged = rng.next_f64() < config.pr_merge_prob;
            let close_unix = ts.unix() + delay_secs;
            let close_day = if close_unix < horizon {
                let kind = if merged { EventKind::PrMerged } else { EventKind::PrClosed };
                let who = dev(rng.next_below(active_devs as u64));
                events.push(
                    Event::new(kind, &id, Timestamp::from_unix(close_unix), &who)
                        .with_target(&id),
                );
                ((close_unix - EPOCH) / DAY_SECONDS) as u32
            } else {
                u32::MAX
            };
            open_items.push(OpenItem { id, close_day });
        }

        // Comments target items that were already open when the day began.
        if config.comment_rate > 0.0 && backlog > 0 && active_devs > 0 {
            for _ in 0..rng.next_poisson(config.comment_rate * backlog as f64) {
                let ts =
                    Timestamp::from_unix(day_start + rng.next_below(DAY_SECONDS as u64) as i64);
                let who = dev(rng.next_below(active_devs as u64));
                let target = &open_items[rng.next_below(backlog as u64) as usize];
                comment_seq += 1;
                events.push(
                    Event::new(EventKind::Comment, &format!("m{comment_seq}"), ts, &who)
                        .with_target(&target.id),
                );
            }
        }
    }

    validate_log(events).expect("generated events always satisfy causality")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_identical_logs() {
        let cfg = scenario(Scenario::BugInflux);
        let a = simulate(&cfg);
        let b = simulate(&cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_seeds_distinct_logs() {
        let mut cfg = scenario(Scenario::Stable);
        cfg.days = 30;
        let mut logs = Vec::new();
        for seed in 0..10 {
            cfg.seed = seed;
            logs.push(simulate(&cfg));
        }
        for i in 0..logs.len() {
            for j in i + 1..logs.len() {
                assert_ne!(logs[i], logs[j], "seeds {i} and {j} collided");
            }
        }
    }

    #[test]
    fn burst_day_floods_issue_openings() {
        let cfg = scenario(Scenario::BugInflux);
        let log = simulate(&cfg);
        let day_count = |d: i64| {
            log.events()
                .iter()
                .filter(|e| {
                    e.kind == EventKind::IssueOpened
                        && (e.ts.unix() - EPOCH) / DAY_SECONDS == d
                })
                .count() as f64
        };
        let baseline: f64 = (10..40).map(day_count).sum::<f64>() / 30.0;
        assert!(
            day_count(50) - baseline >= 40.0,
            "burst day {} vs baseline {}",
            day_count(50),
            baseline
        );
    }

    #[test]
    fn departure_halts_most_committing() {
        let cfg = scenario(Scenario::Departure);
        let log = simulate(&cfg);
        let commits_in = |lo: i64, hi: i64| {
            log.events()
                .iter()
                .filter(|e| {
                    e.kind == EventKind::Commit
                        && (e.ts.unix() - EPOCH) / DAY_SECONDS >= lo
                        && (e.ts.unix() - EPOCH) / DAY_SECONDS < hi
                })
                .count() as f64
        };
        let before = commits_in(60, 100) / 40.0;
        let after = commits_in(110, 150) / 40.0;
        assert!(after < 0.55 * before, "before {before}/day after {after}/day");
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_name(s.name()).unwrap(), s);
        }
        assert!(matches!(
            Scenario::from_name("nonsense"),
            Err(SimulateError::UnknownScenario(_))
        ));
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let mut cfg = scenario(Scenario::Stable);
        cfg.days = 0;
        assert_eq!(cfg.validate(), Err(SimulateError::NoDays));

        let mut cfg = scenario(Scenario::Stable);
        cfg.commit_rate = -1.0;
        assert!(matches!(cfg.validate(), Err(SimulateError::NegativeRate { .. })));

        let mut cfg = scenario(Scenario::BugInflux);
        cfg.disturbances[0].at_day = 400;
        assert!(matches!(
            cfg.validate(),
            Err(SimulateError::DisturbanceOutOfRange { .. })
        ));

        let mut cfg = scenario(Scenario::Departure);
        cfg.disturbances[0].magnitude = 1.5;
        assert!(matches!(
            cfg.validate(),
            Err(SimulateError::DepartureFraction { .. })
        ));
    }
}
