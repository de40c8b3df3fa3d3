//! Composite Stability Index: per-window normalization of the state vector,
//! the weighted index itself, classification, and the analytical
//! diagnostics (boundedness, piecewise Lipschitz continuity, long-term
//! convergence).
//!
//! The commit component is normalized from the window's coefficient of
//! variation of daily commits, not from the raw commits/day value: the
//! commit target (0.25) is a CV target and raw frequency is not commensurate
//! with it. Inactive components contribute a neutral 1 and carry their flag
//! through to the output instead of having the weights renormalized, which
//! keeps index values comparable across repositories.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::metrics::{estimate_derivative, MetricSeries, MetricsError};
use crate::model::{Criterion, InactiveComponents, MetricSample, StabilityConfig, Window};
use crate::stability::StabilityVerdict;
use crate::time::Timestamp;

/// Map a raw metric onto [0, 1] around target `mu` with tolerance `sigma`:
/// `1 - |x - mu|/sigma` inside the band, 0 outside. Non-finite inputs (the
/// infinite-CV sentinel) fall outside every band.
pub fn normalize(x: f64, mu: f64, sigma: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    let d = libm::fabs(x - mu);
    if d <= sigma {
        1.0 - d / sigma
    } else {
        0.0
    }
}

/// Stable iff the index reaches the threshold (inclusive boundary).
pub fn classify(csi: f64, threshold: f64) -> bool {
    csi >= threshold
}

/// Normalized components and index for one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsiPoint {
    pub window: Window,
    pub phi_c: f64,
    pub phi_i: f64,
    pub phi_p: f64,
    pub phi_a: f64,
    pub csi: f64,
    pub stable: bool,
    /// Components that were flagged neutral rather than scored.
    pub inactive: InactiveComponents,
}

impl CsiPoint {
    pub fn phi(&self, k: Criterion) -> f64 {
        match k {
            Criterion::CommitPattern => self.phi_c,
            Criterion::IssueManagement => self.phi_i,
            Criterion::PrProcessing => self.phi_p,
            Criterion::Engagement => self.phi_a,
        }
    }
}

/// Normalize one sample and compute its index.
pub fn csi_at(sample: &MetricSample, config: &StabilityConfig) -> CsiPoint {
    let inactive = sample.inactive_components();
    let phi_c = normalize(sample.cv_c, config.mu_c, config.sigma_c);
    let phi_i = sample
        .i
        .map_or(1.0, |v| normalize(v, config.mu_i, config.sigma_i));
    let phi_p = sample
        .p
        .map_or(1.0, |v| normalize(v, config.mu_p, config.sigma_p));
    let phi_a = sample
        .a
        .map_or(1.0, |v| normalize(v, config.mu_a, config.sigma_a));
    let csi =
        config.w_c * phi_c + config.w_i * phi_i + config.w_p * phi_p + config.w_a * phi_a;
    CsiPoint {
        window: sample.window,
        phi_c,
        phi_i,
        phi_p,
        phi_a,
        csi,
        stable: classify(csi, config.csi_threshold),
        inactive,
    }
}

/// Per-window CSI values with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsiSeries {
    points: Vec<CsiPoint>,
    config: StabilityConfig,
}

impl CsiSeries {
    pub fn from_points(points: Vec<CsiPoint>, config: StabilityConfig) -> Self {
        CsiSeries { points, config }
    }

    pub fn points(&self) -> &[CsiPoint] {
        &self.points
    }

    pub fn config(&self) -> &StabilityConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.csi).collect()
    }
}

/// One CSI point per metric sample.
pub fn csi_series(series: &MetricSeries, config: &StabilityConfig) -> CsiSeries {
    CsiSeries {
        points: series.samples().iter().map(|s| csi_at(s, config)).collect(),
        config: config.clone(),
    }
}

/// Tail-convergence tolerances. The framework gives no numbers for these;
/// the defaults here are deliberate choices, exposed through configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    /// Trailing fraction of windows examined, in (0, 1].
    pub tail_fraction: f64,
    /// Max tail standard deviation for convergence.
    pub eps_std: f64,
    /// Max |least-squares slope| for convergence, per day.
    pub eps_slope: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams {
            tail_fraction: 0.25,
            eps_std: 0.02,
            eps_slope: 0.001,
        }
    }
}

/// Tail-convergence diagnostics over a CSI series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// True when the tail is flat: std within `eps_std` and trend within
    /// `eps_slope`.
    pub converged: bool,
    /// Tail mean; present iff converged.
    pub limit_estimate: Option<f64>,
    /// Population standard deviation of the tail values.
    pub tail_std: f64,
    /// Least-squares slope of the tail, per day.
    pub trend_slope: f64,
    /// Mean rate of change of commit frequency over the tail, per day^2 —
    /// the operative "dc/dt -> 0" check.
    pub dcdt_tail: f64,
    /// Number of windows in the tail.
    pub tail_windows: usize,
}

/// Examine the trailing `tail_fraction` of the series for convergence to a
/// constant. Requires at least 10 windows. `metrics` must be the series the
/// CSI was computed from (it supplies commit frequencies for the dc/dt
/// diagnostic).
pub fn convergence_report(
    csi: &CsiSeries,
    metrics: &MetricSeries,
    params: &ConvergenceParams,
) -> Result<ConvergenceReport, MetricsError> {
    let n = csi.len();
    if n < 10 {
        return Err(MetricsError::SeriesTooShort { len: n, min: 10 });
    }
    let tail_windows = ceil_frac(n, params.tail_fraction).max(2);
    let tail = &csi.points()[n - tail_windows..];

    let values: Vec<f64> = tail.iter().map(|p| p.csi).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / values.len() as f64;
    let tail_std = libm::sqrt(var);

    // Least-squares slope against window start offsets in days.
    let t0 = tail[0].window.start;
    let xs: Vec<f64> = tail.iter().map(|p| p.window.start.days_since(t0)).collect();
    let x_mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&values)
        .map(|(x, y)| (x - x_mean) * (y - mean))
        .sum();
    let trend_slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let deriv = estimate_derivative(
        &metrics.commit_frequencies(),
        metrics.config().stride_days,
    )?;
    let dtail = &deriv[deriv.len().saturating_sub(tail_windows)..];
    let dcdt_tail = dtail.iter().sum::<f64>() / dtail.len() as f64;

    let converged = tail_std <= params.eps_std && libm::fabs(trend_slope) <= params.eps_slope;
    Ok(ConvergenceReport {
        converged,
        limit_estimate: converged.then_some(mean),
        tail_std,
        trend_slope,
        dcdt_tail,
        tail_windows,
    })
}

fn ceil_frac(n: usize, fraction: f64) -> usize {
    libm::ceil(n as f64 * fraction) as usize
}

/// Why a Lipschitz check could not run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LipschitzError {
    /// The perturbation touches or crosses `|x - mu| = sigma`; continuity is
    /// only piecewise, so the bound does not apply across the boundary.
    #[error("perturbation crosses a normalization regime boundary")]
    RegimeBoundary,
    /// The chosen component is inactive in this sample; it has no raw value
    /// to perturb.
    #[error("component is inactive in this window")]
    InactiveComponent,
}

/// Check the piecewise-Lipschitz property at one sample: perturbing raw
/// component `k` by `delta` may move the index by at most
/// `w_k * |delta| / sigma_k` (plus float slack). Both the original and the
/// perturbed coordinate must lie strictly inside the component's
/// normalization regime.
pub fn lipschitz_check(
    sample: &MetricSample,
    config: &StabilityConfig,
    component: Criterion,
    delta: f64,
) -> Result<bool, LipschitzError> {
    let raw = match component {
        Criterion::CommitPattern => Some(sample.cv_c),
        Criterion::IssueManagement => sample.i,
        Criterion::PrProcessing => sample.p,
        Criterion::Engagement => sample.a,
    }
    .ok_or(LipschitzError::InactiveComponent)?;
    let (mu, sigma) = config.target(component);
    let perturbed = raw + delta;
    if !raw.is_finite() || libm::fabs(raw - mu) >= sigma || libm::fabs(perturbed - mu) >= sigma
    {
        return Err(LipschitzError::RegimeBoundary);
    }

    let mut moved = sample.clone();
    match component {
        Criterion::CommitPattern => moved.cv_c = perturbed,
        Criterion::IssueManagement => moved.i = Some(perturbed),
        Criterion::PrProcessing => moved.p = Some(perturbed),
        Criterion::Engagement => moved.a = Some(perturbed),
    }
    let before = csi_at(sample, config).csi;
    let after = csi_at(&moved, config).csi;
    let bound = config.weight(component) * libm::fabs(delta) / sigma + 1e-12;
    Ok(libm::fabs(after - before) <= bound)
}

/// A deficiency surfaced by [`diagnose`], naming the component, the windows
/// affected, and an intervention category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub criterion: Criterion,
    /// Stable category tag for tooling.
    pub category: String,
    /// Human-readable explanation with a suggested intervention.
    pub message: String,
    /// Starts of the affected windows.
    pub window_starts: Vec<Timestamp>,
}

fn intervention(criterion: Criterion) -> (&'static str, &'static str) {
    match criterion {
        Criterion::CommitPattern => (
            "development_cycle",
            "erratic commit pattern signals development cycle issues; steadier sprint planning can even out the cadence",
        ),
        Criterion::IssueManagement => (
            "issue_triage",
            "issue resolution is lagging behind intake; revisit triage priorities and closing policy",
        ),
        Criterion::PrProcessing => (
            "review_process",
            "pull request processing is degrading, which points to review process inefficiencies; redistributing review responsibilities usually helps",
        ),
        Criterion::Engagement => (
            "community_participation",
            "community engagement is thinning; invest in contributor onboarding and discussion follow-up",
        ),
    }
}

/// Cross-reference the verdict with the CSI series and emit one finding per
/// deficient component: any failed criterion, plus any component that is the
/// weakest link (lowest phi) of a sub-threshold window.
pub fn diagnose(csi: &CsiSeries, verdict: &StabilityVerdict) -> Vec<Finding> {
    let mut findings = Vec::new();
    for criterion in Criterion::ALL {
        let result = verdict.result(criterion);
        let mut windows: Vec<Timestamp> = if result.passed {
            Vec::new()
        } else {
            result.violations.iter().map(|v| v.window.start).collect()
        };
        for point in csi.points() {
            if point.stable {
                continue;
            }
            let lowest = Criterion::ALL
                .iter()
                .map(|&k| point.phi(k))
                .fold(f64::INFINITY, f64::min);
            if point.phi(criterion) <= lowest && !windows.contains(&point.window.start) {
                windows.push(point.window.start);
            }
        }
        if result.passed && windows.is_empty() {
            continue;
        }
        windows.sort_unstable();
        windows.dedup();
        let (category, message) = intervention(criterion);
        findings.push(Finding {
            criterion,
            category: category.into(),
            message: message.into(),
            window_starts: windows,
        });
    }
    findings
}
