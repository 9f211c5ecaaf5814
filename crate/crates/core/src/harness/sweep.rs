//! Threshold-time sweeps over system size.

use serde::{Deserialize, Serialize};

use crate::automaton::{run_ensemble, tau_from_result, EvolutionConfig, TauMetric};
use crate::chain::{ChargeProfile, SpinState};
use crate::ensemble::{geometric_schedule, EnsembleResult};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Which spreading process a sweep times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// One fracton at the centre; `τ` is when the width reaches `L/4`.
    Single,
    /// Two fractons `Δ` apart; `τ` is when their separation halves.
    Double,
}

/// Parameters shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    /// `Δ/L` for double sweeps; ignored for single sweeps.
    pub ratio: f64,
    /// Realizations in each independent seed group.
    pub realizations_per_group: u64,
    /// Seed groups; `τ` errors come from their spread.
    pub groups: usize,
    /// Step budget per point is `budget · scale²`.
    pub budget: f64,
    /// Growth factor of the geometric snapshot schedule.
    pub schedule_ratio: f64,
    pub gate_width: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            ratio: 0.5,
            realizations_per_group: 64,
            groups: 8,
            budget: 2.0,
            schedule_ratio: 1.03,
            gate_width: 3,
        }
    }
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPoint {
    /// `L` for single sweeps, `Δ` for double sweeps.
    pub scale: usize,
    pub length: usize,
    pub sites: Vec<usize>,
    pub threshold: f64,
    /// From the profile pooled over all groups.
    pub tau: Option<f64>,
    /// Standard error over groups.
    pub tau_stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Initial sites, chain length, metric, and threshold for one scale.
pub fn sweep_geometry(
    kind: SweepKind,
    scale: usize,
    ratio: f64,
) -> Result<(usize, Vec<usize>, TauMetric, f64)> {
    match kind {
        SweepKind::Single => {
            if scale < 5 {
                return Err(Error::invalid(format!(
                    "single-fracton sweep needs L ≥ 5, got {scale}"
                )));
            }
            let p = scale.div_ceil(2);
            let x0 = (scale as f64 + 1.0) / 2.0;
            Ok((scale, vec![p], TauMetric::Width { x0 }, scale as f64 / 4.0))
        }
        SweepKind::Double => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::invalid(format!(
                    "Δ/L must lie in (0, 1), got {ratio}"
                )));
            }
            if scale < 3 {
                return Err(Error::invalid(format!(
                    "two-fracton sweep needs Δ ≥ 3, got {scale}"
                )));
            }
            let length = (scale as f64 / ratio).round() as usize;
            if length < scale + 3 {
                return Err(Error::invalid(format!(
                    "Δ = {scale} leaves no room for boundaries at Δ/L = {ratio}"
                )));
            }
            let i1 = (length + 1 - scale) / 2;
            Ok((
                length,
                vec![i1, i1 + scale],
                TauMetric::Separation,
                scale as f64 / 2.0,
            ))
        }
    }
}

fn pool(results: &[EnsembleResult]) -> Vec<(u64, ChargeProfile)> {
    let first = &results[0];
    first
        .profiles
        .keys()
        .map(|&t| {
            let n = results.len() as f64;
            let len = first.length;
            let mut mean = vec![0.0; len];
            for r in results {
                for (m, v) in mean.iter_mut().zip(&r.profiles[&t].mean_charge) {
                    *m += v / n;
                }
            }
            (t, ChargeProfile::new(mean))
        })
        .collect()
}

/// Measure `τ` at one scale.
pub fn tau_point(
    kind: SweepKind,
    scale: usize,
    settings: &SweepSettings,
    seed: u64,
) -> Result<TauPoint> {
    let (length, sites, metric, threshold) = sweep_geometry(kind, scale, settings.ratio)?;
    if settings.groups < 2 {
        return Err(Error::invalid("a sweep needs at least two seed groups"));
    }
    let n_steps = (settings.budget * (scale * scale) as f64).ceil() as u64;
    let times = geometric_schedule(n_steps, settings.schedule_ratio);
    let state = SpinState::with_charges(length, &sites)?;
    let mut results = Vec::with_capacity(settings.groups);
    for g in 0..settings.groups {
        let cfg = EvolutionConfig::new(state.clone(), settings.gate_width)
            .steps(n_steps)
            .record(times.clone())
            .realizations(settings.realizations_per_group)
            .seed(derive_seed(seed, ((scale as u64) << 16) | g as u64));
        results.push(run_ensemble(&cfg)?);
    }
    let mut point = TauPoint {
        scale,
        length,
        sites,
        threshold,
        tau: None,
        tau_stderr: None,
        error: None,
    };
    let series: Result<Vec<(u64, f64)>> = pool(&results)
        .iter()
        .map(|(t, p)| metric.evaluate(p).map(|v| (*t, v)))
        .collect();
    match series.and_then(|s| {
        crate::automaton::crossing_time(&s, threshold, matches!(kind, SweepKind::Single))
    }) {
        Ok(tau) => point.tau = Some(tau),
        Err(e) => {
            point.error = Some(e.to_string());
            return Ok(point);
        }
    }
    let group_taus: Result<Vec<f64>> = results
        .iter()
        .map(|r| tau_from_result(r, metric, threshold))
        .collect();
    match group_taus {
        Ok(taus) => {
            let g = taus.len() as f64;
            let mean = taus.iter().sum::<f64>() / g;
            let var = taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (g - 1.0);
            point.tau_stderr = Some((var / g).sqrt());
        }
        Err(e) => point.error = Some(format!("group estimate: {e}")),
    }
    Ok(point)
}

/// Measure `τ` at every scale. A scale that never crosses is reported in its
/// point's `error` field; invalid scales fail the whole sweep.
pub fn tau_sweep(
    kind: SweepKind,
    scales: &[usize],
    settings: &SweepSettings,
    seed: u64,
) -> Result<Vec<TauPoint>> {
    for &s in scales {
        sweep_geometry(kind, s, settings.ratio)?;
    }
    scales
        .iter()
        .map(|&s| tau_point(kind, s, settings, seed))
        .collect()
}

/// `(scale, τ)` pairs of the points that crossed.
pub fn fit_points(points: &[TauPoint]) -> Vec<(f64, f64)> {
    points
        .iter()
        .filter_map(|p| p.tau.map(|t| (p.scale as f64, t)))
        .collect()
}
