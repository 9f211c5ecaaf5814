//! Monte Carlo evolution under random automaton circuits.
//!
//! One time step applies `round(L/n)` gates of width `n`, each at an
//! independent uniformly random window position, sequentially. Windows may
//! overlap. Ensemble profiles are reduced exactly (see [`crate::ensemble`]),
//! so a run is bit-reproducible from its seed for any number of threads.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ChargeProfile, SpinState};
use crate::ensemble::{self, Dynamics, Engine, EnsembleResult, Schedule};
use crate::error::{Error, Result};
use crate::gates::GateClassTable;
use crate::rng::StreamRng;

/// Everything needed to reproduce one automaton ensemble.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub initial_state: SpinState,
    pub gate_width: usize,
    pub n_steps: u64,
    pub n_realizations: u64,
    pub record_times: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_from: Option<u64>,
    pub master_seed: u64,
}

impl EvolutionConfig {
    /// A single-realization, zero-step run recording only `t = 0`.
    pub fn new(initial_state: SpinState, gate_width: usize) -> Self {
        EvolutionConfig {
            initial_state,
            gate_width,
            n_steps: 0,
            n_realizations: 1,
            record_times: vec![0],
            average_from: None,
            master_seed: 0,
        }
    }

    /// Set `n_steps` and record only the start and the end.
    pub fn steps(mut self, n_steps: u64) -> Self {
        self.n_steps = n_steps;
        self.record_times = if n_steps == 0 {
            vec![0]
        } else {
            vec![0, n_steps]
        };
        self
    }

    pub fn realizations(mut self, n: u64) -> Self {
        self.n_realizations = n;
        self
    }

    pub fn record(mut self, times: Vec<u64>) -> Self {
        self.record_times = times;
        self
    }

    pub fn average_from(mut self, t: u64) -> Self {
        self.average_from = Some(t);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn length(&self) -> usize {
        self.initial_state.len()
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            n_steps: self.n_steps,
            n_realizations: self.n_realizations,
            record_times: self.record_times.clone(),
            average_from: self.average_from,
            master_seed: self.master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.gate_width) {
            return Err(Error::invalid(format!(
                "gate width must be 3 or 4, got {}",
                self.gate_width
            )));
        }
        if self.length() < self.gate_width.max(3) {
            return Err(Error::invalid(format!(
                "chain of length {} is shorter than the {}-site gate",
                self.length(),
                self.gate_width
            )));
        }
        self.schedule().validate()
    }
}

/// `round(L/n)` with halves rounded up, at least one.
pub fn gates_per_step(length: usize, width: usize) -> usize {
    ((2 * length + width) / (2 * width)).max(1)
}

/// Apply one time step of random gates to a raw charge slice.
#[inline]
pub(crate) fn step_in_place<R: Rng + ?Sized>(
    sites: &mut [i8],
    table: &GateClassTable,
    gates: usize,
    rng: &mut R,
) {
    let last_offset = sites.len() - table.width();
    for _ in 0..gates {
        let offset = rng.random_range(0..=last_offset);
        table.apply_at(sites, offset, rng);
    }
}

/// Evolve `state` by one time step of `round(L/n)` random gates.
pub fn evolve_one_step<R: Rng + ?Sized>(
    state: &SpinState,
    table: &GateClassTable,
    rng: &mut R,
) -> Result<SpinState> {
    if state.len() < table.width() {
        return Err(Error::invalid(format!(
            "chain of length {} is shorter than the {}-site gate",
            state.len(),
            table.width()
        )));
    }
    let mut next = state.clone();
    step_in_place(
        next.sites_mut(),
        table,
        gates_per_step(state.len(), table.width()),
        rng,
    );
    Ok(next)
}

struct SpinDynamics {
    table: GateClassTable,
    initial: SpinState,
    gates: usize,
}

impl Dynamics for SpinDynamics {
    type State = Vec<i8>;

    fn length(&self) -> usize {
        self.initial.len()
    }

    fn initial_state(&self) -> Vec<i8> {
        self.initial.sites().to_vec()
    }

    fn advance(&self, state: &mut Vec<i8>, rng: &mut StreamRng) {
        step_in_place(state, &self.table, self.gates, rng);
    }

    fn charges(&self, state: &Vec<i8>, out: &mut [i8]) {
        out.copy_from_slice(state);
    }
}

/// Run the ensemble described by `config`.
pub fn run_ensemble(config: &EvolutionConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let dynamics = SpinDynamics {
        table: GateClassTable::build(config.gate_width)?,
        initial: config.initial_state.clone(),
        gates: gates_per_step(config.length(), config.gate_width),
    };
    let schedule = config.schedule();
    let (profiles, time_average) = ensemble::sample(&dynamics, &schedule)?;
    let mut settings = BTreeMap::new();
    settings.insert("gate_width".into(), config.gate_width.into());
    settings.insert("gates_per_step".into(), dynamics.gates.into());
    Ok(EnsembleResult {
        engine: Engine::Automaton,
        length: config.length(),
        initial_state: config.initial_state.clone(),
        settings,
        schedule,
        profiles,
        time_average,
    })
}

/// `sqrt(Σ_i m_i (x_i − x0)²)`, the spread of a single fracton's charge.
///
/// A negative radicand within three standard errors of zero is noise and
/// clamps to zero; anything more negative is an error.
pub fn width_r(profile: &ChargeProfile, x0: f64) -> Result<f64> {
    let mut radicand = 0.0;
    let mut variance = 0.0;
    for i in 1..=profile.len() {
        let d2 = (i as f64 - x0).powi(2);
        radicand += profile.at(i) * d2;
        variance += (profile.stderr_at(i) * d2).powi(2);
    }
    if radicand >= 0.0 {
        return Ok(radicand.sqrt());
    }
    let tolerance = 3.0 * variance.sqrt();
    if -radicand <= tolerance {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand {
            value: radicand,
            tolerance,
        })
    }
}

/// Right-half dipole minus left-half dipole, with the boundary sites 1 and
/// `L` (and the middle site of an odd chain) left out.
pub fn separation_r_prime(profile: &ChargeProfile) -> f64 {
    let l = profile.len();
    let mut r = 0.0;
    for i in 2..l {
        let x = i as f64;
        if 2 * i > l {
            r += profile.at(i) * x;
        } else if 2 * i < l {
            r -= profile.at(i) * x;
        }
    }
    r
}

/// The observable whose threshold crossing defines `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "metric")]
pub enum TauMetric {
    /// [`width_r`] about `x0`; crosses upward.
    Width { x0: f64 },
    /// [`separation_r_prime`]; crosses downward.
    Separation,
}

impl TauMetric {
    pub fn evaluate(&self, profile: &ChargeProfile) -> Result<f64> {
        match *self {
            TauMetric::Width { x0 } => width_r(profile, x0),
            TauMetric::Separation => Ok(separation_r_prime(profile)),
        }
    }

    fn rising(&self) -> bool {
        matches!(self, TauMetric::Width { .. })
    }
}

/// First time a sampled series reaches `threshold`, linearly interpolated
/// between the bracketing samples. `rising` selects the crossing direction.
pub fn crossing_time(series: &[(u64, f64)], threshold: f64, rising: bool) -> Result<f64> {
    let past = |v: f64| {
        if rising {
            v >= threshold
        } else {
            v <= threshold
        }
    };
    let k = series
        .iter()
        .position(|&(_, v)| past(v))
        .ok_or(Error::NotCrossed { threshold })?;
    if k == 0 {
        return Ok(series[0].0 as f64);
    }
    let (t0, v0) = series[k - 1];
    let (t1, v1) = series[k];
    let frac = (threshold - v0) / (v1 - v0);
    Ok(t0 as f64 + frac * (t1 - t0) as f64)
}

/// Run `config` and return the interpolated time at which `metric` crosses
/// `threshold`.
pub fn measure_tau(config: &EvolutionConfig, metric: TauMetric, threshold: f64) -> Result<f64> {
    let result = run_ensemble(config)?;
    tau_from_result(&result, metric, threshold)
}

pub(crate) fn tau_from_result(
    result: &EnsembleResult,
    metric: TauMetric,
    threshold: f64,
) -> Result<f64> {
    let series = result
        .profiles
        .iter()
        .map(|(&t, p)| metric.evaluate(p).map(|v| (t, v)))
        .collect::<Result<Vec<_>>>()?;
    crossing_time(&series, threshold, metric.rising())
}
