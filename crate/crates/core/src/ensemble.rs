//! Ensemble averaging over independent realizations.
//!
//! Both engines (the spin automaton and the block simulator) plug into the
//! same runner through [`Dynamics`]. Every accumulated quantity is an integer
//! sum of site charges, so the reduction is exact and independent of the
//! order in which worker threads finish.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChargeProfile, SpinState};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};

/// A stochastic evolution rule that can be sampled realization by realization.
pub trait Dynamics: Sync {
    type State: Send;

    fn length(&self) -> usize;

    fn initial_state(&self) -> Self::State;

    /// Advance by one time step.
    fn advance(&self, state: &mut Self::State, rng: &mut StreamRng);

    /// Write the site charges of `state` into `out` (length `L`).
    fn charges(&self, state: &Self::State, out: &mut [i8]);
}

/// Which engine produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Automaton,
    Blocks,
}

/// Time axis and sampling of an ensemble run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_steps: u64,
    pub n_realizations: u64,
    /// Sorted, distinct step indices in `0..=n_steps` to snapshot.
    pub record_times: Vec<u64>,
    /// If set, also report each realization's profile averaged over all
    /// recorded times `≥ average_from`, then averaged over realizations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_from: Option<u64>,
    pub master_seed: u64,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::invalid("need at least one realization"));
        }
        if self.record_times.is_empty() {
            return Err(Error::invalid("need at least one record time"));
        }
        if self.record_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("record times must be strictly increasing"));
        }
        if let Some(&last) = self.record_times.last() {
            if last > self.n_steps {
                return Err(Error::invalid(format!(
                    "record time {last} exceeds n_steps = {}",
                    self.n_steps
                )));
            }
        }
        if let Some(from) = self.average_from {
            if !self.record_times.iter().any(|&t| t >= from) {
                return Err(Error::invalid(format!(
                    "no recorded time at or after average_from = {from}"
                )));
            }
        }
        Ok(())
    }

    fn averaged_count(&self) -> u64 {
        self.average_from.map_or(0, |from| {
            self.record_times.iter().filter(|&&t| t >= from).count() as u64
        })
    }
}

/// Snapshot times `0, 1, 2, …` growing geometrically by `ratio` up to `n_steps`.
///
/// Consecutive times differ by at least one step, and `n_steps` is always the
/// last entry.
pub fn geometric_schedule(n_steps: u64, ratio: f64) -> Vec<u64> {
    let mut times = vec![0u64];
    let mut t = 0u64;
    while t < n_steps {
        let next = ((t as f64) * ratio).ceil() as u64;
        t = next.max(t + 1).min(n_steps);
        times.push(t);
    }
    times
}

/// `0, every, 2·every, …` plus `n_steps`.
pub fn linear_schedule(n_steps: u64, every: u64) -> Vec<u64> {
    let every = every.max(1);
    let mut times: Vec<u64> = (0..=n_steps).step_by(every as usize).collect();
    if times.last() != Some(&n_steps) {
        times.push(n_steps);
    }
    times
}

/// Integer per-site sums over realizations.
#[derive(Debug, Clone)]
struct SiteSums {
    sum: Vec<i64>,
    sumsq: Vec<i64>,
}

impl SiteSums {
    fn new(length: usize) -> Self {
        SiteSums {
            sum: vec![0; length],
            sumsq: vec![0; length],
        }
    }

    fn add_i8(&mut self, values: &[i8]) {
        for ((s, q), &v) in self.sum.iter_mut().zip(&mut self.sumsq).zip(values) {
            *s += v as i64;
            *q += (v as i64) * (v as i64);
        }
    }

    fn add_i64(&mut self, values: &[i64]) {
        for ((s, q), &v) in self.sum.iter_mut().zip(&mut self.sumsq).zip(values) {
            *s += v;
            *q += v * v;
        }
    }

    fn merge(&mut self, other: &SiteSums) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *a += b;
        }
    }

    /// Mean and standard error of `value / divisor` over `n` samples.
    fn finish(&self, n: u64, divisor: f64) -> ChargeProfile {
        let nf = n as f64;
        let mut mean = Vec::with_capacity(self.sum.len());
        let mut err = Vec::with_capacity(self.sum.len());
        for (&s, &q) in self.sum.iter().zip(&self.sumsq) {
            mean.push(s as f64 / (nf * divisor));
            let se = if n > 1 {
                let spread = (n as i128) * (q as i128) - (s as i128) * (s as i128);
                let var = spread as f64 / (nf * (nf - 1.0)) / (divisor * divisor);
                (var.max(0.0) / nf).sqrt()
            } else {
                0.0
            };
            err.push(se);
        }
        ChargeProfile::with_errors(mean, err, n)
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    realizations: u64,
    snapshots: Vec<SiteSums>,
    averaged: SiteSums,
}

impl Accumulator {
    fn new(length: usize, n_records: usize) -> Self {
        Accumulator {
            realizations: 0,
            snapshots: vec![SiteSums::new(length); n_records],
            averaged: SiteSums::new(length),
        }
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        self.realizations += other.realizations;
        for (a, b) in self.snapshots.iter_mut().zip(&other.snapshots) {
            a.merge(b);
        }
        self.averaged.merge(&other.averaged);
        self
    }
}

/// Ensemble-mean profiles at every recorded time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub engine: Engine,
    pub length: usize,
    pub initial_state: SpinState,
    /// Engine-specific settings (gate width, attempts per step).
    pub settings: BTreeMap<String, serde_json::Value>,
    pub schedule: Schedule,
    pub profiles: BTreeMap<u64, ChargeProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_average: Option<ChargeProfile>,
}

impl EnsembleResult {
    pub fn profile(&self, t: u64) -> Option<&ChargeProfile> {
        self.profiles.get(&t)
    }

    /// The profile at the last recorded time.
    pub fn final_profile(&self) -> &ChargeProfile {
        self.profiles
            .values()
            .next_back()
            .expect("a validated schedule records at least one time")
    }

    /// `(t, value)` for every recorded time.
    pub fn series<F: Fn(&ChargeProfile) -> f64>(&self, metric: F) -> Vec<(u64, f64)> {
        self.profiles.iter().map(|(&t, p)| (t, metric(p))).collect()
    }

    /// Check every stored profile against the initial state's `(Q, P)`.
    pub fn check_conservation(&self) -> Result<()> {
        let label = self.initial_state.sector();
        for (t, p) in &self.profiles {
            p.check_conservation(label, 1e-9)
                .map_err(|e| e.in_stage(format!("profile at t = {t}")))?;
        }
        if let Some(avg) = &self.time_average {
            avg.check_conservation(label, 1e-9)
                .map_err(|e| e.in_stage("time-averaged profile"))?;
        }
        Ok(())
    }

    /// Write `meta.json`, `profile_t<step>.csv` per snapshot, `profile_avg.csv`
    /// if present, and `metrics.csv` with columns `t,r,r_prime`.
    ///
    /// Every profile is checked against the conserved charges first.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        self.check_conservation()?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let meta = serde_json::json!({
            "engine": self.engine,
            "length": self.length,
            "initial_state": self.initial_state,
            "settings": self.settings,
            "schedule": self.schedule,
            "seed": self.schedule.master_seed,
        });
        write_json(&dir.join("meta.json"), &meta)?;
        for (t, p) in &self.profiles {
            p.save_csv(&dir.join(format!("profile_t{t}.csv")))?;
        }
        if let Some(avg) = &self.time_average {
            avg.save_csv(&dir.join("profile_avg.csv"))?;
        }
        let x0 = centroid(&self.initial_state);
        let path = dir.join("metrics.csv");
        let mut text = String::from("t,r,r_prime\n");
        for (t, p) in &self.profiles {
            let r = crate::automaton::width_r(p, x0).unwrap_or(f64::NAN);
            let rp = crate::automaton::separation_r_prime(p);
            text.push_str(&format!("{t},{r},{rp}\n"));
        }
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

/// `P/Q` for a charged state, the chain midpoint otherwise.
pub(crate) fn centroid(state: &SpinState) -> f64 {
    let q = state.total_charge();
    if q != 0 {
        state.dipole_moment() as f64 / q as f64
    } else {
        (state.len() as f64 + 1.0) / 2.0
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n").map_err(|e| Error::io(path, e))
}

/// Run `schedule.n_realizations` independent realizations of `dynamics` and
/// return the per-time ensemble profiles and the optional time average.
pub(crate) fn sample<D: Dynamics>(
    dynamics: &D,
    schedule: &Schedule,
) -> Result<(BTreeMap<u64, ChargeProfile>, Option<ChargeProfile>)> {
    schedule.validate()?;
    let length = dynamics.length();
    let n_records = schedule.record_times.len();
    let acc = (0..schedule.n_realizations)
        .into_par_iter()
        .fold(
            || Accumulator::new(length, n_records),
            |mut acc, j| {
                run_one(dynamics, schedule, j, &mut acc);
                acc
            },
        )
        .reduce(|| Accumulator::new(length, n_records), Accumulator::merge);

    let n = acc.realizations;
    let profiles = schedule
        .record_times
        .iter()
        .zip(&acc.snapshots)
        .map(|(&t, sums)| (t, sums.finish(n, 1.0)))
        .collect();
    let averaged = (schedule.average_from.is_some())
        .then(|| acc.averaged.finish(n, schedule.averaged_count() as f64));
    Ok((profiles, averaged))
}

fn run_one<D: Dynamics>(dynamics: &D, schedule: &Schedule, j: u64, acc: &mut Accumulator) {
    let length = dynamics.length();
    let mut rng = stream_rng(schedule.master_seed, j);
    let mut state = dynamics.initial_state();
    let mut charges = vec![0i8; length];
    let mut window_sum = vec![0i64; length];
    let average_from = schedule.average_from.unwrap_or(u64::MAX);
    let mut record = |t: u64, idx: usize, state: &D::State, acc: &mut Accumulator| {
        dynamics.charges(state, &mut charges);
        acc.snapshots[idx].add_i8(&charges);
        if t >= average_from {
            for (w, &c) in window_sum.iter_mut().zip(&charges) {
                *w += c as i64;
            }
        }
    };
    let mut next = 0usize;
    let times = &schedule.record_times;
    if times.first() == Some(&0) {
        record(0, 0, &state, acc);
        next = 1;
    }
    for t in 1..=schedule.n_steps {
        if next == times.len() {
            break;
        }
        dynamics.advance(&mut state, &mut rng);
        if times[next] == t {
            record(t, next, &state, acc);
            next += 1;
        }
    }
    if schedule.average_from.is_some() {
        acc.averaged.add_i64(&window_sum);
    }
    acc.realizations += 1;
}
