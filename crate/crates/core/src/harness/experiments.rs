//! Figure pipelines and the directory writer.
//!
//! Each pipeline returns typed data plus a serializable summary of headline
//! numbers. [`run_experiment`] writes both to disk; the acceptance tests call
//! the pipelines directly.

use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use serde::Serialize;

use crate::analytic::{
    boundary_charge, continuum_moments, single_fracton_final, two_fracton_final_profile,
    ContinuumMoments, TwoFractonGeometry,
};
use crate::automaton::{run_ensemble, EvolutionConfig};
use crate::blocks::{compare_move_graphs, equivalence_check, EquivalenceReport, MoveGraphReport};
use crate::chain::{ChargeProfile, SectorLabel, SpinState};
use crate::ensemble::{linear_schedule, write_json, EnsembleResult};
use crate::error::{Error, Result};
use crate::gates::GateClassTable;
use crate::harness::fit::{powerlaw_fit, PowerLawFit};
use crate::harness::spec::{
    EquivalenceParams, ExperimentKind, ExperimentSpec, KrylovParams, Params, ProfileParams,
    ScalingParams, ThermalParams,
};
use crate::harness::sweep::{fit_points, tau_sweep, SweepKind, TauPoint};
use crate::maxent::{
    linear_profile, linearized_multipliers_exact, maxent_profile, solve_multipliers,
    LagrangeMultipliers,
};
use crate::rng::derive_seed;
use crate::sector::{
    component_mean_profile, enumerate_sector, krylov_decompose, sector_mean_profile,
};

/// `max_i |a_i − b_i|` over sites `lo..=hi` (1-based).
pub fn max_abs_deviation(a: &ChargeProfile, b: &ChargeProfile, lo: usize, hi: usize) -> f64 {
    (lo..=hi)
        .map(|i| (a.at(i) - b.at(i)).abs())
        .fold(0.0, f64::max)
}

/// Largest `|a_i − b_i| / sqrt(σa² + σb²)` over sites `lo..=hi`, with the
/// site where it occurs. Equal values with zero error score 0; unequal ones
/// score infinity.
pub fn max_z(a: &ChargeProfile, b: &ChargeProfile, lo: usize, hi: usize) -> (f64, usize) {
    let mut worst = (0.0, lo);
    for i in lo..=hi {
        let d = (a.at(i) - b.at(i)).abs();
        let s = a.stderr_at(i).hypot(b.stderr_at(i));
        let z = if s > 0.0 {
            d / s
        } else if d > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if z > worst.0 {
            worst = (z, i);
        }
    }
    worst
}

/// Full width at half maximum of the peak at `peak` (1-based), searching
/// sites `lo..=hi` and interpolating linearly between sites. `None` if the
/// profile never falls below half the peak on one side.
pub fn full_width_half_max(p: &ChargeProfile, peak: usize, lo: usize, hi: usize) -> Option<f64> {
    let half = p.at(peak) / 2.0;
    let mut left = None;
    for i in (lo..peak).rev() {
        if p.at(i) <= half {
            left = Some(i as f64 + (half - p.at(i)) / (p.at(i + 1) - p.at(i)));
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..=hi {
        if p.at(i) <= half {
            right = Some(i as f64 - (half - p.at(i)) / (p.at(i - 1) - p.at(i)));
            break;
        }
    }
    Some(right? - left?)
}

fn zero_profile(length: usize) -> ChargeProfile {
    ChargeProfile::new(vec![0.0; length])
}

fn long_run(p: &ProfileParams, seed: u64) -> Result<EnsembleResult> {
    let state = SpinState::with_charges(p.length, &p.sites)?;
    let mut times = linear_schedule(p.n_steps, p.record_every);
    if !times.contains(&p.average_from) {
        times.push(p.average_from);
        times.sort_unstable();
    }
    let cfg = EvolutionConfig::new(state, p.gate_width)
        .steps(p.n_steps)
        .record(times)
        .realizations(p.realizations)
        .average_from(p.average_from)
        .seed(seed);
    run_ensemble(&cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermalSummary {
    pub sector_size: usize,
    pub linearized_lambda_q: String,
    pub linearized_lambda_p: String,
    pub solved: LagrangeMultipliers,
    pub enumeration_vs_maxent: f64,
    pub enumeration_vs_linear: f64,
    /// Per run: largest site z against the enumeration profile.
    pub runs_vs_enumeration_max_z: Vec<f64>,
    /// Largest site z between the first two runs.
    pub runs_pairwise_max_z: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ThermalOutput {
    pub enumeration: ChargeProfile,
    pub maxent: ChargeProfile,
    pub linear: ChargeProfile,
    pub linearized: (Ratio<i64>, Ratio<i64>),
    pub runs: Vec<ChargeProfile>,
    pub summary: ThermalSummary,
}

pub fn fig1_thermal(p: &ThermalParams, seed: u64) -> Result<ThermalOutput> {
    let label = SectorLabel::new(p.q, p.p);
    let sector = enumerate_sector(p.length, label).map_err(|e| e.in_stage("enumeration"))?;
    let enumeration = sector_mean_profile(&sector)?;
    let maxent = maxent_profile(p.length, label).map_err(|e| e.in_stage("maxent"))?;
    let solved = solve_multipliers(p.length, label).map_err(|e| e.in_stage("maxent"))?;
    let linearized = linearized_multipliers_exact(p.length, label)?;
    let seed_m = LagrangeMultipliers::new(
        *linearized.0.numer() as f64 / *linearized.0.denom() as f64,
        *linearized.1.numer() as f64 / *linearized.1.denom() as f64,
    );
    let linear = linear_profile(p.length, seed_m);
    let mut runs = Vec::new();
    for (k, sites) in p.placements.iter().enumerate() {
        let cfg = EvolutionConfig::new(SpinState::with_charges(p.length, sites)?, p.gate_width)
            .steps(p.n_steps)
            .realizations(p.realizations)
            .seed(derive_seed(seed, k as u64));
        let result = run_ensemble(&cfg).map_err(|e| e.in_stage(format!("automaton run {k}")))?;
        result.check_conservation()?;
        runs.push(result.final_profile().clone());
    }
    let l = p.length;
    let summary = ThermalSummary {
        sector_size: sector.len(),
        linearized_lambda_q: linearized.0.to_string(),
        linearized_lambda_p: linearized.1.to_string(),
        solved,
        enumeration_vs_maxent: max_abs_deviation(&enumeration, &maxent, 1, l),
        enumeration_vs_linear: max_abs_deviation(&enumeration, &linear, 1, l),
        runs_vs_enumeration_max_z: runs
            .iter()
            .map(|r| max_z(r, &enumeration, 1, l).0)
            .collect(),
        runs_pairwise_max_z: (runs.len() >= 2).then(|| max_z(&runs[0], &runs[1], 1, l).0),
    };
    Ok(ThermalOutput {
        enumeration,
        maxent,
        linear,
        linearized,
        runs,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleSummary {
    /// Largest `|⟨S^z_i⟩| / σ_i` over `1 < i < L`, and where.
    pub interior_max_z: f64,
    pub interior_worst_site: usize,
    pub left_boundary: f64,
    pub left_boundary_z: f64,
    pub right_boundary: f64,
    pub right_boundary_z: f64,
    pub max_deviation_from_analytic: f64,
}

#[derive(Debug, Clone)]
pub struct SingleOutput {
    pub result: EnsembleResult,
    pub analytic: ChargeProfile,
    pub summary: SingleSummary,
}

pub fn fig2_single(p: &ProfileParams, seed: u64) -> Result<SingleOutput> {
    let result = long_run(p, seed)?;
    let analytic = single_fracton_final(p.length, p.sites[0])?;
    let avg = result.time_average.clone().expect("average_from is set");
    let l = p.length;
    let (interior_max_z, interior_worst_site) = max_z(&avg, &zero_profile(l), 2, l - 1);
    let z = |i: usize| (avg.at(i) - 0.5).abs() / avg.stderr_at(i);
    let summary = SingleSummary {
        interior_max_z,
        interior_worst_site,
        left_boundary: avg.at(1),
        left_boundary_z: z(1),
        right_boundary: avg.at(l),
        right_boundary_z: z(l),
        max_deviation_from_analytic: max_abs_deviation(&avg, &analytic, 1, l),
    };
    Ok(SingleOutput {
        result,
        analytic,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakSummary {
    pub delta: usize,
    pub midpoint: f64,
    pub peak_site: usize,
    pub peak_value: f64,
    /// Peak height in units of its standard error.
    pub peak_z: f64,
    pub fwhm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TwoOutput {
    pub result: EnsembleResult,
    pub summary: PeakSummary,
}

fn peak_summary(avg: &ChargeProfile, sites: &[usize]) -> PeakSummary {
    let l = avg.len();
    let peak_site = (2..l).fold(2, |best, i| if avg.at(i) > avg.at(best) { i } else { best });
    PeakSummary {
        delta: sites[1] - sites[0],
        midpoint: (l as f64 + 1.0) / 2.0,
        peak_site,
        peak_value: avg.at(peak_site),
        peak_z: avg.at(peak_site) / avg.stderr_at(peak_site),
        fwhm: full_width_half_max(avg, peak_site, 2, l - 1),
    }
}

pub fn fig4_two(p: &ProfileParams, seed: u64) -> Result<TwoOutput> {
    let result = long_run(p, seed)?;
    let avg = result.time_average.as_ref().expect("average_from is set");
    let summary = peak_summary(avg, &p.sites);
    Ok(TwoOutput { result, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlaySummary {
    pub geometry: TwoFractonGeometry,
    /// Largest interior `|sim − analytic| / σ_sim`, and where.
    pub interior_max_z: f64,
    pub interior_worst_site: usize,
    pub max_abs_deviation: f64,
    pub peak: PeakSummary,
    pub analytic_peak: f64,
    pub peak_relative_error: f64,
    pub analytic_boundary_charge: f64,
    pub moments: ContinuumMoments,
}

#[derive(Debug, Clone)]
pub struct OverlayOutput {
    pub result: EnsembleResult,
    pub analytic: ChargeProfile,
    pub summary: OverlaySummary,
}

pub fn fig8_overlay(p: &ProfileParams, seed: u64) -> Result<OverlayOutput> {
    let geometry = TwoFractonGeometry::from_sites(p.length, p.sites[0], p.sites[1])?;
    let analytic =
        two_fracton_final_profile(&geometry).map_err(|e| e.in_stage("analytic profile"))?;
    let moments = continuum_moments(&geometry).map_err(|e| e.in_stage("analytic moments"))?;
    let result = long_run(p, seed)?;
    let avg = result.time_average.as_ref().expect("average_from is set");
    let l = p.length;
    let (interior_max_z, interior_worst_site) = max_z(avg, &analytic, 2, l - 1);
    let peak = peak_summary(avg, &p.sites);
    let analytic_peak = (2..l).map(|i| analytic.at(i)).fold(f64::MIN, f64::max);
    let summary = OverlaySummary {
        geometry,
        interior_max_z,
        interior_worst_site,
        max_abs_deviation: max_abs_deviation(avg, &analytic, 2, l - 1),
        peak_relative_error: (peak.peak_value - analytic_peak).abs() / analytic_peak,
        peak,
        analytic_peak,
        analytic_boundary_charge: boundary_charge(&geometry)?,
        moments,
    };
    Ok(OverlayOutput {
        result,
        analytic,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingOutput {
    pub points: Vec<TauPoint>,
    pub fit: Option<PowerLawFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

pub fn scaling(kind: SweepKind, p: &ScalingParams, seed: u64) -> Result<ScalingOutput> {
    let points = tau_sweep(kind, &p.scales, &p.settings, seed)?;
    let (fit, fit_error) = match powerlaw_fit(&fit_points(&points)) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ScalingOutput {
        points,
        fit,
        fit_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KrylovRow {
    pub length: usize,
    pub gate_width: usize,
    pub sector_size: usize,
    pub component_count: usize,
    pub largest_fraction: f64,
    /// Size of the component holding the two-fracton state over the sector size.
    pub state_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KrylovOutput {
    pub rows: Vec<KrylovRow>,
    #[serde(skip)]
    pub run: ChargeProfile,
    #[serde(skip)]
    pub component_average: ChargeProfile,
    /// Largest site deviation of the run's time average from the flat
    /// average over its three-site component.
    pub run_vs_component: f64,
    pub run_vs_sector: f64,
}

fn two_fracton_probe(length: usize) -> Result<SpinState> {
    SpinState::with_charges(length, &[3, length - 2])
}

pub fn krylov_report(p: &KrylovParams, seed: u64) -> Result<KrylovOutput> {
    let mut rows = Vec::new();
    for &length in &p.lengths {
        let state = two_fracton_probe(length)?;
        let sector = enumerate_sector(length, state.sector())?;
        for &w in &p.gate_widths {
            let table = GateClassTable::build(w)?;
            let d = krylov_decompose(&sector, &table)?;
            let id = d.component_of(&state)?;
            rows.push(KrylovRow {
                length,
                gate_width: w,
                sector_size: d.sector_size(),
                component_count: d.component_count(),
                largest_fraction: d.largest_fraction(),
                state_fraction: d.sizes()[id] as f64 / d.sector_size() as f64,
            });
        }
    }
    let state = two_fracton_probe(p.ad_length)?;
    let sector = enumerate_sector(p.ad_length, state.sector())?;
    let d = krylov_decompose(&sector, &GateClassTable::build(3)?)?;
    let component_average = component_mean_profile(&d, &state)?;
    let sector_average = sector_mean_profile(&sector)?;
    let mut times = linear_schedule(p.ad_steps, p.ad_record_every);
    if !times.contains(&p.ad_average_from) {
        times.push(p.ad_average_from);
        times.sort_unstable();
    }
    let cfg = EvolutionConfig::new(state, 3)
        .steps(p.ad_steps)
        .record(times)
        .realizations(p.ad_realizations)
        .average_from(p.ad_average_from)
        .seed(seed);
    let run = run_ensemble(&cfg)?
        .time_average
        .expect("average_from is set");
    let l = p.ad_length;
    Ok(KrylovOutput {
        rows,
        run_vs_component: max_abs_deviation(&run, &component_average, 1, l),
        run_vs_sector: max_abs_deviation(&run, &sector_average, 1, l),
        run,
        component_average,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceOutput {
    pub single: EquivalenceReport,
    pub two: EquivalenceReport,
    pub move_graphs: Vec<MoveGraphReport>,
}

pub fn equivalence(p: &EquivalenceParams, seed: u64) -> Result<EquivalenceOutput> {
    let single_state = SpinState::with_charges(p.length, &[p.single_site])?;
    let two_state = SpinState::with_charges(p.length, &p.two_sites)?;
    let single = equivalence_check(
        &single_state,
        &p.snapshots,
        p.realizations,
        derive_seed(seed, 0),
    )
    .map_err(|e| e.in_stage("single-fracton equivalence"))?;
    let two = equivalence_check(
        &two_state,
        &p.snapshots,
        p.realizations,
        derive_seed(seed, 1),
    )
    .map_err(|e| e.in_stage("two-fracton equivalence"))?;
    let move_graphs = (3..=p.exhaustive_max_length)
        .map(compare_move_graphs)
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceOutput {
        single,
        two,
        move_graphs,
    })
}

/// Write named profile columns as `site,<name>,…` CSV. Profiles with errors
/// get an extra `<name>_stderr` column.
pub fn write_profiles(path: &Path, columns: &[(&str, &ChargeProfile)]) -> Result<()> {
    let length = columns.first().map_or(0, |c| c.1.len());
    if columns.iter().any(|c| c.1.len() != length) {
        return Err(Error::invalid("profiles in one table must share a length"));
    }
    let mut text = String::from("site");
    for (name, p) in columns {
        let _ = write!(text, ",{name}");
        if p.stderr.is_some() {
            let _ = write!(text, ",{name}_stderr");
        }
    }
    text.push('\n');
    for i in 1..=length {
        let _ = write!(text, "{i}");
        for (_, p) in columns {
            let _ = write!(text, ",{}", p.at(i));
            if p.stderr.is_some() {
                let _ = write!(text, ",{}", p.stderr_at(i));
            }
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_profile(p: &ChargeProfile, label: SectorLabel, what: &str) -> Result<()> {
    p.check_conservation(label, 1e-9)
        .map_err(|e| e.in_stage(what.to_string()))
}

/// Run `spec` and write `meta.json`, data CSVs, and `summary.json` into `out`.
/// Returns the summary. Output is a function of the spec alone.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<serde_json::Value> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let meta = serde_json::json!({
        "spec": spec,
        "seed": spec.seed,
        "code_version": env!("CARGO_PKG_VERSION"),
        "git_describe": env!("FRACTON_GIT_DESCRIBE"),
    });
    write_json(&out.join("meta.json"), &meta)?;
    let stage = spec.kind.as_str();
    let summary = run_kind(spec, out).map_err(|e| e.in_stage(stage))?;
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn run_kind(spec: &ExperimentSpec, out: &Path) -> Result<serde_json::Value> {
    let seed = spec.seed;
    let summary = match (&spec.params, spec.kind) {
        (Params::Thermal(p), _) => {
            let o = fig1_thermal(p, seed)?;
            let label = SectorLabel::new(p.q, p.p);
            let names: Vec<String> = (0..o.runs.len()).map(|k| format!("run{k}")).collect();
            let mut cols: Vec<(&str, &ChargeProfile)> = vec![
                ("enumeration", &o.enumeration),
                ("maxent", &o.maxent),
                ("linear", &o.linear),
            ];
            for (n, r) in names.iter().zip(&o.runs) {
                check_profile(r, label, n)?;
                cols.push((n, r));
            }
            check_profile(&o.enumeration, label, "enumeration")?;
            write_profiles(&out.join("profiles.csv"), &cols)?;
            serde_json::to_value(&o.summary)?
        }
        (Params::Profile(p), ExperimentKind::Fig2Single) => {
            let o = fig2_single(p, seed)?;
            o.result.write_dir(&out.join("ensemble"))?;
            let avg = o.result.time_average.as_ref().expect("average_from is set");
            write_profiles(
                &out.join("final.csv"),
                &[("simulation", avg), ("analytic", &o.analytic)],
            )?;
            serde_json::to_value(&o.summary)?
        }
        (Params::Profile(p), ExperimentKind::Fig4Two) => {
            let o = fig4_two(p, seed)?;
            o.result.write_dir(&out.join("ensemble"))?;
            let avg = o.result.time_average.as_ref().expect("average_from is set");
            write_profiles(
                &out.join("final.csv"),
                &[("initial", &o.result.profiles[&0]), ("late", avg)],
            )?;
            serde_json::to_value(&o.summary)?
        }
        (Params::Profile(p), _) => {
            let o = fig8_overlay(p, seed)?;
            o.result.write_dir(&out.join("ensemble"))?;
            let avg = o.result.time_average.as_ref().expect("average_from is set");
            write_profiles(
                &out.join("overlay.csv"),
                &[("simulation", avg), ("analytic", &o.analytic)],
            )?;
            serde_json::to_value(&o.summary)?
        }
        (Params::Scaling(p), kind) => {
            let sweep = if kind == ExperimentKind::Fig3Scaling {
                SweepKind::Single
            } else {
                SweepKind::Double
            };
            let o = scaling(sweep, p, seed)?;
            let mut text = String::from("scale,length,tau,tau_stderr\n");
            for pt in &o.points {
                let f = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    pt.scale,
                    pt.length,
                    f(pt.tau),
                    f(pt.tau_stderr)
                );
            }
            let path = out.join("tau.csv");
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            serde_json::to_value(&o)?
        }
        (Params::Krylov(p), _) => {
            let o = krylov_report(p, seed)?;
            let mut text = String::from(
                "length,gate_width,sector_size,component_count,largest_fraction,state_fraction\n",
            );
            for r in &o.rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    r.length,
                    r.gate_width,
                    r.sector_size,
                    r.component_count,
                    r.largest_fraction,
                    r.state_fraction
                );
            }
            let path = out.join("krylov.csv");
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            let label = two_fracton_probe(p.ad_length)?.sector();
            check_profile(&o.run, label, "automaton average")?;
            write_profiles(
                &out.join("component_average.csv"),
                &[("simulation", &o.run), ("component", &o.component_average)],
            )?;
            serde_json::to_value(&o)?
        }
        (Params::Equivalence(p), _) => serde_json::to_value(equivalence(p, seed)?)?,
    };
    Ok(summary)
}
