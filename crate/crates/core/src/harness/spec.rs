//! Experiment specifications: one TOML file per experiment.
//!
//! A spec file is flat. `kind` and `seed` are always present; every other key
//! belongs to the kind's parameter table and unknown keys are rejected.
//!
//! ```toml
//! kind = "fig4_two"
//! seed = 7
//! length = 51
//! sites = [16, 36]
//! realizations = 500
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chain::{SectorLabel, SpinState};
use crate::error::{Error, Result};
use crate::harness::sweep::{sweep_geometry, SweepKind, SweepSettings};

/// Realizations and steps of the full-size ensembles.
pub const PAPER_REALIZATIONS: u64 = 5000;
pub const PAPER_STEPS: u64 = 45000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1Thermal,
    Fig2Single,
    Fig3Scaling,
    Fig4Two,
    Fig5Scaling,
    Fig8Overlay,
    KrylovReport,
    Equivalence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Fig1Thermal,
        ExperimentKind::Fig2Single,
        ExperimentKind::Fig3Scaling,
        ExperimentKind::Fig4Two,
        ExperimentKind::Fig5Scaling,
        ExperimentKind::Fig8Overlay,
        ExperimentKind::KrylovReport,
        ExperimentKind::Equivalence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Fig1Thermal => "fig1_thermal",
            ExperimentKind::Fig2Single => "fig2_single",
            ExperimentKind::Fig3Scaling => "fig3_scaling",
            ExperimentKind::Fig4Two => "fig4_two",
            ExperimentKind::Fig5Scaling => "fig5_scaling",
            ExperimentKind::Fig8Overlay => "fig8_overlay",
            ExperimentKind::KrylovReport => "krylov_report",
            ExperimentKind::Equivalence => "equivalence",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment kind {s:?}")))
    }
}

/// Thermalization in one sector: enumeration, maxent, and automaton runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalParams {
    pub length: usize,
    pub q: i64,
    pub p: i64,
    /// Sites of the `+` charges in each automaton run.
    pub placements: Vec<Vec<usize>>,
    pub gate_width: usize,
    pub n_steps: u64,
    pub realizations: u64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            length: 14,
            q: 2,
            p: 7,
            placements: vec![vec![3, 4], vec![2, 5]],
            gate_width: 4,
            n_steps: 10_000,
            realizations: 500,
        }
    }
}

/// A long automaton run from a fixed initial state, time-averaged late.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    pub length: usize,
    /// Sites of the `+` charges.
    pub sites: Vec<usize>,
    pub gate_width: usize,
    pub n_steps: u64,
    pub realizations: u64,
    pub average_from: u64,
    pub record_every: u64,
}

impl ProfileParams {
    fn single() -> Self {
        ProfileParams {
            length: 51,
            sites: vec![26],
            gate_width: 3,
            n_steps: 40_000,
            realizations: 500,
            average_from: 20_000,
            record_every: 100,
        }
    }

    fn two() -> Self {
        ProfileParams {
            sites: vec![16, 36],
            ..ProfileParams::single()
        }
    }

    fn overlay() -> Self {
        ProfileParams {
            length: 80,
            sites: vec![20, 60],
            gate_width: 3,
            n_steps: 60_000,
            realizations: 500,
            average_from: 20_000,
            record_every: 200,
        }
    }

    fn state(&self) -> Result<SpinState> {
        SpinState::with_charges(self.length, &self.sites)
    }

    fn validate(&self, charges: usize) -> Result<()> {
        if self.sites.len() != charges {
            return Err(Error::invalid(format!(
                "expected {charges} charge site(s), got {}",
                self.sites.len()
            )));
        }
        if self.sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("charge sites must be strictly increasing"));
        }
        self.state()?;
        check_run(self.length, self.gate_width, self.realizations)?;
        if self.average_from > self.n_steps || self.record_every == 0 {
            return Err(Error::invalid(
                "need average_from ≤ n_steps and record_every ≥ 1",
            ));
        }
        Ok(())
    }
}

/// A `τ` sweep over sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    /// `L` for the single-fracton sweep, `Δ` for the two-fracton sweep.
    pub scales: Vec<usize>,
    #[serde(flatten)]
    pub settings: SweepSettings,
}

impl ScalingParams {
    fn single() -> Self {
        ScalingParams {
            scales: vec![17, 25, 33, 49, 65],
            settings: SweepSettings {
                realizations_per_group: 256,
                budget: 1.0,
                ..SweepSettings::default()
            },
        }
    }

    fn double() -> Self {
        ScalingParams {
            scales: vec![11, 15, 21, 29, 41],
            settings: SweepSettings {
                ratio: 0.5,
                realizations_per_group: 1024,
                budget: 3.0,
                ..SweepSettings::default()
            },
        }
    }

    fn validate(&self, kind: SweepKind) -> Result<()> {
        if self.scales.len() < 4 {
            return Err(Error::invalid("a scaling fit needs at least four sizes"));
        }
        let s = &self.settings;
        if s.groups < 2 || s.realizations_per_group == 0 {
            return Err(Error::invalid("need ≥ 2 groups of ≥ 1 realization"));
        }
        if s.budget.is_nan()
            || s.budget <= 0.0
            || s.schedule_ratio.is_nan()
            || s.schedule_ratio <= 1.0
        {
            return Err(Error::invalid("need budget > 0 and schedule_ratio > 1"));
        }
        for &scale in &self.scales {
            let (length, ..) = sweep_geometry(kind, scale, s.ratio)?;
            check_run(length, s.gate_width, 1)?;
        }
        Ok(())
    }
}

/// Krylov fragmentation of two-fracton states at `(3, L − 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrylovParams {
    pub lengths: Vec<usize>,
    pub gate_widths: Vec<usize>,
    /// Chain length of the automaton run compared with its component average.
    pub ad_length: usize,
    pub ad_steps: u64,
    pub ad_realizations: u64,
    pub ad_average_from: u64,
    pub ad_record_every: u64,
}

impl Default for KrylovParams {
    fn default() -> Self {
        KrylovParams {
            lengths: vec![10, 11, 12],
            gate_widths: vec![3, 4],
            ad_length: 10,
            ad_steps: 10_000,
            ad_realizations: 100,
            ad_average_from: 1_000,
            ad_record_every: 10,
        }
    }
}

/// Spin automaton against the block engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceParams {
    pub length: usize,
    pub single_site: usize,
    pub two_sites: Vec<usize>,
    /// Automaton times, each a multiple of `L − 2`.
    pub snapshots: Vec<u64>,
    pub realizations: u64,
    /// Move graphs are compared exhaustively for `3 ≤ L ≤` this.
    pub exhaustive_max_length: usize,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        EquivalenceParams {
            length: 31,
            single_site: 16,
            two_sites: vec![11, 21],
            snapshots: vec![29, 116, 464],
            realizations: 1000,
            exhaustive_max_length: 8,
        }
    }
}

/// Kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Thermal(ThermalParams),
    Profile(ProfileParams),
    Scaling(ScalingParams),
    Krylov(KrylovParams),
    Equivalence(EquivalenceParams),
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(flatten)]
    pub params: Params,
}

fn check_run(length: usize, width: usize, realizations: u64) -> Result<()> {
    if !(3..=4).contains(&width) || width > length {
        return Err(Error::invalid(format!(
            "gate width must be 3 or 4 and at most L = {length}, got {width}"
        )));
    }
    if realizations == 0 {
        return Err(Error::invalid("need at least one realization"));
    }
    Ok(())
}

fn parse<T: DeserializeOwned>(table: toml::Table) -> Result<T> {
    Ok(T::deserialize(toml::Value::Table(table))?)
}

impl ExperimentSpec {
    /// The desk-scale defaults for `kind`.
    pub fn desk(kind: ExperimentKind, seed: u64) -> Self {
        let params = match kind {
            ExperimentKind::Fig1Thermal => Params::Thermal(ThermalParams::default()),
            ExperimentKind::Fig2Single => Params::Profile(ProfileParams::single()),
            ExperimentKind::Fig4Two => Params::Profile(ProfileParams::two()),
            ExperimentKind::Fig8Overlay => Params::Profile(ProfileParams::overlay()),
            ExperimentKind::Fig3Scaling => Params::Scaling(ScalingParams::single()),
            ExperimentKind::Fig5Scaling => Params::Scaling(ScalingParams::double()),
            ExperimentKind::KrylovReport => Params::Krylov(KrylovParams::default()),
            ExperimentKind::Equivalence => Params::Equivalence(EquivalenceParams::default()),
        };
        ExperimentSpec { kind, seed, params }
    }

    /// Parse and validate a spec file's contents.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse()?;
        let kind = match table.remove("kind") {
            Some(toml::Value::String(s)) => s.parse::<ExperimentKind>()?,
            Some(other) => {
                return Err(Error::invalid(format!(
                    "kind must be a string, got {other}"
                )))
            }
            None => return Err(Error::invalid("spec has no kind")),
        };
        let seed = match table.remove("seed") {
            Some(toml::Value::Integer(s)) if s >= 0 => s as u64,
            Some(other) => {
                return Err(Error::invalid(format!(
                    "seed must be a nonnegative integer, got {other}"
                )))
            }
            None => return Err(Error::invalid("spec has no seed")),
        };
        let params = match kind {
            ExperimentKind::Fig1Thermal => Params::Thermal(parse(table)?),
            ExperimentKind::Fig2Single | ExperimentKind::Fig4Two | ExperimentKind::Fig8Overlay => {
                let defaults = match ExperimentSpec::desk(kind, seed).params {
                    Params::Profile(p) => p,
                    _ => unreachable!(),
                };
                Params::Profile(merge(defaults, table)?)
            }
            ExperimentKind::Fig3Scaling | ExperimentKind::Fig5Scaling => {
                let defaults = match ExperimentSpec::desk(kind, seed).params {
                    Params::Scaling(p) => p,
                    _ => unreachable!(),
                };
                Params::Scaling(merge(defaults, table)?)
            }
            ExperimentKind::KrylovReport => Params::Krylov(parse(table)?),
            ExperimentKind::Equivalence => Params::Equivalence(parse(table)?),
        };
        let spec = ExperimentSpec { kind, seed, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentSpec::from_toml_str(&text)
            .map_err(|e| e.in_stage(format!("spec {}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("cannot serialize spec: {e}")))
    }

    /// Scale ensembles up to the full published sizes.
    pub fn paper_scale(mut self) -> Self {
        match &mut self.params {
            Params::Thermal(p) => {
                p.realizations = PAPER_REALIZATIONS;
                p.n_steps = PAPER_STEPS;
            }
            Params::Profile(p) => {
                p.realizations = PAPER_REALIZATIONS;
                p.n_steps = p.n_steps.max(PAPER_STEPS);
            }
            Params::Scaling(p) => {
                let groups = p.settings.groups as u64;
                p.settings.realizations_per_group = p
                    .settings
                    .realizations_per_group
                    .max(PAPER_REALIZATIONS.div_ceil(groups));
            }
            Params::Krylov(_) => {}
            Params::Equivalence(p) => p.realizations = PAPER_REALIZATIONS,
        }
        self
    }

    /// Check every parameter before any compute.
    pub fn validate(&self) -> Result<()> {
        let stage = |e: Error| e.in_stage(format!("{} parameters", self.kind));
        match (&self.params, self.kind) {
            (Params::Thermal(p), ExperimentKind::Fig1Thermal) => {
                if p.length > 20 {
                    return Err(stage(Error::invalid("enumeration needs L ≤ 20")));
                }
                check_run(p.length, p.gate_width, p.realizations).map_err(stage)?;
                if p.placements.is_empty() {
                    return Err(stage(Error::invalid("need at least one placement")));
                }
                let label = SectorLabel::new(p.q, p.p);
                for sites in &p.placements {
                    let s = SpinState::with_charges(p.length, sites).map_err(stage)?;
                    if s.sector() != label {
                        return Err(stage(Error::invalid(format!(
                            "placement {sites:?} lies in sector ({}, {}), not ({}, {})",
                            s.total_charge(),
                            s.dipole_moment(),
                            p.q,
                            p.p
                        ))));
                    }
                }
                Ok(())
            }
            (Params::Profile(p), ExperimentKind::Fig2Single) => p.validate(1).map_err(stage),
            (Params::Profile(p), ExperimentKind::Fig4Two | ExperimentKind::Fig8Overlay) => {
                p.validate(2).map_err(stage)?;
                if p.gate_width != 3 {
                    return Err(stage(Error::invalid(
                        "two-fracton runs use three-site gates",
                    )));
                }
                Ok(())
            }
            (Params::Scaling(p), ExperimentKind::Fig3Scaling) => {
                p.validate(SweepKind::Single).map_err(stage)
            }
            (Params::Scaling(p), ExperimentKind::Fig5Scaling) => {
                p.validate(SweepKind::Double).map_err(stage)
            }
            (Params::Krylov(p), ExperimentKind::KrylovReport) => {
                if p.lengths.is_empty() || p.gate_widths.is_empty() {
                    return Err(stage(Error::invalid("need lengths and gate widths")));
                }
                for &l in p.lengths.iter().chain([&p.ad_length]) {
                    if !(6..=16).contains(&l) {
                        return Err(stage(Error::invalid(format!(
                            "Krylov lengths must lie in 6..=16, got {l}"
                        ))));
                    }
                    for &w in &p.gate_widths {
                        check_run(l, w, 1).map_err(stage)?;
                    }
                }
                if p.ad_realizations == 0
                    || p.ad_record_every == 0
                    || p.ad_average_from > p.ad_steps
                {
                    return Err(stage(Error::invalid(
                        "need ad_realizations ≥ 1, ad_record_every ≥ 1, ad_average_from ≤ ad_steps",
                    )));
                }
                Ok(())
            }
            (Params::Equivalence(p), ExperimentKind::Equivalence) => {
                SpinState::with_charges(p.length, &[p.single_site]).map_err(stage)?;
                SpinState::with_charges(p.length, &p.two_sites).map_err(stage)?;
                if p.two_sites.len() != 2 || p.realizations < 2 {
                    return Err(stage(Error::invalid(
                        "need two charge sites and at least two realizations",
                    )));
                }
                let den = p.length as u64 - 2;
                if p.snapshots.is_empty() || p.snapshots.iter().any(|t| t % den != 0) {
                    return Err(stage(Error::invalid(format!(
                        "snapshots must be nonempty multiples of L − 2 = {den}"
                    ))));
                }
                if !(3..=12).contains(&p.exhaustive_max_length) {
                    return Err(stage(Error::invalid(
                        "exhaustive_max_length must lie in 3..=12",
                    )));
                }
                Ok(())
            }
            _ => Err(stage(Error::invalid("parameters do not match the kind"))),
        }
    }
}

/// Overlay `table` on `defaults`, rejecting unknown keys.
fn merge<T: Serialize + DeserializeOwned>(defaults: T, table: toml::Table) -> Result<T> {
    let mut base = toml::Table::try_from(&defaults)
        .map_err(|e| Error::invalid(format!("cannot serialize defaults: {e}")))?;
    for key in table.keys() {
        if !base.contains_key(key) {
            return Err(Error::invalid(format!("unknown parameter {key:?}")));
        }
    }
    base.extend(table);
    parse(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_defaults_validate() {
        for kind in ExperimentKind::ALL {
            let spec = ExperimentSpec::desk(kind, 1);
            spec.validate().unwrap();
            spec.clone().paper_scale().validate().unwrap();
        }
    }

    #[test]
    fn round_trips_through_toml() {
        for kind in ExperimentKind::ALL {
            let spec = ExperimentSpec::desk(kind, 9);
            let text = spec.to_toml_string().unwrap();
            assert_eq!(
                ExperimentSpec::from_toml_str(&text).unwrap(),
                spec,
                "{text}"
            );
        }
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let spec =
            ExperimentSpec::from_toml_str("kind = \"fig4_two\"\nseed = 3\nrealizations = 20\n")
                .unwrap();
        match spec.params {
            Params::Profile(p) => {
                assert_eq!(p.sites, vec![16, 36]);
                assert_eq!(p.realizations, 20);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rejects_bad_specs() {
        for text in [
            "seed = 1",
            "kind = \"fig9\"\nseed = 1",
            "kind = \"fig2_single\"",
            "kind = \"fig2_single\"\nseed = -1",
            "kind = \"fig2_single\"\nseed = 1\nlenght = 5",
            "kind = \"fig1_thermal\"\nseed = 1\nwidth = 3",
            "kind = \"fig1_thermal\"\nseed = 1\nplacements = [[3, 5]]",
            "kind = \"fig4_two\"\nseed = 1\nsites = [36, 16]",
            "kind = \"fig3_scaling\"\nseed = 1\nscales = [3, 17, 25, 33]",
            "kind = \"fig5_scaling\"\nseed = 1\nscales = [11, 15, 21]",
            "kind = \"equivalence\"\nseed = 1\nsnapshots = [30]",
        ] {
            let err = ExperimentSpec::from_toml_str(text).unwrap_err();
            assert!(!err.is_numerical(), "{text}: {err}");
        }
    }
}
