//! Spin-1 chain states, their conserved quantities, and the height field.
//!
//! A [`SpinState`] is a string of site charges `s_i ∈ {-1, 0, +1}` on sites
//! `i = 1..=L`, with the coordinate of site `i` taken to be `x_i = i`. The two
//! quantities every gate conserves are the total charge `Σ s_i` and the dipole
//! moment `Σ i·s_i`.
//!
//! The [`HeightField`] is the running sum of the charges, `h_i = Σ_{j≤i} s_j`
//! for `i = 0..=L`. Charge conservation pins both ends of the field and dipole
//! conservation fixes the area `Σ_{i=1}^{L-1} h_i = L·Q − P`, so the dynamics
//! become area-preserving deformations of a discrete profile.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A basis string of `S^z` values on an open chain.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SpinState {
    sites: Vec<i8>,
}

/// The conserved labels `(Q_tot, P_tot)` of a symmetry sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub q_tot: i64,
    pub p_tot: i64,
}

impl SectorLabel {
    pub fn new(q_tot: i64, p_tot: i64) -> Self {
        SectorLabel { q_tot, p_tot }
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(Q={}, P={})", self.q_tot, self.p_tot)
    }
}

impl SpinState {
    /// Build a state from raw charges, rejecting anything outside `{-1, 0, +1}`.
    pub fn new(sites: Vec<i8>) -> Result<Self> {
        if let Some((i, &v)) = sites
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1..=1).contains(*v))
        {
            return Err(Error::InvalidCharge {
                site: i + 1,
                value: v as i64,
            });
        }
        Ok(SpinState { sites })
    }

    /// The all-zero chain of length `length`.
    pub fn vacuum(length: usize) -> Self {
        SpinState {
            sites: vec![0; length],
        }
    }

    /// A vacuum chain with `+1` charges at the given 1-based sites.
    pub fn with_charges(length: usize, plus_sites: &[usize]) -> Result<Self> {
        let mut sites = vec![0i8; length];
        for &p in plus_sites {
            if p == 0 || p > length {
                return Err(Error::invalid(format!(
                    "fracton site {p} outside 1..={length}"
                )));
            }
            if sites[p - 1] != 0 {
                return Err(Error::invalid(format!("fracton site {p} given twice")));
            }
            sites[p - 1] = 1;
        }
        Ok(SpinState { sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Charges in site order; index 0 is site 1.
    pub fn sites(&self) -> &[i8] {
        &self.sites
    }

    /// Charge at 1-based site `i`.
    pub fn charge(&self, i: usize) -> i8 {
        self.sites[i - 1]
    }

    pub(crate) fn sites_mut(&mut self) -> &mut [i8] {
        &mut self.sites
    }

    pub fn total_charge(&self) -> i64 {
        total_charge(&self.sites)
    }

    pub fn dipole_moment(&self) -> i64 {
        dipole_moment(&self.sites)
    }

    pub fn sector(&self) -> SectorLabel {
        SectorLabel::new(self.total_charge(), self.dipole_moment())
    }

    pub fn to_height_field(&self) -> HeightField {
        let mut heights = Vec::with_capacity(self.sites.len() + 1);
        let mut h = 0i32;
        heights.push(h);
        for &s in &self.sites {
            h += s as i32;
            heights.push(h);
        }
        HeightField { heights }
    }

    /// Invert the height mapping: `s_i = h_i − h_{i−1}`.
    pub fn from_height_field(field: &HeightField) -> Self {
        let sites = field
            .heights
            .windows(2)
            .map(|w| (w[1] - w[0]) as i8)
            .collect();
        SpinState { sites }
    }

    /// Base-3 packing, first site most significant, digit `s + 1`.
    ///
    /// Lexicographic order of states (with `− < 0 < +`) equals numeric order
    /// of their codes. Chains up to 40 sites fit.
    pub fn pack(&self) -> u64 {
        pack(&self.sites)
    }

    pub fn unpack(code: u64, length: usize) -> Self {
        let mut sites = vec![0i8; length];
        unpack_into(code, &mut sites);
        SpinState { sites }
    }
}

pub(crate) fn total_charge(sites: &[i8]) -> i64 {
    sites.iter().map(|&s| s as i64).sum()
}

pub(crate) fn dipole_moment(sites: &[i8]) -> i64 {
    sites
        .iter()
        .enumerate()
        .map(|(i, &s)| (i as i64 + 1) * s as i64)
        .sum()
}

pub(crate) fn pack(sites: &[i8]) -> u64 {
    debug_assert!(sites.len() <= 40);
    sites.iter().fold(0u64, |acc, &s| acc * 3 + (s + 1) as u64)
}

pub(crate) fn unpack_into(mut code: u64, sites: &mut [i8]) {
    for s in sites.iter_mut().rev() {
        *s = (code % 3) as i8 - 1;
        code /= 3;
    }
}

fn spin_char(s: i8) -> char {
    match s {
        1 => '+',
        -1 => '-',
        _ => '0',
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.sites {
            write!(f, "{}", spin_char(s))?;
        }
        Ok(())
    }
}

impl fmt::Debug for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinState(\"{self}\")")
    }
}

impl FromStr for SpinState {
    type Err = Error;

    /// Accepts `+`, `-`, `0`, and the unicode minus `−`.
    fn from_str(s: &str) -> Result<Self> {
        let sites = s
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '−' => Ok(-1),
                '0' => Ok(0),
                other => Err(Error::ParseSpin(other)),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(SpinState { sites })
    }
}

impl TryFrom<String> for SpinState {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SpinState> for String {
    fn from(s: SpinState) -> String {
        s.to_string()
    }
}

/// Cumulative charge `h_0..=h_L` with `h_0 = 0` and unit steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HeightField {
    heights: Vec<i32>,
}

impl HeightField {
    /// Validate and wrap a height sequence of length `L + 1`.
    pub fn new(heights: Vec<i32>) -> Result<Self> {
        match heights.first() {
            None => return Err(Error::invalid("height field needs at least h_0")),
            Some(&h0) if h0 != 0 => return Err(Error::HeightOrigin(h0 as i64)),
            _ => {}
        }
        for (i, w) in heights.windows(2).enumerate() {
            let step = (w[1] - w[0]) as i64;
            if step.abs() > 1 {
                return Err(Error::HeightStep { index: i + 1, step });
            }
        }
        Ok(HeightField { heights })
    }

    /// Chain length `L` (the field has `L + 1` entries).
    pub fn chain_length(&self) -> usize {
        self.heights.len() - 1
    }

    pub fn heights(&self) -> &[i32] {
        &self.heights
    }

    pub(crate) fn heights_mut(&mut self) -> &mut [i32] {
        &mut self.heights
    }

    /// `Σ_{i=1}^{L−1} h_i`, which equals `L·Q_tot − P_tot`.
    pub fn area(&self) -> i64 {
        let n = self.heights.len();
        if n < 3 {
            return 0;
        }
        self.heights[1..n - 1].iter().map(|&h| h as i64).sum()
    }

    pub fn to_spin_state(&self) -> SpinState {
        SpinState::from_height_field(self)
    }
}

/// `s_i = h_i − h_{i−1}` for a raw height sequence; errors on a step of 2 or more.
pub fn spins_from_heights(heights: &[i32]) -> Result<SpinState> {
    HeightField::new(heights.to_vec()).map(|h| h.to_spin_state())
}

/// Mean charge per site, optionally with per-site standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeProfile {
    pub mean_charge: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<u64>,
}

impl ChargeProfile {
    pub fn new(mean_charge: Vec<f64>) -> Self {
        ChargeProfile {
            mean_charge,
            stderr: None,
            sample_count: None,
        }
    }

    pub fn with_errors(mean_charge: Vec<f64>, stderr: Vec<f64>, sample_count: u64) -> Self {
        debug_assert_eq!(mean_charge.len(), stderr.len());
        ChargeProfile {
            mean_charge,
            stderr: Some(stderr),
            sample_count: Some(sample_count),
        }
    }

    /// The profile of a single basis state.
    pub fn from_state(state: &SpinState) -> Self {
        ChargeProfile::new(state.sites().iter().map(|&s| s as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.mean_charge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_charge.is_empty()
    }

    /// Mean charge at 1-based site `i`.
    pub fn at(&self, i: usize) -> f64 {
        self.mean_charge[i - 1]
    }

    /// Standard error at 1-based site `i`, zero if the profile is exact.
    pub fn stderr_at(&self, i: usize) -> f64 {
        self.stderr.as_ref().map_or(0.0, |e| e[i - 1])
    }

    pub fn total_charge(&self) -> f64 {
        self.mean_charge.iter().sum()
    }

    pub fn dipole_moment(&self) -> f64 {
        self.mean_charge
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as f64 + 1.0) * m)
            .sum()
    }

    /// Check the profile against a sector's conserved charges.
    ///
    /// `tolerance_per_site` is scaled by `L` for the charge and by `L²` for
    /// the dipole, which bounds accumulated rounding in both sums.
    pub fn check_conservation(&self, label: SectorLabel, tolerance_per_site: f64) -> Result<()> {
        let l = self.len() as f64;
        let dq = (self.total_charge() - label.q_tot as f64).abs();
        let dp = (self.dipole_moment() - label.p_tot as f64).abs();
        if dq > tolerance_per_site * l || dp > tolerance_per_site * l * l {
            return Err(Error::invalid(format!(
                "profile violates conservation: charge off by {dq:e}, dipole off by {dp:e} for sector {label}"
            )));
        }
        Ok(())
    }

    /// Write as CSV with header `site,mean_charge[,stderr]`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match &self.stderr {
            Some(err) => {
                writeln!(out, "site,mean_charge,stderr")?;
                for (i, (m, e)) in self.mean_charge.iter().zip(err).enumerate() {
                    writeln!(out, "{},{},{}", i + 1, m, e)?;
                }
            }
            None => {
                writeln!(out, "site,mean_charge")?;
                for (i, m) in self.mean_charge.iter().enumerate() {
                    writeln!(out, "{},{}", i + 1, m)?;
                }
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    /// Parse the CSV written by [`ChargeProfile::write_csv`].
    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty profile csv"))?;
        let with_err = match header.trim() {
            "site,mean_charge" => false,
            "site,mean_charge,stderr" => true,
            other => return Err(Error::invalid(format!("unexpected csv header {other:?}"))),
        };
        let mut mean = Vec::new();
        let mut err = Vec::new();
        for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let bad = || Error::invalid(format!("malformed csv row {}: {line:?}", row + 2));
            if fields.len() != if with_err { 3 } else { 2 } {
                return Err(bad());
            }
            let site: usize = fields[0].trim().parse().map_err(|_| bad())?;
            if site != row + 1 {
                return Err(bad());
            }
            mean.push(fields[1].trim().parse().map_err(|_| bad())?);
            if with_err {
                err.push(fields[2].trim().parse().map_err(|_| bad())?);
            }
        }
        Ok(ChargeProfile {
            mean_charge: mean,
            stderr: with_err.then_some(err),
            sample_count: None,
        })
    }
}
