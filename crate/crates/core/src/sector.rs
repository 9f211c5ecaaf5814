//! Exact enumeration of symmetry sectors and their Krylov fragments.
//!
//! States are handled as base-3 codes (see [`SpinState::pack`]); a sector is
//! the sorted list of codes with a given `(Q, P)`, so membership is a binary
//! search. Enumeration walks sites left to right and prunes any prefix whose
//! remaining `(q, p)` is unreachable by the suffix.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::Serialize;

use crate::chain::{unpack_into, ChargeProfile, SectorLabel, SpinState};
use crate::error::{Error, Result};
use crate::gates::GateClassTable;

/// Largest chain that fits in a 64-bit base-3 code.
pub const MAX_LENGTH: usize = 40;

/// Every basis state of length `L` with a given `(Q, P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrySector {
    label: SectorLabel,
    length: usize,
    codes: Vec<u64>,
}

impl SymmetrySector {
    pub fn label(&self) -> SectorLabel {
        self.label
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Packed states in ascending order.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn states(&self) -> impl Iterator<Item = SpinState> + '_ {
        self.codes
            .iter()
            .map(|&c| SpinState::unpack(c, self.length))
    }

    pub fn contains(&self, state: &SpinState) -> bool {
        self.index_of(state).is_some()
    }

    fn index_of(&self, state: &SpinState) -> Option<usize> {
        (state.len() == self.length)
            .then(|| self.codes.binary_search(&state.pack()).ok())
            .flatten()
    }
}

/// All `(q, p)` pairs a suffix starting at each site can carry.
fn suffix_reach(length: usize) -> Vec<HashSet<(i64, i64)>> {
    let mut reach = vec![HashSet::new(); length + 1];
    reach[length].insert((0, 0));
    for k in (0..length).rev() {
        let x = k as i64 + 1;
        let next: Vec<(i64, i64)> = reach[k + 1].iter().copied().collect();
        for (q, p) in next {
            for s in -1..=1 {
                reach[k].insert((q + s, p + x * s));
            }
        }
    }
    reach
}

/// Enumerate the sector `label` of length-`L` chains. Empty sectors are allowed.
pub fn enumerate_sector(length: usize, label: SectorLabel) -> Result<SymmetrySector> {
    if length == 0 || length > MAX_LENGTH {
        return Err(Error::invalid(format!(
            "sector enumeration needs 1 ≤ L ≤ {MAX_LENGTH}, got {length}"
        )));
    }
    let reach = suffix_reach(length);
    let mut codes = Vec::new();
    if reach[0].contains(&(label.q_tot, label.p_tot)) {
        let mut sites = vec![0i8; length];
        descend(0, label.q_tot, label.p_tot, &mut sites, &reach, &mut codes);
    }
    Ok(SymmetrySector {
        label,
        length,
        codes,
    })
}

fn descend(
    k: usize,
    q: i64,
    p: i64,
    sites: &mut [i8],
    reach: &[HashSet<(i64, i64)>],
    out: &mut Vec<u64>,
) {
    if k == sites.len() {
        out.push(crate::chain::pack(sites));
        return;
    }
    let x = k as i64 + 1;
    for s in [-1i8, 0, 1] {
        let (rq, rp) = (q - s as i64, p - x * s as i64);
        if reach[k + 1].contains(&(rq, rp)) {
            sites[k] = s;
            descend(k + 1, rq, rp, sites, reach, out);
        }
    }
    sites[k] = 0;
}

/// Equal-weight average of `s_i` over a list of packed states.
fn flat_average<'a>(codes: impl Iterator<Item = &'a u64>, length: usize) -> ChargeProfile {
    let mut sums = vec![0i64; length];
    let mut sites = vec![0i8; length];
    let mut n = 0u64;
    for &c in codes {
        unpack_into(c, &mut sites);
        for (acc, &s) in sums.iter_mut().zip(&sites) {
            *acc += s as i64;
        }
        n += 1;
    }
    let mut profile = ChargeProfile::new(sums.iter().map(|&s| s as f64 / n as f64).collect());
    profile.sample_count = Some(n);
    profile
}

/// The maximum-entropy profile: the flat average over the whole sector.
pub fn sector_mean_profile(sector: &SymmetrySector) -> Result<ChargeProfile> {
    if sector.is_empty() {
        return Err(Error::EmptySector);
    }
    Ok(flat_average(sector.codes.iter(), sector.length))
}

/// Connected components of a sector under one gate table.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    label: SectorLabel,
    length: usize,
    width: usize,
    codes: Vec<u64>,
    component_of: Vec<u32>,
    sizes: Vec<usize>,
}

/// Machine-readable overview of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrylovSummary {
    pub length: usize,
    pub gate_width: usize,
    pub q_tot: i64,
    pub p_tot: i64,
    pub sector_size: usize,
    pub component_count: usize,
    /// Component size → number of components of that size.
    pub size_histogram: BTreeMap<usize, usize>,
    pub largest_fraction: f64,
}

impl KrylovDecomposition {
    pub fn label(&self) -> SectorLabel {
        self.label
    }

    pub fn gate_width(&self) -> usize {
        self.width
    }

    pub fn sector_size(&self) -> usize {
        self.codes.len()
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    /// Component sizes indexed by component id. Ids follow the order of each
    /// component's smallest code.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn largest_fraction(&self) -> f64 {
        let largest = self.sizes.iter().copied().max().unwrap_or(0);
        largest as f64 / self.codes.len().max(1) as f64
    }

    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &s in &self.sizes {
            *h.entry(s).or_insert(0) += 1;
        }
        h
    }

    /// Id of the component containing `state`.
    pub fn component_of(&self, state: &SpinState) -> Result<usize> {
        if state.len() != self.length {
            return Err(Error::NotInSector);
        }
        self.codes
            .binary_search(&state.pack())
            .map(|i| self.component_of[i] as usize)
            .map_err(|_| Error::NotInSector)
    }

    /// Packed members of component `id`, ascending.
    pub fn component_codes(&self, id: usize) -> Vec<u64> {
        self.codes
            .iter()
            .zip(&self.component_of)
            .filter(|(_, &c)| c as usize == id)
            .map(|(&code, _)| code)
            .collect()
    }

    pub fn component_states(&self, id: usize) -> Vec<SpinState> {
        self.component_codes(id)
            .into_iter()
            .map(|c| SpinState::unpack(c, self.length))
            .collect()
    }

    pub fn summary(&self) -> KrylovSummary {
        KrylovSummary {
            length: self.length,
            gate_width: self.width,
            q_tot: self.label.q_tot,
            p_tot: self.label.p_tot,
            sector_size: self.sector_size(),
            component_count: self.component_count(),
            size_histogram: self.size_histogram(),
            largest_fraction: self.largest_fraction(),
        }
    }
}

/// Visits every code reachable from `code` by one nontrivial gate move.
pub(crate) fn for_each_neighbor<F: FnMut(u64)>(
    code: u64,
    length: usize,
    table: &GateClassTable,
    mut visit: F,
) {
    let n = table.width();
    let window_mod = 3u64.pow(n as u32);
    for offset in 0..=length - n {
        let scale = 3u64.pow((length - offset - n) as u32);
        let w = (code / scale) % window_mod;
        let class = table.class_of_code(w as usize);
        if class.members.len() == 1 {
            continue;
        }
        for &m in &class.members {
            let m = m as u64;
            if m != w {
                visit(code - w * scale + m * scale);
            }
        }
    }
}

/// Split `sector` into components connected by single gate moves.
pub fn krylov_decompose(
    sector: &SymmetrySector,
    table: &GateClassTable,
) -> Result<KrylovDecomposition> {
    if sector.length < table.width() {
        return Err(Error::invalid(format!(
            "chain of length {} is shorter than the {}-site gate",
            sector.length,
            table.width()
        )));
    }
    const UNSEEN: u32 = u32::MAX;
    let codes = sector.codes.clone();
    let mut component_of = vec![UNSEEN; codes.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..codes.len() {
        if component_of[start] != UNSEEN {
            continue;
        }
        let id = sizes.len() as u32;
        component_of[start] = id;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(i) = queue.pop_front() {
            size += 1;
            for_each_neighbor(codes[i], sector.length, table, |next| {
                let j = codes
                    .binary_search(&next)
                    .expect("gate moves conserve (Q, P)");
                if component_of[j] == UNSEEN {
                    component_of[j] = id;
                    queue.push_back(j);
                }
            });
        }
        sizes.push(size);
    }
    Ok(KrylovDecomposition {
        label: sector.label,
        length: sector.length,
        width: table.width(),
        codes,
        component_of,
        sizes,
    })
}

/// Flat average over the component containing `representative`: the exact
/// infinite-time profile of automaton dynamics started there.
pub fn component_mean_profile(
    decomposition: &KrylovDecomposition,
    representative: &SpinState,
) -> Result<ChargeProfile> {
    let id = decomposition.component_of(representative)?;
    let length = decomposition.length;
    Ok(flat_average(
        decomposition
            .codes
            .iter()
            .zip(&decomposition.component_of)
            .filter(|(_, &c)| c as usize == id)
            .map(|(code, _)| code),
        length,
    ))
}
