//! The height-field block picture of three-site dynamics.
//!
//! In terms of `h_i`, every nontrivial three-site gate moves one unit block
//! from a column `k` to a neighbouring column `t`, and the move is allowed
//! exactly when the field keeps unit steps afterwards. That forces
//! `h_t = h_k − 1` before the move: a block slides sideways at its own height.
//! Columns `0` and `L` never change.
//!
//! A single fracton gives a one-tier field (`h ∈ {0, 1}`), which behaves as a
//! simple exclusion process. Two fractons give a two-tier field
//! (`h ∈ {0, 1, 2}`). Read as `h' = h − 1`, the columns with `h' = −1` are
//! holes and those with `h' = +1` are particles. The piston is the column
//! right after the last hole, and every hole lies to its left.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automaton::{gates_per_step, run_ensemble, EvolutionConfig};
use crate::chain::{ChargeProfile, HeightField, SpinState};
use crate::ensemble::{self, Dynamics, Engine, EnsembleResult};
use crate::error::{Error, Result};
use crate::gates::GateClassTable;
use crate::rng::{derive_seed, stream_rng, StreamRng};
use crate::sector::for_each_neighbor;

/// A height field viewed as stacked unit blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BlockState {
    field: HeightField,
}

impl BlockState {
    pub fn new(field: HeightField) -> Self {
        BlockState { field }
    }

    pub fn from_spin_state(state: &SpinState) -> Self {
        BlockState {
            field: state.to_height_field(),
        }
    }

    pub fn field(&self) -> &HeightField {
        &self.field
    }

    pub fn heights(&self) -> &[i32] {
        self.field.heights()
    }

    pub fn chain_length(&self) -> usize {
        self.field.chain_length()
    }

    /// Total block count `Σ_{i=1}^{L−1} h_i`.
    pub fn block_count(&self) -> i64 {
        self.field.area()
    }

    /// The spin string `s_i = h_i − h_{i−1}`.
    pub fn to_spin_state(&self) -> SpinState {
        self.field.to_spin_state()
    }

    pub fn to_charge_profile(&self) -> ChargeProfile {
        ChargeProfile::from_state(&self.to_spin_state())
    }

    /// Every field reachable by one legal block move.
    pub fn legal_moves(&self) -> Vec<BlockState> {
        let h = self.heights();
        let l = h.len() - 1;
        let mut out = Vec::new();
        for k in 1..l {
            for t in [k - 1, k + 1] {
                if is_legal(h, k, t) {
                    let mut next = self.clone();
                    let hm = next.field.heights_mut();
                    hm[k] -= 1;
                    hm[t] += 1;
                    out.push(next);
                }
            }
        }
        out
    }
}

/// Whether the top block of column `k` may move onto neighbouring column `t`.
#[inline]
fn is_legal(h: &[i32], k: usize, t: usize) -> bool {
    let l = h.len() - 1;
    if t == 0 || t == l || h[t] != h[k] - 1 {
        return false;
    }
    // After the move both columns sit at the old h[t] + 1 and h[k] - 1; their
    // outer neighbours must stay within one unit.
    let (outer_k, outer_t) = if t > k {
        (k - 1, t + 1)
    } else {
        (k + 1, t - 1)
    };
    (h[k] - 1 - h[outer_k]).abs() <= 1 && (h[t] + 1 - h[outer_t]).abs() <= 1
}

/// One move attempt: random interior column, random direction. Returns the
/// `(from, to)` columns of an accepted move.
#[inline]
fn attempt<R: Rng + ?Sized>(h: &mut [i32], rng: &mut R) -> Option<(usize, usize)> {
    let l = h.len() - 1;
    let k = rng.random_range(1..l);
    let t = if rng.random::<bool>() { k + 1 } else { k - 1 };
    if is_legal(h, k, t) {
        h[k] -= 1;
        h[t] += 1;
        Some((k, t))
    } else {
        None
    }
}

/// Default move attempts per time step, `round(L/3)`.
pub fn attempts_per_step(length: usize) -> usize {
    gates_per_step(length, 3)
}

/// One time step of `round(L/3)` move attempts; illegal attempts do nothing.
pub fn slide_step<R: Rng + ?Sized>(state: &BlockState, rng: &mut R) -> BlockState {
    let mut next = state.clone();
    let attempts = attempts_per_step(state.chain_length());
    let h = next.field.heights_mut();
    if h.len() > 2 {
        for _ in 0..attempts {
            attempt(h, rng);
        }
    }
    next
}

/// One fracton at site `p`: `h_i = 0` for `i < p` and `1` from `p` on.
pub fn map_single_fracton(length: usize, p: usize) -> Result<BlockState> {
    Ok(BlockState::from_spin_state(&SpinState::with_charges(
        length,
        &[p],
    )?))
}

/// A two-tier field: `h ∈ {0, 1, 2}`, `h_0 = 0`, `h_L = 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoTierState {
    block: BlockState,
}

impl TwoTierState {
    pub fn from_block_state(block: BlockState) -> Result<Self> {
        let h = block.heights();
        let l = h.len() - 1;
        if h[l] != 2 || h.iter().any(|&v| !(0..=2).contains(&v)) {
            return Err(Error::invalid(
                "a two-tier field needs 0 ≤ h ≤ 2 with h_L = 2",
            ));
        }
        let state = TwoTierState { block };
        let last_hole = state.holes().last().copied().unwrap_or(0);
        if state.particles().first().is_some_and(|&p| p <= last_hole) {
            return Err(Error::invalid("a particle lies left of a hole"));
        }
        Ok(state)
    }

    pub fn block_state(&self) -> &BlockState {
        &self.block
    }

    pub fn chain_length(&self) -> usize {
        self.block.chain_length()
    }

    /// `h'_i = h_i − 1` for columns `0..=L`.
    pub fn modified_heights(&self) -> Vec<i32> {
        self.block.heights().iter().map(|&h| h - 1).collect()
    }

    /// Interior columns with `h = 0`, ascending.
    pub fn holes(&self) -> Vec<usize> {
        self.columns_at(0)
    }

    /// Interior columns with `h = 2`, ascending.
    pub fn particles(&self) -> Vec<usize> {
        self.columns_at(2)
    }

    fn columns_at(&self, height: i32) -> Vec<usize> {
        let h = self.block.heights();
        (1..h.len() - 1).filter(|&i| h[i] == height).collect()
    }

    /// Piston column: one past the last hole, counting column 0 as a hole.
    pub fn piston(&self) -> usize {
        piston_of(self.block.heights())
    }

    /// Piston position relative to the chain centre, `piston − L/2`.
    pub fn xi(&self) -> f64 {
        self.piston() as f64 - self.chain_length() as f64 / 2.0
    }

    pub fn to_spin_state(&self) -> SpinState {
        self.block.to_spin_state()
    }

    pub fn to_charge_profile(&self) -> ChargeProfile {
        self.block.to_charge_profile()
    }
}

fn piston_of(h: &[i32]) -> usize {
    let l = h.len() - 1;
    (1..l).rev().find(|&i| h[i] == 0).unwrap_or(0) + 1
}

/// Fractons at `i1 < i2`: holes on columns `1..i1`, particles on `i2..L`.
pub fn map_two_fracton(length: usize, i1: usize, i2: usize) -> Result<TwoTierState> {
    if i1 >= i2 {
        return Err(Error::invalid(format!(
            "two-fracton sites must satisfy i1 < i2, got {i1} and {i2}"
        )));
    }
    let s = SpinState::with_charges(length, &[i1, i2])?;
    TwoTierState::from_block_state(BlockState::from_spin_state(&s))
}

/// One two-tier time step. This is [`slide_step`] on the underlying field.
pub fn two_tier_step<R: Rng + ?Sized>(state: &TwoTierState, rng: &mut R) -> TwoTierState {
    TwoTierState {
        block: slide_step(&state.block, rng),
    }
}

struct BlockDynamics {
    initial: Vec<i32>,
    attempts: usize,
}

impl Dynamics for BlockDynamics {
    type State = Vec<i32>;

    fn length(&self) -> usize {
        self.initial.len() - 1
    }

    fn initial_state(&self) -> Vec<i32> {
        self.initial.clone()
    }

    fn advance(&self, h: &mut Vec<i32>, rng: &mut StreamRng) {
        for _ in 0..self.attempts {
            attempt(h, rng);
        }
    }

    fn charges(&self, h: &Vec<i32>, out: &mut [i8]) {
        for (o, w) in out.iter_mut().zip(h.windows(2)) {
            *o = (w[1] - w[0]) as i8;
        }
    }
}

/// Run an ensemble with the block engine. `config.gate_width` must be 3;
/// each step makes `round(L/3)` move attempts.
pub fn run_block_ensemble(config: &EvolutionConfig) -> Result<EnsembleResult> {
    config.validate()?;
    if config.gate_width != 3 {
        return Err(Error::invalid(
            "the block engine models three-site gates only",
        ));
    }
    let dynamics = BlockDynamics {
        initial: config.initial_state.to_height_field().heights().to_vec(),
        attempts: attempts_per_step(config.length()),
    };
    let schedule = config.schedule();
    let (profiles, time_average) = ensemble::sample(&dynamics, &schedule)?;
    let mut settings = BTreeMap::new();
    settings.insert("attempts_per_step".into(), dynamics.attempts.into());
    Ok(EnsembleResult {
        engine: Engine::Blocks,
        length: config.length(),
        initial_state: config.initial_state.clone(),
        settings,
        schedule,
        profiles,
        time_average,
    })
}

/// Block steps matching `automaton_steps` three-site automaton steps.
///
/// A particular legal move is proposed with probability `1/(2(L−2))` per
/// gate and `1/(2(L−1))` per block attempt, and both engines make
/// `round(L/3)` proposals per step, so block time runs `(L−1)/(L−2)` times
/// faster. Exact only when `automaton_steps` is a multiple of `L − 2`.
pub fn matched_block_steps(length: usize, automaton_steps: u64) -> Result<u64> {
    let (num, den) = (length as u64 - 1, length as u64 - 2);
    if !automaton_steps.is_multiple_of(den) {
        return Err(Error::invalid(format!(
            "automaton time {automaton_steps} is not a multiple of L − 2 = {den}"
        )));
    }
    Ok(automaton_steps / den * num)
}

/// Edge-by-edge comparison of the three-site gate graph and the block move
/// graph over all `3^L` states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoveGraphReport {
    pub length: usize,
    pub states: usize,
    /// Directed edges of the gate graph.
    pub edges: usize,
    /// States whose neighbour sets differ, as spin strings.
    pub mismatches: Vec<String>,
}

/// Compare one-move neighbourhoods of every state of length `length ≤ 12`.
pub fn compare_move_graphs(length: usize) -> Result<MoveGraphReport> {
    if !(3..=12).contains(&length) {
        return Err(Error::invalid(format!(
            "exhaustive move-graph comparison needs 3 ≤ L ≤ 12, got {length}"
        )));
    }
    let table = GateClassTable::build(3)?;
    let states = 3usize.pow(length as u32);
    let mut report = MoveGraphReport {
        length,
        states,
        edges: 0,
        mismatches: Vec::new(),
    };
    for code in 0..states as u64 {
        let mut by_gate = Vec::new();
        for_each_neighbor(code, length, &table, |c| by_gate.push(c));
        let state = SpinState::unpack(code, length);
        let mut by_block: Vec<u64> = BlockState::from_spin_state(&state)
            .legal_moves()
            .iter()
            .map(|b| b.to_spin_state().pack())
            .collect();
        report.edges += by_gate.len();
        by_gate.sort_unstable();
        by_block.sort_unstable();
        if by_gate != by_block {
            report.mismatches.push(state.to_string());
        }
    }
    Ok(report)
}

/// Site-wise comparison of the two engines at matched times.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub length: usize,
    /// `(automaton step, block step)` pairs compared.
    pub matched_times: Vec<(u64, u64)>,
    pub max_abs_deviation: f64,
    /// Largest `|Δ| / sqrt(σ_a² + σ_b²)` over sites with nonzero error.
    pub max_z: f64,
    /// Sites (over all times) where `|Δ|` exceeds three combined errors.
    pub outliers: Vec<(u64, usize, f64)>,
    pub site_comparisons: usize,
}

impl EquivalenceReport {
    pub fn is_consistent(&self) -> bool {
        self.outliers.is_empty()
    }
}

/// Run both engines from `initial` and compare profiles at the automaton
/// times `snapshots`, each a multiple of `L − 2`.
pub fn equivalence_check(
    initial: &SpinState,
    snapshots: &[u64],
    n_realizations: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    let length = initial.len();
    if length < 4 {
        return Err(Error::invalid("equivalence check needs L ≥ 4"));
    }
    let block_times = snapshots
        .iter()
        .map(|&t| matched_block_steps(length, t))
        .collect::<Result<Vec<_>>>()?;
    let last = |v: &[u64]| v.last().copied().unwrap_or(0);
    let spin_cfg = EvolutionConfig::new(initial.clone(), 3)
        .steps(last(snapshots))
        .record(snapshots.to_vec())
        .realizations(n_realizations)
        .seed(derive_seed(seed, 1));
    let block_cfg = EvolutionConfig::new(initial.clone(), 3)
        .steps(last(&block_times))
        .record(block_times.clone())
        .realizations(n_realizations)
        .seed(derive_seed(seed, 2));
    let spins = run_ensemble(&spin_cfg)?;
    let blocks = run_block_ensemble(&block_cfg)?;

    let mut report = EquivalenceReport {
        length,
        matched_times: snapshots
            .iter()
            .copied()
            .zip(block_times.iter().copied())
            .collect(),
        max_abs_deviation: 0.0,
        max_z: 0.0,
        outliers: Vec::new(),
        site_comparisons: 0,
    };
    for &(ta, tb) in &report.matched_times.clone() {
        let a = &spins.profiles[&ta];
        let b = &blocks.profiles[&tb];
        for i in 1..=length {
            let d = (a.at(i) - b.at(i)).abs();
            let sigma = a.stderr_at(i).hypot(b.stderr_at(i));
            report.site_comparisons += 1;
            report.max_abs_deviation = report.max_abs_deviation.max(d);
            if sigma > 0.0 {
                report.max_z = report.max_z.max(d / sigma);
            }
            if d > 3.0 * sigma {
                report.outliers.push((ta, i, d));
            }
        }
    }
    Ok(report)
}

/// Piston visit and hop counts, keyed by piston column.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PistonCounts {
    /// Move attempts made while the piston sat at each column.
    pub occupancy: BTreeMap<usize, u64>,
    /// Hops from each column one step right.
    pub up: BTreeMap<usize, u64>,
    /// Hops from each column one step left.
    pub down: BTreeMap<usize, u64>,
}

impl PistonCounts {
    fn merge(mut self, other: &PistonCounts) -> Self {
        for (map, from) in [
            (&mut self.occupancy, &other.occupancy),
            (&mut self.up, &other.up),
            (&mut self.down, &other.down),
        ] {
            for (&k, &v) in from {
                *map.entry(k).or_insert(0) += v;
            }
        }
        self
    }

    /// Empirical `rate(c+1 → c) / rate(c → c+1)`, rates per attempt.
    pub fn rate_ratio(&self, column: usize) -> Option<f64> {
        let get = |m: &BTreeMap<usize, u64>, k: usize| m.get(&k).copied().unwrap_or(0) as f64;
        let up = get(&self.up, column) / get(&self.occupancy, column);
        let down = get(&self.down, column + 1) / get(&self.occupancy, column + 1);
        let r = down / up;
        r.is_finite().then_some(r)
    }
}

/// Stationary piston statistics of a two-fracton chain.
#[derive(Debug, Clone, Serialize)]
pub struct PistonStatistics {
    pub length: usize,
    pub i1: usize,
    pub i2: usize,
    /// Counts per independent group of realizations.
    pub groups: Vec<PistonCounts>,
}

impl PistonStatistics {
    pub fn total(&self) -> PistonCounts {
        self.groups
            .iter()
            .fold(PistonCounts::default(), |acc, g| acc.merge(g))
    }

    /// Hop-rate ratio at `column` with a delete-one-group jackknife error.
    pub fn rate_ratio(&self, column: usize) -> Option<(f64, f64)> {
        let total = self.total();
        let estimate = total.rate_ratio(column)?;
        let g = self.groups.len();
        if g < 2 {
            return Some((estimate, f64::NAN));
        }
        let mut leave_out = Vec::with_capacity(g);
        for skip in 0..g {
            let partial = self
                .groups
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .fold(PistonCounts::default(), |acc, (_, c)| acc.merge(c));
            leave_out.push(partial.rate_ratio(column)?);
        }
        let mean = leave_out.iter().sum::<f64>() / g as f64;
        let var =
            leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g as f64 - 1.0) / g as f64;
        Some((estimate, var.sqrt()))
    }

    /// Piston column that sits at `xi` relative to `L/2`.
    pub fn column_of_xi(&self, xi: i64) -> usize {
        (xi + self.length as i64 / 2) as usize
    }
}

/// Parameters of a stationary piston measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PistonRun {
    pub length: usize,
    pub i1: usize,
    pub i2: usize,
    /// Steps discarded before counting.
    pub burn_in: u64,
    /// Steps counted after burn-in.
    pub n_steps: u64,
    pub n_realizations: u64,
    pub n_groups: usize,
    pub seed: u64,
}

/// Sample piston hops from the two-fracton state `(i1, i2)`.
///
/// Each realization runs `burn_in` steps, then counts over `n_steps` steps.
/// Realizations are split into `n_groups` contiguous groups for error bars.
pub fn piston_statistics(run: &PistonRun) -> Result<PistonStatistics> {
    let PistonRun {
        length,
        i1,
        i2,
        burn_in,
        n_steps,
        n_realizations,
        n_groups,
        seed,
    } = *run;
    let start = map_two_fracton(length, i1, i2)?;
    if n_groups == 0 || n_realizations < n_groups as u64 {
        return Err(Error::invalid("need at least one realization per group"));
    }
    let attempts = attempts_per_step(length);
    let initial = start.block_state().heights().to_vec();
    let groups = (0..n_groups)
        .into_par_iter()
        .map(|g| {
            let lo = n_realizations * g as u64 / n_groups as u64;
            let hi = n_realizations * (g as u64 + 1) / n_groups as u64;
            let mut counts = PistonCounts::default();
            for j in lo..hi {
                run_piston(&initial, attempts, burn_in, n_steps, seed, j, &mut counts);
            }
            counts
        })
        .collect();
    Ok(PistonStatistics {
        length,
        i1,
        i2,
        groups,
    })
}

fn run_piston(
    initial: &[i32],
    attempts: usize,
    burn_in: u64,
    n_steps: u64,
    seed: u64,
    stream: u64,
    counts: &mut PistonCounts,
) {
    let mut rng = stream_rng(seed, stream);
    let mut h = initial.to_vec();
    for _ in 0..burn_in * attempts as u64 {
        attempt(&mut h, &mut rng);
    }
    let l = h.len() - 1;
    let mut occupancy = vec![0u64; l + 1];
    let mut up = vec![0u64; l + 1];
    let mut down = vec![0u64; l + 1];
    let mut last_hole = piston_of(&h) - 1;
    for _ in 0..n_steps * attempts as u64 {
        let piston = last_hole + 1;
        occupancy[piston] += 1;
        if let Some((k, t)) = attempt(&mut h, &mut rng) {
            // A slide from k to t carries a hole from t to k exactly when h_k
            // drops to zero.
            if h[k] == 0 && t == last_hole {
                last_hole = k;
                if k > t {
                    up[piston] += 1;
                } else {
                    down[piston] += 1;
                }
            }
        }
        debug_assert_eq!(last_hole + 1, piston_of(&h));
    }
    let add = |map: &mut BTreeMap<usize, u64>, v: &[u64]| {
        for (c, &n) in v.iter().enumerate().filter(|(_, &n)| n > 0) {
            *map.entry(c).or_insert(0) += n;
        }
    };
    add(&mut counts.occupancy, &occupancy);
    add(&mut counts.up, &up);
    add(&mut counts.down, &down);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(h: &[i32]) -> BlockState {
        BlockState::new(HeightField::new(h.to_vec()).unwrap())
    }

    #[test]
    fn single_fracton_block_counts() {
        assert_eq!(map_single_fracton(51, 26).unwrap().block_count(), 25);
        assert_eq!(map_single_fracton(51, 51).unwrap().block_count(), 0);
        assert_eq!(map_single_fracton(51, 1).unwrap().block_count(), 50);
    }

    #[test]
    fn packed_tier_only_moves_its_leftmost_block() {
        // Blocks on columns 4..L−1; only the block on column 4 can slide (left).
        let b = map_single_fracton(9, 4).unwrap();
        let moves = b.legal_moves();
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].heights(), &[0, 0, 0, 1, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn isolated_block_moves_both_ways() {
        let b = field(&[0, 0, 0, 1, 0, 0, 1]);
        let moves: Vec<Vec<i32>> = b
            .legal_moves()
            .iter()
            .map(|m| m.heights().to_vec())
            .collect();
        assert!(moves.contains(&vec![0, 0, 1, 0, 0, 0, 1]));
        assert!(moves.contains(&vec![0, 0, 0, 0, 1, 0, 1]));
    }

    #[test]
    fn slide_step_preserves_area_and_steps() {
        let mut rng = stream_rng(4, 0);
        let mut b = map_single_fracton(21, 11).unwrap();
        for _ in 0..500 {
            b = slide_step(&b, &mut rng);
            assert_eq!(b.block_count(), 10);
            assert!(b.heights().iter().all(|&h| h == 0 || h == 1));
            assert_eq!(b.heights()[0], 0);
            assert_eq!(b.heights()[21], 1);
        }
    }

    #[test]
    fn two_fracton_layout() {
        let t = map_two_fracton(12, 4, 8).unwrap();
        assert_eq!(
            t.block_state().heights(),
            &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2]
        );
        assert_eq!(t.holes(), vec![1, 2, 3]);
        assert_eq!(t.particles(), vec![8, 9, 10, 11]);
        assert_eq!(t.piston(), 4);
        assert_eq!(
            t.to_spin_state(),
            SpinState::with_charges(12, &[4, 8]).unwrap()
        );
        let adjacent = map_two_fracton(12, 6, 7).unwrap();
        assert_eq!(adjacent.piston(), 6);
        assert_eq!(adjacent.particles()[0], 7);
        assert!(map_two_fracton(12, 7, 7).is_err());
    }

    #[test]
    fn piston_next_to_particle_cannot_step_right() {
        // Piston at column 3, particle at column 4: the last hole (column 2)
        // cannot hop to 3 because that would make h = 0 beside h = 2.
        let t = TwoTierState::from_block_state(field(&[0, 0, 0, 1, 2, 2])).unwrap();
        assert_eq!(t.piston(), 3);
        let moves = t.block_state().legal_moves();
        assert!(moves.iter().all(|m| piston_of(m.heights()) <= t.piston()));
    }

    #[test]
    fn two_tier_ordering_holds_along_a_trajectory() {
        let mut rng = stream_rng(8, 0);
        let mut t = map_two_fracton(31, 9, 23).unwrap();
        for _ in 0..2000 {
            t = two_tier_step(&t, &mut rng);
            let state = TwoTierState::from_block_state(t.block_state().clone()).unwrap();
            assert_eq!(
                state.to_spin_state().sector(),
                SpinState::with_charges(31, &[9, 23]).unwrap().sector()
            );
        }
    }

    #[test]
    fn matched_steps() {
        assert_eq!(matched_block_steps(31, 29).unwrap(), 30);
        assert_eq!(matched_block_steps(31, 116).unwrap(), 120);
        assert!(matched_block_steps(31, 30).is_err());
    }

    #[test]
    fn vacuum_engines_agree_exactly() {
        let r = equivalence_check(&SpinState::vacuum(12), &[0, 10, 20], 20, 1).unwrap();
        assert_eq!(r.max_abs_deviation, 0.0);
        assert!(r.is_consistent());
    }

    #[test]
    fn piston_counts_are_consistent() {
        let s = piston_statistics(&PistonRun {
            length: 16,
            i1: 5,
            i2: 12,
            burn_in: 50,
            n_steps: 200,
            n_realizations: 8,
            n_groups: 4,
            seed: 3,
        })
        .unwrap();
        let total = s.total();
        let hops: u64 = total.up.values().sum::<u64>() + total.down.values().sum::<u64>();
        assert!(hops > 0);
        let attempts: u64 = total.occupancy.values().sum();
        assert_eq!(attempts, 8 * 200 * attempts_per_step(16) as u64);
    }

    #[test]
    fn move_graphs_coincide_at_small_length() {
        let r = compare_move_graphs(5).unwrap();
        assert_eq!(r.states, 243);
        assert!(r.edges > 0);
        assert!(r.mismatches.is_empty(), "{:?}", r.mismatches);
        assert!(compare_move_graphs(2).is_err());
    }
}
