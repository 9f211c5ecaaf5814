mod common;

use std::collections::{BTreeMap, HashMap};

use common::*;
use fracton::analytic::{
    boundary_charge, detailed_balance_ratio, single_fracton_final, two_fracton_final_profile,
    TwoFractonGeometry,
};
use fracton::chain::{SectorLabel, SpinState};
use fracton::gates::GateClassTable;
use fracton::maxent::{linearized_multipliers_exact, residuals, solve_multipliers};
use fracton::sector::{
    component_mean_profile, enumerate_sector, krylov_decompose, sector_mean_profile,
};
use num_rational::Ratio;

#[test]
fn gate_classes_match_grouping_by_charges() {
    for n in 3..=4 {
        let table = GateClassTable::build(n).unwrap();
        let brute = brute_gate_classes(n);
        assert_eq!(table.classes().len(), brute.len());
        for class in &brute {
            let ids: Vec<usize> = class.iter().map(|s| table.class_of(s)).collect();
            assert!(ids.windows(2).all(|w| w[0] == w[1]), "{class:?}");
            assert_eq!(table.classes()[ids[0]].members.len(), class.len());
        }
    }
    let h = GateClassTable::build(4).unwrap().size_histogram();
    assert_eq!(h, BTreeMap::from([(1, 26), (2, 14), (3, 9)]));
}

#[test]
fn sector_profiles_match_full_scan() {
    for (l, q, p) in [
        (6, 0, 0),
        (7, 1, 4),
        (8, 2, 9),
        (9, -1, -5),
        (10, 2, 11),
        (10, 0, 3),
    ] {
        let sector = enumerate_sector(l, SectorLabel::new(q, p)).unwrap();
        let (size, mean) = brute_sector_profile(l, q, p);
        assert_eq!(sector.len(), size, "L={l} ({q},{p})");
        let prof = sector_mean_profile(&sector).unwrap();
        for (a, b) in prof.mean_charge.iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

fn check_components(l: usize, n: usize) {
    let strings = all_strings(l);
    let brute = brute_components(l, n);
    let table = GateClassTable::build(n).unwrap();
    let mut by_sector: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, s) in strings.iter().enumerate() {
        by_sector.entry((charge(s), dipole(s))).or_default().push(i);
    }
    for ((q, p), members) in by_sector {
        let sector = enumerate_sector(l, SectorLabel::new(q, p)).unwrap();
        let d = krylov_decompose(&sector, &table).unwrap();
        // Same partition: brute ids and library ids determine each other.
        let mut forward = HashMap::new();
        let mut backward = HashMap::new();
        for &i in &members {
            let state = SpinState::new(strings[i].clone()).unwrap();
            let id = d.component_of(&state).unwrap();
            assert_eq!(*forward.entry(brute[i]).or_insert(id), id);
            assert_eq!(*backward.entry(id).or_insert(brute[i]), brute[i]);
        }
        assert_eq!(forward.len(), d.component_count());
    }
}

#[test]
fn krylov_components_match_union_find() {
    for l in 3..=10 {
        check_components(l, 3);
    }
    for l in 4..=8 {
        check_components(l, 4);
    }
}

#[test]
fn single_fracton_component_is_the_one_tier_set() {
    let table = GateClassTable::build(3).unwrap();
    for (l, p) in [(9, 5), (10, 4), (11, 6), (12, 9)] {
        let state = SpinState::with_charges(l, &[p]).unwrap();
        let d = krylov_decompose(&enumerate_sector(l, state.sector()).unwrap(), &table).unwrap();
        let id = d.component_of(&state).unwrap();
        assert_eq!(d.sizes()[id] as f64, binom(l as i64 - 1, (l - p) as i64));
        for s in d.component_states(id) {
            assert!(s
                .to_height_field()
                .heights()
                .iter()
                .all(|&h| h == 0 || h == 1));
        }
        let flat = component_mean_profile(&d, &state).unwrap();
        let closed = single_fracton_final(l, p).unwrap();
        for (a, b) in flat.mean_charge.iter().zip(&closed.mean_charge) {
            assert!((a - b).abs() < 1e-12, "L={l} p={p}");
        }
    }
}

#[test]
fn two_fracton_component_matches_the_two_tier_count_and_profile() {
    let table = GateClassTable::build(3).unwrap();
    for (l, i1, i2) in [(10, 3, 8), (12, 4, 9), (12, 2, 11), (13, 4, 10)] {
        let state = SpinState::with_charges(l, &[i1, i2]).unwrap();
        let d = krylov_decompose(&enumerate_sector(l, state.sector()).unwrap(), &table).unwrap();
        let id = d.component_of(&state).unwrap();
        let count: f64 = exact_piston_weights(l, i1, i2).values().sum();
        assert_eq!(d.sizes()[id] as f64, count, "L={l}");
        let flat = component_mean_profile(&d, &state).unwrap();
        let exact = exact_two_fracton_profile(l, i1, i2);
        for (a, b) in flat.mean_charge.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12, "L={l}");
        }
    }
}

#[test]
fn appendix_profile_tracks_the_exact_stationary_profile() {
    let (l, i1, i2) = (80, 20, 60);
    let exact = exact_two_fracton_profile(l, i1, i2);
    let geom = TwoFractonGeometry::from_sites(l, i1, i2).unwrap();
    let analytic = two_fracton_final_profile(&geom).unwrap();
    let interior = 1..l - 1;
    let worst = interior
        .clone()
        .map(|k| (exact[k] - analytic.mean_charge[k]).abs())
        .fold(0.0, f64::max);
    assert!(worst < 2e-3, "{worst}");
    let peak = |v: &[f64]| interior.clone().map(|k| v[k]).fold(f64::MIN, f64::max);
    assert!((peak(&exact) - peak(&analytic.mean_charge)).abs() / peak(&exact) < 0.01);
    // The Gaussian piston weight at the centre sets the peak height.
    let (lf, d) = (l as f64, (i2 - i1) as f64);
    let w0 = (2.0 * (lf - d) / (d * lf * std::f64::consts::PI)).sqrt();
    assert!(
        (peak(&analytic.mean_charge) - w0 * (lf - d) / 2.0 * lf / (lf * lf / 4.0)).abs() < 1e-3
    );
    assert!((boundary_charge(&geom).unwrap() - exact[0]).abs() < 0.01);
}

#[test]
fn piston_ratio_formula_tracks_exact_weights() {
    let (l, i1, i2) = (40, 11, 31);
    let w = exact_piston_weights(l, i1, i2);
    let geom = TwoFractonGeometry::new(40.0, 20.0).unwrap();
    for xi in -3i64..=3 {
        let c = (xi + 20) as usize;
        let exact = w[&c] / w[&(c + 1)];
        let formula = detailed_balance_ratio(&geom, xi as f64).unwrap();
        assert!(
            (exact - formula).abs() < 0.025,
            "ξ={xi}: {exact} vs {formula}"
        );
        // Both rise through 1 at the centre.
        assert_eq!(exact.partial_cmp(&1.0), formula.partial_cmp(&1.0));
    }
}

#[test]
fn linearized_multipliers_reproduce_the_closed_form() {
    // To first order ⟨s_i⟩ = (2/3)(λ_Q + x_i λ_P); solve the 2×2 system.
    let (l, q, p) = (14i64, 2i64, 7i64);
    let s0 = l;
    let s1: i64 = (1..=l).sum();
    let s2: i64 = (1..=l).map(|x| x * x).sum();
    let det = s0 * s2 - s1 * s1;
    let lq = Ratio::new(3 * (s2 * q - s1 * p), 2 * det);
    let lp = Ratio::new(3 * (s0 * p - s1 * q), 2 * det);
    let got = linearized_multipliers_exact(l as usize, SectorLabel::new(q, p)).unwrap();
    assert_eq!(got, (lq, lp));
    assert_eq!(got, (Ratio::new(111, 182), Ratio::new(-144, 2730)));
}

#[test]
fn solved_multipliers_satisfy_the_constraints() {
    for (l, q, p) in [(14, 2, 7), (20, 3, 40), (9, -2, -3)] {
        let label = SectorLabel::new(q, p);
        let m = solve_multipliers(l, label).unwrap();
        let (rq, rp) = residuals(l, label, m);
        assert!(rq.abs() < 1e-10 && rp.abs() < 1e-10);
    }
}
