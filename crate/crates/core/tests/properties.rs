use fracton::analytic::{continuum_moments, two_fracton_final_profile, TwoFractonGeometry};
use fracton::automaton::evolve_one_step;
use fracton::blocks::{slide_step, BlockState};
use fracton::chain::{ChargeProfile, HeightField, SectorLabel, SpinState};
use fracton::gates::{GateClassTable, GatePlacement};
use fracton::maxent::{is_interior, residuals, solve_multipliers};
use fracton::rng::stream_rng;
use fracton::sector::enumerate_sector;
use proptest::prelude::*;

fn spins(max_len: usize) -> impl Strategy<Value = SpinState> {
    prop::collection::vec(-1i8..=1, 1..=max_len).prop_map(|v| SpinState::new(v).unwrap())
}

proptest! {
    #[test]
    fn heights_round_trip(s in spins(60)) {
        let field = s.to_height_field();
        prop_assert_eq!(field.heights()[0], 0);
        prop_assert_eq!(SpinState::from_height_field(&field), s.clone());
        prop_assert_eq!(s.to_string().parse::<SpinState>().unwrap(), s.clone());
    }

    #[test]
    fn area_identity(s in spins(60)) {
        let field = s.to_height_field();
        let l = s.len() as i64;
        prop_assert_eq!(field.area(), l * s.total_charge() - s.dipole_moment());
    }

    #[test]
    fn pack_round_trip(s in spins(40)) {
        prop_assert_eq!(SpinState::unpack(s.pack(), s.len()), s);
    }

    #[test]
    fn classes_share_charge_and_dipole(width in 3usize..=4) {
        let table = GateClassTable::build(width).unwrap();
        for class in table.classes() {
            let labels: Vec<SectorLabel> = class
                .members
                .iter()
                .map(|&m| SpinState::unpack(m as u64, width).sector())
                .collect();
            prop_assert!(labels.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn single_gates_conserve(s in spins(30), width in 3usize..=4, seed: u64, start_frac in 0.0f64..1.0) {
        prop_assume!(s.len() >= width);
        let table = GateClassTable::build(width).unwrap();
        let start = 1 + ((s.len() - width + 1) as f64 * start_frac) as usize;
        let placement = GatePlacement::new(start.min(s.len() - width + 1), s.len(), width).unwrap();
        let mut rng = stream_rng(seed, 0);
        let next = table.apply_random_gate(&s, placement, &mut rng).unwrap();
        prop_assert_eq!(next.sector(), s.sector());
        let (a, b) = (placement.start() - 1, placement.start() - 1 + width);
        prop_assert_eq!(&next.sites()[..a], &s.sites()[..a]);
        prop_assert_eq!(&next.sites()[b..], &s.sites()[b..]);
    }

    #[test]
    fn block_slides_conserve_area(s in spins(30), seed: u64) {
        prop_assume!(s.len() >= 3);
        let mut b = BlockState::from_spin_state(&s);
        let area = b.field().area();
        let mut rng = stream_rng(seed, 1);
        for _ in 0..50 {
            b = slide_step(&b, &mut rng);
            prop_assert_eq!(b.field().area(), area);
            prop_assert!(HeightField::new(b.heights().to_vec()).is_ok());
        }
        prop_assert_eq!(b.to_spin_state().sector(), s.sector());
    }

    #[test]
    fn enumerated_sectors_are_closed_and_sorted(l in 3usize..=9, q in -3i64..=3, p in -12i64..=12) {
        let label = SectorLabel::new(q, p);
        match enumerate_sector(l, label) {
            Ok(sector) => {
                prop_assert!(sector.codes().windows(2).all(|w| w[0] < w[1]));
                for s in sector.states() {
                    prop_assert_eq!(s.sector(), label);
                }
            }
            Err(e) => prop_assert!(!e.is_numerical()),
        }
    }

    #[test]
    fn interior_sectors_solve(l in 6usize..=30, q in -4i64..=4, shift in -0.8f64..0.8) {
        let centre = q as f64 * (l as f64 + 1.0) / 2.0;
        let p = (centre + shift * l as f64).round() as i64;
        let label = SectorLabel::new(q, p);
        prop_assume!(is_interior(l, label));
        let m = solve_multipliers(l, label).unwrap();
        let (rq, rp) = residuals(l, label, m);
        prop_assert!(rq.abs() < 1e-10 && rp.abs() < 1e-10);
    }

    #[test]
    fn analytic_profile_conserves(delta in 8.0f64..60.0, extra in 6.0f64..60.0) {
        let geom = TwoFractonGeometry::new(delta + extra, delta).unwrap();
        let m = continuum_moments(&geom).unwrap();
        prop_assert!((m.charge - 2.0).abs() < 1e-6, "{m:?}");
        prop_assert!(m.dipole.abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn discrete_analytic_profile_is_symmetric(l in 20usize..90, frac in 0.3f64..0.7) {
        let d = ((l as f64 * frac) as usize).max(4);
        let i1 = (l + 1 - d) / 2;
        let geom = TwoFractonGeometry::from_sites(l, i1, i1 + d).unwrap();
        let p = two_fracton_final_profile(&geom).unwrap();
        if (2 * i1 + d) == l + 1 {
            for i in 1..=l {
                prop_assert!((p.at(i) - p.at(l + 1 - i)).abs() < 1e-9);
            }
        }
        prop_assert!(p.mean_charge.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn profile_csv_round_trips(v in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let p = ChargeProfile::new(v);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = ChargeProfile::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn long_automaton_runs_conserve() {
    for width in [3, 4] {
        let table = GateClassTable::build(width).unwrap();
        let mut s = SpinState::with_charges(20, &[4, 9, 15]).unwrap();
        let label = s.sector();
        let mut rng = stream_rng(99, width as u64);
        // 20 000 steps of round(L/n) gates: over 10^5 gate applications.
        for _ in 0..20_000 {
            s = evolve_one_step(&s, &table, &mut rng).unwrap();
        }
        assert_eq!(s.sector(), label);
    }
}
