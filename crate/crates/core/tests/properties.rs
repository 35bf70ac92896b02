//! Invariants over random small instances.

use glassorder_core::exact::{self, PairTable};
use glassorder_core::hamiltonian::gauge_transform;
use glassorder_core::mc::{McConfig, McRunner};
use glassorder_core::order::{self, BoundaryObjective};
use glassorder_core::verify::{block_sample, BlockGeometry};
use glassorder_core::{BoundaryConfig, DisorderRealization, Lattice, Model, SpinConfig};
use proptest::prelude::*;

fn realization(lat: &Lattice, vals: &[f64]) -> DisorderRealization {
    let nb = lat.bonds().len();
    let nu = lat.n_boundary();
    let n = lat.n_sites();
    let pick = |i: usize| vals[i % vals.len()];
    DisorderRealization::from_parts(
        lat,
        (0..nb).map(pick).collect(),
        (nb..nb + nu).map(pick).collect(),
        (0..n).map(|i| 0.5 * pick(nb + nu + i)).collect(),
    )
    .unwrap()
}

/// Small lattices: chains of 2..=6 sites, or 2×2.
fn small_lattice() -> impl Strategy<Value = Lattice> {
    prop_oneof![(2usize..=6).prop_map(|l| Lattice::new(1, l).unwrap()), Just(Lattice::new(2, 2).unwrap())]
}

fn model_strategy() -> impl Strategy<Value = Model> {
    (small_lattice(), prop::collection::vec(-1.5f64..1.5, 24), prop::collection::vec(-1.0f64..1.0, 8))
        .prop_map(|(lat, vals, b)| {
            let d = realization(&lat, &vals);
            let bc = BoundaryConfig::new(b.iter().cycle().take(lat.n_boundary()).copied().collect()).unwrap();
            Model::new(lat, d, bc).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauge_preserves_every_energy(m in model_strategy(), mask in any::<u32>()) {
        let n = m.n_sites();
        let eps: Vec<i8> = (0..n).map(|x| if (mask >> x) & 1 == 1 { 1 } else { -1 }).collect();
        for s in 0..(1u64 << n) {
            let c = SpinConfig::from_index(s, n);
            let (m2, c2) = gauge_transform(&m, &c, &eps).unwrap();
            prop_assert_eq!(m.energy1(&c).unwrap().to_bits(), m2.energy1(&c2).unwrap().to_bits());
        }
    }

    #[test]
    fn pair_free_energy_is_convex_in_coupling(m in model_strategy(), beta in 0.1f64..3.0, lam in -1.0f64..1.0) {
        let t = PairTable::new(&m, beta).unwrap();
        let h = 1e-2;
        let sd = t.log_z2(lam + h) + t.log_z2(lam - h) - 2.0 * t.log_z2(lam);
        prop_assert!(sd >= -1e-9, "second difference {sd}");
        let (r, r2) = t.overlap_moments(lam);
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!(r2 >= r * r - 1e-12 && r2 <= 1.0 + 1e-12);
        let (r_hi, _) = t.overlap_moments(lam + 0.1);
        prop_assert!(r_hi >= r - 1e-12);
    }

    #[test]
    fn three_replica_symmetries(m in model_strategy(), beta in 0.1f64..3.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let t = PairTable::new(&m, beta).unwrap();
        prop_assert_eq!(t.log_z3(a, b).to_bits(), t.log_z3(b, a).to_bits());
        let chain = t.log_z1() + t.log_z2(a);
        prop_assert!((t.log_z3(a, 0.0) - chain).abs() <= 1e-12 * chain.abs().max(1.0));
    }

    #[test]
    fn finite_size_three_replica_inequality(m in model_strategy(), beta in 0.1f64..4.0, lam in 1e-3f64..0.5) {
        let t = PairTable::new(&m, beta).unwrap();
        let s = order::lrsb_sample(&t, lam);
        prop_assert!(s.quotient >= s.overlap_difference_at_zero - 1e-9,
            "quotient {} below {}", s.quotient, s.overlap_difference_at_zero);
        prop_assert!(s.quotient <= s.overlap_difference + 1e-9);
    }

    #[test]
    fn independent_enumerators_agree(m in model_strategy(), beta in 0.05f64..3.0) {
        let a = exact::log_z1(&m, beta).unwrap().log_z;
        let b = exact::site_stats(&m, beta, false).unwrap().log_z;
        let c = PairTable::new(&m, beta).unwrap().log_z1();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!((a - c).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn best_corner_dominates_every_corner(vals in prop::collection::vec(-1.5f64..1.5, 24), beta in 0.1f64..3.0, mask in 0u64..256) {
        let lat = Lattice::new(2, 2).unwrap();
        let d = realization(&lat, &vals);
        let obj = BoundaryObjective::new(&lat, &d, beta).unwrap();
        let (_, best) = obj.best_corner();
        let other = obj.value(&BoundaryConfig::corner(mask, 8).b);
        prop_assert!(best >= other);
        prop_assert!((0.0..=1.0).contains(&best));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conditional_block_decomposition(vals in prop::collection::vec(-1.5f64..1.5, 32), beta in 0.2f64..2.5) {
        let lat = Lattice::new(1, 8).unwrap();
        let d = realization(&lat, &vals);
        let g = BlockGeometry::new(1, 8, 2).unwrap();
        let s = block_sample(&lat, &d, &g, beta).unwrap();
        prop_assert!(s.identity_error.unwrap() < 1e-10);
        prop_assert!(s.conditional_slack.unwrap() >= -1e-10);
        prop_assert!(s.corner_slack.unwrap() >= -1e-10);
        prop_assert!(s.summed_bound >= s.total - 1e-10);
    }

    #[test]
    fn checkpoint_resume_is_exact(stop in 1u64..300, seed in any::<u64>(), vals in prop::collection::vec(-1.0f64..1.0, 24)) {
        let lat = Lattice::new(2, 3).unwrap();
        let m = Model::open(lat.clone(), realization(&lat, &vals)).unwrap();
        let cfg = McConfig {
            beta_ladder: vec![0.4, 0.9],
            n_sweeps: 300,
            n_therm: 50,
            measure_every: 2,
            lambda: 0.1,
            seed,
            swap_every: 3,
        };
        let mut whole = McRunner::new(&cfg, &m).unwrap();
        whole.run_sweeps(u64::MAX);
        let mut part = McRunner::new(&cfg, &m).unwrap();
        part.run_sweeps(stop);
        let bytes = part.checkpoint();
        let mut resumed = McRunner::from_checkpoint(&bytes, &cfg, &m).unwrap();
        resumed.run_sweeps(u64::MAX);
        prop_assert_eq!(whole.checkpoint(), resumed.checkpoint());
        prop_assert_eq!(whole.result(), resumed.result());
    }

    #[test]
    fn lambda_grid_is_sorted_and_unique(mut grid in prop::collection::vec(1e-4f64..1.0, 1..10)) {
        grid.push(grid[0]);
        let g = order::check_lambda_grid(&grid).unwrap();
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(grid.iter().all(|x| g.contains(x)));
    }
}
