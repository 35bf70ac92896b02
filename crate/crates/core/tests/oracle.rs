//! Frozen reference values from a 50-digit brute-force evaluation
//! (`tests/data/oracle.py`), plus closed-form values of the random energy
//! model.

use glassorder_core::exact::{self, PairTable};
use glassorder_core::order::BoundaryObjective;
use glassorder_core::rem;
use glassorder_core::{BoundaryConfig, DisorderRealization, Lattice, Model};

const BETA: f64 = 0.7;

fn close(got: f64, want: f64, rel: f64) {
    let err = (got - want).abs() / want.abs().max(1.0);
    assert!(err <= rel, "got {got:.17e}, want {want:.17e}, rel err {err:.2e}");
}

fn plaquette() -> (Lattice, DisorderRealization) {
    let lat = Lattice::new(2, 2).unwrap();
    assert_eq!(lat.bonds(), &[(0, 2), (0, 1), (1, 3), (2, 3)]);
    let sites: Vec<usize> = lat.boundary_bonds().iter().map(|b| b.site).collect();
    assert_eq!(sites, [0, 0, 1, 1, 2, 2, 3, 3]);
    let dis = DisorderRealization::from_parts(
        &lat,
        vec![0.9, -1.1, 0.4, -0.7],
        vec![0.3, -0.5, 0.8, 0.2, -0.6, 0.1, 0.45, -0.35],
        vec![0.1, -0.2, 0.05, 0.0],
    )
    .unwrap();
    (lat, dis)
}

fn model() -> Model {
    let (lat, dis) = plaquette();
    let b = BoundaryConfig::new(vec![1.0, -1.0, 0.5, 0.0, 1.0, -0.25, 1.0, -1.0]).unwrap();
    Model::new(lat, dis, b).unwrap()
}

#[test]
fn single_replica_partition_function() {
    let m = model();
    close(exact::log_z1(&m, BETA).unwrap().log_z, 3.690_581_390_788_552_7, 1e-13);
    let t = PairTable::new(&m, BETA).unwrap();
    close(t.log_z1(), 3.690_581_390_788_552_7, 1e-13);
}

#[test]
fn coupled_replica_partition_functions() {
    let t = PairTable::new(&model(), BETA).unwrap();
    close(t.log_z2(0.3), 7.598_866_825_152_919_8, 1e-13);
    close(t.log_z2(-0.3), 7.427_998_320_721_303_3, 1e-13);
    close(t.log_z3(0.3, -0.2), 11.280_063_856_211_950, 1e-13);
    let (r, r2) = t.overlap_moments(0.3);
    close(r, 0.402_537_638_993_246_93, 1e-13);
    close(r2, 0.475_106_657_648_023_06, 1e-13);
}

#[test]
fn magnetizations_under_boundary() {
    let m = model();
    let st = exact::site_stats(&m, BETA, false).unwrap();
    close(st.sum_m_sq() / 4.0, 0.105_927_797_767_380_79, 1e-13);
}

#[test]
fn best_corner_matches_brute_force() {
    let (lat, dis) = plaquette();
    let obj = BoundaryObjective::new(&lat, &dis, BETA).unwrap();
    let (b, v) = obj.best_corner();
    close(v, 0.776_622_776_845_995_38, 1e-13);
    assert_eq!(b.b, vec![1.0, -1.0, -1.0, -1.0, -1.0, 1.0, -1.0, 1.0]);
}

#[test]
fn open_chain_closed_form() {
    // open ferromagnetic chain: Z = 2 (2 cosh β)^(L-1)
    let lat = Lattice::new(1, 6).unwrap();
    let m = Model::open(lat.clone(), DisorderRealization::uniform(&lat, 1.0, 0.0).unwrap()).unwrap();
    let beta = 1.3_f64;
    let want = 2f64.ln() + 5.0 * (2.0 * beta.cosh()).ln();
    close(exact::log_z1(&m, beta).unwrap().log_z, want, 1e-14);
    close(exact::site_stats(&m, beta, false).unwrap().log_z, want, 1e-13);
}

#[test]
fn random_energy_model_closed_forms() {
    close(rem::beta_c(), 1.665_109_222_315_395_5, 1e-15);
    close(rem::f_rem(1.0), -0.943_147_180_559_945_31, 1e-15);
    close(rem::f_rem(3.0), -(2f64.ln().sqrt()), 1e-15);
    close(rem::q_br_rem(2.5), 0.471_624_313_800_500_76, 1e-14);
    close(rem::q_br_rem(2.0 * rem::beta_c()), 0.5, 1e-15);
    assert_eq!(rem::q_jump_rem(2.0 * rem::beta_c()), 0.5);
    assert_eq!(rem::q_jump_rem(1.0), 0.0);
    assert_eq!(rem::q_br_rem(1.0), 0.0);
}
