//! One-, two- and three-replica Hamiltonians and the gauge symmetry.

use alloc::format;
use alloc::vec::Vec;

use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::spins::{BoundaryConfig, ReplicaCoupling, SpinConfig};

/// A lattice together with one disorder draw and one boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    lattice: Lattice,
    disorder: DisorderRealization,
    boundary: BoundaryConfig,
    /// `h_x + Σ_{u at x} J_u b_u`.
    field: Vec<f64>,
}

impl Model {
    pub fn new(lattice: Lattice, disorder: DisorderRealization, boundary: BoundaryConfig) -> Result<Self> {
        disorder.check(&lattice)?;
        if boundary.len() != lattice.n_boundary() {
            return Err(Error::Shape(format!(
                "{} boundary values for {} boundary sites",
                boundary.len(),
                lattice.n_boundary()
            )));
        }
        let field = effective_field(&lattice, &disorder, &boundary.b);
        Ok(Self {
            lattice,
            disorder,
            boundary,
            field,
        })
    }

    pub fn open(lattice: Lattice, disorder: DisorderRealization) -> Result<Self> {
        let b = BoundaryConfig::open(lattice.n_boundary());
        Self::new(lattice, disorder, b)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn disorder(&self) -> &DisorderRealization {
        &self.disorder
    }

    pub fn boundary(&self) -> &BoundaryConfig {
        &self.boundary
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    /// Field felt by each site once the boundary spins are folded in.
    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn with_boundary(&self, boundary: BoundaryConfig) -> Result<Self> {
        Self::new(self.lattice.clone(), self.disorder.clone(), boundary)
    }

    /// True when `σ → -σ` leaves the energy unchanged (no field, open boundary).
    pub fn is_flip_symmetric(&self) -> bool {
        self.field.iter().all(|&g| g == 0.0)
    }

    /// `-Σ_bonds J σσ - Σ_boundary J σ b - Σ_sites h σ`, accumulated in that
    /// order.
    pub fn energy1(&self, config: &SpinConfig) -> Result<f64> {
        self.check_config(config)?;
        Ok(self.energy_with(|x| config.get(x)))
    }

    /// Energy of the configuration encoded in the low bits of `s`.
    #[inline]
    pub fn energy_bits(&self, s: u64) -> f64 {
        self.energy_with(|x| if (s >> x) & 1 == 1 { 1 } else { -1 })
    }

    fn energy_with<F: Fn(usize) -> i8>(&self, spin: F) -> f64 {
        let dis = &self.disorder;
        let mut e = 0.0;
        for (k, &(x, y)) in self.lattice.bonds().iter().enumerate() {
            e -= dis.j_bonds[k] * f64::from(spin(x) * spin(y));
        }
        for (u, bb) in self.lattice.boundary_bonds().iter().enumerate() {
            e -= dis.j_boundary[u] * f64::from(spin(bb.site)) * self.boundary.b[u];
        }
        for (x, &h) in dis.h.iter().enumerate() {
            e -= h * f64::from(spin(x));
        }
        e
    }

    /// `Σ_y J_xy σ_y + g_x`; flipping `σ_x` changes the energy by
    /// `2 σ_x` times this.
    #[inline]
    pub fn local_field<F: Fn(usize) -> i8>(&self, x: usize, spin: F) -> f64 {
        let mut f = self.field[x];
        for &(y, k) in self.lattice.neighbors(x) {
            f += self.disorder.j_bonds[k] * f64::from(spin(y));
        }
        f
    }

    fn check_config(&self, c: &SpinConfig) -> Result<()> {
        if c.len() != self.n_sites() {
            return Err(Error::Shape(format!(
                "configuration has {} spins, lattice has {}",
                c.len(),
                self.n_sites()
            )));
        }
        Ok(())
    }
}

pub(crate) fn effective_field(lattice: &Lattice, dis: &DisorderRealization, b: &[f64]) -> Vec<f64> {
    let mut g = dis.h.clone();
    for (u, bb) in lattice.boundary_bonds().iter().enumerate() {
        g[bb.site] += dis.j_boundary[u] * b[u];
    }
    g
}

/// `H(σ¹) + H(σ²) - λ Σ σ¹σ²`.
pub fn energy2(model: &Model, c1: &SpinConfig, c2: &SpinConfig, coupling: ReplicaCoupling) -> Result<f64> {
    let e1 = model.energy1(c1)?;
    let e2 = model.energy1(c2)?;
    let dot = c1.overlap(c2)?.dot as f64;
    Ok(e1 + e2 - coupling.lambda * dot)
}

/// `H(σ¹) + H(σ²) + H(σ³) - λ Σ σ¹σ² - λ' Σ σ¹σ³`; replicas 2 and 3 are not
/// coupled to each other.
pub fn energy3(
    model: &Model,
    c1: &SpinConfig,
    c2: &SpinConfig,
    c3: &SpinConfig,
    coupling: ReplicaCoupling,
) -> Result<f64> {
    let e1 = model.energy1(c1)?;
    let e2 = model.energy1(c2)?;
    let e3 = model.energy1(c3)?;
    let d12 = c1.overlap(c2)?.dot as f64;
    let d13 = c1.overlap(c3)?.dot as f64;
    Ok(e1 + (e2 + e3) - (coupling.lambda * d12 + coupling.lambda_prime * d13))
}

/// Local gauge map `σ_x → ε_x σ_x`, `J_xy → ε_x ε_y J_xy`, `h_x → ε_x h_x`.
/// Boundary sites keep `ε = +1`, so a boundary coupling picks up only the
/// sign of its interior endpoint. Energies are preserved bit for bit.
pub fn gauge_transform(model: &Model, config: &SpinConfig, eps: &[i8]) -> Result<(Model, SpinConfig)> {
    let lat = model.lattice();
    if eps.len() != lat.n_sites() || eps.iter().any(|&e| e != 1 && e != -1) {
        return Err(Error::Invalid("gauge must assign ±1 to every site".into()));
    }
    model.check_config(config)?;
    let dis = model.disorder();
    let j_bonds = lat
        .bonds()
        .iter()
        .zip(&dis.j_bonds)
        .map(|(&(x, y), &j)| f64::from(eps[x] * eps[y]) * j)
        .collect();
    let j_boundary = lat
        .boundary_bonds()
        .iter()
        .zip(&dis.j_boundary)
        .map(|(bb, &j)| f64::from(eps[bb.site]) * j)
        .collect();
    let h = dis.h.iter().zip(eps).map(|(&h, &e)| f64::from(e) * h).collect();
    let mut d2 = DisorderRealization::from_parts(lat, j_bonds, j_boundary, h)?;
    d2.dist_meta = dis.dist_meta;
    d2.seed = dis.seed;
    d2.stream = dis.stream;
    let mut c2 = config.clone();
    for (x, &e) in eps.iter().enumerate() {
        if e < 0 {
            c2.flip(x);
        }
    }
    Ok((Model::new(lat.clone(), d2, model.boundary().clone())?, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderSpec;
    use crate::rng::StreamRng;
    use alloc::vec;
    use proptest::prelude::*;

    fn chain2(j: f64) -> Model {
        let lat = Lattice::new(1, 2).unwrap();
        let d = DisorderRealization::uniform(&lat, j, 0.0).unwrap();
        Model::open(lat, d).unwrap()
    }

    #[test]
    fn single_field_term() {
        // a lone field h=2 on a spin with no active bonds
        let lat = Lattice::new(1, 2).unwrap();
        let d = DisorderRealization::from_parts(&lat, vec![0.0], vec![0.0, 0.0], vec![2.0, 0.0]).unwrap();
        let m = Model::open(lat, d).unwrap();
        let c = SpinConfig::from_spins(&[1, -1]).unwrap();
        assert_eq!(m.energy1(&c).unwrap(), -2.0);
    }

    #[test]
    fn two_site_chain() {
        let m = chain2(1.0);
        let pp = SpinConfig::from_spins(&[1, 1]).unwrap();
        let pm = SpinConfig::from_spins(&[1, -1]).unwrap();
        assert_eq!(m.energy1(&pp).unwrap(), -1.0);
        assert_eq!(m.energy1(&pm).unwrap(), 1.0);
    }

    #[test]
    fn plus_boundary_square() {
        let lat = Lattice::new(2, 2).unwrap();
        let d = DisorderRealization::uniform(&lat, 1.0, 0.0).unwrap();
        let b = BoundaryConfig::plus(lat.n_boundary());
        let m = Model::new(lat, d, b).unwrap();
        assert_eq!(m.energy1(&SpinConfig::all_up(4)).unwrap(), -12.0);
    }

    #[test]
    fn replica_energies() {
        let lat = Lattice::new(2, 2).unwrap();
        let d = DisorderSpec::pm_j(0.5).sample(&lat, 4, 0).unwrap();
        let m = Model::open(lat, d).unwrap();
        let c = SpinConfig::from_spins(&[1, -1, -1, 1]).unwrap();
        let e = m.energy1(&c).unwrap();
        let mu = 0.7;
        assert_eq!(energy2(&m, &c, &c, ReplicaCoupling::pair(0.0)).unwrap(), 2.0 * e);
        assert_eq!(energy2(&m, &c, &c, ReplicaCoupling::pair(mu)).unwrap(), 2.0 * e - mu * 4.0);
        let f = c.flipped();
        assert_eq!(energy2(&m, &c, &f, ReplicaCoupling::pair(mu)).unwrap(), 2.0 * e + mu * 4.0);
        let k = ReplicaCoupling::new(0.3, -0.2).unwrap();
        let e3 = energy3(&m, &c, &c, &c, k).unwrap();
        assert!((e3 - (3.0 * e - 0.1 * 4.0)).abs() < 1e-14);
        assert_eq!(energy3(&m, &c, &c, &c, ReplicaCoupling::default()).unwrap(), 3.0 * e);
    }

    #[test]
    fn gauge_examples() {
        let lat = Lattice::new(2, 2).unwrap();
        let d = DisorderSpec::pm_j(0.5).sample(&lat, 8, 1).unwrap();
        let m = Model::open(lat, d).unwrap();
        let c = SpinConfig::from_spins(&[1, 1, -1, 1]).unwrap();
        let (m1, c1) = gauge_transform(&m, &c, &[1; 4]).unwrap();
        assert_eq!((&m1, &c1), (&m, &c));
        let (m2, c2) = gauge_transform(&m, &c, &[-1; 4]).unwrap();
        assert_eq!(m2.disorder().j_bonds, m.disorder().j_bonds);
        assert_eq!(c2, c.flipped());
        assert_eq!(m2.energy1(&c2).unwrap(), m.energy1(&c).unwrap());
    }

    #[test]
    fn gauge_preserves_every_energy_exhaustively() {
        let lat = Lattice::new(2, 4).unwrap();
        let spec = DisorderSpec::new(
            crate::Distribution::Gaussian { mean: 0.1, sd: 1.0 },
            crate::Distribution::Uniform { a: -0.5, b: 0.5 },
        )
        .unwrap();
        let d = spec.sample(&lat, 21, 0).unwrap();
        let mut rng = StreamRng::new(3, 0);
        let b = BoundaryConfig::new((0..lat.n_boundary()).map(|_| 2.0 * rng.uniform() - 1.0).collect()).unwrap();
        let m = Model::new(lat, d, b).unwrap();
        let eps: Vec<i8> = (0..16).map(|_| if rng.uniform() < 0.5 { 1 } else { -1 }).collect();
        let probe = SpinConfig::all_down(16);
        let (mg, _) = gauge_transform(&m, &probe, &eps).unwrap();
        for s in 0..(1u64 << 16) {
            let c = SpinConfig::from_index(s, 16);
            let (_, cg) = gauge_transform(&m, &c, &eps).unwrap();
            assert_eq!(m.energy1(&c).unwrap().to_bits(), mg.energy1(&cg).unwrap().to_bits());
        }
    }

    #[test]
    fn global_flip_with_reversed_fields() {
        let lat = Lattice::new(2, 3).unwrap();
        let spec = DisorderSpec::new(
            crate::Distribution::Gaussian { mean: 0.0, sd: 1.0 },
            crate::Distribution::Gaussian { mean: 0.3, sd: 1.0 },
        )
        .unwrap();
        let d = spec.sample(&lat, 2, 2).unwrap();
        let b = BoundaryConfig::new(vec![0.25; lat.n_boundary()]).unwrap();
        let m = Model::new(lat.clone(), d.clone(), b.clone()).unwrap();
        let mut dn = d.clone();
        dn.h.iter_mut().for_each(|h| *h = -*h);
        let bn = BoundaryConfig::new(b.b.iter().map(|v| -v).collect()).unwrap();
        let mn = Model::new(lat, dn, bn).unwrap();
        for s in 0..512u64 {
            let c = SpinConfig::from_index(s, 9);
            assert_eq!(m.energy1(&c).unwrap(), mn.energy1(&c.flipped()).unwrap());
        }
    }

    #[test]
    fn energy_bits_matches_energy1() {
        let lat = Lattice::new(1, 6).unwrap();
        let d = DisorderSpec::pm_j(0.3).sample(&lat, 1, 1).unwrap();
        let m = Model::new(lat, d, BoundaryConfig::plus(2)).unwrap();
        for s in 0..64u64 {
            assert_eq!(m.energy_bits(s), m.energy1(&SpinConfig::from_index(s, 6)).unwrap());
        }
    }

    #[test]
    fn shape_errors() {
        let m = chain2(1.0);
        assert!(m.energy1(&SpinConfig::all_up(3)).is_err());
        let lat = Lattice::new(1, 3).unwrap();
        let d = DisorderRealization::uniform(&Lattice::new(1, 2).unwrap(), 1.0, 0.0).unwrap();
        assert!(Model::open(lat, d).is_err());
    }

    proptest! {
        #[test]
        fn replica_symmetries(seed in any::<u64>(), s1 in 0u64..512, s2 in 0u64..512, s3 in 0u64..512,
                              lam in -2.0f64..2.0, lamp in -2.0f64..2.0) {
            let lat = Lattice::new(2, 3).unwrap();
            let d = DisorderSpec::pm_j(0.5).sample(&lat, seed, 0).unwrap();
            let m = Model::open(lat, d).unwrap();
            let (c1, c2, c3) = (SpinConfig::from_index(s1, 9), SpinConfig::from_index(s2, 9), SpinConfig::from_index(s3, 9));
            let k = ReplicaCoupling::new(lam, lamp).unwrap();
            prop_assert_eq!(energy2(&m, &c1, &c2, k).unwrap(), energy2(&m, &c2, &c1, k).unwrap());
            prop_assert_eq!(energy3(&m, &c1, &c2, &c3, k).unwrap(), energy3(&m, &c1, &c3, &c2, k.swapped()).unwrap());
        }
    }
}
