//! Two- and three-replica sums through a distance-resolved transform.
//!
//! For every configuration `σ` the table holds
//! `T(σ)[k] = ln Σ_{σ' : d(σ,σ') = k} e^{-βH(σ')}`, with `d` the Hamming
//! distance. Since `σ·σ' = N - 2d(σ,σ')`, every replica-coupled sum factors
//! through it:
//!
//! * `ln A(σ;λ) = ln Σ_σ' e^{-βH(σ') + βλ σ·σ'} = LSE_k (T(σ)[k] + βλ(N-2k))`
//! * `ln Z2(λ) = LSE_σ (-βH(σ) + ln A(σ;λ))`
//! * `ln Z3(λ,λ') = LSE_σ (-βH(σ) + ln A(σ;λ) + ln A(σ;λ'))`
//!
//! The table is built by one log-domain butterfly per site, `O(N² 2^N)` work
//! in total. The distance spectrum `S[k] = LSE_σ(-βH(σ) + T(σ)[k])` gives
//! `Z2` and the overlap histogram at any `λ` in `O(N)`.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_beta, Result};
use crate::hamiltonian::Model;
use crate::math::{self, log_add_exp, pairwise_sum_by};

use super::enumerate::{check_cap, energy_table};
use super::{OverlapHistogram, MAX_SITES_REPLICA};

#[derive(Debug, Clone)]
pub struct PairTable {
    n: usize,
    beta: f64,
    log_w: Vec<f64>,
    dist: Vec<f64>,
    spectrum: Vec<f64>,
    log_z1: f64,
}

/// Thermal overlap moments in the three-replica ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeReplicaMoments {
    pub r12: f64,
    pub r13: f64,
    pub r12_sq: f64,
    pub r13_sq: f64,
    pub r12_r13: f64,
}

impl PairTable {
    pub fn new(model: &Model, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        check_cap("replica enumeration", model.n_sites(), MAX_SITES_REPLICA)?;
        let log_w: Vec<f64> = energy_table(model)?.into_iter().map(|e| -beta * e).collect();
        Ok(Self::build(log_w, model.n_sites(), beta, model.is_flip_symmetric()))
    }

    /// Table for arbitrary per-configuration log-weights `-βE(σ)` on `n`
    /// binary spins; `flip_symmetric` asserts `E(σ) = E(-σ)`.
    pub fn from_log_weights(log_w: Vec<f64>, n: usize, beta: f64, flip_symmetric: bool) -> Result<Self> {
        check_beta(beta)?;
        check_cap("replica enumeration", n, MAX_SITES_REPLICA)?;
        assert_eq!(log_w.len(), 1 << n);
        Ok(Self::build(log_w, n, beta, flip_symmetric))
    }

    fn build(log_w: Vec<f64>, n: usize, beta: f64, flip_symmetric: bool) -> Self {
        let w = n + 1;
        let size = 1usize << n;
        let mut dist = vec![f64::NEG_INFINITY; size * w];
        for (s, &lw) in log_w.iter().enumerate() {
            dist[s * w] = lw;
        }
        let mut a = vec![0.0; w];
        let mut b = vec![0.0; w];
        for bit in 0..n {
            let top = bit + 1;
            for s in 0..size {
                if (s >> bit) & 1 == 1 {
                    continue;
                }
                let t = s | (1 << bit);
                a[..=top].copy_from_slice(&dist[s * w..s * w + top + 1]);
                b[..=top].copy_from_slice(&dist[t * w..t * w + top + 1]);
                dist[s * w] = a[0];
                dist[t * w] = b[0];
                for k in 1..=top {
                    dist[s * w + k] = log_add_exp(a[k], b[k - 1]);
                    dist[t * w + k] = log_add_exp(b[k], a[k - 1]);
                }
            }
        }
        let mut col = vec![0.0; size];
        let mut spectrum: Vec<f64> = (0..w)
            .map(|k| {
                for s in 0..size {
                    col[s] = log_w[s] + dist[s * w + k];
                }
                math::log_sum_exp(&col)
            })
            .collect();
        if flip_symmetric {
            for k in 0..w / 2 {
                let v = log_add_exp(spectrum[k], spectrum[n - k]) - math::LN_2;
                spectrum[k] = v;
                spectrum[n - k] = v;
            }
        }
        let log_z1 = math::log_sum_exp(&log_w);
        Self {
            n,
            beta,
            log_w,
            dist,
            spectrum,
            log_z1,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_z1(&self) -> f64 {
        self.log_z1
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    /// `ln Σ_{d(σ,σ')=k} e^{-βH(σ')}` for `k = 0..=N`.
    pub fn distance_row(&self, s: usize) -> &[f64] {
        let w = self.n + 1;
        &self.dist[s * w..(s + 1) * w]
    }

    /// Joint two-replica log-weight of each Hamming distance at `λ = 0`.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    #[inline]
    fn tilt(&self, lambda: f64, k: usize) -> f64 {
        self.beta * lambda * (self.n as f64 - 2.0 * k as f64)
    }

    /// `ln A(σ;λ)` for configuration index `s`.
    pub fn log_inner(&self, s: usize, lambda: f64) -> f64 {
        let row = self.distance_row(s);
        let xs: Vec<f64> = (0..=self.n).map(|k| row[k] + self.tilt(lambda, k)).collect();
        math::log_sum_exp(&xs)
    }

    /// `ln A(σ;λ)` for every configuration.
    pub fn inner_table(&self, lambda: f64) -> Vec<f64> {
        (0..1usize << self.n).map(|s| self.log_inner(s, lambda)).collect()
    }

    pub fn log_z2(&self, lambda: f64) -> f64 {
        let xs: Vec<f64> = (0..=self.n).map(|k| self.spectrum[k] + self.tilt(lambda, k)).collect();
        math::log_sum_exp(&xs)
    }

    /// `ln Z2` assembled configuration by configuration from `ln A`, the
    /// same path that [`Self::log_z3`] takes.
    pub fn log_z2_via_inner(&self, lambda: f64) -> f64 {
        let inner = self.inner_table(lambda);
        let xs: Vec<f64> = self.log_w.iter().zip(&inner).map(|(a, b)| a + b).collect();
        math::log_sum_exp(&xs)
    }

    pub fn log_z3(&self, lambda: f64, lambda_prime: f64) -> f64 {
        let a = self.inner_table(lambda);
        let b = self.inner_table(lambda_prime);
        let xs: Vec<f64> = (0..a.len()).map(|s| self.log_w[s] + (a[s] + b[s])).collect();
        math::log_sum_exp(&xs)
    }

    /// Normalised weight of each agreement count `a = N - k`.
    pub fn histogram(&self, lambda: f64) -> OverlapHistogram {
        let lz = self.log_z2(lambda);
        let n = self.n;
        let weights = (0..=n)
            .map(|a| {
                let k = n - a;
                math::exp(self.spectrum[k] + self.tilt(lambda, k) - lz)
            })
            .collect();
        OverlapHistogram {
            n,
            beta: self.beta,
            lambda,
            weights,
            log_total: lz,
        }
    }

    /// `(⟨R⟩, ⟨R²⟩)` in the two-replica ensemble at coupling `λ`.
    pub fn overlap_moments(&self, lambda: f64) -> (f64, f64) {
        let h = self.histogram(lambda);
        (h.moment(1), h.moment(2))
    }

    /// `(⟨R⟩, ⟨R²⟩)` of replica 2 with a fixed replica 1 in state `s`.
    fn conditional_moments(&self, s: usize, lambda: f64) -> (f64, f64, f64) {
        let row = self.distance_row(s);
        let n = self.n as f64;
        let xs: Vec<f64> = (0..=self.n).map(|k| row[k] + self.tilt(lambda, k)).collect();
        let la = math::log_sum_exp(&xs);
        let p: Vec<f64> = xs.iter().map(|&x| math::exp(x - la)).collect();
        let r = pairwise_sum_by(p.len(), |k| p[k] * (n - 2.0 * k as f64) / n);
        let r2 = pairwise_sum_by(p.len(), |k| {
            let q = (n - 2.0 * k as f64) / n;
            p[k] * q * q
        });
        (la, r, r2)
    }

    pub fn three_replica_moments(&self, lambda: f64, lambda_prime: f64) -> ThreeReplicaMoments {
        let size = 1usize << self.n;
        let c1: Vec<(f64, f64, f64)> = (0..size).map(|s| self.conditional_moments(s, lambda)).collect();
        let c2: Vec<(f64, f64, f64)> = (0..size).map(|s| self.conditional_moments(s, lambda_prime)).collect();
        let lw: Vec<f64> = (0..size).map(|s| self.log_w[s] + (c1[s].0 + c2[s].0)).collect();
        let lz = math::log_sum_exp(&lw);
        let p: Vec<f64> = lw.iter().map(|&x| math::exp(x - lz)).collect();
        ThreeReplicaMoments {
            r12: pairwise_sum_by(size, |s| p[s] * c1[s].1),
            r13: pairwise_sum_by(size, |s| p[s] * c2[s].1),
            r12_sq: pairwise_sum_by(size, |s| p[s] * c1[s].2),
            r13_sq: pairwise_sum_by(size, |s| p[s] * c2[s].2),
            r12_r13: pairwise_sum_by(size, |s| p[s] * c1[s].1 * c2[s].1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{DisorderSpec, Distribution};
    use crate::lattice::Lattice;
    use crate::spins::BoundaryConfig;

    fn model(d: usize, l: usize, seed: u64, field: bool) -> Model {
        let lat = Lattice::new(d, l).unwrap();
        let h = if field {
            Distribution::Gaussian { mean: 0.2, sd: 0.7 }
        } else {
            Distribution::Constant { value: 0.0 }
        };
        let spec = DisorderSpec::new(Distribution::Gaussian { mean: 0.0, sd: 1.0 }, h).unwrap();
        let dis = spec.sample(&lat, seed, 0).unwrap();
        let nb = lat.n_boundary();
        Model::new(lat, dis, BoundaryConfig::new(vec![0.5; nb]).unwrap()).unwrap()
    }

    // O(4^N) reference: ln Σ_{σ,σ'} e^{-βH(σ)-βH(σ')+βλσ·σ'}
    fn brute_pair(m: &Model, beta: f64, lambda: f64) -> (f64, f64, f64) {
        let n = m.n_sites();
        let e: Vec<f64> = (0..1u64 << n).map(|s| m.energy_bits(s)).collect();
        let mut terms = Vec::new();
        let mut overlaps = Vec::new();
        for s in 0..1usize << n {
            for t in 0..1usize << n {
                let dot = n as f64 - 2.0 * ((s ^ t).count_ones() as f64);
                terms.push(-beta * (e[s] + e[t]) + beta * lambda * dot);
                overlaps.push(dot / n as f64);
            }
        }
        let lz = math::log_sum_exp(&terms);
        let r: f64 = terms.iter().zip(&overlaps).map(|(&x, &q)| (x - lz).exp() * q).sum();
        let r2: f64 = terms.iter().zip(&overlaps).map(|(&x, &q)| (x - lz).exp() * q * q).sum();
        (lz, r, r2)
    }

    // O(8^N) reference for three replicas.
    fn brute_triple(m: &Model, beta: f64, lam: f64, lamp: f64) -> (f64, f64, f64) {
        let n = m.n_sites();
        let e: Vec<f64> = (0..1u64 << n).map(|s| m.energy_bits(s)).collect();
        let size = 1usize << n;
        let mut terms = Vec::with_capacity(size * size * size);
        let mut r12 = Vec::with_capacity(terms.capacity());
        let mut r13 = Vec::with_capacity(terms.capacity());
        for s in 0..size {
            for t in 0..size {
                for u in 0..size {
                    let d12 = n as f64 - 2.0 * ((s ^ t).count_ones() as f64);
                    let d13 = n as f64 - 2.0 * ((s ^ u).count_ones() as f64);
                    terms.push(-beta * (e[s] + e[t] + e[u]) + beta * (lam * d12 + lamp * d13));
                    r12.push(d12 / n as f64);
                    r13.push(d13 / n as f64);
                }
            }
        }
        let lz = math::log_sum_exp(&terms);
        let a: f64 = terms.iter().zip(&r12).map(|(&x, &q)| (x - lz).exp() * q).sum();
        let b: f64 = terms.iter().zip(&r13).map(|(&x, &q)| (x - lz).exp() * q).sum();
        (lz, a, b)
    }

    #[test]
    fn pair_sums_match_brute_force() {
        for (d, l, seed) in [(1, 2, 1), (1, 5, 2), (2, 2, 3), (2, 3, 4)] {
            let m = model(d, l, seed, true);
            let t = PairTable::new(&m, 0.9).unwrap();
            for lam in [-0.4, 0.0, 0.3] {
                let (lz, r, r2) = brute_pair(&m, 0.9, lam);
                assert!((t.log_z2(lam) - lz).abs() < 1e-12 * lz.abs().max(1.0));
                assert!((t.log_z2_via_inner(lam) - lz).abs() < 1e-12 * lz.abs().max(1.0));
                let (mr, mr2) = t.overlap_moments(lam);
                assert!((mr - r).abs() < 1e-12, "{mr} {r}");
                assert!((mr2 - r2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_site_chain_inner_sums() {
        let lat = Lattice::new(1, 2).unwrap();
        let dis = crate::DisorderRealization::from_parts(&lat, vec![-1.0], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let m = Model::open(lat, dis).unwrap();
        let (beta, lam) = (1.0, 0.3);
        let t = PairTable::new(&m, beta).unwrap();
        let (lz, r, r2) = brute_pair(&m, beta, lam);
        assert!((t.log_z2(lam) - lz).abs() < 1e-14);
        let (mr, mr2) = t.overlap_moments(lam);
        assert!((mr - r).abs() < 1e-14 && (mr2 - r2).abs() < 1e-14);
        for s in 0..4usize {
            let direct: f64 = (0..4usize)
                .map(|u| {
                    let dot = 2.0 - 2.0 * ((s ^ u).count_ones() as f64);
                    (-beta * m.energy_bits(u as u64) + beta * lam * dot).exp()
                })
                .sum();
            assert!((t.log_inner(s, lam) - direct.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn decoupled_inner_sum_is_partition_function() {
        let m = model(2, 3, 9, true);
        let t = PairTable::new(&m, 1.2).unwrap();
        for a in t.inner_table(0.0) {
            assert!((a - t.log_z1()).abs() < 1e-13);
        }
    }

    #[test]
    fn strong_coupling_prefers_identical_copy() {
        let m = model(1, 4, 5, true);
        let t = PairTable::new(&m, 1.0).unwrap();
        for s in 0..16 {
            let row = t.distance_row(s);
            let lam = 40.0;
            let dominant = (0..=4)
                .max_by(|&a, &b| (row[a] + t.tilt(lam, a)).total_cmp(&(row[b] + t.tilt(lam, b))))
                .unwrap();
            assert_eq!(dominant, 0);
        }
    }

    #[test]
    fn three_replicas_match_brute_force() {
        for (d, l, seed) in [(1, 3, 1), (2, 2, 6), (1, 5, 7)] {
            let m = model(d, l, seed, true);
            let t = PairTable::new(&m, 0.7).unwrap();
            for (lam, lamp) in [(0.2, -0.3), (0.0, 0.5), (0.1, 0.1)] {
                let (lz, r12, r13) = brute_triple(&m, 0.7, lam, lamp);
                assert!((t.log_z3(lam, lamp) - lz).abs() < 1e-12 * lz.abs().max(1.0));
                let mm = t.three_replica_moments(lam, lamp);
                assert!((mm.r12 - r12).abs() < 1e-12);
                assert!((mm.r13 - r13).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transposition_is_bit_exact() {
        let m = model(2, 3, 11, true);
        let t = PairTable::new(&m, 1.1).unwrap();
        assert_eq!(t.log_z3(0.13, -0.41).to_bits(), t.log_z3(-0.41, 0.13).to_bits());
    }

    #[test]
    fn flip_symmetric_histogram_is_symmetric() {
        let lat = Lattice::new(2, 3).unwrap();
        let dis = DisorderSpec::new(
            Distribution::Gaussian { mean: 0.0, sd: 1.0 },
            Distribution::Constant { value: 0.0 },
        )
        .unwrap()
        .sample(&lat, 2, 0)
        .unwrap();
        let m = Model::open(lat, dis).unwrap();
        let h = PairTable::new(&m, 1.3).unwrap().histogram(0.0);
        for a in 0..=9 {
            assert_eq!(h.weights[a].to_bits(), h.weights[9 - a].to_bits());
        }
        assert!((h.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
