//! Exact partition functions and overlap statistics at desk scale.
//!
//! * [`enumerate`]: Gray-code enumeration of one replica (`N ≤ 24`).
//! * [`replica`]: two- and three-replica sums (`N ≤ 12`).
//! * [`strip`]: row transfer matrix for `d ≤ 2`, used for magnetizations and
//!   correlations beyond enumeration range.
//! * [`quenched`]: disorder averages, sampled or exhaustive.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_beta, Result};
use crate::hamiltonian::Model;
use crate::math::pairwise_sum_by;
use crate::spins::ReplicaCoupling;

pub mod enumerate;
pub mod quenched;
pub mod replica;
pub mod strip;

pub use enumerate::{energy_table, for_each_energy, EnumEngine};
pub use quenched::{exact_pm_j_average, quenched_average};
pub use replica::{PairTable, ThreeReplicaMoments};
pub use strip::StripEngine;

/// Largest single-replica system that is enumerated.
pub const MAX_SITES_SINGLE: usize = 24;
/// Largest system whose energies are stored as a table.
pub const MAX_SITES_TABLE: usize = 20;
/// Largest system for two- and three-replica sums.
pub const MAX_SITES_REPLICA: usize = 12;
/// Largest number of `±J` bonds for exhaustive disorder averages.
pub const MAX_PM_J_BONDS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPartition {
    pub log_z: f64,
    pub beta: f64,
    pub n_replicas: u8,
    pub coupling: ReplicaCoupling,
}

/// `-(1/(β N)) E ln Z` with its disorder standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergySample {
    pub beta: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub f_value: f64,
    pub stderr: f64,
    pub n_disorder: usize,
}

/// Overlap distribution of two replicas. `weights[a]` is the probability of
/// `a` agreeing sites, i.e. of overlap `q = (2a - N)/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapHistogram {
    pub n: usize,
    pub beta: f64,
    pub lambda: f64,
    pub weights: Vec<f64>,
    /// Log of the unnormalised total, `ln Z2(λ)`.
    pub log_total: f64,
}

impl OverlapHistogram {
    pub fn q(&self, a: usize) -> f64 {
        (2.0 * a as f64 - self.n as f64) / self.n as f64
    }

    pub fn moment(&self, power: i32) -> f64 {
        pairwise_sum_by(self.weights.len(), |a| self.weights[a] * libm::pow(self.q(a), f64::from(power)))
    }

    pub fn total(&self) -> f64 {
        pairwise_sum_by(self.weights.len(), |a| self.weights[a])
    }
}

/// Single-replica `ln Z`, `⟨σ_x⟩` and optionally `⟨σ_x σ_y⟩` (row-major,
/// `N × N`).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteStats {
    pub log_z: f64,
    pub m: Vec<f64>,
    pub corr: Option<Vec<f64>>,
}

impl SiteStats {
    /// `Σ_x ⟨σ_x⟩²`.
    pub fn sum_m_sq(&self) -> f64 {
        pairwise_sum_by(self.m.len(), |x| self.m[x] * self.m[x])
    }

    /// `Σ_{x,y} ⟨σ_x σ_y⟩²`.
    pub fn sum_corr_sq(&self) -> Option<f64> {
        self.corr
            .as_ref()
            .map(|c| pairwise_sum_by(c.len(), |i| c[i] * c[i]))
    }
}

/// Engine for repeated single-replica statistics at fixed couplings and
/// varying site fields.
#[derive(Debug, Clone)]
pub enum FieldEngine {
    Strip(StripEngine),
    Enumerate(EnumEngine),
}

impl FieldEngine {
    pub fn new(model: &Model, beta: f64) -> Result<Self> {
        if StripEngine::supports(model) {
            Ok(Self::Strip(StripEngine::new(model, beta)?))
        } else {
            Ok(Self::Enumerate(EnumEngine::new(model, beta)?))
        }
    }

    pub fn stats(&self, field: &[f64], with_corr: bool) -> SiteStats {
        match self {
            Self::Strip(e) => e.stats(field, with_corr),
            Self::Enumerate(e) => e.stats(field, with_corr),
        }
    }
}

/// Single-replica statistics of `model`, by transfer matrix when possible.
pub fn site_stats(model: &Model, beta: f64, with_corr: bool) -> Result<SiteStats> {
    Ok(FieldEngine::new(model, beta)?.stats(model.field(), with_corr))
}

pub fn log_z1(model: &Model, beta: f64) -> Result<LogPartition> {
    Ok(LogPartition {
        log_z: enumerate::log_z1(model, beta)?,
        beta,
        n_replicas: 1,
        coupling: ReplicaCoupling::default(),
    })
}

/// `ln A(σ;λ)` for every configuration index.
pub fn inner_sum_table(model: &Model, beta: f64, lambda: f64) -> Result<Vec<f64>> {
    Ok(PairTable::new(model, beta)?.inner_table(lambda))
}

pub fn log_z2(model: &Model, beta: f64, lambda: f64) -> Result<LogPartition> {
    Ok(LogPartition {
        log_z: PairTable::new(model, beta)?.log_z2(lambda),
        beta,
        n_replicas: 2,
        coupling: ReplicaCoupling::pair(lambda),
    })
}

pub fn log_z3(model: &Model, beta: f64, lambda: f64, lambda_prime: f64) -> Result<LogPartition> {
    Ok(LogPartition {
        log_z: PairTable::new(model, beta)?.log_z3(lambda, lambda_prime),
        beta,
        n_replicas: 3,
        coupling: ReplicaCoupling::new(lambda, lambda_prime)?,
    })
}

/// `(⟨R⟩, ⟨R²⟩)` in the two-replica ensemble.
pub fn overlap_moments(model: &Model, beta: f64, lambda: f64) -> Result<(f64, f64)> {
    Ok(PairTable::new(model, beta)?.overlap_moments(lambda))
}

/// Overlap distribution of two uncoupled replicas.
pub fn overlap_histogram(model: &Model, beta: f64) -> Result<OverlapHistogram> {
    check_beta(beta)?;
    Ok(PairTable::new(model, beta)?.histogram(0.0))
}

/// `-(1/(β N)) ln Z` for `replicas` coupled copies.
pub fn free_energy(log_z: f64, beta: f64, n_sites: usize) -> f64 {
    -log_z / (beta * n_sites as f64)
}
