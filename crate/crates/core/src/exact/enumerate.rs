//! Gray-code enumeration of single-replica configurations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_beta, Error, Result};
use crate::hamiltonian::Model;
use crate::math::{self, LogSumExp};

use super::{SiteStats, MAX_SITES_SINGLE, MAX_SITES_TABLE};

const RESYNC_EVERY: u64 = 1024;

pub(crate) fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::SizeCap { what, size: n, cap })
    } else {
        Ok(())
    }
}

/// Calls `f(s, E(s))` for every configuration `s` (bit `x` set ⇔ `σ_x = +1`)
/// in reflected Gray-code order. Each step updates the energy by the single
/// flip `ΔE = 2 σ_x (Σ_y J_xy σ_y + g_x)`; the running value is replaced by a
/// direct evaluation every 1024 steps.
pub fn for_each_energy<F: FnMut(u64, f64)>(model: &Model, mut f: F) -> Result<()> {
    let n = model.n_sites();
    check_cap("single-replica enumeration", n, MAX_SITES_SINGLE)?;
    let mut spins = vec![-1i8; n];
    let mut s = 0u64;
    let mut e = model.energy_bits(0);
    f(0, e);
    for k in 1..(1u64 << n) {
        let x = k.trailing_zeros() as usize;
        let phi = model.local_field(x, |y| spins[y]);
        e += 2.0 * f64::from(spins[x]) * phi;
        spins[x] = -spins[x];
        s ^= 1 << x;
        if k % RESYNC_EVERY == 0 {
            e = model.energy_bits(s);
        }
        f(s, e);
    }
    Ok(())
}

/// Energies indexed by configuration.
pub fn energy_table(model: &Model) -> Result<Vec<f64>> {
    let n = model.n_sites();
    check_cap("stored energy table", n, MAX_SITES_TABLE)?;
    let mut table = vec![0.0; 1 << n];
    for_each_energy(model, |s, e| table[s as usize] = e)?;
    Ok(table)
}

/// `ln Σ_σ e^{-βH(σ)}`.
pub fn log_z1(model: &Model, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let n = model.n_sites();
    if n <= MAX_SITES_TABLE {
        let lw: Vec<f64> = energy_table(model)?.into_iter().map(|e| -beta * e).collect();
        Ok(math::log_sum_exp(&lw))
    } else {
        let mut acc = LogSumExp::new();
        for_each_energy(model, |_, e| acc.push(-beta * e))?;
        Ok(acc.value())
    }
}

/// Magnetizations and (optionally) all spin-spin correlations by direct
/// summation over a table of log-weights.
pub fn site_stats_from_log_weights(log_w: &[f64], n: usize, with_corr: bool) -> SiteStats {
    let log_z = math::log_sum_exp(log_w);
    let mut m = vec![0.0; n];
    let mut corr = if with_corr { vec![0.0; n * n] } else { Vec::new() };
    for (s, &lw) in log_w.iter().enumerate() {
        let p = math::exp(lw - log_z);
        if p == 0.0 {
            continue;
        }
        for x in 0..n {
            let sx = if (s >> x) & 1 == 1 { p } else { -p };
            m[x] += sx;
            if with_corr {
                for y in x + 1..n {
                    corr[x * n + y] += if (s >> y) & 1 == 1 { sx } else { -sx };
                }
            }
        }
    }
    if with_corr {
        for x in 0..n {
            corr[x * n + x] = 1.0;
            for y in 0..x {
                corr[x * n + y] = corr[y * n + x];
            }
        }
    }
    SiteStats {
        log_z,
        m,
        corr: with_corr.then_some(corr),
    }
}

/// Reusable enumeration engine for a fixed set of couplings: only the site
/// field changes between calls.
#[derive(Debug, Clone)]
pub struct EnumEngine {
    n: usize,
    beta: f64,
    /// `-β × (bond energy)` per configuration.
    bond_log_w: Vec<f64>,
}

impl EnumEngine {
    pub fn new(model: &Model, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let n = model.n_sites();
        check_cap("field-resolved enumeration", n, MAX_SITES_TABLE)?;
        let lat = model.lattice();
        let j = &model.disorder().j_bonds;
        let bond_log_w = (0..1u64 << n)
            .map(|s| {
                let mut e = 0.0;
                for (k, &(x, y)) in lat.bonds().iter().enumerate() {
                    let same = ((s >> x) ^ (s >> y)) & 1 == 0;
                    e -= if same { j[k] } else { -j[k] };
                }
                -beta * e
            })
            .collect();
        Ok(Self { n, beta, bond_log_w })
    }

    pub fn stats(&self, field: &[f64], with_corr: bool) -> SiteStats {
        let lw: Vec<f64> = self
            .bond_log_w
            .iter()
            .enumerate()
            .map(|(s, &b)| {
                let mut t = 0.0;
                for (x, &g) in field.iter().enumerate() {
                    t += if (s >> x) & 1 == 1 { g } else { -g };
                }
                b + self.beta * t
            })
            .collect();
        site_stats_from_log_weights(&lw, self.n, with_corr)
    }
}
