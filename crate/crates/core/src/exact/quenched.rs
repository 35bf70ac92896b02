//! Disorder averages.

use alloc::vec::Vec;

use crate::disorder::{DisorderRealization, DisorderSpec};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::lattice::Lattice;
use crate::math;
use crate::stats::ObservableEstimate;

use super::MAX_PM_J_BONDS;

/// Mean and standard error of `observable` over `n_disorder` draws; draw `k`
/// uses random stream `k` of `seed`, so the result depends neither on the
/// executor nor on the order of evaluation.
pub fn quenched_average<E, F>(
    exec: &E,
    lattice: &Lattice,
    spec: &DisorderSpec,
    n_disorder: usize,
    seed: u64,
    observable: F,
) -> Result<ObservableEstimate>
where
    E: Executor,
    F: Fn(&DisorderRealization) -> Result<f64> + Sync + Send,
{
    if n_disorder == 0 {
        return Err(Error::Invalid("need at least one disorder sample".into()));
    }
    let values: Vec<Result<f64>> = exec.map(n_disorder, |k| {
        let d = spec.sample(lattice, seed, k as u64)?;
        observable(&d)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(ObservableEstimate::from_samples(&values))
}

/// Exact average over all `2^(bonds)` sign patterns of `±J` couplings on bulk
/// and boundary bonds, each pattern weighted by `p^{#plus} (1-p)^{#minus}`.
/// Fields are set to zero.
pub fn exact_pm_j_average<E, F>(exec: &E, lattice: &Lattice, p: f64, observable: F) -> Result<f64>
where
    E: Executor,
    F: Fn(&DisorderRealization) -> Result<f64> + Sync + Send,
{
    let nb = lattice.bonds().len();
    let nu = lattice.n_boundary();
    let total = nb + nu;
    if total > MAX_PM_J_BONDS {
        return Err(Error::SizeCap {
            what: "exhaustive ±J disorder enumeration (bonds)",
            size: total,
            cap: MAX_PM_J_BONDS,
        });
    }
    let terms: Vec<Result<f64>> = exec.map(1usize << total, |mask| {
        let sign = |i: usize| if (mask >> i) & 1 == 1 { 1.0 } else { -1.0 };
        let plus = mask.count_ones() as i32;
        let weight = libm::pow(p, f64::from(plus)) * libm::pow(1.0 - p, f64::from(total as i32 - plus));
        if weight == 0.0 {
            return Ok(0.0);
        }
        let d = DisorderRealization::from_parts(
            lattice,
            (0..nb).map(sign).collect(),
            (nb..total).map(sign).collect(),
            alloc::vec![0.0; lattice.n_sites()],
        )?;
        Ok(weight * observable(&d)?)
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(math::pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn constant_observable_has_no_error() {
        let lat = Lattice::new(1, 4).unwrap();
        let e = quenched_average(&Sequential, &lat, &DisorderSpec::pm_j(0.5), 10, 1, |_| Ok(3.0)).unwrap();
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn pm_j_bond_mean_vanishes() {
        let lat = Lattice::new(1, 4).unwrap();
        let n = 4000;
        let e = quenched_average(&Sequential, &lat, &DisorderSpec::pm_j(0.5), n, 17, |d| Ok(d.j_bonds[1])).unwrap();
        assert!(e.mean.abs() < 5.0 / (n as f64).sqrt());
    }
}
