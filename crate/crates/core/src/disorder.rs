//! Quenched couplings and fields.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rng::StreamRng;

/// Single-variable distribution for couplings or fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Constant { value: f64 },
    /// `+1` with probability `p`, `-1` otherwise.
    PmJ { p: f64 },
    Gaussian { mean: f64, sd: f64 },
    Uniform { a: f64, b: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::Distribution(msg));
        match *self {
            Distribution::Constant { value } if !value.is_finite() => {
                bad(format!("constant value {value} is not finite"))
            }
            Distribution::PmJ { p } if !(0.0..=1.0).contains(&p) => {
                bad(format!("pm_j probability {p} outside [0, 1]"))
            }
            Distribution::Gaussian { mean, sd } if !mean.is_finite() || !sd.is_finite() || sd < 0.0 => {
                bad(format!("gaussian(mean={mean}, sd={sd}) needs finite mean and sd >= 0"))
            }
            Distribution::Uniform { a, b } if !a.is_finite() || !b.is_finite() || a > b => {
                bad(format!("uniform(a={a}, b={b}) needs finite a <= b"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::PmJ { p } => {
                if rng.uniform() < p {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::Gaussian { mean, sd } => mean + sd * rng.gaussian(),
            Distribution::Uniform { a, b } => a + (b - a) * rng.uniform(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::PmJ { p } => 2.0 * p - 1.0,
            Distribution::Gaussian { mean, .. } => mean,
            Distribution::Uniform { a, b } => 0.5 * (a + b),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, Distribution::Constant { value } if value == 0.0)
    }
}

/// Coupling and field distributions of an i.i.d. disorder ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub j: Distribution,
    pub h: Distribution,
}

impl DisorderSpec {
    pub fn new(j: Distribution, h: Distribution) -> Result<Self> {
        j.validate()?;
        h.validate()?;
        Ok(Self { j, h })
    }

    /// `±J` couplings with `P(+1) = p` and no field.
    pub fn pm_j(p: f64) -> Self {
        Self {
            j: Distribution::PmJ { p },
            h: Distribution::Constant { value: 0.0 },
        }
    }

    /// Uniform couplings `J` and uniform field `h`.
    pub fn ferromagnet(j: f64, h: f64) -> Self {
        Self {
            j: Distribution::Constant { value: j },
            h: Distribution::Constant { value: h },
        }
    }

    /// Draws realization `stream` of the ensemble. Bulk couplings are drawn
    /// first in bond order, then boundary couplings, then fields in site
    /// order.
    pub fn sample(&self, lattice: &Lattice, seed: u64, stream: u64) -> Result<DisorderRealization> {
        self.j.validate()?;
        self.h.validate()?;
        let mut rng = StreamRng::new(seed, stream);
        let j_bonds = (0..lattice.bonds().len()).map(|_| self.j.sample(&mut rng)).collect();
        let j_boundary = (0..lattice.n_boundary()).map(|_| self.j.sample(&mut rng)).collect();
        let h = (0..lattice.n_sites()).map(|_| self.h.sample(&mut rng)).collect();
        Ok(DisorderRealization {
            version: 1,
            d: lattice.dim(),
            l: lattice.side(),
            dist_meta: Some(*self),
            seed,
            stream,
            j_bonds,
            j_boundary,
            h,
        })
    }
}

/// One draw of the couplings and fields on a given lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub version: u32,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub dist_meta: Option<DisorderSpec>,
    pub seed: u64,
    pub stream: u64,
    /// Bulk couplings in lattice bond order.
    pub j_bonds: Vec<f64>,
    /// Couplings to the boundary, in boundary-bond order.
    pub j_boundary: Vec<f64>,
    /// Fields in site order.
    pub h: Vec<f64>,
}

impl DisorderRealization {
    pub fn from_parts(
        lattice: &Lattice,
        j_bonds: Vec<f64>,
        j_boundary: Vec<f64>,
        h: Vec<f64>,
    ) -> Result<Self> {
        let r = Self {
            version: 1,
            d: lattice.dim(),
            l: lattice.side(),
            dist_meta: None,
            seed: 0,
            stream: 0,
            j_bonds,
            j_boundary,
            h,
        };
        r.check(lattice)?;
        Ok(r)
    }

    /// Uniform couplings and fields.
    pub fn uniform(lattice: &Lattice, j: f64, h: f64) -> Result<Self> {
        Self::from_parts(
            lattice,
            alloc::vec![j; lattice.bonds().len()],
            alloc::vec![j; lattice.n_boundary()],
            alloc::vec![h; lattice.n_sites()],
        )
    }

    /// Checks shape and finiteness against `lattice`.
    pub fn check(&self, lattice: &Lattice) -> Result<()> {
        if self.d != lattice.dim() || self.l != lattice.side() {
            return Err(Error::Shape(format!(
                "disorder built for d={}, L={} used on d={}, L={}",
                self.d,
                self.l,
                lattice.dim(),
                lattice.side()
            )));
        }
        let lens = [
            (self.j_bonds.len(), lattice.bonds().len(), "bulk couplings"),
            (self.j_boundary.len(), lattice.n_boundary(), "boundary couplings"),
            (self.h.len(), lattice.n_sites(), "fields"),
        ];
        for (got, want, what) in lens {
            if got != want {
                return Err(Error::Shape(format!("{what}: {got} values, lattice needs {want}")));
            }
        }
        let all = self.j_bonds.iter().chain(&self.j_boundary).chain(&self.h);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("disorder contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn has_field(&self) -> bool {
        self.h.iter().any(|&v| v != 0.0)
    }
}
