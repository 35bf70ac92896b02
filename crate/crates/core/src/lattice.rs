//! Hypercubic boxes `{0..L-1}^d` with their bulk and boundary bonds.
//!
//! Site `x` with coordinates `(c_0, .., c_{d-1})` has index
//! `Σ_i c_i L^{d-1-i}`: row-major with the last coordinate fastest.
//!
//! Bulk bonds are listed site by site in increasing index, and for each site
//! axis by axis, as the pair `(x, x + e_axis)` whenever that neighbour is
//! inside the box. Boundary bonds are listed site by site, axis by axis, the
//! `-e_axis` direction before `+e_axis`, whenever that neighbour lies outside
//! the box. Each boundary bond ends on its own boundary site, so boundary
//! sites and boundary bonds share one index.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bond leaving the box: interior endpoint `site`, outside neighbour at
/// `site ± e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryBond {
    pub site: usize,
    pub axis: usize,
    pub outward_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    d: usize,
    l: usize,
    n: usize,
    bonds: Vec<(usize, usize)>,
    boundary_bonds: Vec<BoundaryBond>,
    /// `(neighbour, bond index)` per site.
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Boundary bond indices per site.
    boundary_of: Vec<Vec<usize>>,
}

impl Lattice {
    pub fn new(d: usize, l: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Dimension(d));
        }
        if l < 2 {
            return Err(Error::SideLength(l));
        }
        let n = l.pow(d as u32);
        let mut bonds = Vec::with_capacity(d * l.pow(d as u32 - 1) * (l - 1));
        let mut boundary_bonds = Vec::with_capacity(2 * d * l.pow(d as u32 - 1));
        let mut adjacency = vec![Vec::with_capacity(2 * d); n];
        let mut boundary_of = vec![Vec::new(); n];
        let mut coords = vec![0usize; d];
        for x in 0..n {
            decode(x, l, &mut coords);
            for axis in 0..d {
                if coords[axis] + 1 < l {
                    let y = x + stride(l, d, axis);
                    adjacency[x].push((y, bonds.len()));
                    adjacency[y].push((x, bonds.len()));
                    bonds.push((x, y));
                }
            }
            for axis in 0..d {
                if coords[axis] == 0 {
                    boundary_of[x].push(boundary_bonds.len());
                    boundary_bonds.push(BoundaryBond {
                        site: x,
                        axis,
                        outward_positive: false,
                    });
                }
                if coords[axis] + 1 == l {
                    boundary_of[x].push(boundary_bonds.len());
                    boundary_bonds.push(BoundaryBond {
                        site: x,
                        axis,
                        outward_positive: true,
                    });
                }
            }
        }
        Ok(Self {
            d,
            l,
            n,
            bonds,
            boundary_bonds,
            adjacency,
            boundary_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.l
    }

    /// Number of sites `L^d`.
    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn boundary_bonds(&self) -> &[BoundaryBond] {
        &self.boundary_bonds
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary_bonds.len()
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, usize)] {
        &self.adjacency[x]
    }

    pub fn boundary_bonds_of(&self, x: usize) -> &[usize] {
        &self.boundary_of[x]
    }

    pub fn coords(&self, x: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        decode(x, self.l, &mut c);
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        coords.iter().fold(0, |acc, &c| acc * self.l + c)
    }

    /// Coordinates of the boundary site at the far end of boundary bond `u`;
    /// one component is `-1` or `L`.
    pub fn boundary_site_coords(&self, u: usize) -> Vec<i64> {
        let bb = self.boundary_bonds[u];
        let mut c: Vec<i64> = self.coords(bb.site).into_iter().map(|v| v as i64).collect();
        c[bb.axis] += if bb.outward_positive { 1 } else { -1 };
        c
    }
}

fn stride(l: usize, d: usize, axis: usize) -> usize {
    l.pow((d - 1 - axis) as u32)
}

fn decode(mut x: usize, l: usize, out: &mut [usize]) {
    for c in out.iter_mut().rev() {
        *c = x % l;
        x /= l;
    }
}
