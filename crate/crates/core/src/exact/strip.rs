//! Row transfer matrix for chains and square lattices.
//!
//! The box is cut into `H` rows of `W` sites (`W = 1, H = L` for a chain,
//! `W = H = L` in two dimensions), so that site `(r, c)` has lattice index
//! `r·W + c`. A row state is a `W`-bit word. Each row carries a weight from
//! its in-row bonds and site fields; consecutive rows are linked by `W`
//! independent vertical bonds, applied as one 2×2 butterfly per column.
//! Forward and backward vectors are kept in the linear domain and
//! renormalised row by row; correlation vectors for a source site reuse the
//! forward normalisation constants so ratios stay exact.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_beta, Error, Result};
use crate::hamiltonian::Model;
use crate::math;

use super::SiteStats;

/// Widest row the engine accepts.
pub const MAX_WIDTH: usize = 14;

#[derive(Debug, Clone)]
pub struct StripEngine {
    w: usize,
    h: usize,
    beta: f64,
    /// `-β × (in-row bond energy)` per row and state.
    row_bond: Vec<Vec<f64>>,
    /// Vertical kernel between rows `r` and `r+1`, column `c`:
    /// `(same, diff)` weights after factoring out `e^{β|J|}`.
    kernel: Vec<Vec<(f64, f64)>>,
    kernel_log_scale: f64,
}

impl StripEngine {
    pub fn supports(model: &Model) -> bool {
        let lat = model.lattice();
        lat.dim() == 1 || (lat.dim() == 2 && lat.side() <= MAX_WIDTH)
    }

    pub fn new(model: &Model, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let lat = model.lattice();
        let (w, h) = match lat.dim() {
            1 => (1, lat.side()),
            2 if lat.side() <= MAX_WIDTH => (lat.side(), lat.side()),
            _ => {
                return Err(Error::Invalid(alloc::format!(
                    "transfer matrix needs d <= 2 and width <= {MAX_WIDTH}"
                )))
            }
        };
        let j = &model.disorder().j_bonds;
        let mut horiz = vec![vec![0.0; w.saturating_sub(1)]; h];
        let mut vert = vec![vec![0.0; w]; h.saturating_sub(1)];
        for (k, &(x, y)) in lat.bonds().iter().enumerate() {
            let (r, c) = (x / w, x % w);
            if y - x == w {
                vert[r][c] = j[k];
            } else {
                horiz[r][c] = j[k];
            }
        }
        let row_bond = horiz
            .iter()
            .map(|jr| {
                (0..1usize << w)
                    .map(|s| {
                        let mut e = 0.0;
                        for (c, &jc) in jr.iter().enumerate() {
                            let same = ((s >> c) ^ (s >> (c + 1))) & 1 == 0;
                            e -= if same { jc } else { -jc };
                        }
                        -beta * e
                    })
                    .collect()
            })
            .collect();
        let mut kernel_log_scale = 0.0;
        let kernel = vert
            .iter()
            .map(|jr| {
                jr.iter()
                    .map(|&jc| {
                        kernel_log_scale += beta * math::abs(jc);
                        let small = math::exp(-2.0 * beta * math::abs(jc));
                        if jc >= 0.0 {
                            (1.0, small)
                        } else {
                            (small, 1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            w,
            h,
            beta,
            row_bond,
            kernel,
            kernel_log_scale,
        })
    }

    fn apply_kernel(&self, r: usize, v: &mut [f64]) {
        for (c, &(same, diff)) in self.kernel[r].iter().enumerate() {
            let bit = 1usize << c;
            for s in 0..v.len() {
                if s & bit == 0 {
                    let (a, b) = (v[s], v[s | bit]);
                    v[s] = same * a + diff * b;
                    v[s | bit] = diff * a + same * b;
                }
            }
        }
    }

    /// `ln Z`, magnetizations and optionally all `⟨σ_x σ_y⟩` for the site
    /// field `field` (fields already include boundary contributions).
    pub fn stats(&self, field: &[f64], with_corr: bool) -> SiteStats {
        let (w, h) = (self.w, self.h);
        let ns = 1usize << w;
        let mut log_scale = self.kernel_log_scale;
        // normalised row weights
        let phi: Vec<Vec<f64>> = (0..h)
            .map(|r| {
                let g = &field[r * w..(r + 1) * w];
                let lw: Vec<f64> = (0..ns)
                    .map(|s| {
                        let mut t = 0.0;
                        for (c, &gc) in g.iter().enumerate() {
                            t += if (s >> c) & 1 == 1 { gc } else { -gc };
                        }
                        self.row_bond[r][s] + self.beta * t
                    })
                    .collect();
                let mx = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                log_scale += mx;
                lw.iter().map(|&x| math::exp(x - mx)).collect()
            })
            .collect();
        let mut fwd = vec![phi[0].clone()];
        let mut fnorm = vec![1.0];
        for r in 1..h {
            let mut v = fwd[r - 1].clone();
            self.apply_kernel(r - 1, &mut v);
            for (vi, &p) in v.iter_mut().zip(&phi[r]) {
                *vi *= p;
            }
            let c = v.iter().copied().fold(0.0, f64::max);
            v.iter_mut().for_each(|x| *x /= c);
            log_scale += math::ln(c);
            fwd.push(v);
            fnorm.push(c);
        }
        let log_z = log_scale + math::ln(fwd[h - 1].iter().sum::<f64>());
        let mut bwd = vec![vec![1.0; ns]; h];
        for r in (0..h - 1).rev() {
            let mut v: Vec<f64> = bwd[r + 1].iter().zip(&phi[r + 1]).map(|(a, b)| a * b).collect();
            self.apply_kernel(r, &mut v);
            let c = v.iter().copied().fold(0.0, f64::max);
            v.iter_mut().for_each(|x| *x /= c);
            bwd[r] = v;
        }
        let n = w * h;
        let mut m = vec![0.0; n];
        let mut denom = vec![0.0; h];
        for r in 0..h {
            let p: Vec<f64> = fwd[r].iter().zip(&bwd[r]).map(|(a, b)| a * b).collect();
            let d: f64 = p.iter().sum();
            denom[r] = d;
            for c in 0..w {
                m[r * w + c] = signed_sum(&p, c) / d;
            }
        }
        let corr = with_corr.then(|| {
            let mut corr = vec![0.0; n * n];
            for r1 in 0..h {
                for c1 in 0..w {
                    let x = r1 * w + c1;
                    corr[x * n + x] = 1.0;
                    let mut g: Vec<f64> = fwd[r1]
                        .iter()
                        .enumerate()
                        .map(|(s, &f)| if (s >> c1) & 1 == 1 { f } else { -f })
                        .collect();
                    // same row
                    let p: Vec<f64> = g.iter().zip(&bwd[r1]).map(|(a, b)| a * b).collect();
                    for c2 in c1 + 1..w {
                        corr[x * n + r1 * w + c2] = signed_sum(&p, c2) / denom[r1];
                    }
                    for r2 in r1 + 1..h {
                        self.apply_kernel(r2 - 1, &mut g);
                        for (gi, &pv) in g.iter_mut().zip(&phi[r2]) {
                            *gi *= pv / fnorm[r2];
                        }
                        let p: Vec<f64> = g.iter().zip(&bwd[r2]).map(|(a, b)| a * b).collect();
                        for c2 in 0..w {
                            corr[x * n + r2 * w + c2] = signed_sum(&p, c2) / denom[r2];
                        }
                    }
                }
            }
            for x in 0..n {
                for y in 0..x {
                    corr[x * n + y] = corr[y * n + x];
                }
            }
            corr
        });
        SiteStats { log_z, m, corr }
    }
}

fn signed_sum(p: &[f64], c: usize) -> f64 {
    let mut t = 0.0;
    for (s, &v) in p.iter().enumerate() {
        if (s >> c) & 1 == 1 {
            t += v;
        } else {
            t -= v;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{DisorderSpec, Distribution};
    use crate::exact::enumerate::{log_z1, EnumEngine};
    use crate::lattice::Lattice;
    use crate::spins::BoundaryConfig;

    fn model(d: usize, l: usize, seed: u64) -> Model {
        let lat = Lattice::new(d, l).unwrap();
        let spec = DisorderSpec::new(
            Distribution::Gaussian { mean: 0.1, sd: 1.0 },
            Distribution::Gaussian { mean: 0.0, sd: 0.5 },
        )
        .unwrap();
        let dis = spec.sample(&lat, seed, 0).unwrap();
        let nb = lat.n_boundary();
        let b = (0..nb).map(|u| if u % 3 == 0 { 1.0 } else { -0.4 }).collect();
        Model::new(lat, dis, BoundaryConfig::new(b).unwrap()).unwrap()
    }

    #[test]
    fn matches_enumeration() {
        for (d, l, seed) in [(1, 2, 1), (1, 7, 2), (2, 2, 3), (2, 3, 4), (2, 4, 5)] {
            let m = model(d, l, seed);
            for beta in [0.3, 1.0, 2.5] {
                let tm = StripEngine::new(&m, beta).unwrap().stats(m.field(), true);
                let en = EnumEngine::new(&m, beta).unwrap().stats(m.field(), true);
                assert!((tm.log_z - log_z1(&m, beta).unwrap()).abs() < 1e-11 * tm.log_z.abs().max(1.0));
                for (a, b) in tm.m.iter().zip(&en.m) {
                    assert!((a - b).abs() < 1e-12, "{d} {l} {a} {b}");
                }
                for (a, b) in tm.corr.unwrap().iter().zip(en.corr.as_ref().unwrap()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn large_beta_is_finite() {
        let m = model(2, 6, 8);
        let st = StripEngine::new(&m, 50.0).unwrap().stats(m.field(), true);
        assert!(st.log_z.is_finite());
        assert!(st.m.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert!(st.corr.unwrap().iter().all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-12));
    }
}
