//! Random energy model: closed-form thermodynamics and finite-N sums.
//!
//! Energies `E_σ` are independent Gaussians of variance `N/2`; replicas are
//! coupled through `-λ σ¹·σ²`. The infinite-size two-replica free energy is
//! `f2 = -max(a1, a2)/β` with the piecewise branches below.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_beta, Error, Result};
use crate::exact::replica::PairTable;
use crate::math::{self, log_sum_exp, sqrt, tanh, LN_2};
use crate::rng::StreamRng;

/// `2 √(ln 2)`.
pub fn beta_c() -> f64 {
    2.0 * sqrt(LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemParams {
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for RemParams {
    fn default() -> Self {
        Self {
            solver_tol: 1e-12,
            solver_max_iter: 10_000,
        }
    }
}

impl RemParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.solver_tol > 0.0 && self.solver_tol <= 1e-6) || self.solver_max_iter == 0 {
            return Err(Error::Invalid(alloc::format!(
                "solver tolerance {} must lie in (0, 1e-6] with at least one iteration",
                self.solver_tol
            )));
        }
        Ok(())
    }
}

/// `t ln(t/2)` for `t ∈ [0, 2]`, with `0 ln 0 = 0`. `t_minus_2` is `t - 2`
/// computed without cancellation by the caller.
fn xlog_half(t: f64, t_minus_2: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t > 1.0 {
        t * math::ln_1p(0.5 * t_minus_2)
    } else {
        t * (math::ln(t) - LN_2)
    }
}

/// Binary entropy `-½[(1+r) ln((1+r)/2) + (1-r) ln((1-r)/2)]`.
pub fn s0(r: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::Invalid(alloc::format!("entropy argument {r} outside [-1, 1]")));
    }
    let v = -0.5 * (xlog_half(1.0 + r, r - 1.0) + xlog_half(1.0 - r, -r - 1.0));
    Ok(v.max(0.0))
}

fn s0_unchecked(r: f64) -> f64 {
    s0(r.clamp(-1.0, 1.0)).unwrap_or(0.0)
}

/// Solution of `ρ = tanh(2λ √s0(ρ))`.
pub fn rho(lambda: f64, params: &RemParams) -> Result<f64> {
    params.validate()?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let lam = math::abs(lambda);
    let map = |x: f64| tanh(2.0 * lam * sqrt(s0_unchecked(x)));
    let residual = |x: f64| x - map(x);
    let mut x = map(0.0);
    for _ in 0..params.solver_max_iter {
        if math::abs(residual(x)) < params.solver_tol {
            return Ok(x.copysign(lambda));
        }
        x = 0.5 * x + 0.5 * map(x);
    }
    // bisection on the residual, negative at 0 and positive at 1
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if math::abs(residual(mid)) < params.solver_tol {
            return Ok(mid.copysign(lambda));
        }
    }
    Err(Error::NoConvergence {
        solver: "rho fixed point",
        iterations: params.solver_max_iter + 200,
        residual: residual(0.5 * (lo + hi)),
    })
}

/// Root of `β - 2√(s0(tanh βλ))` on `[1e-9, 4]`.
pub fn beta_bar_c(lambda: f64, params: &RemParams) -> Result<f64> {
    params.validate()?;
    let g = |b: f64| b - 2.0 * sqrt(s0_unchecked(tanh(b * lambda)));
    let (mut lo, mut hi) = (1e-9, 4.0);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::NoConvergence {
            solver: "critical line bracket",
            iterations: 0,
            residual: g(lo),
        });
    }
    for _ in 0..params.solver_max_iter.max(200) {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < params.solver_tol * 1e-3 || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Same-configuration branch.
pub fn a1(beta: f64, lambda: f64) -> f64 {
    if beta <= beta_c() / 2.0 {
        beta * beta + LN_2 + beta * lambda
    } else {
        2.0 * beta * sqrt(LN_2) + beta * lambda
    }
}

/// Distinct-configuration branch, with its piece index (1, 2 or 3).
pub fn a2_with_piece(beta: f64, lambda: f64, params: &RemParams) -> Result<(f64, u8)> {
    let bbar = beta_bar_c(lambda, params)?;
    if beta <= bbar {
        let t = tanh(beta * lambda);
        return Ok((beta * beta / 2.0 + LN_2 + s0_unchecked(t) + beta * lambda * t, 1));
    }
    let r = rho(lambda, params)?;
    let tail = beta * sqrt(s0_unchecked(r)) + beta * lambda * r;
    if beta < beta_c() {
        Ok((beta * beta / 4.0 + LN_2 + tail, 2))
    } else {
        Ok((beta * sqrt(LN_2) + tail, 3))
    }
}

pub fn a2(beta: f64, lambda: f64, params: &RemParams) -> Result<f64> {
    Ok(a2_with_piece(beta, lambda, params)?.0)
}

/// Which branch attains the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveBranch {
    A1,
    A2 { piece: u8 },
}

impl core::fmt::Display for ActiveBranch {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ActiveBranch::A1 => write!(f, "a1"),
            ActiveBranch::A2 { piece } => write!(f, "a2.{piece}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub beta: f64,
    pub lambda: f64,
    pub f2: f64,
    pub a1: f64,
    pub a2: f64,
    pub active: ActiveBranch,
}

pub fn surface_point(beta: f64, lambda: f64, params: &RemParams) -> Result<SurfacePoint> {
    check_beta(beta)?;
    let x1 = a1(beta, lambda);
    let (x2, piece) = a2_with_piece(beta, lambda, params)?;
    let (best, active) = if x1 > x2 {
        (x1, ActiveBranch::A1)
    } else {
        (x2, ActiveBranch::A2 { piece })
    };
    Ok(SurfacePoint {
        beta,
        lambda,
        f2: -best / beta,
        a1: x1,
        a2: x2,
        active,
    })
}

/// Two-replica free energy `-max(a1, a2)/β`.
pub fn f2_rem(beta: f64, lambda: f64, params: &RemParams) -> Result<f64> {
    Ok(surface_point(beta, lambda, params)?.f2)
}

/// Coupling at which `a1 = a2` inside `[lo, hi]`, by bisection; `None` when
/// the difference does not change sign there.
pub fn branch_crossing(beta: f64, lo: f64, hi: f64, params: &RemParams) -> Result<Option<f64>> {
    let diff = |l: f64| -> Result<f64> { Ok(a1(beta, l) - a2(beta, l, params)?) };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (diff(a)?, diff(b)?);
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = diff(mid)?;
        if fm.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < params.solver_tol {
            break;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// Single-replica free energy.
pub fn f_rem(beta: f64) -> f64 {
    if beta <= beta_c() {
        -LN_2 / beta - beta / 4.0
    } else {
        -sqrt(LN_2)
    }
}

pub fn q_br_rem(beta: f64) -> f64 {
    if beta < beta_c() {
        0.0
    } else {
        let r = beta_c() / beta;
        sqrt(r * (1.0 - r))
    }
}

pub fn q_jump_rem(beta: f64) -> f64 {
    let d = f2_rem_one_sided_derivatives(beta);
    0.5 * (-d.right - (-d.left))
}

/// Limit of the disorder-averaged overlap at zero coupling.
pub fn mean_overlap_rem(beta: f64) -> f64 {
    if beta < beta_c() {
        0.0
    } else {
        1.0 - beta_c() / beta
    }
}

/// Atoms `(q, weight)` of the limiting overlap distribution.
pub fn p_q_rem(beta: f64) -> Vec<(f64, f64)> {
    if beta <= beta_c() {
        alloc::vec![(0.0, 1.0)]
    } else {
        let w0 = beta_c() / beta;
        alloc::vec![(0.0, w0), (1.0, 1.0 - w0)]
    }
}

/// `∂f2/∂λ` just right and just left of `λ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub right: f64,
    pub left: f64,
}

pub fn f2_rem_one_sided_derivatives(beta: f64) -> OneSided {
    OneSided {
        right: if beta >= beta_c() { -1.0 } else { 0.0 },
        left: 0.0,
    }
}

/// One finite-N realization of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct RemFiniteN {
    pub n: usize,
    pub energies: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

pub const MAX_SPINS_SINGLE: usize = 24;

impl RemFiniteN {
    /// Energies `√(N/2)·z_σ` in configuration order from stream `stream`.
    pub fn sample(n: usize, seed: u64, stream: u64) -> Result<Self> {
        if n == 0 || n > MAX_SPINS_SINGLE {
            return Err(Error::SizeCap {
                what: "random energy model spins",
                size: n,
                cap: MAX_SPINS_SINGLE,
            });
        }
        let mut rng = StreamRng::new(seed, stream);
        let scale = sqrt(n as f64 / 2.0);
        let energies = (0..1usize << n).map(|_| scale * rng.gaussian()).collect();
        Ok(Self {
            n,
            energies,
            seed,
            stream,
        })
    }

    pub fn log_z(&self, beta: f64) -> f64 {
        let lw: Vec<f64> = self.energies.iter().map(|&e| -beta * e).collect();
        log_sum_exp(&lw)
    }

    pub fn pair_table(&self, beta: f64) -> Result<PairTable> {
        let lw = self.energies.iter().map(|&e| -beta * e).collect();
        PairTable::from_log_weights(lw, self.n, beta, false)
    }
}

/// Per-sample finite-N quantities and bound gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteNSample {
    pub log_z1: f64,
    pub log_z1_2beta: f64,
    pub log_z2: Option<f64>,
    /// `ln Z2(λ) - βλN - ln Z(2β)`; nonnegative.
    pub diagonal_gap: Option<f64>,
    /// `ln Z2(λ) - ln Z2(0) - βλN⟨R⟩_0`; nonnegative.
    pub jensen_gap: Option<f64>,
}

pub fn finite_n_sample(n: usize, beta: f64, lambda: f64, seed: u64, stream: u64) -> Result<FiniteNSample> {
    check_beta(beta)?;
    let rem = RemFiniteN::sample(n, seed, stream)?;
    let log_z1 = rem.log_z(beta);
    let log_z1_2beta = rem.log_z(2.0 * beta);
    let mut out = FiniteNSample {
        log_z1,
        log_z1_2beta,
        log_z2: None,
        diagonal_gap: None,
        jensen_gap: None,
    };
    if n <= crate::exact::MAX_SITES_REPLICA {
        let t = rem.pair_table(beta)?;
        let lz2 = t.log_z2(lambda);
        let (r0, _) = t.overlap_moments(0.0);
        let bln = beta * lambda * n as f64;
        out.log_z2 = Some(lz2);
        out.diagonal_gap = Some(lz2 - (bln + log_z1_2beta));
        out.jensen_gap = Some(lz2 - t.log_z2(0.0) - bln * r0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: RemParams = RemParams {
        solver_tol: 1e-12,
        solver_max_iter: 10_000,
    };

    #[test]
    fn entropy_values() {
        assert!((s0(0.0).unwrap() - LN_2).abs() < 1e-16);
        assert_eq!(s0(1.0).unwrap(), 0.0);
        assert_eq!(s0(-1.0).unwrap(), 0.0);
        // extended-precision reference
        assert!((s0(0.5).unwrap() - 0.562_335_144_618_808_4).abs() < 1e-15);
        assert!(s0(1.0 - 1e-15).unwrap() > 0.0);
        assert!(s0(1.5).is_err());
    }

    #[test]
    fn rho_properties() {
        assert_eq!(rho(0.0, &P).unwrap(), 0.0);
        let small = rho(1e-4, &P).unwrap() / 1e-4;
        assert!((small - beta_c()).abs() < 1e-6);
        assert!((rho(-0.3, &P).unwrap() + rho(0.3, &P).unwrap()).abs() < 1e-12);
        for lam in [0.01, 0.3, 1.0, 5.0, 40.0] {
            let r = rho(lam, &P).unwrap();
            assert!((r - tanh(2.0 * lam * sqrt(s0(r).unwrap()))).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_line() {
        assert!((beta_bar_c(0.0, &P).unwrap() - beta_c()).abs() < 1e-12);
        assert!((beta_c() - 1.665_109_222_315_395).abs() < 1e-14);
        assert!(beta_bar_c(0.5, &P).unwrap() < beta_bar_c(0.1, &P).unwrap());
        let far = beta_bar_c(10.0, &P).unwrap();
        assert!(far < 0.5 && beta_bar_c(100.0, &P).unwrap() < far);
        let b = beta_bar_c(0.3, &P).unwrap();
        assert!((b - 2.0 * sqrt(s0(tanh(b * 0.3)).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn branch_values() {
        let b = beta_c() / 2.0;
        let lam = 0.2;
        let lo = b * b + LN_2 + b * lam;
        let hi = 2.0 * b * sqrt(LN_2) + b * lam;
        assert!((lo - hi).abs() < 1e-14);
        for beta in [0.3, 1.0, 1.6] {
            assert!((a2(beta, 0.0, &P).unwrap() - (beta * beta / 2.0 + 2.0 * LN_2)).abs() < 1e-14);
        }
        for beta in [beta_c(), 2.0, 4.0] {
            assert!((a2(beta, 0.0, &P).unwrap() - 2.0 * beta * sqrt(LN_2)).abs() < 1e-14);
        }
    }

    #[test]
    fn factorization_at_zero_coupling() {
        for i in 0..100 {
            let beta = 0.2 + 4.8 * i as f64 / 99.0;
            assert!((f2_rem(beta, 0.0, &P).unwrap() - 2.0 * f_rem(beta)).abs() < 1e-10);
        }
    }

    #[test]
    fn small_coupling_forms() {
        for beta in [0.3, 0.7, 1.0] {
            for lam in [-0.1, -0.03, 0.02, 0.1] {
                let t = tanh(beta * lam);
                let expect = beta * beta / 2.0 + LN_2 + s0(t).unwrap() + beta * lam * t;
                assert!((-beta * f2_rem(beta, lam, &P).unwrap() - expect).abs() < 1e-10);
            }
        }
        for beta in [beta_c(), 2.5, 4.0] {
            for lam in [0.0, 0.05, 0.1] {
                let expect = 2.0 * beta * sqrt(LN_2) + beta * lam;
                assert!((-beta * f2_rem(beta, lam, &P).unwrap() - expect).abs() < 1e-10);
            }
            for lam in [-0.1, -0.01] {
                let r = rho(lam, &P).unwrap();
                let expect = beta * sqrt(LN_2) + beta * sqrt(s0(r).unwrap()) + beta * lam * r;
                assert!((-beta * f2_rem(beta, lam, &P).unwrap() - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn asymmetric_in_spin_glass_phase() {
        let beta = 2.5;
        let d = f2_rem(beta, 0.1, &P).unwrap() - f2_rem(beta, -0.1, &P).unwrap();
        assert!(d.abs() > 0.01);
    }

    #[test]
    fn closed_form_order_parameters() {
        let bc = beta_c();
        assert!((f_rem(3.0) + sqrt(LN_2)).abs() < 1e-15);
        assert_eq!(q_jump_rem(bc), 0.5);
        assert_eq!(q_jump_rem(1.0), 0.0);
        assert!((q_br_rem(2.0 * bc) - 0.5).abs() < 1e-15);
        assert_eq!(p_q_rem(1.0), alloc::vec![(0.0, 1.0)]);
        let atoms = p_q_rem(2.0 * bc);
        assert!((atoms[0].1 - 0.5).abs() < 1e-15 && (atoms[1].1 - 0.5).abs() < 1e-15);
        for i in 1..200 {
            let beta = 0.05 * i as f64;
            let (qj, qb) = (q_jump_rem(beta), q_br_rem(beta));
            assert!(qj >= qb * qb / 4.0);
            assert!(qj >= qb);
        }
    }

    #[test]
    fn numerical_one_sided_derivatives() {
        let delta = 1e-6;
        for beta in [1.0, 2.0, 3.5] {
            let f0 = f2_rem(beta, 0.0, &P).unwrap();
            let right = (f2_rem(beta, delta, &P).unwrap() - f0) / delta;
            let left = (f0 - f2_rem(beta, -delta, &P).unwrap()) / delta;
            let d = f2_rem_one_sided_derivatives(beta);
            assert!((right - d.right).abs() < 1e-5, "{beta} {right}");
            assert!((left - d.left).abs() < 1e-5);
        }
    }

    #[test]
    fn branch_crossing_found() {
        // at β ≥ β_c, a1 overtakes a2 exactly at λ = 0
        let c = branch_crossing(2.5, -0.2, 0.2, &P).unwrap().unwrap();
        assert!(c.abs() < 1e-9);
    }

    #[test]
    fn finite_n_bounds() {
        let s = finite_n_sample(8, 1.5, 0.2, 4, 0).unwrap();
        assert!(s.diagonal_gap.unwrap() >= 0.0);
        assert!(s.jensen_gap.unwrap() >= -1e-12);
        let z = finite_n_sample(6, 1.0, 0.0, 4, 1).unwrap();
        assert!((z.log_z2.unwrap() - 2.0 * z.log_z1).abs() < 1e-12);
    }
}
