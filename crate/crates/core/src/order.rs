//! Finite-size estimators for the spin-glass order parameters and the
//! non-random pair `(μ_fluc, μ_jump)`.
//!
//! Every estimator reports the finite-size sequence; no limit is claimed.
//! Disorder sample `k` at every size uses random stream `k` of the seed.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderRealization, DisorderSpec};
use crate::error::{check_beta, Error, Result};
use crate::exact::{FieldEngine, PairTable, SiteStats};
use crate::exec::Executor;
use crate::hamiltonian::Model;
use crate::lattice::Lattice;
use crate::math::{self, pairwise_sum, pairwise_sum_by, sqrt};
use crate::rng::{derive_seed, StreamRng};
use crate::spins::BoundaryConfig;
use crate::stats::{std_dev_estimate, ObservableEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderParamName {
    QBr,
    QEa,
    QJump,
    QLrsb,
    MuFluc,
    MuJump,
}

impl OrderParamName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::QBr => "q_br",
            Self::QEa => "q_ea",
            Self::QJump => "q_jump",
            Self::QLrsb => "q_lrsb",
            Self::MuFluc => "mu_fluc",
            Self::MuJump => "mu_jump",
        }
    }
}

/// Boundary condition shared by all replicas of one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    #[default]
    Open,
    Plus,
    /// Per-sample maximizer of `Σ⟨σ_x⟩²`.
    Maximizing,
}

/// One row of a finite-size sequence. `lambda` is set for quantities that
/// depend on a coupling (or field step); `certified` for rows that used a
/// boundary maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub l: usize,
    pub lambda: Option<f64>,
    pub value: f64,
    pub stderr: f64,
    pub certified: Option<bool>,
}

/// Secondary series reported next to the main sequence, e.g. the `λ`-curve of
/// `E⟨R⟩` behind `q_jump`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxPoint {
    pub label: String,
    pub l: usize,
    pub lambda: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSettings {
    pub d: usize,
    pub beta: f64,
    pub lambda_grid: Vec<f64>,
    pub boundary: BoundaryChoice,
    pub n_disorder: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParamEstimate {
    pub name: OrderParamName,
    pub per_l: Vec<SizePoint>,
    pub aux: Vec<AuxPoint>,
    pub extrapolated: Option<Extrapolated>,
    pub settings: EstimateSettings,
}

impl OrderParamEstimate {
    /// Rows at the smallest `λ` of the grid (all rows when there is none).
    pub fn leading_rows(&self) -> Vec<SizePoint> {
        let lmin = self
            .per_l
            .iter()
            .filter_map(|p| p.lambda)
            .fold(f64::INFINITY, f64::min);
        self.per_l
            .iter()
            .filter(|p| p.lambda.is_none_or(|v| v == lmin))
            .copied()
            .collect()
    }

    /// Least-squares line in `1/L` through [`Self::leading_rows`], evaluated
    /// at `1/L = 0`. Tagged heuristic: no convergence rate is known.
    pub fn with_heuristic_fit(mut self) -> Self {
        let rows = self.leading_rows();
        if let Some(v) = fit_inverse_size(&rows) {
            self.extrapolated = Some(Extrapolated {
                value: v,
                method: "heuristic: linear in 1/L".into(),
            });
        }
        self
    }
}

/// Intercept of the least-squares line `value ≈ a + b/L`; needs two distinct
/// sizes.
pub fn fit_inverse_size(rows: &[SizePoint]) -> Option<f64> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|p| 1.0 / p.l as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|p| p.value).collect();
    let mx = pairwise_sum(&xs) / n as f64;
    let my = pairwise_sum(&ys) / n as f64;
    let sxx = pairwise_sum_by(n, |i| (xs[i] - mx) * (xs[i] - mx));
    if sxx == 0.0 {
        return None;
    }
    let sxy = pairwise_sum_by(n, |i| (xs[i] - mx) * (ys[i] - my));
    Some(my - sxy / sxx * mx)
}

// ---------------------------------------------------------------------------
// Boundary maximization

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxStrategy {
    CornerEnum,
    CoordAscent,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMaxOptions {
    /// Random interior starts for coordinate ascent.
    pub restarts: usize,
    /// Largest boundary enumerated over all corners.
    pub corner_limit: usize,
    pub max_sweeps: usize,
    /// Projected-gradient norm accepted as stationary.
    pub stationarity_tol: f64,
    pub seed: u64,
}

impl Default for BoundaryMaxOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            corner_limit: 16,
            max_sweeps: 500,
            stationarity_tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMaxResult {
    pub best_b: BoundaryConfig,
    /// `Σ_x ⟨σ_x⟩² / N` at `best_b`.
    pub value: f64,
    pub strategy: MaxStrategy,
    pub n_restarts: usize,
    pub certified: bool,
    /// Best corner value, when corners were enumerated.
    pub corner_value: Option<f64>,
    /// Best value reached by coordinate ascent.
    pub ascent_value: f64,
    /// Largest projected-gradient norm over the ascent end points.
    pub gradient_norm: f64,
}

/// `b ↦ Σ_x ⟨σ_x⟩²_b / N` for fixed couplings.
pub struct BoundaryObjective {
    engine: FieldEngine,
    h: Vec<f64>,
    /// `(site, J_u)` per boundary bond.
    legs: Vec<(usize, f64)>,
    beta: f64,
    flip_symmetric: bool,
}

impl BoundaryObjective {
    pub fn new(lattice: &Lattice, disorder: &DisorderRealization, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let model = Model::open(lattice.clone(), disorder.clone())?;
        let engine = FieldEngine::new(&model, beta)?;
        let legs = lattice
            .boundary_bonds()
            .iter()
            .zip(&disorder.j_boundary)
            .map(|(bb, &j)| (bb.site, j))
            .collect();
        Ok(Self {
            engine,
            h: disorder.h.clone(),
            legs,
            beta,
            flip_symmetric: !disorder.has_field(),
        })
    }

    pub fn n_boundary(&self) -> usize {
        self.legs.len()
    }

    fn n(&self) -> usize {
        self.h.len()
    }

    pub fn field(&self, b: &[f64]) -> Vec<f64> {
        let mut g = self.h.clone();
        for (&(x, j), &bu) in self.legs.iter().zip(b) {
            g[x] += j * bu;
        }
        g
    }

    pub fn stats(&self, b: &[f64], with_corr: bool) -> SiteStats {
        self.engine.stats(&self.field(b), with_corr)
    }

    pub fn value(&self, b: &[f64]) -> f64 {
        self.stats(b, false).sum_m_sq() / self.n() as f64
    }

    /// `∂/∂b_u` of the objective: `2βJ_u Σ_x m_x Cov(σ_x, σ_{x(u)}) / N`.
    pub fn gradient(&self, st: &SiteStats) -> Vec<f64> {
        let n = self.n();
        let c = st.corr.as_ref().expect("gradient needs correlations");
        self.legs
            .iter()
            .map(|&(s, j)| {
                let acc = pairwise_sum_by(n, |x| st.m[x] * (c[x * n + s] - st.m[x] * st.m[s]));
                2.0 * self.beta * j * acc / n as f64
            })
            .collect()
    }

    /// Gradient norm with components pointing out of `[-1,1]` removed.
    pub fn projected_gradient_norm(&self, b: &[f64]) -> f64 {
        let st = self.stats(b, true);
        let g = self.gradient(&st);
        let s = pairwise_sum_by(g.len(), |u| {
            let gu = g[u];
            let blocked = (b[u] >= 1.0 && gu > 0.0) || (b[u] <= -1.0 && gu < 0.0);
            if blocked {
                0.0
            } else {
                gu * gu
            }
        });
        sqrt(s)
    }

    /// Best corner of `{-1,+1}^∂`, lexicographically smallest among ties.
    /// Without fields `b` and `-b` give the same value, so only corners with
    /// `b_0 = -1` are visited.
    pub fn best_corner(&self) -> (BoundaryConfig, f64) {
        let nb = self.n_boundary();
        let count = if self.flip_symmetric && nb > 0 {
            1u64 << (nb - 1)
        } else {
            1u64 << nb
        };
        let mut best = (BoundaryConfig::corner(0, nb), f64::NEG_INFINITY);
        for mask in 0..count {
            let b = BoundaryConfig::corner(mask, nb);
            let v = self.value(&b.b);
            if v > best.1 {
                best = (b, v);
            }
        }
        best
    }

    /// Exact maximization of the objective along coordinate `u`, using the
    /// closed form of a one-site field tilt.
    fn line_max(&self, b: &[f64], u: usize, st: &SiteStats) -> (f64, f64) {
        let n = self.n();
        let (s, j) = self.legs[u];
        let c = st.corr.as_ref().expect("line search needs correlations");
        let zp = 0.5 * (1.0 + st.m[s]);
        let zm = 0.5 * (1.0 - st.m[s]);
        let mp: Vec<f64> = (0..n).map(|x| 0.5 * (st.m[x] + c[x * n + s])).collect();
        let mm: Vec<f64> = (0..n).map(|x| 0.5 * (st.m[x] - c[x * n + s])).collect();
        let b0 = b[u];
        let bj = self.beta * j;
        // Returns (F, F') at boundary value v.
        let eval = |v: f64| -> (f64, f64) {
            let cc = bj * (v - b0);
            let (wp, wm) = if cc >= 0.0 {
                (1.0, math::exp(-2.0 * cc))
            } else {
                (math::exp(2.0 * cc), 1.0)
            };
            let den = zp * wp + zm * wm;
            if den <= 0.0 {
                return (f64::NEG_INFINITY, 0.0);
            }
            let ms = (zp * wp - zm * wm) / den;
            let mx: Vec<f64> = (0..n).map(|x| (mp[x] * wp + mm[x] * wm) / den).collect();
            let f = pairwise_sum_by(n, |x| mx[x] * mx[x]) / n as f64;
            let df = pairwise_sum_by(n, |x| {
                let dm = (mp[x] * wp - mm[x] * wm) / den - mx[x] * ms;
                mx[x] * dm
            });
            (f, 2.0 * bj * df / n as f64)
        };
        const GRID: usize = 40;
        let pts: Vec<f64> = (0..=GRID).map(|i| -1.0 + 2.0 * i as f64 / GRID as f64).collect();
        let vals: Vec<(f64, f64)> = pts.iter().map(|&v| eval(v)).collect();
        let mut bi = 0;
        for i in 1..=GRID {
            if vals[i].0 > vals[bi].0 {
                bi = i;
            }
        }
        let mut best = (pts[bi], vals[bi].0);
        // Refine the stationary point of F' next to the best grid point.
        let brackets = [(bi.wrapping_sub(1), bi), (bi, bi + 1)];
        for (lo, hi) in brackets {
            if lo > GRID || hi > GRID {
                continue;
            }
            let (mut a, mut z) = (pts[lo], pts[hi]);
            if !(vals[lo].1 > 0.0 && vals[hi].1 < 0.0) {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + z);
                if mid <= a || mid >= z {
                    break;
                }
                if eval(mid).1 > 0.0 {
                    a = mid;
                } else {
                    z = mid;
                }
            }
            for v in [a, z] {
                let f = eval(v).0;
                if f > best.1 {
                    best = (v, f);
                }
            }
        }
        let here = eval(b0).0;
        if best.1 > here {
            best
        } else {
            (b0, here)
        }
    }

    /// Projected coordinate ascent from `start`; returns the end point, its
    /// value and the projected-gradient norm there.
    pub fn ascend(&self, start: &[f64], max_sweeps: usize) -> (Vec<f64>, f64, f64) {
        let mut b = start.to_vec();
        let nb = b.len();
        for _ in 0..max_sweeps {
            let mut moved = 0.0f64;
            for u in 0..nb {
                let st = self.stats(&b, true);
                let (v, _) = self.line_max(&b, u, &st);
                moved = moved.max(math::abs(v - b[u]));
                b[u] = v.clamp(-1.0, 1.0);
            }
            if moved < 1e-13 {
                break;
            }
        }
        let value = self.value(&b);
        let pg = self.projected_gradient_norm(&b);
        (b, value, pg)
    }
}

/// Maximizes `Σ_x ⟨σ_x⟩² / N` over boundary values in `[-1,1]`.
///
/// Up to `opts.corner_limit` boundary bonds all corners are enumerated; in
/// every case coordinate ascent runs from the best corner (if any) and from
/// `opts.restarts` random interior points. The result is certified when the
/// corners were exhaustive, every ascent ended stationary and none beat the
/// best corner.
pub fn maximize_boundary(
    lattice: &Lattice,
    disorder: &DisorderRealization,
    beta: f64,
    opts: &BoundaryMaxOptions,
) -> Result<BoundaryMaxResult> {
    let obj = BoundaryObjective::new(lattice, disorder, beta)?;
    let nb = obj.n_boundary();
    let exhaustive = nb <= opts.corner_limit;
    let corner = if exhaustive { Some(obj.best_corner()) } else { None };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some((b, _)) = &corner {
        starts.push(b.b.clone());
    }
    let mut rng = StreamRng::new(derive_seed(opts.seed, 0xB0_0D), 0);
    for _ in 0..opts.restarts {
        starts.push((0..nb).map(|_| 2.0 * rng.uniform() - 1.0).collect());
    }
    let mut ascent: Option<(Vec<f64>, f64)> = None;
    let mut gradient_norm = 0.0f64;
    for s in &starts {
        let (b, v, pg) = obj.ascend(s, opts.max_sweeps);
        gradient_norm = gradient_norm.max(pg);
        if ascent.as_ref().is_none_or(|a| v > a.1) {
            ascent = Some((b, v));
        }
    }
    let (ab, av) = ascent.unwrap_or_else(|| (Vec::new(), obj.value(&[])));
    let stationary = gradient_norm < opts.stationarity_tol;

    let corner_value = corner.as_ref().map(|c| c.1);
    let (best_b, value, certified, strategy) = match corner {
        Some((cb, cv)) => {
            let beaten = av > cv + 1e-12;
            if beaten {
                (BoundaryConfig::new(ab)?, av, false, MaxStrategy::Hybrid)
            } else {
                (cb, cv, stationary, MaxStrategy::Hybrid)
            }
        }
        None => (BoundaryConfig::new(ab)?, av, false, MaxStrategy::CoordAscent),
    };
    Ok(BoundaryMaxResult {
        best_b,
        value,
        strategy,
        n_restarts: opts.restarts,
        certified,
        corner_value,
        ascent_value: av,
        gradient_norm,
    })
}

// ---------------------------------------------------------------------------
// Estimators

fn check_sizes(sizes: &[usize], n_disorder: usize, min_disorder: usize) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::Invalid("no lattice sizes given".into()));
    }
    if n_disorder < min_disorder {
        return Err(Error::Invalid(alloc::format!(
            "need at least {min_disorder} disorder samples, got {n_disorder}"
        )));
    }
    Ok(())
}

/// Validates a list of positive coupling magnitudes `λ_k`, sorted
/// increasingly. The symmetric grid is `±λ_k`; zero is rejected since the
/// jump is built from one-sided limits.
pub fn check_lambda_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty lambda grid".into()));
    }
    if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Invalid(alloc::format!(
            "lambda grid magnitudes must be positive and finite, got {v}"
        )));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// `δ r^k` for `k = 0..count`.
pub fn geometric_grid(delta: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| delta * libm::pow(ratio, k as f64)).collect()
}

/// Model for `dis` under the requested boundary choice; the flag is the
/// maximizer's certificate when one was run.
pub fn boundary_model(
    lattice: &Lattice,
    dis: DisorderRealization,
    beta: f64,
    boundary: BoundaryChoice,
    opts: &BoundaryMaxOptions,
) -> Result<(Model, Option<bool>)> {
    let nb = lattice.n_boundary();
    match boundary {
        BoundaryChoice::Open => Ok((Model::open(lattice.clone(), dis)?, None)),
        BoundaryChoice::Plus => Ok((Model::new(lattice.clone(), dis, BoundaryConfig::plus(nb))?, None)),
        BoundaryChoice::Maximizing => {
            let r = maximize_boundary(lattice, &dis, beta, opts)?;
            Ok((Model::new(lattice.clone(), dis, r.best_b)?, Some(r.certified)))
        }
    }
}

fn all_certified(flags: &[Option<bool>]) -> Option<bool> {
    if flags.iter().all(Option::is_none) {
        None
    } else {
        Some(flags.iter().all(|f| *f == Some(true)))
    }
}

/// `q_br(L) = sqrt(E⟨R²⟩ − (E⟨R⟩)²)` for two uncoupled replicas, with the
/// delta-method standard error.
#[allow(clippy::too_many_arguments)]
pub fn q_br_estimate<E: Executor>(
    exec: &E,
    d: usize,
    sizes: &[usize],
    beta: f64,
    spec: &DisorderSpec,
    boundary: BoundaryChoice,
    n_disorder: usize,
    seed: u64,
    max_opts: &BoundaryMaxOptions,
) -> Result<OrderParamEstimate> {
    check_beta(beta)?;
    check_sizes(sizes, n_disorder, 2)?;
    let mut per_l = Vec::new();
    for &l in sizes {
        let lat = Lattice::new(d, l)?;
        let n = lat.n_sites() as f64;
        let rows: Vec<Result<(f64, f64, Option<bool>)>> = exec.map(n_disorder, |k| {
            let dis = spec.sample(&lat, seed, k as u64)?;
            let (model, cert) = boundary_model(&lat, dis, beta, boundary, max_opts)?;
            let st = crate::exact::site_stats(&model, beta, true)?;
            let r = st.sum_m_sq() / n;
            let r2 = st.sum_corr_sq().unwrap_or(0.0) / (n * n);
            Ok((r, r2, cert))
        });
        let rows: Vec<(f64, f64, Option<bool>)> = rows.into_iter().collect::<Result<_>>()?;
        let r: Vec<f64> = rows.iter().map(|t| t.0).collect();
        let r2: Vec<f64> = rows.iter().map(|t| t.1).collect();
        let certs: Vec<Option<bool>> = rows.iter().map(|t| t.2).collect();
        let (value, stderr) = std_dev_estimate(&r2, &r);
        per_l.push(SizePoint {
            l,
            lambda: None,
            value,
            stderr,
            certified: all_certified(&certs),
        });
    }
    Ok(OrderParamEstimate {
        name: OrderParamName::QBr,
        per_l,
        aux: Vec::new(),
        extrapolated: None,
        settings: EstimateSettings {
            d,
            beta,
            lambda_grid: Vec::new(),
            boundary,
            n_disorder,
            seed,
        },
    })
}

fn per_l_aux_push(aux: &mut Vec<AuxPoint>, label: &str, l: usize, lambda: f64, e: ObservableEstimate) {
    aux.push(AuxPoint {
        label: label.into(),
        l,
        lambda,
        value: e.mean,
        stderr: e.stderr,
    });
}

/// `q_EA(L) = E max_b Σ_x ⟨σ_x⟩²_b / N`.
pub fn q_ea_estimate<E: Executor>(
    exec: &E,
    d: usize,
    sizes: &[usize],
    beta: f64,
    spec: &DisorderSpec,
    n_disorder: usize,
    seed: u64,
    max_opts: &BoundaryMaxOptions,
) -> Result<OrderParamEstimate> {
    check_beta(beta)?;
    check_sizes(sizes, n_disorder, 1)?;
    let mut per_l = Vec::new();
    for &l in sizes {
        let lat = Lattice::new(d, l)?;
        let rows: Vec<Result<BoundaryMaxResult>> = exec.map(n_disorder, |k| {
            let dis = spec.sample(&lat, seed, k as u64)?;
            maximize_boundary(&lat, &dis, beta, max_opts)
        });
        let rows: Vec<BoundaryMaxResult> = rows.into_iter().collect::<Result<_>>()?;
        let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let e = ObservableEstimate::from_samples(&vals);
        per_l.push(SizePoint {
            l,
            lambda: None,
            value: e.mean,
            stderr: e.stderr,
            certified: Some(rows.iter().all(|r| r.certified)),
        });
    }
    Ok(OrderParamEstimate {
        name: OrderParamName::QEa,
        per_l,
        aux: Vec::new(),
        extrapolated: None,
        settings: EstimateSettings {
            d,
            beta,
            lambda_grid: Vec::new(),
            boundary: BoundaryChoice::Maximizing,
            n_disorder,
            seed,
        },
    })
}

/// `q_jump(L; λ) = ½[E⟨R⟩(λ) − E⟨R⟩(−λ)]` for every grid magnitude. The
/// main rows hold the half-differences (paired per sample); `aux` holds the
/// full curve `E⟨R⟩` at `±λ` under the label `mean_overlap`.
#[allow(clippy::too_many_arguments)]
pub fn q_jump_estimate<E: Executor>(
    exec: &E,
    d: usize,
    sizes: &[usize],
    beta: f64,
    spec: &DisorderSpec,
    boundary: BoundaryChoice,
    lambda_grid: &[f64],
    n_disorder: usize,
    seed: u64,
    max_opts: &BoundaryMaxOptions,
) -> Result<OrderParamEstimate> {
    check_beta(beta)?;
    check_sizes(sizes, n_disorder, 1)?;
    let grid = check_lambda_grid(lambda_grid)?;
    let signed: Vec<f64> = grid.iter().rev().map(|v| -v).chain(grid.iter().copied()).collect();
    let mut per_l = Vec::new();
    let mut aux = Vec::new();
    for &l in sizes {
        let lat = Lattice::new(d, l)?;
        let rows: Vec<Result<(Vec<f64>, Option<bool>)>> = exec.map(n_disorder, |k| {
            let dis = spec.sample(&lat, seed, k as u64)?;
            let (model, cert) = boundary_model(&lat, dis, beta, boundary, max_opts)?;
            let table = PairTable::new(&model, beta)?;
            Ok((signed.iter().map(|&lam| table.overlap_moments(lam).0).collect(), cert))
        });
        let rows: Vec<(Vec<f64>, Option<bool>)> = rows.into_iter().collect::<Result<_>>()?;
        let certs: Vec<Option<bool>> = rows.iter().map(|r| r.1).collect();
        let cert = all_certified(&certs);
        for (i, &lam) in signed.iter().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r.0[i]).collect();
            per_l_aux_push(&mut aux, "mean_overlap", l, lam, ObservableEstimate::from_samples(&col));
        }
        let g = grid.len();
        for (k, &lam) in grid.iter().enumerate() {
            let (plus, minus) = (g + k, g - 1 - k);
            let half: Vec<f64> = rows.iter().map(|r| 0.5 * (r.0[plus] - r.0[minus])).collect();
            let e = ObservableEstimate::from_samples(&half);
            per_l.push(SizePoint {
                l,
                lambda: Some(lam),
                value: e.mean,
                stderr: e.stderr,
                certified: cert,
            });
        }
    }
    Ok(OrderParamEstimate {
        name: OrderParamName::QJump,
        per_l,
        aux,
        extrapolated: None,
        settings: EstimateSettings {
            d,
            beta,
            lambda_grid: grid,
            boundary,
            n_disorder,
            seed,
        },
    })
}

/// Per-sample ingredients of `q_lrsb` at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrsbSample {
    /// `(ln Z3(λ,−λ) − ln Z3(0,0)) / (βNλ)`, i.e. `−[f3(λ,−λ) − f3(0,0)]/λ`.
    pub quotient: f64,
    /// `⟨R12⟩ − ⟨R13⟩` at `(λ, −λ)`.
    pub overlap_difference: f64,
    /// `⟨R12⟩ − ⟨R13⟩` at `(0, 0)`.
    pub overlap_difference_at_zero: f64,
}

pub fn lrsb_sample(table: &PairTable, lambda: f64) -> LrsbSample {
    let n = table.n_sites() as f64;
    let beta = table.beta();
    let q = (table.log_z3(lambda, -lambda) - table.log_z3(0.0, 0.0)) / (beta * n * lambda);
    let at = table.three_replica_moments(lambda, -lambda);
    let zero = table.three_replica_moments(0.0, 0.0);
    LrsbSample {
        quotient: q,
        overlap_difference: at.r12 - at.r13,
        overlap_difference_at_zero: zero.r12 - zero.r13,
    }
}

/// `q_lrsb(L; λ)` as the free-energy difference quotient; `aux` carries the
/// overlap form `E[⟨R12⟩ − ⟨R13⟩]` at `(λ, −λ)` under `overlap_difference`.
#[allow(clippy::too_many_arguments)]
pub fn q_lrsb_estimate<E: Executor>(
    exec: &E,
    d: usize,
    sizes: &[usize],
    beta: f64,
    spec: &DisorderSpec,
    boundary: BoundaryChoice,
    lambda_grid: &[f64],
    n_disorder: usize,
    seed: u64,
    max_opts: &BoundaryMaxOptions,
) -> Result<OrderParamEstimate> {
    check_beta(beta)?;
    check_sizes(sizes, n_disorder, 1)?;
    let grid = check_lambda_grid(lambda_grid)?;
    let mut per_l = Vec::new();
    let mut aux = Vec::new();
    for &l in sizes {
        let lat = Lattice::new(d, l)?;
        let rows: Vec<Result<(Vec<LrsbSample>, Option<bool>)>> = exec.map(n_disorder, |k| {
            let dis = spec.sample(&lat, seed, k as u64)?;
            let (model, cert) = boundary_model(&lat, dis, beta, boundary, max_opts)?;
            let table = PairTable::new(&model, beta)?;
            Ok((grid.iter().map(|&lam| lrsb_sample(&table, lam)).collect(), cert))
        });
        let rows: Vec<(Vec<LrsbSample>, Option<bool>)> = rows.into_iter().collect::<Result<_>>()?;
        let certs: Vec<Option<bool>> = rows.iter().map(|r| r.1).collect();
        for (i, &lam) in grid.iter().enumerate() {
            let q: Vec<f64> = rows.iter().map(|r| r.0[i].quotient).collect();
            let o: Vec<f64> = rows.iter().map(|r| r.0[i].overlap_difference).collect();
            let e = ObservableEstimate::from_samples(&q);
            per_l.push(SizePoint {
                l,
                lambda: Some(lam),
                value: e.mean,
                stderr: e.stderr,
                certified: all_certified(&certs),
            });
            per_l_aux_push(&mut aux, "overlap_difference", l, lam, ObservableEstimate::from_samples(&o));
        }
    }
    Ok(OrderParamEstimate {
        name: OrderParamName::QLrsb,
        per_l,
        aux,
        extrapolated: None,
        settings: EstimateSettings {
            d,
            beta,
            lambda_grid: grid,
            boundary,
            n_disorder,
            seed,
        },
    })
}

/// How the field step behaves with the volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepScaling {
    /// The same `δ` at every size.
    #[default]
    Fixed,
    /// `δ / L^d`, keeping the total field `δ` fixed.
    Volume,
}

/// Non-random ferromagnet for the `μ` pair: uniform coupling `j`, uniform
/// field, open boundary, order parameter `Σ_x σ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSettings {
    pub d: usize,
    pub beta: f64,
    pub h0: f64,
    pub coupling: f64,
    pub scaling: StepScaling,
}

/// One size of the `μ` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuPoint {
    pub l: usize,
    pub step: f64,
    pub mu_fluc: f64,
    pub mu_jump: f64,
    /// `(ψ(h0+δ) − ψ(h0))/δ` with `ψ = ln Z /(βN)`.
    pub right_quotient: f64,
    pub left_quotient: f64,
    /// `⟨Σσ⟩ / N` at `h0`.
    pub mean: f64,
}

pub fn mu_point(settings: &MuSettings, l: usize, delta: f64) -> Result<MuPoint> {
    check_beta(settings.beta)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Invalid(alloc::format!("field step must be positive, got {delta}")));
    }
    let lat = Lattice::new(settings.d, l)?;
    let n = lat.n_sites();
    let nf = n as f64;
    let dis = DisorderRealization::uniform(&lat, settings.coupling, 0.0)?;
    let engine = FieldEngine::new(&Model::open(lat, dis)?, settings.beta)?;
    let step = match settings.scaling {
        StepScaling::Fixed => delta,
        StepScaling::Volume => delta / nf,
    };
    let psi = |h: f64| engine.stats(&vec![h; n], false).log_z / (settings.beta * nf);
    let at = engine.stats(&vec![settings.h0; n], true);
    let total = pairwise_sum(&at.m);
    let c = at.corr.as_ref().expect("requested correlations");
    let second = pairwise_sum(c);
    let var = (second - total * total).max(0.0);
    let p0 = psi(settings.h0);
    let right = (psi(settings.h0 + step) - p0) / step;
    let left = (p0 - psi(settings.h0 - step)) / step;
    Ok(MuPoint {
        l,
        step,
        mu_fluc: sqrt(var) / nf,
        mu_jump: 0.5 * (right - left),
        right_quotient: right,
        left_quotient: left,
        mean: total / nf,
    })
}

/// `(μ_fluc, μ_jump)` sequences; `μ_jump` has one row per field step.
pub fn mu_pair_estimate(
    settings: &MuSettings,
    sizes: &[usize],
    h_grid: &[f64],
) -> Result<(OrderParamEstimate, OrderParamEstimate)> {
    check_sizes(sizes, 0, 0)?;
    let grid = check_lambda_grid(h_grid)?;
    let mut fluc = Vec::new();
    let mut jump = Vec::new();
    for &l in sizes {
        for (i, &dlt) in grid.iter().enumerate() {
            let p = mu_point(settings, l, dlt)?;
            if i == 0 {
                fluc.push(SizePoint {
                    l,
                    lambda: None,
                    value: p.mu_fluc,
                    stderr: 0.0,
                    certified: None,
                });
            }
            jump.push(SizePoint {
                l,
                lambda: Some(dlt),
                value: p.mu_jump,
                stderr: 0.0,
                certified: None,
            });
        }
    }
    let st = EstimateSettings {
        d: settings.d,
        beta: settings.beta,
        lambda_grid: grid,
        boundary: BoundaryChoice::Open,
        n_disorder: 0,
        seed: 0,
    };
    Ok((
        OrderParamEstimate {
            name: OrderParamName::MuFluc,
            per_l: fluc,
            aux: Vec::new(),
            extrapolated: None,
            settings: st.clone(),
        },
        OrderParamEstimate {
            name: OrderParamName::MuJump,
            per_l: jump,
            aux: Vec::new(),
            extrapolated: None,
            settings: st,
        },
    ))
}
