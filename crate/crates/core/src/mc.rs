//! Metropolis and parallel-tempering sampling of two coupled replicas.
//!
//! One chain per inverse temperature, each holding a replica pair
//! `(σ¹, σ²)` with energy `H(σ¹) + H(σ²) − λ σ¹·σ²`. A sweep is `N`
//! single-spin proposals, alternating between the two replicas. Error bars
//! come from logarithmic binning of the measurement series.
//!
//! Checkpoints are little-endian byte strings:
//!
//! ```text
//! magic "GOMC" | u32 version | u64 seed | u64 sweeps done
//! u32 n_chains | u32 n_sites | f64 λ
//! per chain:  f64 β | words of σ¹ | words of σ² | rng | u64 accepted | u64 proposed
//!             | binning(R) | binning(R²) | u32 n_bins, u64 counts (histogram)
//! swap rng | u32 n_pairs, (u64 accepted, u64 attempted) per pair | u64 swap rounds
//! rng      = [u8; 32] key | u64 stream | u128 word position
//! binning  = u32 levels, per level: f64 sum, f64 comp, f64 sum_sq, f64 comp,
//!            u64 count, u8 has_pending, f64 pending
//! ```
//!
//! Words of a replica are `ceil(N/64)` u64 values, bit `x` set for `σ_x = +1`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::hamiltonian::Model;
use crate::lattice::Lattice;
use crate::math::{self, pairwise_sum, sqrt, KahanSum};
use crate::order::{BoundaryChoice, EstimateSettings, OrderParamEstimate, OrderParamName, SizePoint};
use crate::rng::{derive_seed, StreamRng};
use crate::spins::SpinConfig;
use crate::stats::std_dev_estimate;

const MAGIC: &[u8; 4] = b"GOMC";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub beta_ladder: Vec<f64>,
    pub n_sweeps: u64,
    pub n_therm: u64,
    pub measure_every: u64,
    pub lambda: f64,
    pub seed: u64,
    pub swap_every: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_ladder.is_empty() {
            return Err(Error::Invalid("empty beta ladder".into()));
        }
        if self.beta_ladder.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Invalid("ladder temperatures must be finite and >= 0".into()));
        }
        if self.beta_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("beta ladder must be strictly increasing".into()));
        }
        if self.n_therm >= self.n_sweeps {
            return Err(Error::Invalid(format!(
                "thermalization ({}) must be shorter than the run ({})",
                self.n_therm, self.n_sweeps
            )));
        }
        if self.measure_every == 0 || self.swap_every == 0 {
            return Err(Error::Invalid("measure_every and swap_every must be at least 1".into()));
        }
        if !self.lambda.is_finite() {
            return Err(Error::Invalid("lambda must be finite".into()));
        }
        Ok(())
    }
}

/// Per-temperature Monte Carlo estimate of `⟨R⟩` and `⟨R²⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub beta: f64,
    pub mean_r: f64,
    pub mean_r2: f64,
    pub stderr_r: f64,
    pub stderr_r2: f64,
    /// Integrated autocorrelation time of `R`, in measurements.
    pub tau_int: f64,
    pub acceptance: f64,
    pub n_measurements: u64,
    /// False when `20 τ_int` exceeds the number of measurements.
    pub equilibrated: bool,
    /// Counts of overlap values `q = (2a − N)/N` indexed by `a`.
    pub overlap_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub estimates: Vec<McEstimate>,
    /// Exchange acceptance between ladder neighbours `(i, i+1)`.
    pub swap_acceptance: Vec<f64>,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// Binning

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Level {
    sum: KahanSum,
    sum_sq: KahanSum,
    count: u64,
    pending: Option<f64>,
}

/// Online logarithmic binning: level `k` holds means of `2^k` consecutive
/// measurements.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Binning {
    levels: Vec<Level>,
}

/// Levels with fewer bins than this are too noisy to read an error from.
const MIN_BINS: u64 = 64;

impl Binning {
    pub fn push(&mut self, x: f64) {
        let mut v = x;
        let mut k = 0;
        loop {
            if self.levels.len() == k {
                self.levels.push(Level::default());
            }
            let lv = &mut self.levels[k];
            lv.sum.add(v);
            lv.sum_sq.add(v * v);
            lv.count += 1;
            match lv.pending.take() {
                None => {
                    lv.pending = Some(v);
                    return;
                }
                Some(p) => {
                    v = 0.5 * (p + v);
                    k += 1;
                }
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.levels.first().map_or(0, |l| l.count)
    }

    pub fn mean(&self) -> f64 {
        self.levels
            .first()
            .map_or(0.0, |l| l.sum.value() / l.count as f64)
    }

    /// Naive standard error of the mean from the bins at `level`.
    pub fn level_error(&self, level: usize) -> Option<f64> {
        let lv = self.levels.get(level)?;
        if lv.count < 2 {
            return None;
        }
        let n = lv.count as f64;
        let mean = lv.sum.value() / n;
        let var = (lv.sum_sq.value() / n - mean * mean).max(0.0) * n / (n - 1.0);
        Some(sqrt(var / n))
    }

    /// Error from the deepest level with at least 64 bins, and
    /// `τ_int = ½ (err_k / err_0)²`.
    pub fn error_and_tau(&self) -> (f64, f64) {
        let e0 = match self.level_error(0) {
            Some(e) => e,
            None => return (0.0, 0.5),
        };
        let mut best = e0;
        for k in 1..self.levels.len() {
            if self.levels[k].count < MIN_BINS {
                break;
            }
            if let Some(e) = self.level_error(k) {
                best = e;
            }
        }
        let tau = if e0 > 0.0 { 0.5 * (best / e0) * (best / e0) } else { 0.5 };
        (best, tau.max(0.5))
    }
}

// ---------------------------------------------------------------------------
// Chains

/// Couplings in a layout suited to single-spin updates.
#[derive(Debug, Clone)]
pub struct LocalTable {
    n: usize,
    /// `(neighbour, J)` per site.
    neigh: Vec<Vec<(usize, f64)>>,
    /// Effective on-site field (field plus boundary).
    field: Vec<f64>,
}

impl LocalTable {
    pub fn new(model: &Model) -> Self {
        let lat = model.lattice();
        let j = &model.disorder().j_bonds;
        let neigh = (0..lat.n_sites())
            .map(|x| lat.neighbors(x).iter().map(|&(y, k)| (y, j[k])).collect())
            .collect();
        Self {
            n: lat.n_sites(),
            neigh,
            field: model.field().to_vec(),
        }
    }

    #[inline]
    fn local_field(&self, s: &[i8], x: usize) -> f64 {
        let mut f = self.field[x];
        for &(y, j) in &self.neigh[x] {
            f += j * f64::from(s[y]);
        }
        f
    }

    /// `H(σ)` with each bond counted once.
    pub fn energy(&self, s: &[i8]) -> f64 {
        let mut e = 0.0;
        for x in 0..self.n {
            let sx = f64::from(s[x]);
            let mut b = 0.0;
            for &(y, j) in &self.neigh[x] {
                if y > x {
                    b += j * f64::from(s[y]);
                }
            }
            e -= sx * (b + self.field[x]);
        }
        e
    }
}

/// A replica pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairState {
    pub s1: Vec<i8>,
    pub s2: Vec<i8>,
}

impl PairState {
    pub fn random(n: usize, rng: &mut StreamRng) -> Self {
        let mut draw = || (0..n).map(|_| if rng.next_u64() >> 63 == 1 { 1 } else { -1 }).collect();
        let s1 = draw();
        let s2 = draw();
        Self { s1, s2 }
    }

    pub fn dot(&self) -> i64 {
        self.s1
            .iter()
            .zip(&self.s2)
            .map(|(&a, &b)| i64::from(a * b))
            .sum()
    }

    /// `H(σ¹) + H(σ²) − λ σ¹·σ²`.
    pub fn energy(&self, table: &LocalTable, lambda: f64) -> f64 {
        table.energy(&self.s1) + table.energy(&self.s2) - lambda * self.dot() as f64
    }
}

/// One proposed flip of a uniformly chosen site in replica `replica`
/// (0 or 1). `ΔE = 2σ_x(φ_x + λσ'_x)` with `σ'` the other replica; the flip
/// is accepted with probability `min(1, e^{−βΔE})`. Returns whether the flip
/// was accepted.
pub fn metropolis_step(
    state: &mut PairState,
    table: &LocalTable,
    beta: f64,
    lambda: f64,
    replica: usize,
    rng: &mut StreamRng,
) -> bool {
    let x = rng.below(table.n as u64) as usize;
    let (s, other) = if replica == 0 {
        (&mut state.s1, &state.s2)
    } else {
        (&mut state.s2, &state.s1)
    };
    let de = 2.0 * f64::from(s[x]) * (table.local_field(s, x) + lambda * f64::from(other[x]));
    let accept = de <= 0.0 || rng.uniform() < math::exp(-beta * de);
    if accept {
        s[x] = -s[x];
    }
    accept
}

#[derive(Debug, Clone)]
struct Chain {
    beta: f64,
    state: PairState,
    rng: StreamRng,
    accepted: u64,
    proposed: u64,
    r: Binning,
    r2: Binning,
    counts: Vec<u64>,
}

impl Chain {
    fn sweep(&mut self, table: &LocalTable, lambda: f64) {
        for i in 0..table.n {
            let ok = metropolis_step(&mut self.state, table, self.beta, lambda, i % 2, &mut self.rng);
            self.accepted += u64::from(ok);
        }
        self.proposed += table.n as u64;
    }

    fn measure(&mut self) {
        let n = self.state.s1.len() as i64;
        let dot = self.state.dot();
        let q = dot as f64 / n as f64;
        self.r.push(q);
        self.r2.push(q * q);
        self.counts[((dot + n) / 2) as usize] += 1;
    }

    fn estimate(&self) -> McEstimate {
        let (se_r, tau) = self.r.error_and_tau();
        let (se_r2, _) = self.r2.error_and_tau();
        let n = self.r.count();
        McEstimate {
            beta: self.beta,
            mean_r: self.r.mean(),
            mean_r2: self.r2.mean(),
            stderr_r: se_r,
            stderr_r2: se_r2,
            tau_int: tau,
            acceptance: if self.proposed > 0 {
                self.accepted as f64 / self.proposed as f64
            } else {
                0.0
            },
            n_measurements: n,
            equilibrated: tau * 20.0 <= n as f64,
            overlap_counts: self.counts.clone(),
        }
    }
}

/// Resumable parallel-tempering run for one disorder realization.
#[derive(Debug, Clone)]
pub struct McRunner {
    config: McConfig,
    table: LocalTable,
    chains: Vec<Chain>,
    swap_rng: StreamRng,
    swap_stats: Vec<(u64, u64)>,
    swap_rounds: u64,
    sweeps_done: u64,
}

impl McRunner {
    /// Chain `i` uses random stream `i` of the seed; swaps use stream
    /// `n_chains`.
    pub fn new(config: &McConfig, model: &Model) -> Result<Self> {
        config.validate()?;
        let table = LocalTable::new(model);
        let n = table.n;
        let chains = config
            .beta_ladder
            .iter()
            .enumerate()
            .map(|(i, &beta)| {
                let mut rng = StreamRng::new(config.seed, i as u64);
                let state = PairState::random(n, &mut rng);
                Chain {
                    beta,
                    state,
                    rng,
                    accepted: 0,
                    proposed: 0,
                    r: Binning::default(),
                    r2: Binning::default(),
                    counts: vec![0; n + 1],
                }
            })
            .collect();
        let k = config.beta_ladder.len();
        Ok(Self {
            config: config.clone(),
            table,
            chains,
            swap_rng: StreamRng::new(config.seed, k as u64),
            swap_stats: vec![(0, 0); k.saturating_sub(1)],
            swap_rounds: 0,
            sweeps_done: 0,
        })
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    pub fn is_done(&self) -> bool {
        self.sweeps_done >= self.config.n_sweeps
    }

    fn swap_round(&mut self) {
        let parity = (self.swap_rounds % 2) as usize;
        self.swap_rounds += 1;
        let lambda = self.config.lambda;
        let mut i = parity;
        while i + 1 < self.chains.len() {
            let ea = self.chains[i].state.energy(&self.table, lambda);
            let eb = self.chains[i + 1].state.energy(&self.table, lambda);
            let arg = (self.chains[i].beta - self.chains[i + 1].beta) * (ea - eb);
            let accept = arg >= 0.0 || self.swap_rng.uniform() < math::exp(arg);
            self.swap_stats[i].1 += 1;
            if accept {
                self.swap_stats[i].0 += 1;
                let (lo, hi) = self.chains.split_at_mut(i + 1);
                core::mem::swap(&mut lo[i].state, &mut hi[0].state);
            }
            i += 2;
        }
    }

    /// Advances by up to `sweeps` sweeps (stopping at the configured total).
    pub fn run_sweeps(&mut self, sweeps: u64) {
        let end = self.sweeps_done.saturating_add(sweeps).min(self.config.n_sweeps);
        while self.sweeps_done < end {
            let lambda = self.config.lambda;
            for c in &mut self.chains {
                c.sweep(&self.table, lambda);
            }
            self.sweeps_done += 1;
            if self.chains.len() > 1 && self.sweeps_done.is_multiple_of(self.config.swap_every) {
                self.swap_round();
            }
            if self.sweeps_done > self.config.n_therm
                && (self.sweeps_done - self.config.n_therm).is_multiple_of(self.config.measure_every)
            {
                for c in &mut self.chains {
                    c.measure();
                }
            }
        }
    }

    pub fn result(&self) -> McRun {
        let estimates: Vec<McEstimate> = self.chains.iter().map(Chain::estimate).collect();
        let swap_acceptance: Vec<f64> = self
            .swap_stats
            .iter()
            .map(|&(a, t)| if t > 0 { a as f64 / t as f64 } else { 0.0 })
            .collect();
        let mut warnings = Vec::new();
        for e in &estimates {
            if !e.equilibrated {
                warnings.push(format!(
                    "beta {}: tau_int {:.1} too long for {} measurements",
                    e.beta, e.tau_int, e.n_measurements
                ));
            }
        }
        for (i, &a) in swap_acceptance.iter().enumerate() {
            if self.swap_stats[i].1 > 0 && !(0.1..=0.9).contains(&a) {
                warnings.push(format!("swap acceptance {a:.3} between ladder slots {i} and {}", i + 1));
            }
        }
        McRun {
            estimates,
            swap_acceptance,
            warnings,
        }
    }

    pub fn checkpoint(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(CHECKPOINT_VERSION);
        w.u64(self.config.seed);
        w.u64(self.sweeps_done);
        w.u32(self.chains.len() as u32);
        w.u32(self.table.n as u32);
        w.f64(self.config.lambda);
        for c in &self.chains {
            w.f64(c.beta);
            for s in [&c.state.s1, &c.state.s2] {
                let cfg = SpinConfig::from_spins(s).expect("chain spins are ±1");
                for &word in cfg.words() {
                    w.u64(word);
                }
            }
            w.rng(&c.rng);
            w.u64(c.accepted);
            w.u64(c.proposed);
            w.binning(&c.r);
            w.binning(&c.r2);
            w.u32(c.counts.len() as u32);
            for &k in &c.counts {
                w.u64(k);
            }
        }
        w.rng(&self.swap_rng);
        w.u32(self.swap_stats.len() as u32);
        for &(a, t) in &self.swap_stats {
            w.u64(a);
            w.u64(t);
        }
        w.u64(self.swap_rounds);
        w.buf
    }

    /// Rebuilds a runner from [`Self::checkpoint`] output; the configuration
    /// and model must match the run that wrote it.
    pub fn from_checkpoint(bytes: &[u8], config: &McConfig, model: &Model) -> Result<Self> {
        let mut me = Self::new(config, model)?;
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        if r.u64()? != config.seed {
            return Err(Error::Checkpoint("seed differs from configuration".into()));
        }
        me.sweeps_done = r.u64()?;
        let n_chains = r.u32()? as usize;
        let n = r.u32()? as usize;
        if n_chains != me.chains.len() || n != me.table.n {
            return Err(Error::Checkpoint("ladder or lattice differs from configuration".into()));
        }
        if r.f64()?.to_bits() != config.lambda.to_bits() {
            return Err(Error::Checkpoint("lambda differs from configuration".into()));
        }
        let n_words = n.div_ceil(64);
        for c in &mut me.chains {
            if r.f64()?.to_bits() != c.beta.to_bits() {
                return Err(Error::Checkpoint("ladder temperatures differ".into()));
            }
            let read_state = |r: &mut Reader| -> Result<Vec<i8>> {
                let words = (0..n_words).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
                Ok(SpinConfig::from_words(words, n)?.to_spins())
            };
            c.state.s1 = read_state(&mut r)?;
            c.state.s2 = read_state(&mut r)?;
            c.rng = r.rng()?;
            c.accepted = r.u64()?;
            c.proposed = r.u64()?;
            c.r = r.binning()?;
            c.r2 = r.binning()?;
            let nb = r.u32()? as usize;
            if nb != n + 1 {
                return Err(Error::Checkpoint("histogram size mismatch".into()));
            }
            c.counts = (0..nb).map(|_| r.u64()).collect::<Result<_>>()?;
        }
        me.swap_rng = r.rng()?;
        let np = r.u32()? as usize;
        if np != me.swap_stats.len() {
            return Err(Error::Checkpoint("swap table size mismatch".into()));
        }
        for s in &mut me.swap_stats {
            *s = (r.u64()?, r.u64()?);
        }
        me.swap_rounds = r.u64()?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(me)
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn rng(&mut self, r: &StreamRng) {
        self.bytes(&r.seed_bytes());
        self.u64(r.stream());
        self.bytes(&r.word_pos().to_le_bytes());
    }
    fn binning(&mut self, b: &Binning) {
        self.u32(b.levels.len() as u32);
        for lv in &b.levels {
            let (s, c) = lv.sum.parts();
            let (s2, c2) = lv.sum_sq.parts();
            self.f64(s);
            self.f64(c);
            self.f64(s2);
            self.f64(c2);
            self.u64(lv.count);
            self.u8(u8::from(lv.pending.is_some()));
            self.f64(lv.pending.unwrap_or(0.0));
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.pos + k > self.buf.len() {
            return Err(Error::Checkpoint("truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }
    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut a = [0u8; K];
        a.copy_from_slice(self.take(K)?);
        Ok(a)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn rng(&mut self) -> Result<StreamRng> {
        let seed: [u8; 32] = self.array()?;
        let stream = self.u64()?;
        let pos = u128::from_le_bytes(self.array()?);
        Ok(StreamRng::restore(seed, stream, pos))
    }
    fn binning(&mut self) -> Result<Binning> {
        let k = self.u32()? as usize;
        let mut levels = Vec::with_capacity(k.min(64));
        for _ in 0..k {
            let sum = KahanSum::from_parts(self.f64()?, self.f64()?);
            let sum_sq = KahanSum::from_parts(self.f64()?, self.f64()?);
            let count = self.u64()?;
            let has = self.u8()?;
            let p = self.f64()?;
            levels.push(Level {
                sum,
                sum_sq,
                count,
                pending: (has == 1).then_some(p),
            });
        }
        Ok(Binning { levels })
    }
}

/// Full run for one model.
pub fn parallel_tempering_run(config: &McConfig, model: &Model) -> Result<McRun> {
    let mut r = McRunner::new(config, model)?;
    r.run_sweeps(config.n_sweeps);
    Ok(r.result())
}

/// `q_br(L)` from Monte Carlo moments at ladder temperature `beta` (which
/// must be on the ladder), open boundary, `λ = 0`. Disorder sample `k` runs
/// with seed `derive_seed(config.seed, k)`. The reported error adds the
/// Monte Carlo variance of the per-sample moments to the disorder error;
/// `certified` records whether every run passed the equilibration check.
pub fn q_br_mc<E: Executor>(
    exec: &E,
    d: usize,
    sizes: &[usize],
    beta: f64,
    spec: &DisorderSpec,
    n_disorder: usize,
    config: &McConfig,
) -> Result<OrderParamEstimate> {
    config.validate()?;
    if config.lambda != 0.0 {
        return Err(Error::Invalid("q_br is defined for uncoupled replicas (lambda = 0)".into()));
    }
    let slot = config
        .beta_ladder
        .iter()
        .position(|&b| b == beta)
        .ok_or_else(|| Error::Invalid(format!("beta {beta} is not on the ladder")))?;
    if n_disorder < 2 || sizes.is_empty() {
        return Err(Error::Invalid("need sizes and at least two disorder samples".into()));
    }
    let mut per_l = Vec::new();
    for &l in sizes {
        let lat = Lattice::new(d, l)?;
        let rows: Vec<Result<McEstimate>> = exec.map(n_disorder, |k| {
            let dis = spec.sample(&lat, config.seed, k as u64)?;
            let model = Model::open(lat.clone(), dis)?;
            let mut cfg = config.clone();
            cfg.seed = derive_seed(config.seed, k as u64);
            let run = parallel_tempering_run(&cfg, &model)?;
            Ok(run.estimates[slot].clone())
        });
        let rows: Vec<McEstimate> = rows.into_iter().collect::<Result<_>>()?;
        let r: Vec<f64> = rows.iter().map(|e| e.mean_r).collect();
        let r2: Vec<f64> = rows.iter().map(|e| e.mean_r2).collect();
        let (value, se_dis) = std_dev_estimate(&r2, &r);
        let n = n_disorder as f64;
        let mean_r = pairwise_sum(&r) / n;
        let var_r2 = pairwise_sum(&rows.iter().map(|e| e.stderr_r2 * e.stderr_r2).collect::<Vec<_>>()) / (n * n);
        let var_r = pairwise_sum(&rows.iter().map(|e| e.stderr_r * e.stderr_r).collect::<Vec<_>>()) / (n * n);
        let var_rad = var_r2 + 4.0 * mean_r * mean_r * var_r;
        let se_mc = if value > 0.0 {
            sqrt(var_rad) / (2.0 * value)
        } else {
            sqrt(sqrt(var_rad))
        };
        per_l.push(SizePoint {
            l,
            lambda: None,
            value,
            stderr: sqrt(se_dis * se_dis + se_mc * se_mc),
            certified: Some(rows.iter().all(|e| e.equilibrated)),
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
            boundary: BoundaryChoice::Open,
            n_disorder,
            seed: config.seed,
        },
    })
}
