//! Subcommand implementations. Each writes its files under `out` and returns
//! the process exit code.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use glassorder_core::disorder::DisorderSpec;
use glassorder_core::exact::{self, PairTable};
use glassorder_core::mc::{McConfig, McEstimate, McRun, McRunner};
use glassorder_core::order::{self, BoundaryChoice, MuSettings, OrderParamEstimate, OrderParamName};
use glassorder_core::rem::{self, RemParams};
use glassorder_core::rng::derive_seed;
use glassorder_core::stats::ObservableEstimate;
use glassorder_core::verify::{self, CheckResult, CheckSettings, CheckStatus, Ensemble, FiniteDifference};
use glassorder_core::{DisorderRealization, Lattice, Model};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CheckEntry, CheckKind, Config};
use crate::output::{self, Meta, Report, ReportEntry};
use crate::pool::Rayon;

fn prepare(out: &Path, cfg: &Config, command: &str) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    output::write_json(&out.join("meta.json"), &Meta::new(command, cfg.model.seed, cfg)?)
}

/// Disorder samples for one size: the stored realization when a disorder
/// file is configured, else `n_disorder` fresh draws.
fn realizations(cfg: &Config, l: usize) -> Result<Vec<(Lattice, DisorderRealization)>> {
    if let Some(p) = &cfg.model.disorder_file {
        let (lat, d) = output::load_disorder(p)?;
        if lat.side() != l || lat.dim() != cfg.model.d {
            bail!(
                "disorder file {} is for d={}, L={}, run asks for d={}, L={l}",
                p.display(),
                lat.dim(),
                lat.side(),
                cfg.model.d
            );
        }
        return Ok(vec![(lat, d)]);
    }
    let lat = Lattice::new(cfg.model.d, l)?;
    let spec = cfg.model.spec();
    (0..cfg.model.n_disorder)
        .map(|k| Ok((lat.clone(), spec.sample(&lat, cfg.model.seed, k as u64)?)))
        .collect()
}

fn sizes(cfg: &Config) -> Vec<usize> {
    if let Some(p) = &cfg.model.disorder_file {
        if let Ok((lat, _)) = output::load_disorder(p) {
            return vec![lat.side()];
        }
    }
    cfg.sizes.l.clone()
}

// ---------------------------------------------------------------------------
// enumerate

#[derive(Debug, Serialize)]
struct FreeEnergyRow {
    #[serde(rename = "L")]
    l: usize,
    replicas: u8,
    beta: f64,
    lambda: Option<f64>,
    lambda_prime: Option<f64>,
    log_z: f64,
    f: f64,
    stderr: f64,
    n_disorder: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct EngineHeader {
    version: &'static str,
    max_sites_single: usize,
    max_sites_table: usize,
    max_sites_replica: usize,
    max_strip_width: usize,
    boundary: BoundaryChoice,
    finite_difference: FiniteDifference,
}

/// Disorder-averaged `ln Z` and free energies for one, two and three
/// replicas.
pub fn enumerate(cfg: &Config, out: &Path, save_disorder: bool) -> Result<i32> {
    prepare(out, cfg, "enumerate")?;
    let beta = cfg.model.beta;
    let fd = FiniteDifference {
        first_step: cfg.grids.fd_first_step,
        second_step: cfg.grids.fd_second_step,
        richardson: cfg.grids.richardson,
    };
    output::write_json(
        &out.join("enumerate.json"),
        &EngineHeader {
            version: glassorder_core::VERSION,
            max_sites_single: exact::MAX_SITES_SINGLE,
            max_sites_table: exact::MAX_SITES_TABLE,
            max_sites_replica: exact::MAX_SITES_REPLICA,
            max_strip_width: exact::strip::MAX_WIDTH,
            boundary: cfg.model.boundary,
            finite_difference: fd,
        },
    )?;
    let mut lambdas = vec![0.0];
    for &x in &cfg.grids.lambda {
        lambdas.push(x);
        lambdas.push(-x);
    }
    let opts = cfg.model.max_options();
    let mut rows = Vec::new();
    for l in sizes(cfg) {
        let samples = realizations(cfg, l)?;
        if save_disorder {
            let dir = out.join("disorder");
            fs::create_dir_all(&dir)?;
            for (k, (_, d)) in samples.iter().enumerate() {
                output::save_disorder(&dir.join(format!("L{l}_{k:04}.json")), d)?;
            }
        }
        // a replayed realization keeps the seed it was drawn with
        let seed = match &cfg.model.disorder_file {
            Some(_) => samples[0].1.seed,
            None => cfg.model.seed,
        };
        let n = Lattice::new(cfg.model.d, l)?.n_sites();
        let bn = beta * n as f64;
        // per sample: log Z1, then log Z2 per λ, then log Z3 per (λ, λ')
        let per: Vec<Result<Vec<f64>>> = samples
            .par_iter()
            .map(|(lat, d)| {
                let (model, _) = order::boundary_model(lat, d.clone(), beta, cfg.model.boundary, &opts)?;
                let mut v = vec![exact::log_z1(&model, beta)?.log_z];
                if n <= exact::MAX_SITES_REPLICA {
                    let t = PairTable::new(&model, beta)?;
                    v.extend(lambdas.iter().map(|&x| t.log_z2(x)));
                    for &x in &lambdas {
                        v.extend(cfg.grids.lambda_prime.iter().map(|&y| t.log_z3(x, y)));
                    }
                }
                Ok(v)
            })
            .collect();
        let per: Vec<Vec<f64>> = per.into_iter().collect::<Result<_>>()?;
        let column = |i: usize| -> (f64, ObservableEstimate) {
            let z: Vec<f64> = per.iter().map(|v| v[i]).collect();
            let f: Vec<f64> = z.iter().map(|x| -x / bn).collect();
            (ObservableEstimate::from_samples(&z).mean, ObservableEstimate::from_samples(&f))
        };
        let mk = |replicas: u8, lambda: Option<f64>, lambda_prime: Option<f64>, i: usize| {
            let (z, f) = column(i);
            FreeEnergyRow {
                l,
                replicas,
                beta,
                lambda,
                lambda_prime,
                log_z: z,
                f: f.mean,
                stderr: f.stderr,
                n_disorder: per.len(),
                seed,
            }
        };
        rows.push(mk(1, None, None, 0));
        if per[0].len() > 1 {
            let mut i = 1;
            for &x in &lambdas {
                rows.push(mk(2, Some(x), None, i));
                i += 1;
            }
            for &x in &lambdas {
                for &y in &cfg.grids.lambda_prime {
                    rows.push(mk(3, Some(x), Some(y), i));
                    i += 1;
                }
            }
        }
    }
    output::write_csv(&out.join("enumerate.csv"), &rows)?;
    println!("wrote {} rows to {}", rows.len(), out.join("enumerate.csv").display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// orderparams

#[derive(Debug, Serialize)]
struct EstimateRow<'a> {
    name: &'a str,
    #[serde(rename = "L")]
    l: usize,
    lambda: Option<f64>,
    value: f64,
    stderr: f64,
    certified: Option<bool>,
    seed: u64,
}

pub fn orderparams(cfg: &Config, out: &Path) -> Result<i32> {
    prepare(out, cfg, "orderparams")?;
    let m = &cfg.model;
    let spec = m.spec();
    let opts = m.max_options();
    let sizes = &cfg.sizes.l;
    let lam = &cfg.grids.lambda;
    let mut estimates: Vec<OrderParamEstimate> = Vec::new();
    let want = |n: OrderParamName| cfg.orderparams.estimators.contains(&n);
    for name in &cfg.orderparams.estimators {
        let e = match name {
            OrderParamName::QBr => {
                order::q_br_estimate(&Rayon, m.d, sizes, m.beta, &spec, m.boundary, m.n_disorder, m.seed, &opts)?
            }
            OrderParamName::QEa => order::q_ea_estimate(&Rayon, m.d, sizes, m.beta, &spec, m.n_disorder, m.seed, &opts)?,
            OrderParamName::QJump => order::q_jump_estimate(
                &Rayon, m.d, sizes, m.beta, &spec, m.boundary, lam, m.n_disorder, m.seed, &opts,
            )?,
            OrderParamName::QLrsb => order::q_lrsb_estimate(
                &Rayon, m.d, sizes, m.beta, &spec, m.boundary, lam, m.n_disorder, m.seed, &opts,
            )?,
            OrderParamName::MuFluc | OrderParamName::MuJump => continue,
        };
        estimates.push(e);
    }
    if want(OrderParamName::MuFluc) || want(OrderParamName::MuJump) {
        let s = MuSettings {
            d: m.d,
            beta: m.beta,
            h0: cfg.orderparams.mu_h0,
            coupling: cfg.orderparams.mu_coupling,
            scaling: cfg.orderparams.mu_scaling,
        };
        let (fluc, jump) = order::mu_pair_estimate(&s, sizes, &cfg.grids.field_step)?;
        if want(OrderParamName::MuFluc) {
            estimates.push(fluc);
        }
        if want(OrderParamName::MuJump) {
            estimates.push(jump);
        }
    }
    if cfg.orderparams.heuristic_fit {
        estimates = estimates.into_iter().map(OrderParamEstimate::with_heuristic_fit).collect();
    }
    let mut rows = Vec::new();
    for e in &estimates {
        for p in &e.per_l {
            rows.push(EstimateRow {
                name: e.name.as_str(),
                l: p.l,
                lambda: p.lambda,
                value: p.value,
                stderr: p.stderr,
                certified: p.certified,
                seed: m.seed,
            });
        }
    }
    output::write_csv(&out.join("orderparams.csv"), &rows)?;
    output::write_json(&out.join("orderparams.json"), &estimates)?;
    for e in &estimates {
        for p in e.leading_rows() {
            println!("{:>8} L={:<3} {:.6} ± {:.6}", e.name.as_str(), p.l, p.value, p.stderr);
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// rem

#[derive(Debug, Serialize)]
struct SurfaceRow {
    beta: f64,
    lambda: f64,
    f2: f64,
    a1: f64,
    a2: f64,
    active_branch: String,
}

#[derive(Debug, Serialize)]
struct RemRow {
    beta: f64,
    f: f64,
    q_br: f64,
    q_jump: f64,
    mean_overlap: f64,
    right_derivative: f64,
    left_derivative: f64,
}

#[derive(Debug, Serialize)]
struct RemSampleRow {
    n: usize,
    beta: f64,
    lambda: f64,
    sample: usize,
    log_z1: f64,
    log_z1_2beta: f64,
    log_z2: Option<f64>,
    diagonal_gap: Option<f64>,
    jensen_gap: Option<f64>,
}

pub fn rem(cfg: &Config, out: &Path) -> Result<i32> {
    prepare(out, cfg, "rem")?;
    let params = RemParams::default();
    let mut lambdas = vec![0.0];
    for &x in &cfg.grids.lambda {
        lambdas.push(x);
        lambdas.push(-x);
    }
    lambdas.sort_by(f64::total_cmp);
    let mut surface = Vec::new();
    let mut table = Vec::new();
    for &b in &cfg.grids.beta {
        for &l in &lambdas {
            let p = rem::surface_point(b, l, &params)?;
            surface.push(SurfaceRow {
                beta: b,
                lambda: l,
                f2: p.f2,
                a1: p.a1,
                a2: p.a2,
                active_branch: p.active.to_string(),
            });
        }
        let d = rem::f2_rem_one_sided_derivatives(b);
        table.push(RemRow {
            beta: b,
            f: rem::f_rem(b),
            q_br: rem::q_br_rem(b),
            q_jump: rem::q_jump_rem(b),
            mean_overlap: rem::mean_overlap_rem(b),
            right_derivative: d.right,
            left_derivative: d.left,
        });
    }
    output::write_csv(&out.join("rem_surface.csv"), &surface)?;
    output::write_json(&out.join("rem.json"), &table)?;
    let n = cfg.sizes.rem_n;
    let seed = cfg.model.seed;
    let jobs: Vec<(f64, f64, usize)> = cfg
        .grids
        .beta
        .iter()
        .flat_map(|&b| cfg.grids.lambda.iter().flat_map(move |&l| (0..cfg.model.n_disorder).map(move |k| (b, l, k))))
        .collect();
    let samples: Vec<Result<RemSampleRow>> = jobs
        .par_iter()
        .map(|&(b, l, k)| {
            let s = rem::finite_n_sample(n, b, l, seed, k as u64)?;
            Ok(RemSampleRow {
                n,
                beta: b,
                lambda: l,
                sample: k,
                log_z1: s.log_z1,
                log_z1_2beta: s.log_z1_2beta,
                log_z2: s.log_z2,
                diagonal_gap: s.diagonal_gap,
                jensen_gap: s.jensen_gap,
            })
        })
        .collect();
    let samples: Vec<RemSampleRow> = samples.into_iter().collect::<Result<_>>()?;
    output::write_csv(&out.join("rem_finite.csv"), &samples)?;
    println!("beta_c = {:.15}", rem::beta_c());
    Ok(0)
}

// ---------------------------------------------------------------------------
// mc

#[derive(Debug, Serialize)]
struct McRow {
    #[serde(rename = "L")]
    l: usize,
    sample: usize,
    beta: f64,
    lambda: f64,
    mean_r: f64,
    stderr_r: f64,
    mean_r2: f64,
    stderr_r2: f64,
    tau_int: f64,
    acceptance: f64,
    n_measurements: u64,
    equilibrated: bool,
    exact_r: Option<f64>,
    exact_r2: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct McRecord {
    #[serde(rename = "L")]
    l: usize,
    sample: usize,
    seed: u64,
    run: McRun,
}

fn mc_config(cfg: &Config, k: usize) -> McConfig {
    let m = &cfg.mc;
    McConfig {
        beta_ladder: m.beta_ladder.clone(),
        n_sweeps: m.n_sweeps,
        n_therm: m.n_therm,
        measure_every: m.measure_every,
        lambda: m.lambda,
        seed: derive_seed(cfg.model.seed, k as u64),
        swap_every: m.swap_every,
    }
}

/// Runs one chain set to completion or to `stop_after` sweeps, writing
/// checkpoints along the way. Returns `None` when stopped early.
fn run_chain(
    cfg: &Config,
    model: &Model,
    mcc: &McConfig,
    ckpt: &Path,
    stop_after: Option<u64>,
) -> Result<Option<McRun>> {
    let mut runner = if cfg.mc.resume && ckpt.exists() {
        let bytes = fs::read(ckpt).with_context(|| format!("reading {}", ckpt.display()))?;
        McRunner::from_checkpoint(&bytes, mcc, model).with_context(|| format!("resuming from {}", ckpt.display()))?
    } else {
        McRunner::new(mcc, model)?
    };
    let chunk = if cfg.mc.checkpoint_every == 0 {
        u64::MAX
    } else {
        cfg.mc.checkpoint_every
    };
    while !runner.is_done() {
        let mut step = chunk;
        if let Some(s) = stop_after {
            if runner.sweeps_done() >= s {
                output::write_atomic(ckpt, &runner.checkpoint())?;
                return Ok(None);
            }
            step = step.min(s - runner.sweeps_done());
        }
        runner.run_sweeps(step);
        if cfg.mc.checkpoint_every > 0 {
            output::write_atomic(ckpt, &runner.checkpoint())?;
        }
    }
    output::write_atomic(ckpt, &runner.checkpoint())?;
    Ok(Some(runner.result()))
}

pub fn mc(cfg: &Config, out: &Path, stop_after: Option<u64>) -> Result<i32> {
    prepare(out, cfg, "mc")?;
    let ck_dir = out.join("checkpoints");
    fs::create_dir_all(&ck_dir)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut incomplete = 0;
    for l in sizes(cfg) {
        let samples = realizations(cfg, l)?;
        let runs: Vec<Result<Option<(McRun, Vec<Option<(f64, f64)>>)>>> = samples
            .par_iter()
            .enumerate()
            .map(|(k, (lat, d))| {
                let model = match cfg.model.boundary {
                    BoundaryChoice::Open => Model::open(lat.clone(), d.clone())?,
                    BoundaryChoice::Plus => {
                        order::boundary_model(lat, d.clone(), cfg.model.beta, BoundaryChoice::Plus, &cfg.model.max_options())?.0
                    }
                    BoundaryChoice::Maximizing => bail!("Monte Carlo runs take open or plus boundaries"),
                };
                let mcc = mc_config(cfg, k);
                let ckpt = ck_dir.join(format!("L{l}_s{k:04}.bin"));
                let Some(run) = run_chain(cfg, &model, &mcc, &ckpt, stop_after)? else {
                    return Ok(None);
                };
                let exact: Vec<Option<(f64, f64)>> = mcc
                    .beta_ladder
                    .iter()
                    .map(|&b| {
                        if cfg.mc.compare_exact && model.n_sites() <= exact::MAX_SITES_REPLICA && b > 0.0 {
                            PairTable::new(&model, b).ok().map(|t| t.overlap_moments(mcc.lambda))
                        } else {
                            None
                        }
                    })
                    .collect();
                Ok(Some((run, exact)))
            })
            .collect();
        for (k, r) in runs.into_iter().enumerate() {
            let Some((run, exact)) = r? else {
                incomplete += 1;
                continue;
            };
            for (e, ex) in run.estimates.iter().zip(&exact) {
                let McEstimate { beta, mean_r, mean_r2, stderr_r, stderr_r2, tau_int, acceptance, n_measurements, equilibrated, .. } = *e;
                rows.push(McRow {
                    l,
                    sample: k,
                    beta,
                    lambda: cfg.mc.lambda,
                    mean_r,
                    stderr_r,
                    mean_r2,
                    stderr_r2,
                    tau_int,
                    acceptance,
                    n_measurements,
                    equilibrated,
                    exact_r: ex.map(|x| x.0),
                    exact_r2: ex.map(|x| x.1),
                });
            }
            for w in &run.warnings {
                eprintln!("warning: L={l} sample {k}: {w}");
            }
            records.push(McRecord {
                l,
                sample: k,
                seed: mc_config(cfg, k).seed,
                run,
            });
        }
    }
    if incomplete > 0 {
        println!("stopped early; {incomplete} runs left checkpoints in {}", ck_dir.display());
        return Ok(0);
    }
    output::write_csv(&out.join("mc.csv"), &rows)?;
    output::write_json(&out.join("mc.json"), &records)?;
    println!("wrote {} rows to {}", rows.len(), out.join("mc.csv").display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify

fn ensemble(cfg: &Config, e: &CheckEntry) -> Ensemble {
    Ensemble {
        d: e.d.unwrap_or(cfg.model.d),
        sizes: e.sizes.clone().unwrap_or_else(|| cfg.sizes.l.clone()),
        beta: e.beta.unwrap_or(cfg.model.beta),
        spec: DisorderSpec {
            j: e.couplings.unwrap_or(cfg.model.couplings),
            h: e.fields.unwrap_or(cfg.model.fields),
        },
        n_disorder: e.n_disorder.unwrap_or(cfg.model.n_disorder),
        seed: cfg.model.seed,
    }
}

/// Runs one battery entry.
pub fn run_entry(cfg: &Config, e: &CheckEntry) -> Result<Vec<CheckResult>> {
    let ens = ensemble(cfg, e);
    let lambdas = e.lambda.clone().unwrap_or_else(|| cfg.grids.lambda.clone());
    let betas = e.betas.clone().unwrap_or_else(|| cfg.grids.beta.clone());
    let opts = cfg.model.max_options();
    let params = RemParams::default();
    let rem_n = e.rem_n.unwrap_or(cfg.sizes.rem_n);
    let fd = FiniteDifference {
        first_step: cfg.grids.fd_first_step,
        second_step: cfg.grids.fd_second_step,
        richardson: cfg.grids.richardson,
    };
    let ex = &Rayon;
    Ok(match e.kind {
        CheckKind::Identities => verify::check_identities(ex, &ens, &lambdas)?,
        CheckKind::Derivatives => verify::check_derivatives(ex, &ens, &lambdas, &fd, false)?,
        CheckKind::NegativeControl => vec![verify::negative_control(ex, &ens, &lambdas)?],
        CheckKind::Block => verify::check_block_decomposition(ex, &ens, e.block_side.unwrap_or(2))?,
        CheckKind::Theorem1 => vec![verify::check_theorem1(ex, &ens, &opts)?],
        CheckKind::Theorem2 => vec![verify::check_theorem2(
            ex,
            &ens,
            e.boundary.unwrap_or(cfg.model.boundary),
            &lambdas,
            &opts,
        )?],
        CheckKind::Theorem2Rem => vec![verify::check_theorem2_rem(&betas)],
        CheckKind::Theorem3 => vec![verify::check_theorem3(ex, &ens, &lambdas, e.inverted)?],
        CheckKind::Theorem3Rem => vec![verify::check_theorem3_rem(rem_n, ens.beta, &lambdas, ens.n_disorder, ens.seed)?],
        CheckKind::AppendixC => {
            let s = MuSettings {
                d: ens.d,
                beta: ens.beta,
                h0: e.h0.unwrap_or(cfg.orderparams.mu_h0),
                coupling: cfg.orderparams.mu_coupling,
                scaling: e.scaling.unwrap_or(cfg.orderparams.mu_scaling),
            };
            let step = e.field_step.or(cfg.grids.field_step.first().copied()).unwrap_or(1e-3);
            verify::check_appendix_c(&s, &ens.sizes, step)?
        }
        CheckKind::RemClosedForms => verify::check_rem_closed_forms(&params)?,
        CheckKind::RemBranches => verify::check_rem_branches(&params, &lambdas)?,
        CheckKind::RemFiniteBounds => {
            vec![verify::check_rem_finite_bounds(rem_n, ens.beta, &lambdas, ens.n_disorder, ens.seed)?]
        }
        CheckKind::RemConvergence => vec![verify::check_rem_convergence(
            rem_n,
            ens.beta,
            ens.n_disorder,
            ens.seed,
            e.rel_tol.unwrap_or(0.05),
        )?],
    })
}

fn kind_name(k: CheckKind) -> String {
    serde_json::to_value(k)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Runs the battery and writes `report.json` plus one CSV per result.
/// Entries that cannot run are reported as failures.
pub fn verify(cfg: &Config, out: &Path) -> Result<i32> {
    prepare(out, cfg, "verify")?;
    let entries = cfg.battery.entries()?;
    let table_dir = out.join("checks");
    fs::create_dir_all(&table_dir)?;
    let results: Vec<Vec<CheckResult>> = entries
        .par_iter()
        .map(|e| {
            run_entry(cfg, e).unwrap_or_else(|err| {
                vec![CheckResult {
                    check_id: format!("{}.error", kind_name(e.kind)),
                    status: CheckStatus::Fail,
                    lhs: 0.0,
                    rhs: 0.0,
                    slack: f64::NEG_INFINITY,
                    tolerance: 0.0,
                    rows: Vec::new(),
                    settings: CheckSettings::default(),
                    notes: vec![format!("{err:#}")],
                }]
            })
        })
        .collect();
    let mut report_entries = Vec::new();
    for (i, (e, rs)) in entries.iter().zip(results).enumerate() {
        for r in rs {
            let table = format!("checks/{i:02}_{}.csv", r.check_id);
            output::write_check_csv(&out.join(&table), &r)?;
            println!("[{i:02}] {}", verify::summary_line(&r));
            report_entries.push(ReportEntry {
                entry: i,
                kind: kind_name(e.kind),
                result: r,
                table,
            });
        }
    }
    let report = Report::new(cfg.model.seed, report_entries);
    output::write_json(&out.join("report.json"), &report)?;
    println!("{} checks, {} failed", report.n_checks, report.n_fail);
    Ok(if report.n_fail > 0 { 1 } else { 0 })
}
