//! Run configuration, read from TOML.
//!
//! ```toml
//! [model]
//! d = 2
//! beta = 1.0
//! couplings = { kind = "pm_j", p = 0.5 }
//! fields = { kind = "constant", value = 0.0 }
//! boundary = "open"            # open | plus | maximizing
//! n_disorder = 20
//! seed = 7
//! # disorder_file = "sample.json"   replay one stored realization (enumerate, mc)
//!
//! [sizes]
//! L = [3, 4]
//!
//! [grids]
//! lambda = [0.01, 0.05, 0.1]
//! lambda_prime = [0.0]
//! beta = [0.5, 1.0, 2.0]       # random energy model tables
//! field_step = [0.001]         # mu pair
//!
//! [battery]
//! preset = "desk"              # optional built-in list
//!
//! [[battery.check]]
//! kind = "theorem3"
//! d = 1
//! sizes = [4, 6]
//! beta = 3.0
//!
//! [orderparams]
//! estimators = ["q_br", "q_ea", "q_jump", "q_lrsb"]
//!
//! [mc]
//! beta_ladder = [0.5, 1.0]
//! n_sweeps = 20000
//! ```
//!
//! Every key is optional. Unknown keys are rejected with their line.

use std::fmt;
use std::path::{Path, PathBuf};

use glassorder_core::disorder::{DisorderSpec, Distribution};
use glassorder_core::order::{BoundaryChoice, BoundaryMaxOptions, OrderParamName, StepScaling};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub file: Option<PathBuf>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.file {
            write!(f, "{}", p.display())?;
        } else {
            write!(f, "<config>")?;
        }
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
            if let Some(c) = self.column {
                write!(f, ":{c}")?;
            }
        }
        if let Some(k) = &self.field {
            write!(f, ": field `{k}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub model: ModelSection,
    pub sizes: SizesSection,
    pub grids: GridsSection,
    pub battery: BatterySection,
    pub orderparams: OrderParamsSection,
    pub mc: McSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub d: usize,
    pub beta: f64,
    pub couplings: Distribution,
    pub fields: Distribution,
    pub boundary: BoundaryChoice,
    pub n_disorder: usize,
    pub seed: u64,
    pub disorder_file: Option<PathBuf>,
    pub max_restarts: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            d: 2,
            beta: 1.0,
            couplings: Distribution::PmJ { p: 0.5 },
            fields: Distribution::Constant { value: 0.0 },
            boundary: BoundaryChoice::Open,
            n_disorder: 20,
            seed: 0,
            disorder_file: None,
            max_restarts: BoundaryMaxOptions::default().restarts,
        }
    }
}

impl ModelSection {
    pub fn spec(&self) -> DisorderSpec {
        DisorderSpec {
            j: self.couplings,
            h: self.fields,
        }
    }

    pub fn max_options(&self) -> BoundaryMaxOptions {
        BoundaryMaxOptions {
            restarts: self.max_restarts,
            seed: self.seed,
            ..BoundaryMaxOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SizesSection {
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    /// Spin count for finite random energy model samples.
    pub rem_n: usize,
}

impl Default for SizesSection {
    fn default() -> Self {
        Self { l: vec![3], rem_n: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsSection {
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub beta: Vec<f64>,
    pub field_step: Vec<f64>,
    pub fd_first_step: f64,
    pub fd_second_step: f64,
    pub richardson: bool,
}

impl Default for GridsSection {
    fn default() -> Self {
        Self {
            lambda: vec![0.01, 0.05, 0.1],
            lambda_prime: vec![0.0],
            beta: (1..=25).map(|i| 0.2 * f64::from(i)).collect(),
            field_step: vec![1e-3],
            fd_first_step: 1e-4,
            fd_second_step: 1e-3,
            richardson: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Identities,
    Derivatives,
    NegativeControl,
    Block,
    Theorem1,
    Theorem2,
    Theorem2Rem,
    Theorem3,
    Theorem3Rem,
    AppendixC,
    RemClosedForms,
    RemBranches,
    RemFiniteBounds,
    RemConvergence,
}

/// One battery entry. Unset keys fall back to the `model`, `sizes` and
/// `grids` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    pub kind: CheckKind,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub n_disorder: Option<usize>,
    #[serde(default)]
    pub couplings: Option<Distribution>,
    #[serde(default)]
    pub fields: Option<Distribution>,
    #[serde(default)]
    pub boundary: Option<BoundaryChoice>,
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub block_side: Option<usize>,
    /// Swap the sides of the inequality (theorem3 only).
    #[serde(default)]
    pub inverted: bool,
    #[serde(default)]
    pub h0: Option<f64>,
    #[serde(default)]
    pub scaling: Option<StepScaling>,
    #[serde(default)]
    pub field_step: Option<f64>,
    #[serde(default)]
    pub rem_n: Option<usize>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

impl CheckEntry {
    pub fn new(kind: CheckKind) -> Self {
        Self {
            kind,
            d: None,
            sizes: None,
            beta: None,
            n_disorder: None,
            couplings: None,
            fields: None,
            boundary: None,
            lambda: None,
            betas: None,
            block_side: None,
            inverted: false,
            h0: None,
            scaling: None,
            field_step: None,
            rem_n: None,
            rel_tol: None,
        }
    }

    fn at(mut self, d: usize, sizes: &[usize], beta: f64) -> Self {
        self.d = Some(d);
        self.sizes = Some(sizes.to_vec());
        self.beta = Some(beta);
        self
    }

    fn samples(mut self, n: usize) -> Self {
        self.n_disorder = Some(n);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatterySection {
    pub preset: Option<String>,
    pub check: Vec<CheckEntry>,
}

impl BatterySection {
    /// Preset entries followed by the explicit ones.
    pub fn entries(&self) -> Result<Vec<CheckEntry>, ConfigError> {
        let mut out = match self.preset.as_deref() {
            None | Some("none") => Vec::new(),
            Some("desk") => desk_battery(),
            Some(other) => {
                return Err(ConfigError {
                    file: None,
                    line: None,
                    column: None,
                    field: Some("battery.preset".into()),
                    message: format!("unknown preset `{other}` (known: desk, none)"),
                })
            }
        };
        out.extend(self.check.iter().cloned());
        Ok(out)
    }
}

/// Small battery that finishes in seconds.
pub fn desk_battery() -> Vec<CheckEntry> {
    use CheckKind::*;
    let mut block = CheckEntry::new(Block).at(1, &[8], 1.5).samples(50);
    block.block_side = Some(2);
    let mut mu = CheckEntry::new(AppendixC).at(2, &[3, 4, 5, 6], 1.0);
    mu.h0 = Some(0.0);
    mu.scaling = Some(StepScaling::Fixed);
    mu.field_step = Some(0.1);
    vec![
        CheckEntry::new(RemClosedForms),
        CheckEntry::new(RemBranches),
        CheckEntry::new(Theorem2Rem),
        CheckEntry::new(RemFiniteBounds).samples(20),
        CheckEntry::new(Identities).at(2, &[3], 1.0).samples(20),
        CheckEntry::new(Identities).at(1, &[8], 1.0).samples(20),
        CheckEntry::new(Derivatives).at(1, &[6], 1.0).samples(5),
        CheckEntry::new(NegativeControl).at(1, &[6], 1.0).samples(2),
        block,
        CheckEntry::new(Theorem3).at(1, &[4, 6], 1.0).samples(10),
        CheckEntry::new(Theorem3).at(1, &[4, 6], 3.0).samples(10),
        CheckEntry::new(Theorem1).at(1, &[3, 4, 5], 1.5).samples(20),
        {
            let mut t = CheckEntry::new(Theorem2).at(1, &[3, 4, 5], 1.5).samples(20);
            t.lambda = Some(vec![0.05, 0.1, 0.2]);
            t
        },
        mu,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderParamsSection {
    pub estimators: Vec<OrderParamName>,
    /// Add a linear-in-1/L fit tagged as heuristic.
    pub heuristic_fit: bool,
    pub mu_coupling: f64,
    pub mu_h0: f64,
    pub mu_scaling: StepScaling,
}

impl Default for OrderParamsSection {
    fn default() -> Self {
        Self {
            estimators: vec![OrderParamName::QBr, OrderParamName::QEa, OrderParamName::QJump, OrderParamName::QLrsb],
            heuristic_fit: false,
            mu_coupling: 1.0,
            mu_h0: 0.0,
            mu_scaling: StepScaling::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub beta_ladder: Vec<f64>,
    pub n_sweeps: u64,
    pub n_therm: u64,
    pub measure_every: u64,
    pub swap_every: u64,
    pub lambda: f64,
    /// Write a checkpoint every this many sweeps (0 = only at the end).
    pub checkpoint_every: u64,
    /// Continue from checkpoints found in the output directory.
    pub resume: bool,
    /// Compare each run with exact enumeration when the lattice is small.
    pub compare_exact: bool,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            beta_ladder: vec![0.5, 1.0],
            n_sweeps: 20_000,
            n_therm: 2_000,
            measure_every: 1,
            swap_every: 1,
            lambda: 0.0,
            checkpoint_every: 0,
            resume: false,
            compare_exact: true,
        }
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}

/// Line of `key` inside `[section]`, if it is written out.
fn locate(src: &str, field: &str) -> Option<usize> {
    let (section, key) = field.rsplit_once('.').unwrap_or(("", field));
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[') {
            current = name.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        let section_ok = section.is_empty() || current == section || section.starts_with(&current);
        if section_ok {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl Config {
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(src).map_err(|e| {
            let (line, column) = match e.span() {
                Some(s) => {
                    let (l, c) = line_col(src, s.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError {
                file: None,
                line,
                column,
                field: None,
                message: e.message().trim().to_string(),
            }
        })?;
        cfg.validate().map_err(|(field, message)| ConfigError {
            file: None,
            line: locate(src, &field),
            column: None,
            field: Some(field),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: Some(path.to_path_buf()),
            line: None,
            column: None,
            field: None,
            message: e.to_string(),
        })?;
        Self::parse(&src).map_err(|mut e| {
            e.file = Some(path.to_path_buf());
            e
        })
    }

    fn validate(&self) -> Result<(), (String, String)> {
        let m = &self.model;
        let err = |f: &str, msg: String| Err((f.to_string(), msg));
        if !(1..=3).contains(&m.d) {
            return err("model.d", format!("dimension {} not supported (1, 2 or 3)", m.d));
        }
        if !(m.beta.is_finite() && m.beta > 0.0) {
            return err("model.beta", format!("must be positive, got {}", m.beta));
        }
        if let Err(e) = m.couplings.validate() {
            return err("model.couplings", e.to_string());
        }
        if let Err(e) = m.fields.validate() {
            return err("model.fields", e.to_string());
        }
        if m.n_disorder == 0 {
            return err("model.n_disorder", "must be at least 1".into());
        }
        if self.sizes.l.iter().any(|&l| l < 2) {
            return err("sizes.L", "side lengths must be at least 2".into());
        }
        for (name, grid) in [("grids.lambda", &self.grids.lambda), ("grids.field_step", &self.grids.field_step)] {
            if grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return err(name, "values must be positive and finite".into());
            }
        }
        if self.grids.beta.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return err("grids.beta", "values must be positive and finite".into());
        }
        if !(self.grids.fd_first_step > 0.0 && self.grids.fd_second_step > 0.0) {
            return err("grids.fd_first_step", "finite-difference steps must be positive".into());
        }
        for (i, c) in self.battery.check.iter().enumerate() {
            if let Some(d) = c.d {
                if !(1..=3).contains(&d) {
                    return err("battery.check.d", format!("entry {i}: dimension {d} not supported"));
                }
            }
            if let Some(b) = c.beta {
                if !(b.is_finite() && b > 0.0) {
                    return err("battery.check.beta", format!("entry {i}: beta must be positive"));
                }
            }
            if c.inverted && c.kind != CheckKind::Theorem3 {
                return err("battery.check.inverted", format!("entry {i}: only theorem3 can be inverted"));
            }
        }
        if let Err(e) = self.battery.entries() {
            return err("battery.preset", e.message);
        }
        let mc = &self.mc;
        if mc.n_therm >= mc.n_sweeps {
            return err("mc.n_therm", "must be smaller than mc.n_sweeps".into());
        }
        if mc.beta_ladder.windows(2).any(|w| w[1] <= w[0]) || mc.beta_ladder.is_empty() {
            return err("mc.beta_ladder", "must be non-empty and strictly increasing".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c, Config::default());
        assert!(c.battery.entries().unwrap().is_empty());
    }

    #[test]
    fn full_config_round_trips() {
        let src = r#"
[model]
d = 1
beta = 2.0
couplings = { kind = "gaussian", mean = 0.0, sd = 1.0 }
boundary = "plus"
n_disorder = 4
seed = 11

[sizes]
L = [4, 6]

[grids]
lambda = [0.1]

[battery]
preset = "desk"

[[battery.check]]
kind = "theorem3"
inverted = true
"#;
        let c = Config::parse(src).unwrap();
        assert_eq!(c.model.d, 1);
        assert_eq!(c.model.boundary, BoundaryChoice::Plus);
        assert_eq!(c.sizes.l, vec![4, 6]);
        let e = c.battery.entries().unwrap();
        assert_eq!(e.len(), desk_battery().len() + 1);
        assert!(e.last().unwrap().inverted);
        let again = Config::parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = Config::parse("[model]\nd = 2\nbetta = 1.0\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("betta"), "{err}");
    }

    #[test]
    fn type_error_reports_line() {
        let err = Config::parse("[sizes]\n\nL = \"four\"\n").unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn semantic_error_names_field() {
        let err = Config::parse("[model]\nseed = 1\nd = 5\n").unwrap_err();
        assert_eq!(err.field.as_deref(), Some("model.d"));
        assert_eq!(err.line, Some(3));
        let err = Config::parse("[battery]\npreset = \"huge\"\n").unwrap_err();
        assert_eq!(err.field.as_deref(), Some("battery.preset"));
        assert_eq!(err.line, Some(2));
        let err = Config::parse("[[battery.check]]\nkind = \"block\"\ninverted = true\n").unwrap_err();
        assert_eq!(err.line, Some(3));
    }
}
