//! Experiment runner: flat `key = value` configs, CSV results and a JSON
//! sidecar carrying the config hash, seed and sample counts.
//!
//! Config keys (all optional; each mode supplies its own defaults):
//!
//! | key | value |
//! |---|---|
//! | `mode` | `fig1-compare`, `fig2-mean-sweep`, `fig3-bf-consistency`, `lt-order-suite`, `custom` |
//! | `m` | antenna count; must equal the length of `mu` when both are given |
//! | `mu` | `re,im; re,im; ...` |
//! | `alpha` | scatter variance |
//! | `gamma_db` | comma-separated SNR list in dB |
//! | `g_db` | relay power in dB |
//! | `samples`, `seed`, `workers` | Monte Carlo budget per evaluation |
//! | `phi_tol` | golden-section tolerance on `phi` |
//! | `mu_norms` | comma-separated `|mu|` sweep (fig2) |
//! | `sub_basis` | `haar`, `haar:K` or `angle:DEG` (fig1) |
//! | `instances`, `m_min`, `m_max`, `pair_samples` | lt-order-suite sizes |
//! | `s_min`, `s_max`, `s_points` | transform grid |
//! | `threshold_lo`, `threshold_hi` | `gamma` bracket for the beamforming threshold |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::beamforming::{bf_threshold, f_gamma};
use crate::capacity::{conditional_capacity_pair, estimate_capacity};
use crate::channel::{
    complex_normal, db_to_linear, haar_unitary, linear_to_db, ChannelMeanModel, CMatrix, CVector, FadingDistribution,
    LinkParams, SourceCovariance,
};
use crate::error::{Error, Result};
use crate::montecarlo::{stream_rng, Sampling, MIN_SAMPLES};
use crate::optimizer::{
    optimize_phi_on, optimize_suboptimal, random_suboptimal_basis, tilted_basis, PhiSurrogate, SearchConfig,
};
use crate::stochastic_order::{check_instance, lt_order_check, ComparisonInstance, LogGrid, Verdict, LT_VIOLATION_TOL};

pub const FIG1_MU: [(f64, f64); 2] = [(0.3518, 0.2496), (-0.4039, -1.0437)];
pub const FIG3_MU: [(f64, f64); 2] = [(-0.2163, 0.0627), (-0.8328, 0.1438)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fig1Compare,
    Fig2MeanSweep,
    Fig3BfConsistency,
    LtOrderSuite,
    Custom,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Fig1Compare => "fig1-compare",
            Mode::Fig2MeanSweep => "fig2-mean-sweep",
            Mode::Fig3BfConsistency => "fig3-bf-consistency",
            Mode::LtOrderSuite => "lt-order-suite",
            Mode::Custom => "custom",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::from_str_ci(s)
    }
}

impl Mode {
    fn from_str_ci(s: &str) -> Result<Self> {
        <Mode as ValueEnum>::from_str(s.trim(), true).map_err(|_| Error::Config(format!("unknown mode '{s}'")))
    }
}

/// How the fixed eigenbases for the sub-optimal baseline are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubBasis {
    /// `count` Haar bases drawn from the run seed; the best one is reported.
    Haar { count: usize },
    /// First column tilted by `degrees` from the mean direction.
    Angle { degrees: f64 },
}

impl FromStr for SubBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("sub_basis '{s}': expected haar, haar:K or angle:DEG"));
        match s.split_once(':') {
            None if s == "haar" => Ok(SubBasis::Haar { count: 1 }),
            Some(("haar", k)) => {
                let count: usize = k.trim().parse().map_err(|_| bad())?;
                if count == 0 {
                    return Err(bad());
                }
                Ok(SubBasis::Haar { count })
            }
            Some(("angle", d)) => Ok(SubBasis::Angle { degrees: d.trim().parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }
}

/// Fully resolved experiment description; its JSON form is what gets hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(serialize_with = "crate::stochastic_order::serialize_complex_slice")]
    pub mu: Vec<Complex64>,
    pub alpha: f64,
    pub gamma_db: Vec<f64>,
    pub g_db: f64,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub phi_tol: f64,
    pub mu_norms: Vec<f64>,
    pub sub_basis: SubBasis,
    pub instances: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub pair_samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    pub threshold_lo: f64,
    pub threshold_hi: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn mu_of(pairs: &[(f64, f64)]) -> Vec<Complex64> {
    pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
}

fn db_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

impl ExperimentConfig {
    pub fn for_mode(mode: Mode) -> Self {
        let base = ExperimentConfig {
            mode,
            mu: mu_of(&FIG1_MU),
            alpha: 0.1,
            gamma_db: db_range(0.0, 30.0, 5.0),
            g_db: 15.0,
            samples: 100_000,
            seed: 0,
            workers: 1,
            phi_tol: 1e-4,
            mu_norms: vec![0.0, 0.4, 0.8, 1.2, 1.6, 2.0],
            sub_basis: SubBasis::Haar { count: 1 },
            instances: 1_000,
            m_min: 2,
            m_max: 6,
            pair_samples: 10_000,
            s_min: 1e-3,
            s_max: 1e3,
            s_points: 200,
            threshold_lo: 1e-2,
            threshold_hi: 1e2,
            out: None,
        };
        match mode {
            Mode::Fig2MeanSweep => ExperimentConfig { gamma_db: vec![10.0], ..base },
            Mode::Fig3BfConsistency => ExperimentConfig {
                mu: mu_of(&FIG3_MU),
                alpha: 0.5,
                g_db: 10.0,
                gamma_db: db_range(-10.0, 30.0, 2.5),
                samples: 1_000_000,
                ..base
            },
            _ => base,
        }
    }

    /// Parses a flat config; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        let mode = match entries.remove("mode") {
            Some(m) => Mode::from_str_ci(&m)?,
            None => Mode::Custom,
        };
        let mut cfg = ExperimentConfig::for_mode(mode);
        let mut m_declared = None;
        for (key, value) in entries {
            match key.as_str() {
                "m" => m_declared = Some(parse_num::<usize>(&key, &value)?),
                "mu" => cfg.mu = parse_mu(&value)?,
                "alpha" => cfg.alpha = parse_num(&key, &value)?,
                "gamma_db" => cfg.gamma_db = parse_list(&key, &value)?,
                "g_db" => cfg.g_db = parse_num(&key, &value)?,
                "samples" => cfg.samples = parse_num(&key, &value)?,
                "seed" => cfg.seed = parse_num(&key, &value)?,
                "workers" => cfg.workers = parse_num(&key, &value)?,
                "phi_tol" => cfg.phi_tol = parse_num(&key, &value)?,
                "mu_norms" => cfg.mu_norms = parse_list(&key, &value)?,
                "sub_basis" => cfg.sub_basis = value.parse()?,
                "instances" => cfg.instances = parse_num(&key, &value)?,
                "m_min" => cfg.m_min = parse_num(&key, &value)?,
                "m_max" => cfg.m_max = parse_num(&key, &value)?,
                "pair_samples" => cfg.pair_samples = parse_num(&key, &value)?,
                "s_min" => cfg.s_min = parse_num(&key, &value)?,
                "s_max" => cfg.s_max = parse_num(&key, &value)?,
                "s_points" => cfg.s_points = parse_num(&key, &value)?,
                "threshold_lo" => cfg.threshold_lo = parse_num(&key, &value)?,
                "threshold_hi" => cfg.threshold_hi = parse_num(&key, &value)?,
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            }
        }
        if let Some(m) = m_declared {
            if m != cfg.mu.len() {
                return Err(Error::Config(format!("m = {m} but mu has {} entries", cfg.mu.len())));
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.mu.len() < 2 {
            return fail(format!("mu needs at least 2 entries, got {}", self.mu.len()));
        }
        for (name, n) in [("samples", self.samples), ("pair_samples", self.pair_samples)] {
            if n < MIN_SAMPLES {
                return fail(format!("{name} = {n} is below the minimum of {MIN_SAMPLES}"));
            }
        }
        if self.workers == 0 {
            return fail("workers must be >= 1".into());
        }
        if self.gamma_db.is_empty() || self.gamma_db.iter().any(|g| !g.is_finite()) {
            return fail("gamma_db must be a non-empty list of finite values".into());
        }
        if !self.g_db.is_finite() {
            return fail("g_db must be finite".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if self.phi_tol.is_nan() || self.phi_tol <= 0.0 {
            return fail(format!("phi_tol must be > 0, got {}", self.phi_tol));
        }
        if self.mu_norms.is_empty() || self.mu_norms.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return fail("mu_norms must be a non-empty list of values >= 0".into());
        }
        if self.m_min < 2 || self.m_max < self.m_min {
            return fail(format!("need 2 <= m_min <= m_max, got {}..{}", self.m_min, self.m_max));
        }
        if self.instances == 0 {
            return fail("instances must be >= 1".into());
        }
        if !(self.s_min > 0.0 && self.s_min < self.s_max && self.s_points >= 2) {
            return fail("need 0 < s_min < s_max and s_points >= 2".into());
        }
        if !(self.threshold_lo > 0.0 && self.threshold_lo < self.threshold_hi) {
            return fail("need 0 < threshold_lo < threshold_hi".into());
        }
        if let SubBasis::Angle { degrees } = self.sub_basis {
            if !degrees.is_finite() || (degrees.to_radians().cos().abs() >= 1.0 - crate::optimizer::ALIGNMENT_TOL) {
                return fail(format!("sub_basis angle {degrees} aligns with the mean"));
            }
        }
        self.model().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn model(&self) -> Result<ChannelMeanModel> {
        ChannelMeanModel::new(CVector::from_vec(self.mu.clone()), self.alpha)
    }

    pub fn sampling(&self) -> Sampling {
        Sampling::new(self.samples, self.seed).with_workers(self.workers)
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig::new(self.sampling()).with_tolerance(self.phi_tol)
    }

    pub fn g_relay(&self) -> f64 {
        db_to_linear(self.g_db)
    }

    /// sha256 over the canonical JSON of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).unwrap_or_default();
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

/// `re,im; re,im; ...`
pub fn parse_mu(value: &str) -> Result<Vec<Complex64>> {
    value
        .split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::Config(format!("mu entry '{}' must be re,im", pair.trim())));
            }
            Ok(Complex64::new(parse_num("mu", parts[0])?, parse_num("mu", parts[1])?))
        })
        .collect()
}

/// Rows, failed assertions and a mode-specific summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<R> {
    pub rows: Vec<R>,
    pub failures: Vec<String>,
    pub summary: serde_json::Value,
}

impl<R> Outcome<R> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    pub gamma_db: f64,
    pub mean_norm_sq_over_alpha: f64,
    pub c_opt: f64,
    pub se_opt: f64,
    pub c_sub: f64,
    pub se_sub: f64,
    pub phi_star: f64,
    pub sub_lambda1: f64,
    pub dominates: bool,
    pub seed: u64,
    pub n: usize,
}

impl Fig1Row {
    pub fn gap(&self) -> f64 {
        self.c_opt - self.c_sub
    }

    pub fn pooled_se(&self) -> f64 {
        self.se_opt.hypot(self.se_sub)
    }
}

fn sub_bases(cfg: &ExperimentConfig, model: &ChannelMeanModel) -> Result<Vec<CMatrix>> {
    match cfg.sub_basis {
        SubBasis::Angle { degrees } => Ok(vec![tilted_basis(model, degrees.to_radians())?]),
        SubBasis::Haar { count } => {
            let mut rng = stream_rng(cfg.seed, u64::MAX);
            Ok((0..count).map(|_| random_suboptimal_basis(model, &mut rng)).collect())
        }
    }
}

/// Optimum vs fixed-basis capacity across the SNR sweep. The same bases are
/// used on every row so gaps are comparable.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Outcome<Fig1Row>> {
    cfg.validate()?;
    let model = cfg.model()?;
    let search = cfg.search();
    let surrogate = PhiSurrogate::new(&model, &FadingDistribution::Rayleigh, &search.sampling)?;
    let bases = sub_bases(cfg, &model)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &gamma_db in &cfg.gamma_db {
        let params = LinkParams::from_db(gamma_db, cfg.g_db)?;
        let opt = optimize_phi_on(&surrogate, &params, &search)?;
        let mut best = None;
        for u in &bases {
            let sol = optimize_suboptimal(u, &model, &params, &FadingDistribution::Rayleigh, &search)?;
            if best.as_ref().is_none_or(|b: &crate::optimizer::SuboptimalSolution| sol.capacity.mean > b.capacity.mean) {
                best = Some(sol);
            }
        }
        let sub = best.ok_or_else(|| Error::Config("no sub-optimal basis".into()))?;
        let row = Fig1Row {
            gamma_db,
            mean_norm_sq_over_alpha: if model.alpha() > 0.0 { model.k_factor() } else { f64::INFINITY },
            c_opt: opt.capacity.mean,
            se_opt: opt.capacity.std_error,
            c_sub: sub.capacity.mean,
            se_sub: sub.capacity.std_error,
            phi_star: opt.phi,
            sub_lambda1: sub.weights[0],
            dominates: opt.capacity.mean >= sub.capacity.mean - 3.0 * opt.capacity.pooled_se(&sub.capacity),
            seed: cfg.seed,
            n: cfg.samples,
        };
        if !row.dominates {
            failures.push(format!("gamma {gamma_db} dB: C_opt {} < C_sub {} - 3 SE", row.c_opt, row.c_sub));
        }
        rows.push(row);
    }
    let gap_shrinks = gap_shrinks(&rows);
    if rows.len() >= 2 && gap_shrinks == Some(false) {
        failures.push("gap at the highest SNR is not below the gap at the lowest SNR".into());
    }
    let summary = json!({
        "mean_norm_sq_over_alpha": rows.first().map(|r| r.mean_norm_sq_over_alpha),
        "gap_shrinks": gap_shrinks,
        "bases": bases.len(),
    });
    Ok(Outcome { rows, failures, summary })
}

/// Gap at the highest SNR below the gap at the lowest SNR by more than three
/// pooled standard errors of the four estimates involved.
pub fn gap_shrinks(rows: &[Fig1Row]) -> Option<bool> {
    let lo = rows.iter().min_by(|a, b| a.gamma_db.total_cmp(&b.gamma_db))?;
    let hi = rows.iter().max_by(|a, b| a.gamma_db.total_cmp(&b.gamma_db))?;
    if lo.gamma_db == hi.gamma_db {
        return None;
    }
    Some(hi.gap() + 3.0 * lo.pooled_se().hypot(hi.pooled_se()) < lo.gap())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub mu_norm: f64,
    pub gamma_db: f64,
    pub c_opt: f64,
    pub se_opt: f64,
    pub phi_star: f64,
    /// Same norm, randomly rotated direction.
    pub c_rotated: f64,
    pub se_rotated: f64,
    pub c_iso: f64,
    pub se_iso: f64,
    pub seed: u64,
    pub n: usize,
}

/// Capacity against `|mu|` along a fixed direction, with a rotated-mean
/// control on each row.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Outcome<Fig2Row>> {
    cfg.validate()?;
    let base = cfg.model()?;
    if base.mean_norm() == 0.0 {
        return Err(Error::Config("mu must be non-zero to fix the sweep direction".into()));
    }
    let search = cfg.search();
    let rotation = haar_unitary(base.dim(), &mut stream_rng(cfg.seed, u64::MAX));
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &gamma_db in &cfg.gamma_db {
        let params = LinkParams::from_db(gamma_db, cfg.g_db)?;
        for &norm in &cfg.mu_norms {
            let model = base.with_mean_norm(norm)?;
            let rotated = model.rotated(&rotation)?;
            let opt = optimize_phi_on(&PhiSurrogate::new(&model, &FadingDistribution::Rayleigh, &search.sampling)?, &params, &search)?;
            let rot = optimize_phi_on(&PhiSurrogate::new(&rotated, &FadingDistribution::Rayleigh, &search.sampling)?, &params, &search)?;
            let iso = estimate_capacity(
                &SourceCovariance::isotropic(model.dim()),
                &model,
                &params,
                &FadingDistribution::Rayleigh,
                &search.sampling,
            )?;
            if (opt.capacity.mean - rot.capacity.mean).abs() > 3.0 * opt.capacity.pooled_se(&rot.capacity) {
                failures.push(format!("|mu| = {norm}, gamma {gamma_db} dB: rotated mean changes capacity"));
            }
            if norm == 0.0 && (opt.capacity.mean - iso.mean).abs() > 3.0 * opt.capacity.pooled_se(&iso) {
                failures.push(format!("gamma {gamma_db} dB: |mu| = 0 differs from the isotropic capacity"));
            }
            rows.push(Fig2Row {
                mu_norm: norm,
                gamma_db,
                c_opt: opt.capacity.mean,
                se_opt: opt.capacity.std_error,
                phi_star: opt.phi,
                c_rotated: rot.capacity.mean,
                se_rotated: rot.capacity.std_error,
                c_iso: iso.mean,
                se_iso: iso.std_error,
                seed: cfg.seed,
                n: cfg.samples,
            });
        }
    }
    let mut monotone = true;
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.gamma_db == b.gamma_db && b.mu_norm > a.mu_norm && b.c_opt < a.c_opt - 3.0 * a.se_opt.hypot(b.se_opt) {
            monotone = false;
            failures.push(format!("gamma {} dB: capacity drops from |mu| = {} to {}", a.gamma_db, a.mu_norm, b.mu_norm));
        }
    }
    Ok(Outcome { rows, failures, summary: json!({ "monotone": monotone }) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Row {
    pub gamma_db: f64,
    pub f_gamma: f64,
    pub one_minus_phi: f64,
    /// `f <= 0`
    pub beamforming_by_condition: bool,
    /// `1 - phi* <= 1e-3`
    pub beamforming_by_search: bool,
    pub verdict: &'static str,
    pub seed: u64,
    pub n: usize,
}

/// Sign of the beamforming test function against the searched `phi`.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Outcome<Fig3Row>> {
    cfg.validate()?;
    let model = cfg.model()?;
    let search = cfg.search();
    let surrogate = PhiSurrogate::new(&model, &FadingDistribution::Rayleigh, &search.sampling)?;
    let g_relay = cfg.g_relay();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &gamma_db in &cfg.gamma_db {
        let params = LinkParams::from_db(gamma_db, cfg.g_db)?;
        let f = f_gamma(params.gamma(), &model, g_relay)?;
        let opt = optimize_phi_on(&surrogate, &params, &search)?;
        let by_condition = f <= 0.0;
        let by_search = opt.is_beamforming();
        let consistent = by_condition == by_search;
        if !consistent {
            failures.push(format!("gamma {gamma_db} dB: f = {f:e} but 1 - phi* = {:e}", 1.0 - opt.phi));
        }
        rows.push(Fig3Row {
            gamma_db,
            f_gamma: f,
            one_minus_phi: 1.0 - opt.phi,
            beamforming_by_condition: by_condition,
            beamforming_by_search: by_search,
            verdict: if consistent { "consistent" } else { "inconsistent" },
            seed: cfg.seed,
            n: cfg.samples,
        });
    }
    let threshold = bf_threshold(&model, g_relay, (cfg.threshold_lo, cfg.threshold_hi)).ok();
    let summary = json!({
        "threshold_gamma": threshold,
        "threshold_gamma_db": threshold.map(linear_to_db),
    });
    Ok(Outcome { rows, failures, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtRow {
    pub instance: usize,
    pub dim: usize,
    pub alpha: f64,
    pub phi_hat1: f64,
    pub max_log_ratio: f64,
    pub max_j: f64,
    pub min_r: f64,
    pub max_cross_path_gap: f64,
    pub majorized: bool,
    pub pair_difference: f64,
    pub pair_se: f64,
    pub passed: bool,
    pub seed: u64,
    pub n: usize,
}

/// The mismatched control instance: with `phi_hat1 = 1` instead of the
/// matched value the transform order must fail.
pub fn mismatched_control() -> Result<ComparisonInstance> {
    ComparisonInstance::with_phi_hat(
        vec![0.5, 0.5],
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        1.0,
        1.0,
    )
}

/// Bulk check of the transform-order machinery on random matched instances.
pub fn run_lt_suite(cfg: &ExperimentConfig) -> Result<Outcome<LtRow>> {
    cfg.validate()?;
    let grid = LogGrid { lo: cfg.s_min, hi: cfg.s_max, points: cfg.s_points };
    let params = LinkParams::from_db(cfg.gamma_db[0], cfg.g_db)?;
    let span = cfg.m_max - cfg.m_min + 1;
    let mut rng = stream_rng(cfg.seed, 0);
    let mut rows = Vec::with_capacity(cfg.instances);
    let mut failures = Vec::new();
    for k in 0..cfg.instances {
        let m = cfg.m_min + k % span;
        let inst = ComparisonInstance::random(m, &mut rng);
        let h_f = complex_normal(&mut rng);
        let check = check_instance(&inst, &grid)?;
        let pair_sampling = Sampling::new(cfg.pair_samples, cfg.seed.wrapping_add(1 + k as u64)).with_workers(cfg.workers);
        let pair = conditional_capacity_pair(&inst, &params, h_f, &pair_sampling)?;
        let passed = check.passes() && pair.second_dominates(3.0);
        if !passed {
            failures.push(format!("instance {k} (M = {m}) failed: {check:?}"));
        }
        rows.push(LtRow {
            instance: k,
            dim: m,
            alpha: inst.alpha(),
            phi_hat1: check.phi_hat1,
            max_log_ratio: check.max_log_ratio,
            max_j: check.max_j,
            min_r: check.min_r,
            max_cross_path_gap: check.max_cross_path_gap,
            majorized: check.majorized,
            pair_difference: pair.mean_second - pair.mean_first,
            pair_se: pair.difference_se,
            passed,
            seed: cfg.seed,
            n: cfg.pair_samples,
        });
    }
    let control = lt_order_check(&mismatched_control()?, &grid)?;
    if control.verdict != Verdict::Violated {
        failures.push("mismatched control instance was not flagged".into());
    }
    let worst = |f: fn(&LtRow) -> f64| rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let max_violation = worst(|r| r.max_log_ratio);
    if max_violation > LT_VIOLATION_TOL {
        failures.push(format!("max log-MGF ratio {max_violation:e} exceeds {LT_VIOLATION_TOL:e}"));
    }
    let summary = json!({
        "instances": rows.len(),
        "violations": rows.iter().filter(|r| r.max_log_ratio > LT_VIOLATION_TOL).count(),
        "failed": rows.iter().filter(|r| !r.passed).count(),
        "max_violation": max_violation,
        "max_j": worst(|r| r.max_j),
        "min_r": -worst(|r| -r.min_r),
        "max_cross_path_gap": worst(|r| r.max_cross_path_gap),
        "majorization_failures": rows.iter().filter(|r| !r.majorized).count(),
        "min_pair_margin_in_se": rows.iter().map(|r| r.pair_difference / r.pair_se.max(f64::MIN_POSITIVE)).fold(f64::INFINITY, f64::min),
        "control_flagged": control.verdict == Verdict::Violated,
        "control_max_violation": control.max_violation,
    });
    Ok(Outcome { rows, failures, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CustomRow {
    pub gamma_db: f64,
    pub c_opt: f64,
    pub se_opt: f64,
    pub phi_star: f64,
    pub c_iso: f64,
    pub se_iso: f64,
    /// Empty when `alpha = 0`.
    pub f_gamma: Option<f64>,
    pub seed: u64,
    pub n: usize,
}

/// Optimum, isotropic baseline and the beamforming test for a user model.
pub fn run_custom(cfg: &ExperimentConfig) -> Result<Outcome<CustomRow>> {
    cfg.validate()?;
    let model = cfg.model()?;
    let search = cfg.search();
    let surrogate = PhiSurrogate::new(&model, &FadingDistribution::Rayleigh, &search.sampling)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &gamma_db in &cfg.gamma_db {
        let params = LinkParams::from_db(gamma_db, cfg.g_db)?;
        let opt = optimize_phi_on(&surrogate, &params, &search)?;
        let iso = estimate_capacity(
            &SourceCovariance::isotropic(model.dim()),
            &model,
            &params,
            &FadingDistribution::Rayleigh,
            &search.sampling,
        )?;
        if opt.capacity.mean < iso.mean - 3.0 * opt.capacity.pooled_se(&iso) {
            failures.push(format!("gamma {gamma_db} dB: optimum below isotropic"));
        }
        let f = if model.alpha() > 0.0 { Some(f_gamma(params.gamma(), &model, cfg.g_relay())?) } else { None };
        rows.push(CustomRow {
            gamma_db,
            c_opt: opt.capacity.mean,
            se_opt: opt.capacity.std_error,
            phi_star: opt.phi,
            c_iso: iso.mean,
            se_iso: iso.std_error,
            f_gamma: f,
            seed: cfg.seed,
            n: cfg.samples,
        });
    }
    Ok(Outcome { rows, failures, summary: json!({}) })
}

/// Paths written and the pass/fail status of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub passed: bool,
    pub failures: Vec<String>,
}

fn write_outputs<R: Serialize>(cfg: &ExperimentConfig, outcome: &Outcome<R>) -> Result<RunReport> {
    let csv_path = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.mode)));
    let sidecar = csv_path.with_extension("json");
    let io = |e: &dyn fmt::Display| Error::Config(format!("{}: {e}", csv_path.display()));
    let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| io(&e))?;
    for row in &outcome.rows {
        writer.serialize(row).map_err(|e| io(&e))?;
    }
    writer.flush().map_err(|e| io(&e))?;
    let doc = json!({
        "mode": cfg.mode,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "samples": cfg.samples,
        "workers": cfg.workers,
        "config": cfg,
        "summary": outcome.summary,
        "passed": outcome.passed(),
        "failures": outcome.failures,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| io(&e))?;
    std::fs::write(&sidecar, text + "\n").map_err(|e| Error::Config(format!("{}: {e}", sidecar.display())))?;
    Ok(RunReport { csv: csv_path, sidecar, passed: outcome.passed(), failures: outcome.failures.clone() })
}

/// Runs the configured mode and writes its CSV and sidecar.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    match cfg.mode {
        Mode::Fig1Compare => write_outputs(cfg, &run_fig1(cfg)?),
        Mode::Fig2MeanSweep => write_outputs(cfg, &run_fig2(cfg)?),
        Mode::Fig3BfConsistency => write_outputs(cfg, &run_fig3(cfg)?),
        Mode::LtOrderSuite => write_outputs(cfg, &run_lt_suite(cfg)?),
        Mode::Custom => write_outputs(cfg, &run_custom(cfg)?),
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "mfrelay", version, about = "Mean-feedback AF relay covariance experiments")]
pub struct Args {
    /// Experiment; overrides `mode` in the config file.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples per evaluation.
    #[arg(long)]
    pub samples: Option<usize>,
    /// CSV path; the JSON sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Args {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.mode) {
            (Some(path), _) => ExperimentConfig::from_file(path)?,
            (None, Some(mode)) => ExperimentConfig::for_mode(mode),
            (None, None) => return Err(Error::Config("either --mode or --config is required".into())),
        };
        if let Some(mode) = self.mode {
            if self.config.is_some() && mode != cfg.mode {
                // Keep the file's parameters but switch the experiment.
                cfg.mode = mode;
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(samples) = self.samples {
            cfg.samples = samples;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        cfg.out = self.out.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit code: 0 when every check passed, 2 on a failed check, 1 on a
/// configuration or numerical error.
pub fn main_with(args: &Args) -> i32 {
    let outcome = args.resolve().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            println!("wrote {} and {}", report.csv.display(), report.sidecar.display());
            for f in &report.failures {
                eprintln!("FAIL: {f}");
            }
            if report.passed {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
