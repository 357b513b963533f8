//! Optimal source covariance `V diag(phi, (1-phi)/(M-1), ...) V^H` and the
//! search over `phi`; plus the fixed-eigenbasis baseline.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::capacity::CapacityEstimate;
use crate::channel::{
    check_dim, complete_orthonormal_basis, haar_unitary, sample_backward_channel, CMatrix, CVector,
    ChannelMeanModel, FadingDistribution, LinkParams, SourceCovariance,
};
use crate::error::{Error, Result};
use crate::montecarlo::{self, Sampling, MIN_SAMPLES};
use crate::stochastic_order::equal_block_weights;

/// A basis column counts as aligned with the mean when `|cos| >= 1 - ALIGNMENT_TOL`.
pub const ALIGNMENT_TOL: f64 = 1e-8;
/// `phi` values closer than this to 1 are reported as beamforming.
pub const BEAMFORMING_PHI_TOL: f64 = 1e-3;

fn check_phi(phi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&phi) {
        Ok(())
    } else {
        Err(Error::param("phi", format!("must lie in [0, 1], got {phi}")))
    }
}

/// `V diag(phi, (1-phi)/(M-1), ...) V^H` with `V` completed from `mu / |mu|`.
pub fn build_q_opt(model: &ChannelMeanModel, phi: f64) -> Result<SourceCovariance> {
    check_phi(phi)?;
    if model.mean_norm() == 0.0 {
        return Err(Error::ZeroMean);
    }
    let basis = complete_orthonormal_basis(model.mu())?;
    SourceCovariance::from_eigen(basis, equal_block_weights(phi, model.dim()))
}

/// Projections of one backward/forward draw onto the optimal eigenbasis.
#[derive(Debug, Clone, Copy)]
struct PhiDraw {
    /// `|v_1^H h_B|^2`
    aligned: f64,
    /// `sum_{i>=2} |v_i^H h_B|^2`
    orthogonal: f64,
    /// `|h_F|^2`
    forward: f64,
}

/// Frozen draws for the one-dimensional objective, so that repeated
/// evaluations over `phi` (and over `gamma`, `G`) see the same sample path.
///
/// The draw sequence matches [`crate::capacity::estimate_capacity`], so
/// `evaluate(phi)` and `estimate_capacity(build_q_opt(phi))` share their
/// random numbers.
#[derive(Debug, Clone)]
pub struct PhiSurrogate {
    banks: Vec<Vec<PhiDraw>>,
    basis: CMatrix,
    mean_norm_sq: f64,
    alpha: f64,
    dim: usize,
    sampling: Sampling,
}

impl PhiSurrogate {
    pub fn new(model: &ChannelMeanModel, fading: &FadingDistribution, sampling: &Sampling) -> Result<Self> {
        sampling.validate(MIN_SAMPLES)?;
        let m = model.dim();
        let basis = if model.mean_norm() > 0.0 {
            complete_orthonormal_basis(model.mu())?
        } else {
            CMatrix::identity(m, m)
        };
        let v1: CVector = basis.column(0).into_owned();
        let deterministic = model.alpha() == 0.0;
        let fixed_aligned = v1.dotc(model.mu()).norm_sqr();
        let banks = montecarlo::draw_banks(sampling, |rng| {
            let (aligned, orthogonal) = if deterministic {
                (fixed_aligned, 0.0)
            } else {
                let h_b = sample_backward_channel(model, rng);
                let aligned = v1.dotc(&h_b).norm_sqr();
                (aligned, (h_b.norm_squared() - aligned).max(0.0))
            };
            PhiDraw { aligned, orthogonal, forward: fading.sample(rng).norm_sqr() }
        });
        Ok(PhiSurrogate {
            banks,
            basis,
            mean_norm_sq: model.mean_norm_sq(),
            alpha: model.alpha(),
            dim: m,
            sampling: *sampling,
        })
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn sampling(&self) -> &Sampling {
        &self.sampling
    }

    /// `(1/2) E ln(1 + G|h_F|^2 (phi P + q S) / (phi |mu|^2 + alpha + (1 + G|h_F|^2)/gamma))`
    pub fn evaluate(&self, phi: f64, params: &LinkParams) -> Result<CapacityEstimate> {
        check_phi(phi)?;
        let rest = (1.0 - phi) / (self.dim - 1) as f64;
        let base = phi * self.mean_norm_sq + self.alpha;
        let (g, gamma) = (params.g_relay(), params.gamma());
        let acc = montecarlo::average_banks(&self.banks, |d| {
            let g_fwd = g * d.forward;
            let x = phi * d.aligned + rest * d.orthogonal;
            0.5 * (g_fwd * x / (base + (1.0 + g_fwd) / gamma)).ln_1p()
        });
        Ok(CapacityEstimate::from_accumulator(&acc, &self.sampling))
    }
}

/// One evaluation of the `phi` objective.
pub fn phi_objective(
    phi: f64,
    model: &ChannelMeanModel,
    params: &LinkParams,
    fading: &FadingDistribution,
    sampling: &Sampling,
) -> Result<CapacityEstimate> {
    check_phi(phi)?;
    PhiSurrogate::new(model, fading, sampling)?.evaluate(phi, params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section maximization on `[lo, hi]` until the bracket is narrower
/// than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> GoldenResult {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evaluations = 2;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc >= fd {
        GoldenResult { x: c, value: fc, evaluations }
    } else {
        GoldenResult { x: d, value: fd, evaluations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub tolerance: f64,
    pub sampling: Sampling,
    pub bracket: (f64, f64),
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { tolerance: 1e-4, sampling: Sampling::default(), bracket: (0.0, 1.0) }
    }
}

impl SearchConfig {
    pub fn new(sampling: Sampling) -> Self {
        SearchConfig { sampling, ..SearchConfig::default() }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::param("tolerance", format!("must be > 0, got {}", self.tolerance)));
        }
        let (lo, hi) = self.bracket;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::param("bracket", format!("[{lo}, {hi}] must satisfy 0 <= lo < hi <= 1")));
        }
        self.sampling.validate(MIN_SAMPLES)
    }
}

pub(crate) fn serialize_matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalStructure {
    /// Unitary; first column `mu / |mu|` (identity when `mu = 0`). Rows of `[re, im]`.
    #[serde(serialize_with = "serialize_matrix")]
    pub basis: CMatrix,
    pub phi: f64,
    pub capacity: CapacityEstimate,
    /// Set when `mu = 0`: no preferred direction, `I/M` is returned.
    pub direction_indifferent: bool,
    pub evaluations: usize,
}

impl OptimalStructure {
    pub fn weights(&self) -> Vec<f64> {
        equal_block_weights(self.phi, self.basis.nrows())
    }

    pub fn covariance(&self) -> Result<SourceCovariance> {
        SourceCovariance::from_eigen(self.basis.clone(), self.weights())
    }

    pub fn is_beamforming(&self) -> bool {
        1.0 - self.phi <= BEAMFORMING_PHI_TOL
    }
}

/// Golden-section search for `phi` on a frozen sample path, with both
/// bracket endpoints checked afterwards.
pub fn optimize_phi(
    model: &ChannelMeanModel,
    params: &LinkParams,
    fading: &FadingDistribution,
    cfg: &SearchConfig,
) -> Result<OptimalStructure> {
    cfg.validate()?;
    let surrogate = PhiSurrogate::new(model, fading, &cfg.sampling)?;
    optimize_phi_on(&surrogate, params, cfg)
}

/// [`optimize_phi`] on an existing surrogate, e.g. one shared across a `gamma` sweep.
pub fn optimize_phi_on(surrogate: &PhiSurrogate, params: &LinkParams, cfg: &SearchConfig) -> Result<OptimalStructure> {
    cfg.validate()?;
    let m = surrogate.dim;
    if surrogate.mean_norm_sq == 0.0 {
        let phi = 1.0 / m as f64;
        return Ok(OptimalStructure {
            basis: surrogate.basis.clone(),
            phi,
            capacity: surrogate.evaluate(phi, params)?,
            direction_indifferent: true,
            evaluations: 1,
        });
    }
    let objective = |phi: f64| surrogate.evaluate(phi, params).map(|e| e.mean).unwrap_or(f64::NEG_INFINITY);
    let (lo, hi) = cfg.bracket;
    let golden = golden_section_max(objective, lo, hi, cfg.tolerance);
    let mut best = (golden.x, golden.value);
    for edge in [hi, lo] {
        let v = objective(edge);
        if v > best.1 {
            best = (edge, v);
        }
    }
    Ok(OptimalStructure {
        basis: surrogate.basis.clone(),
        phi: best.0,
        capacity: surrogate.evaluate(best.0, params)?,
        direction_indifferent: false,
        evaluations: golden.evaluations + 3,
    })
}

/// Best power split for a fixed eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuboptimalSolution {
    #[serde(serialize_with = "serialize_matrix")]
    pub basis: CMatrix,
    pub weights: Vec<f64>,
    pub capacity: CapacityEstimate,
    pub iterations: usize,
}

impl SuboptimalSolution {
    pub fn covariance(&self) -> Result<SourceCovariance> {
        SourceCovariance::from_eigen(self.basis.clone(), self.weights.clone())
    }
}

/// Per draw: `|u_i^H h_B|^2` for every column, then `|h_F|^2` last.
struct SubspaceBank {
    banks: Vec<Vec<Box<[f64]>>>,
    mean_proj: Vec<f64>,
    alpha: f64,
    dim: usize,
}

impl SubspaceBank {
    fn new(u: &CMatrix, model: &ChannelMeanModel, fading: &FadingDistribution, sampling: &Sampling) -> Self {
        let m = u.ncols();
        let u_adj = u.adjoint();
        let mean_proj: Vec<f64> = (&u_adj * model.mu()).iter().map(|c| c.norm_sqr()).collect();
        let banks = montecarlo::draw_banks(sampling, |rng| {
            let mut row = vec![0.0; m + 1];
            if model.alpha() == 0.0 {
                row[..m].copy_from_slice(&mean_proj);
            } else {
                let proj = &u_adj * sample_backward_channel(model, rng);
                for (r, p) in row.iter_mut().zip(proj.iter()) {
                    *r = p.norm_sqr();
                }
            }
            row[m] = fading.sample(rng).norm_sqr();
            row.into_boxed_slice()
        });
        SubspaceBank { banks, mean_proj, alpha: model.alpha(), dim: m }
    }

    fn base(&self, w: &[f64], params: &LinkParams) -> f64 {
        w.iter().zip(&self.mean_proj).map(|(w, b)| w * b).sum::<f64>() + self.alpha + 1.0 / params.gamma()
    }

    fn value(&self, w: &[f64], params: &LinkParams, sampling: &Sampling) -> CapacityEstimate {
        let base = self.base(w, params);
        let (g, gamma) = (params.g_relay(), params.gamma());
        let m = self.dim;
        let acc = montecarlo::average_banks(&self.banks, |row| {
            let g_fwd = g * row[m];
            let x: f64 = w.iter().zip(&row[..m]).map(|(w, a)| w * a).sum();
            0.5 * (g_fwd * x / (base + g_fwd / gamma)).ln_1p()
        });
        CapacityEstimate::from_accumulator(&acc, sampling)
    }

    fn gradient(&self, w: &[f64], params: &LinkParams) -> Vec<f64> {
        let base = self.base(w, params);
        let (g, gamma) = (params.g_relay(), params.gamma());
        let m = self.dim;
        let mut grad = vec![0.0; m];
        let mut count = 0usize;
        for row in self.banks.iter().flatten() {
            let g_fwd = g * row[m];
            let den = base + g_fwd / gamma;
            let num = g_fwd * w.iter().zip(&row[..m]).map(|(w, a)| w * a).sum::<f64>();
            for i in 0..m {
                let b = self.mean_proj[i];
                grad[i] += 0.5 * ((b + g_fwd * row[i]) / (den + num) - b / den);
            }
            count += 1;
        }
        grad.iter_mut().for_each(|x| *x /= count as f64);
        grad
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    let gram = u.adjoint() * u;
    let n = u.ncols();
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            (gram[(i, j)] - target).norm()
        })
        .fold(0.0, f64::max);
    if u.nrows() != n || residual > 1e-10 {
        return Err(Error::param("basis", format!("not unitary (residual {residual:e})")));
    }
    Ok(())
}

/// Maximizes capacity over the weight simplex for the fixed eigenbasis `u`:
/// golden-section on `lambda_1` when `M = 2`, projected-gradient ascent otherwise.
pub fn optimize_suboptimal(
    u: &CMatrix,
    model: &ChannelMeanModel,
    params: &LinkParams,
    fading: &FadingDistribution,
    cfg: &SearchConfig,
) -> Result<SuboptimalSolution> {
    cfg.validate()?;
    check_dim(model.dim(), u.nrows())?;
    check_unitary(u)?;
    let norm = model.mean_norm();
    if norm > 0.0 {
        for j in 0..u.ncols() {
            let cos = u.column(j).dotc(model.mu()).norm() / norm;
            if cos >= 1.0 - ALIGNMENT_TOL {
                return Err(Error::AlignedBasis { column: j });
            }
        }
    }
    let sampling = &cfg.sampling;
    let bank = SubspaceBank::new(u, model, fading, sampling);
    let m = bank.dim;
    let mean_at = |w: &[f64]| bank.value(w, params, sampling).mean;

    let (weights, iterations) = if m == 2 {
        let f = |x: f64| mean_at(&[x, 1.0 - x]);
        let golden = golden_section_max(f, 0.0, 1.0, cfg.tolerance);
        let mut best = (golden.x, golden.value);
        for edge in [0.0, 1.0] {
            let v = f(edge);
            if v > best.1 {
                best = (edge, v);
            }
        }
        (vec![best.0, 1.0 - best.0], golden.evaluations)
    } else {
        projected_gradient(&bank, params, sampling, cfg.tolerance)
    };
    Ok(SuboptimalSolution {
        basis: u.clone(),
        capacity: bank.value(&weights, params, sampling),
        weights,
        iterations,
    })
}

fn projected_gradient(bank: &SubspaceBank, params: &LinkParams, sampling: &Sampling, tol: f64) -> (Vec<f64>, usize) {
    let m = bank.dim;
    let mut w = vec![1.0 / m as f64; m];
    let mut value = bank.value(&w, params, sampling).mean;
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < 500 && step > 1e-12 {
        iterations += 1;
        let grad = bank.gradient(&w, params);
        let scale = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            break;
        }
        let trial: Vec<f64> = w.iter().zip(&grad).map(|(w, g)| w + step * g / scale).collect();
        let trial = project_to_simplex(&trial);
        let moved = trial.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let trial_value = bank.value(&trial, params, sampling).mean;
        if trial_value > value {
            w = trial;
            value = trial_value;
            if moved < tol {
                break;
            }
            step = (step * 2.0).min(1.0);
        } else {
            if moved < tol {
                break;
            }
            step *= 0.5;
        }
    }
    (w, iterations)
}

/// Eigenbasis rotated by `angle` (radians) away from the mean direction
/// within the plane of `v_1, v_2`; the remaining columns are kept.
pub fn tilted_basis(model: &ChannelMeanModel, angle: f64) -> Result<CMatrix> {
    if model.mean_norm() == 0.0 {
        return Err(Error::ZeroMean);
    }
    let v = complete_orthonormal_basis(model.mu())?;
    let (s, c) = angle.sin_cos();
    let mut u = v.clone();
    let v1 = v.column(0);
    let v2 = v.column(1);
    u.set_column(0, &(v1 * Complex64::new(c, 0.0) + v2 * Complex64::new(s, 0.0)));
    u.set_column(1, &(v2 * Complex64::new(c, 0.0) - v1 * Complex64::new(s, 0.0)));
    Ok(u)
}

/// Haar-random basis, redrawn in the (probability-zero) event that a column
/// lines up with the mean.
pub fn random_suboptimal_basis<R: Rng + ?Sized>(model: &ChannelMeanModel, rng: &mut R) -> CMatrix {
    let norm = model.mean_norm();
    loop {
        let u = haar_unitary(model.dim(), rng);
        let aligned = norm > 0.0
            && (0..u.ncols()).any(|j| u.column(j).dotc(model.mu()).norm() / norm >= 1.0 - ALIGNMENT_TOL);
        if !aligned {
            return u;
        }
    }
}
