//! Laplace-transform-order comparison of an arbitrary covariance `Q1`
//! against the mean-aligned covariance `Q2` with matched first weight.
//!
//! For `Q1 = U diag(lambda) U^H` and `beta = U^H mu`, the received-power
//! statistics are
//!
//! ```text
//! W1 = sum_i lambda_i |g_i + beta_i / sqrt(alpha)|^2
//! W2 = phi |g_1 + ||mu|| / sqrt(alpha)|^2 + (1 - phi)/(M - 1) sum_{i>=2} |g_i|^2
//! ```
//!
//! and with `phi = sum_i lambda_i |beta_i|^2 / ||beta||^2` the log ratio of
//! their transforms splits as `J(s) - (s / alpha) R(s)` with `J <= 0`
//! (majorization) and `R >= 0`. Every statement here is checked on a finite
//! log-spaced grid of `s`; as `s -> 0+` the ratio tends to 0 and for large
//! `s` it is dominated by the logarithmic growth of `J`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::channel::{complex_normal, haar_unitary, ChannelMeanModel, SourceCovariance};
use crate::error::{Error, Result};
use crate::montecarlo::{self, Sampling};
use crate::specfun::{log_mgf_mixture, MixtureSpec};

/// Largest admissible log-transform ratio for an "ordered" verdict.
pub const LT_VIOLATION_TOL: f64 = 1e-10;
pub const J_TOL: f64 = 1e-12;
pub const R_TOL: f64 = 1e-12;
pub const MAJORIZATION_TOL: f64 = 1e-12;
const SIMPLEX_TOL: f64 = 1e-12;

/// Log-spaced grid of transform arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid {
            lo: 1e-3,
            hi: 1e3,
            points: 200,
        }
    }
}

impl LogGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let step = (b - a) / (self.points - 1) as f64;
        (0..self.points).map(|k| (a + step * k as f64).exp()).collect()
    }
}

fn check_simplex(name: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::param(name, "entries must be finite and >= 0"));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::param(name, format!("must sum to 1, got {total}")));
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::param("s", format!("must be > 0, got {s}")))
    }
}

/// `(phi, (1-phi)/(M-1), ..., (1-phi)/(M-1))`.
pub fn equal_block_weights(phi: f64, m: usize) -> Vec<f64> {
    let rest = (1.0 - phi) / (m - 1) as f64;
    let mut w = vec![rest; m];
    w[0] = phi;
    w
}

/// Matched first weight `sum_i lambda_i |beta_i|^2 / ||beta||^2`.
pub fn phi_hat_from_q1(lambda: &[f64], beta: &[Complex64]) -> Result<f64> {
    if lambda.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: lambda.len(),
            found: beta.len(),
        });
    }
    check_simplex("lambda", lambda)?;
    let norm_sq: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroMean);
    }
    let weighted: f64 = lambda.iter().zip(beta).map(|(l, b)| l * b.norm_sqr()).sum();
    // Clamp rounding so the result stays inside [min lambda, max lambda].
    let lo = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((weighted / norm_sq).clamp(lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonInstance {
    lambda: Vec<f64>,
    #[serde(serialize_with = "serialize_complex_slice")]
    beta: Vec<Complex64>,
    alpha: f64,
    phi_hat1: f64,
}

pub(crate) fn serialize_complex_slice<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl ComparisonInstance {
    /// Instance with the first weight of `Q2` matched to `Q1`.
    pub fn matched(lambda: Vec<f64>, beta: Vec<Complex64>, alpha: f64) -> Result<Self> {
        let phi = phi_hat_from_q1(&lambda, &beta)?;
        ComparisonInstance::with_phi_hat(lambda, beta, alpha, phi)
    }

    /// Instance with an arbitrary first weight (not necessarily matched).
    pub fn with_phi_hat(lambda: Vec<f64>, beta: Vec<Complex64>, alpha: f64, phi_hat1: f64) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::param("lambda", "need M >= 2"));
        }
        if lambda.len() != beta.len() {
            return Err(Error::DimensionMismatch {
                expected: lambda.len(),
                found: beta.len(),
            });
        }
        check_simplex("lambda", &lambda)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be >= 0, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&phi_hat1) {
            return Err(Error::param("phi_hat1", format!("must lie in [0, 1], got {phi_hat1}")));
        }
        Ok(ComparisonInstance {
            lambda,
            beta,
            alpha,
            phi_hat1,
        })
    }

    /// Instance for `Q1` (given in eigen form) under the model's mean.
    pub fn from_covariance(q1: &SourceCovariance, model: &ChannelMeanModel) -> Result<Self> {
        let eig = q1
            .eigen()
            .ok_or_else(|| Error::InvalidCovariance("eigen form required".into()))?;
        let beta = eig.basis.adjoint() * model.mu();
        ComparisonInstance::matched(eig.weights.clone(), beta.iter().copied().collect(), model.alpha())
    }

    /// Random matched instance: Dirichlet(1) spectrum, Haar basis applied
    /// to a random mean, log-uniform `alpha` in `[0.05, 5]`.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let lambda = random_simplex(m, rng);
        let scale = 0.2 + 1.8 * rng.random::<f64>();
        let mu: Vec<Complex64> = (0..m).map(|_| complex_normal(rng) * scale).collect();
        let u = haar_unitary(m, rng);
        let beta: Vec<Complex64> = (0..m)
            .map(|i| (0..m).map(|j| u[(j, i)].conj() * mu[j]).sum())
            .collect();
        let alpha = (0.05f64.ln() + (100f64).ln() * rng.random::<f64>()).exp();
        ComparisonInstance::matched(lambda, beta, alpha).expect("random instance is valid")
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi_hat1(&self) -> f64 {
        self.phi_hat1
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `||mu||^2 = ||beta||^2`.
    pub fn mean_norm_sq(&self) -> f64 {
        self.beta.iter().map(|b| b.norm_sqr()).sum()
    }

    /// `mu^H Q1 mu = sum_i lambda_i |beta_i|^2`.
    pub fn q1_mean_power(&self) -> f64 {
        self.lambda.iter().zip(&self.beta).map(|(l, b)| l * b.norm_sqr()).sum()
    }

    /// `mu^H Q2 mu = phi ||mu||^2`.
    pub fn q2_mean_power(&self) -> f64 {
        self.phi_hat1 * self.mean_norm_sq()
    }

    pub fn is_matched(&self) -> bool {
        (self.q1_mean_power() - self.q2_mean_power()).abs() <= 1e-12 * self.mean_norm_sq().max(1.0)
    }

    /// Equal-block weights of `Q2`.
    pub fn q2_weights(&self) -> Vec<f64> {
        equal_block_weights(self.phi_hat1, self.dim())
    }

    /// Mixture for `W1`.
    pub fn q1_mixture(&self) -> Result<MixtureSpec> {
        if self.alpha == 0.0 {
            return Err(Error::DeterministicChannel);
        }
        MixtureSpec::new(
            self.lambda.clone(),
            self.beta.iter().map(|b| b.norm_sqr() / self.alpha).collect(),
        )
    }

    /// Mixture for `W2` (equal power on the orthogonal complement).
    pub fn q2_mixture(&self) -> Result<MixtureSpec> {
        if self.alpha == 0.0 {
            return Err(Error::DeterministicChannel);
        }
        MixtureSpec::beam_aligned(self.phi_hat1, self.dim(), self.mean_norm_sq() / self.alpha)
    }
}

/// Uniform draw from the probability simplex (Dirichlet(1, ..., 1)).
pub fn random_simplex<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    let mut w: Vec<f64> = e.iter().map(|x| x / total).collect();
    // Put the rounding residue on the largest entry so the sum is 1 to 1 ulp.
    let residue = 1.0 - w.iter().sum::<f64>();
    let imax = (0..m).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0);
    w[imax] += residue;
    w
}

/// Spectral term `ln prod(1 + lambda_i s) - ln[(1 + phi s)(1 + q s)^{M-1}]`.
pub fn j_function(inst: &ComparisonInstance, s: f64) -> Result<f64> {
    check_s(s)?;
    let m = inst.dim();
    let q = (1.0 - inst.phi_hat1) / (m - 1) as f64;
    let lhs: f64 = inst.lambda.iter().map(|&l| (l * s).ln_1p()).sum();
    Ok(lhs - (inst.phi_hat1 * s).ln_1p() - (m - 1) as f64 * (q * s).ln_1p())
}

/// Mean term `phi ||mu||^2 / (1 + phi s) - sum_i lambda_i |beta_i|^2 / (1 + lambda_i s)`.
pub fn r_function(inst: &ComparisonInstance, s: f64) -> Result<f64> {
    check_s(s)?;
    let lhs = inst.phi_hat1 * inst.mean_norm_sq() / (1.0 + inst.phi_hat1 * s);
    let rhs: f64 = inst
        .lambda
        .iter()
        .zip(&inst.beta)
        .map(|(&l, b)| l * b.norm_sqr() / (1.0 + l * s))
        .sum();
    Ok(lhs - rhs)
}

/// `ln[M_W2(s) / M_W1(s)] = J(s) - (s / alpha) R(s)`.
pub fn log_mgf_ratio(inst: &ComparisonInstance, s: f64) -> Result<f64> {
    if inst.alpha == 0.0 {
        return Err(Error::DeterministicChannel);
    }
    Ok(j_function(inst, s)? - s / inst.alpha * r_function(inst, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ordered,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtOrderReport {
    pub s_grid: Vec<f64>,
    pub log_ratio: Vec<f64>,
    /// Largest log ratio over the grid (signed; `<= 0` means ordered).
    pub max_violation: f64,
    pub verdict: Verdict,
}

/// Evaluates the log transform ratio on `grid`; ordered iff every value is
/// at most [`LT_VIOLATION_TOL`].
pub fn lt_order_check(inst: &ComparisonInstance, grid: &LogGrid) -> Result<LtOrderReport> {
    let s_grid = grid.values();
    let log_ratio = s_grid
        .iter()
        .map(|&s| log_mgf_ratio(inst, s))
        .collect::<Result<Vec<_>>>()?;
    let max_violation = log_ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let verdict = if max_violation <= LT_VIOLATION_TOL {
        Verdict::Ordered
    } else {
        Verdict::Violated
    };
    Ok(LtOrderReport {
        s_grid,
        log_ratio,
        max_violation,
        verdict,
    })
}

/// `a` is majorized by `b`: descending partial sums of `a` never exceed
/// those of `b`.
pub fn majorization_check(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    check_simplex("a", a)?;
    check_simplex("b", b)?;
    let sorted_desc = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let (sa, sb) = (sorted_desc(a), sorted_desc(b));
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in sa.iter().zip(&sb) {
        pa += x;
        pb += y;
        if pa > pb + MAJORIZATION_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every grid-level statement of the comparison for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceCheck {
    pub dim: usize,
    pub phi_hat1: f64,
    pub max_log_ratio: f64,
    pub max_j: f64,
    pub min_r: f64,
    /// `max_s |(J - sR/alpha) - (ln M_W2 - ln M_W1)|`.
    pub max_cross_path_gap: f64,
    pub majorized: bool,
    pub phi_in_range: bool,
    pub verdict: Verdict,
}

impl InstanceCheck {
    pub fn passes(&self) -> bool {
        self.verdict == Verdict::Ordered
            && self.max_j <= J_TOL
            && self.min_r >= -R_TOL
            && self.max_cross_path_gap <= LT_VIOLATION_TOL
            && self.majorized
            && self.phi_in_range
    }
}

pub fn check_instance(inst: &ComparisonInstance, grid: &LogGrid) -> Result<InstanceCheck> {
    let report = lt_order_check(inst, grid)?;
    let w1 = inst.q1_mixture()?;
    let w2 = inst.q2_mixture()?;
    let mut max_j = f64::NEG_INFINITY;
    let mut min_r = f64::INFINITY;
    let mut gap: f64 = 0.0;
    for (&s, &ratio) in report.s_grid.iter().zip(&report.log_ratio) {
        max_j = max_j.max(j_function(inst, s)?);
        min_r = min_r.min(r_function(inst, s)?);
        let direct = log_mgf_mixture(&w2, s)? - log_mgf_mixture(&w1, s)?;
        gap = gap.max((ratio - direct).abs());
    }
    let lo = inst.lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = inst.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(InstanceCheck {
        dim: inst.dim(),
        phi_hat1: inst.phi_hat1,
        max_log_ratio: report.max_violation,
        max_j,
        min_r,
        max_cross_path_gap: gap,
        majorized: majorization_check(&inst.q2_weights(), &inst.lambda)?,
        phi_in_range: inst.phi_hat1 >= lo && inst.phi_hat1 <= hi,
        verdict: report.verdict,
    })
}

/// Behavioural check that transform order implies order of
/// `E ln(1 + d W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRateOrderReport {
    pub d: f64,
    pub mean_first: f64,
    pub mean_second: f64,
    pub se_first: f64,
    pub se_second: f64,
    pub combined_se: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// `mean_first <= mean_second + 3 combined_se`.
    pub holds: bool,
}

/// Monte Carlo `E ln(1 + d W1)` vs `E ln(1 + d W2)` with independent draws
/// and a shared sample count. Assumes `W1 <=_LT W2` was established.
pub fn log_rate_order_check(first: &MixtureSpec, second: &MixtureSpec, d: f64, sampling: &Sampling) -> Result<LogRateOrderReport> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::param("d", format!("must be > 0, got {d}")));
    }
    sampling.validate(1)?;
    let acc = montecarlo::run_paired(sampling, |rng| {
        let w1 = first.sample(rng);
        let w2 = second.sample(rng);
        ((d * w1).ln_1p(), (d * w2).ln_1p())
    });
    let se_first = acc.first.std_error();
    let se_second = acc.second.std_error();
    let combined_se = se_first.hypot(se_second);
    Ok(LogRateOrderReport {
        d,
        mean_first: acc.first.mean(),
        mean_second: acc.second.mean(),
        se_first,
        se_second,
        combined_se,
        n_samples: sampling.n_samples,
        seed: sampling.seed,
        holds: acc.first.mean() <= acc.second.mean() + 3.0 * combined_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::stream_rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_hat_examples() {
        let beta = vec![c(0.3, -1.0), c(2.0, 0.5), c(-0.1, 0.0)];
        assert!((phi_hat_from_q1(&[1.0 / 3.0; 3], &beta).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let lambda = [0.6, 0.1, 0.3];
        let aligned = vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(phi_hat_from_q1(&lambda, &aligned).unwrap(), 0.6);
        let v = phi_hat_from_q1(&[0.7, 0.3], &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(phi_hat_from_q1(&[0.5, 0.5], &[c(0.0, 0.0); 2]), Err(Error::ZeroMean));
    }

    #[test]
    fn j_vanishes_for_identical_spectra() {
        let inst = ComparisonInstance::matched(vec![0.25; 4], vec![c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.0), c(0.3, 0.3)], 0.5)
            .unwrap();
        for s in LogGrid::default().values() {
            assert!(j_function(&inst, s).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn j_hand_value() {
        let b = std::f64::consts::FRAC_1_SQRT_2;
        let inst = ComparisonInstance::matched(vec![1.0, 0.0], vec![c(b, 0.0), c(b, 0.0)], 1.0).unwrap();
        assert!((inst.phi_hat1() - 0.5).abs() < 1e-15);
        let j = j_function(&inst, 1.0).unwrap();
        assert!((j - (8.0f64 / 9.0).ln()).abs() < 1e-15);
        assert!(j < 0.0);
    }

    #[test]
    fn r_hand_value_and_origin() {
        let inst = ComparisonInstance::matched(vec![0.7, 0.3], vec![c(1.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        let expected = 0.5 * 2.0 / 1.5 - (0.7 / 1.7 + 0.3 / 1.3);
        let r = r_function(&inst, 1.0).unwrap();
        assert!((r - expected).abs() < 1e-15);
        assert!((r - 0.024_132_730_015_082_954).abs() < 1e-15);
        assert!(r_function(&inst, 1e-12).unwrap().abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        let inst = ComparisonInstance::matched(vec![0.7, 0.3], vec![c(1.0, 0.0), c(1.0, 0.0)], 0.0).unwrap();
        assert_eq!(log_mgf_ratio(&inst, 1.0), Err(Error::DeterministicChannel));
        assert!(j_function(&inst, 0.0).is_err());
        assert!(r_function(&inst, -1.0).is_err());
        assert!(majorization_check(&[0.5, 0.5], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_instance_is_ordered() {
        let inst = ComparisonInstance::matched(vec![0.5, 0.5], vec![c(0.2, 0.1), c(1.0, -0.4)], 0.3).unwrap();
        let rep = lt_order_check(&inst, &LogGrid::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Ordered);
        assert!(rep.max_violation.abs() < 1e-12);
    }

    #[test]
    fn mismatched_counter_instance_is_violated() {
        let inst = ComparisonInstance::with_phi_hat(vec![0.5, 0.5], vec![c(1.0, 0.0), c(0.0, 0.0)], 1.0, 1.0).unwrap();
        assert!(!inst.is_matched());
        let rep = lt_order_check(&inst, &LogGrid::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Violated);
        // At s = 1e3: ln[(1 + s/2)^2 / (1 + s)] - s [1/(1+s) - 1/(2+s)].
        let s = 1e3f64;
        let expected = ((1.0 + s / 2.0).powi(2) / (1.0 + s)).ln() - s * (1.0 / (1.0 + s) - 1.0 / (2.0 + s));
        assert!((rep.max_violation - expected).abs() < 1e-12, "{}", rep.max_violation);
    }

    #[test]
    fn majorization_examples() {
        let b = [0.1, 0.6, 0.3];
        assert!(majorization_check(&b, &b).unwrap());
        assert!(majorization_check(&[1.0 / 3.0; 3], &b).unwrap());
        assert!(!majorization_check(&b, &[1.0 / 3.0; 3]).unwrap());
        assert!(majorization_check(&[0.5, 0.5, 0.0], &[1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn random_instances_satisfy_every_grid_statement() {
        let grid = LogGrid::default();
        let mut rng = stream_rng(21, 0);
        for k in 0..300 {
            let m = 2 + k % 5;
            let inst = ComparisonInstance::random(m, &mut rng);
            let chk = check_instance(&inst, &grid).unwrap();
            assert!(chk.passes(), "instance {k}: {chk:?}");
        }
    }

    #[test]
    fn cross_path_identity_random() {
        let mut rng = stream_rng(22, 0);
        for _ in 0..50 {
            let inst = ComparisonInstance::random(3, &mut rng);
            let (w1, w2) = (inst.q1_mixture().unwrap(), inst.q2_mixture().unwrap());
            for &s in &[1e-3, 0.1, 1.0, 17.0, 1e3] {
                let direct = log_mgf_mixture(&w2, s).unwrap() - log_mgf_mixture(&w1, s).unwrap();
                assert!((log_mgf_ratio(&inst, s).unwrap() - direct).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = LogGrid::default().values();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[199] - 1e3).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn log_rate_order_identical_mixtures() {
        let spec = MixtureSpec::new(vec![0.4, 0.6], vec![3.0, 0.5]).unwrap();
        let rep = log_rate_order_check(&spec, &spec, 1.0, &Sampling::new(200_000, 5)).unwrap();
        assert!((rep.mean_first - rep.mean_second).abs() <= 3.0 * rep.combined_se);
        assert!(rep.holds);
    }

    #[test]
    fn log_rate_order_ordered_pair() {
        let mut rng = stream_rng(23, 0);
        for _ in 0..5 {
            let inst = ComparisonInstance::random(3, &mut rng);
            let rep = log_rate_order_check(
                &inst.q1_mixture().unwrap(),
                &inst.q2_mixture().unwrap(),
                1.0,
                &Sampling::new(200_000, 6),
            )
            .unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn log_rate_order_small_d_first_order() {
        let first = MixtureSpec::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let second = MixtureSpec::beam_aligned(0.5, 2, 2.0).unwrap();
        let d = 1e-4;
        let rep = log_rate_order_check(&first, &second, d, &Sampling::new(200_000, 7)).unwrap();
        assert!(rep.mean_first.abs() < 10.0 * d && rep.mean_second.abs() < 10.0 * d);
        let bound = d * (second.mean() - first.mean()).abs() + 3.0 * rep.combined_se;
        assert!((rep.mean_second - rep.mean_first).abs() <= bound);
    }
}
