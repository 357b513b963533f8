//! Ergodic capacity of the half-duplex AF relay link, in nats per channel use.
//!
//! The relay gain follows from its long-term power budget,
//! `eta^2 = G / (1 + gamma [mu^H Q mu + alpha tr Q])`, and the per-draw rate is
//! `ln(1 + eta^2 gamma |h_F|^2 h_B^H Q h_B / (eta^2 |h_F|^2 + 1))`. For unit
//! trace this equals the mean-feedback form
//! `ln(1 + G |h_F|^2 h_B^H Q h_B / (mu^H Q mu + alpha + (G |h_F|^2 + 1) / gamma))`,
//! which is what the estimators average (times the half-duplex factor 1/2).

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{
    check_dim, complete_orthonormal_basis, complex_normal, hermitian_form, sample_backward_channel,
    validate_covariance, CVector, ChannelMeanModel, FadingDistribution, LinkParams, SourceCovariance,
    TRACE_TOL,
};
use crate::error::{Error, Result};
use crate::montecarlo::{self, Accumulator, Sampling, MIN_SAMPLES};
use crate::stochastic_order::ComparisonInstance;

/// Monte Carlo capacity estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Nats per channel use, half-duplex factor applied.
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl CapacityEstimate {
    pub(crate) fn from_accumulator(acc: &Accumulator, sampling: &Sampling) -> Self {
        CapacityEstimate {
            mean: acc.mean().max(0.0),
            std_error: acc.std_error(),
            n_samples: acc.count() as usize,
            seed: sampling.seed,
            workers: sampling.workers,
        }
    }

    /// `sqrt(se_a^2 + se_b^2)`, the standard error of a difference of
    /// independent estimates.
    pub fn pooled_se(&self, other: &CapacityEstimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

fn check_inputs(q: &SourceCovariance, model: &ChannelMeanModel) -> Result<()> {
    check_dim(model.dim(), q.dim())
}

/// Relay amplification `eta`.
pub fn amplifier_gain(q: &SourceCovariance, model: &ChannelMeanModel, params: &LinkParams) -> Result<f64> {
    check_inputs(q, model)?;
    let mean_power = hermitian_form(model.mu(), q.matrix()).max(0.0);
    let received = mean_power + model.alpha() * q.trace();
    Ok((params.g_relay() / (1.0 + params.gamma() * received)).sqrt())
}

/// Instantaneous rate (no half-duplex factor) from the relay-gain form.
pub fn integrand_raw(
    h_b: &CVector,
    h_f: Complex64,
    q: &SourceCovariance,
    model: &ChannelMeanModel,
    params: &LinkParams,
) -> Result<f64> {
    check_dim(q.dim(), h_b.len())?;
    let eta_sq = amplifier_gain(q, model, params)?.powi(2);
    let fwd = h_f.norm_sqr();
    let x = hermitian_form(h_b, q.matrix()).max(0.0);
    Ok((eta_sq * params.gamma() * fwd * x / (eta_sq * fwd + 1.0)).ln_1p())
}

/// Instantaneous rate (no half-duplex factor) from the mean-feedback form;
/// requires unit trace.
pub fn integrand_meanfeedback(
    h_b: &CVector,
    h_f: Complex64,
    q: &SourceCovariance,
    model: &ChannelMeanModel,
    params: &LinkParams,
) -> Result<f64> {
    check_inputs(q, model)?;
    check_dim(q.dim(), h_b.len())?;
    let trace_gap = (q.trace() - 1.0).abs();
    if trace_gap > TRACE_TOL {
        return Err(Error::InvalidCovariance(format!("trace off by {trace_gap:e}")));
    }
    let mean_power = hermitian_form(model.mu(), q.matrix()).max(0.0);
    let g_fwd = params.g_relay() * h_f.norm_sqr();
    let x = hermitian_form(h_b, q.matrix()).max(0.0);
    Ok((g_fwd * x / (mean_power + model.alpha() + (g_fwd + 1.0) / params.gamma())).ln_1p())
}

fn validated(q: &SourceCovariance, model: &ChannelMeanModel, sampling: &Sampling) -> Result<()> {
    check_inputs(q, model)?;
    let report = validate_covariance(q);
    if !report.is_valid() {
        return Err(Error::InvalidCovariance(report.summary()));
    }
    sampling.validate(MIN_SAMPLES)
}

/// Per-draw `(h_B^H Q h_B, |h_F|^2)`. Draw order per sample: `h_w` (skipped
/// when `alpha = 0`), then `h_F`.
fn draw_power<R: rand::Rng + ?Sized>(
    q: &SourceCovariance,
    model: &ChannelMeanModel,
    fading: &FadingDistribution,
    fixed_power: Option<f64>,
    rng: &mut R,
) -> (f64, f64) {
    let x = match fixed_power {
        Some(x) => x,
        None => hermitian_form(&sample_backward_channel(model, rng), q.matrix()).max(0.0),
    };
    (x, fading.sample(rng).norm_sqr())
}

/// `C(Q) = (1/2) E ln(1 + G|h_F|^2 h_B^H Q h_B / (mu^H Q mu + alpha + (G|h_F|^2 + 1)/gamma))`.
pub fn estimate_capacity(
    q: &SourceCovariance,
    model: &ChannelMeanModel,
    params: &LinkParams,
    fading: &FadingDistribution,
    sampling: &Sampling,
) -> Result<CapacityEstimate> {
    validated(q, model, sampling)?;
    let mean_power = hermitian_form(model.mu(), q.matrix()).max(0.0);
    let base = mean_power + model.alpha();
    // alpha = 0: h_B = mu on every draw
    let fixed = (model.alpha() == 0.0).then_some(mean_power);
    let (g, gamma) = (params.g_relay(), params.gamma());
    let acc = montecarlo::run(sampling, |rng| {
        let (x, fwd) = draw_power(q, model, fading, fixed, rng);
        let g_fwd = g * fwd;
        0.5 * (g_fwd * x / (base + (g_fwd + 1.0) / gamma)).ln_1p()
    });
    Ok(CapacityEstimate::from_accumulator(&acc, sampling))
}

/// Infinite-relay-power limit `(1/2) E ln(1 + gamma h_B^H Q h_B)`, i.e. the
/// traditional MISO link. Consumes the same draw sequence as
/// [`estimate_capacity`] so the two are driven by common random numbers.
pub fn estimate_miso_capacity(
    q: &SourceCovariance,
    model: &ChannelMeanModel,
    gamma: f64,
    fading: &FadingDistribution,
    sampling: &Sampling,
) -> Result<CapacityEstimate> {
    validated(q, model, sampling)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be > 0, got {gamma}")));
    }
    let fixed = (model.alpha() == 0.0).then(|| hermitian_form(model.mu(), q.matrix()).max(0.0));
    let acc = montecarlo::run(sampling, |rng| {
        let (x, _) = draw_power(q, model, fading, fixed, rng);
        0.5 * (gamma * x).ln_1p()
    });
    Ok(CapacityEstimate::from_accumulator(&acc, sampling))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityComparison {
    pub first: CapacityEstimate,
    pub second: CapacityEstimate,
    /// Mean of `C(Q2) - C(Q1)` over paired draws.
    pub difference: f64,
    pub difference_se: f64,
}

impl CapacityComparison {
    /// `C(Q2) >= C(Q1) - k * SE` of the paired difference.
    pub fn second_dominates(&self, k: f64) -> bool {
        self.difference >= -k * self.difference_se
    }
}

/// Both capacities on common random numbers: each draw of `(h_B, h_F)` is
/// fed through both covariances.
pub fn compare_capacities(
    q1: &SourceCovariance,
    q2: &SourceCovariance,
    model: &ChannelMeanModel,
    params: &LinkParams,
    fading: &FadingDistribution,
    sampling: &Sampling,
) -> Result<CapacityComparison> {
    validated(q1, model, sampling)?;
    validated(q2, model, sampling)?;
    let base1 = hermitian_form(model.mu(), q1.matrix()).max(0.0) + model.alpha();
    let base2 = hermitian_form(model.mu(), q2.matrix()).max(0.0) + model.alpha();
    let (g, gamma) = (params.g_relay(), params.gamma());
    let acc = montecarlo::run_paired(sampling, |rng| {
        let h_b = sample_backward_channel(model, rng);
        let g_fwd = g * fading.sample(rng).norm_sqr();
        let noise = (g_fwd + 1.0) / gamma;
        let x1 = hermitian_form(&h_b, q1.matrix()).max(0.0);
        let x2 = hermitian_form(&h_b, q2.matrix()).max(0.0);
        (
            0.5 * (g_fwd * x1 / (base1 + noise)).ln_1p(),
            0.5 * (g_fwd * x2 / (base2 + noise)).ln_1p(),
        )
    });
    Ok(CapacityComparison {
        first: CapacityEstimate::from_accumulator(&acc.first, sampling),
        second: CapacityEstimate::from_accumulator(&acc.second, sampling),
        difference: acc.difference.mean(),
        difference_se: acc.difference.std_error(),
    })
}

/// Conditional (fixed `h_F`) comparison of `E ln(1 + k W1)` and `E ln(1 + k W2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalPair {
    pub mean_first: f64,
    pub mean_second: f64,
    pub se_first: f64,
    pub se_second: f64,
    /// Standard error of the paired difference `second - first`.
    pub difference_se: f64,
    pub k1: f64,
    pub k2: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl ConditionalPair {
    /// `mean_second >= mean_first - k * SE` of the paired difference.
    pub fn second_dominates(&self, k: f64) -> bool {
        self.mean_second >= self.mean_first - k * self.difference_se
    }
}

/// Gain factors `G|h_F|^2 alpha / (mean power + alpha + (1 + G|h_F|^2)/gamma)`
/// for `Q1` and `Q2`.
pub fn k_factors(inst: &ComparisonInstance, params: &LinkParams, h_f: Complex64) -> (f64, f64) {
    let g_fwd = params.g_relay() * h_f.norm_sqr();
    let num = g_fwd * inst.alpha();
    let tail = inst.alpha() + (1.0 + g_fwd) / params.gamma();
    (num / (inst.q1_mean_power() + tail), num / (inst.q2_mean_power() + tail))
}

/// With common random numbers: one `g ~ CN(0, I)` in the eigenbasis of
/// `Q1` gives `W1`; the same draw rotated into the mean-aligned basis gives `W2`.
pub fn conditional_capacity_pair(
    inst: &ComparisonInstance,
    params: &LinkParams,
    h_f: Complex64,
    sampling: &Sampling,
) -> Result<ConditionalPair> {
    if inst.alpha() == 0.0 {
        return Err(Error::DeterministicChannel);
    }
    sampling.validate(MIN_SAMPLES)?;
    let (k1, k2) = k_factors(inst, params, h_f);
    if (k1 - k2).abs() > 1e-12 * k1.abs().max(1.0) {
        return Err(Error::UnmatchedComparison { k1, k2 });
    }
    let k = k1;
    let m = inst.dim();
    let beta = CVector::from_column_slice(inst.beta());
    // Mean-aligned basis expressed in Q1's eigen-coordinates.
    let v = complete_orthonormal_basis(&beta)?;
    let v_adj = v.adjoint();
    let inv_sqrt_alpha = 1.0 / inst.alpha().sqrt();
    let lambda = inst.lambda().to_vec();
    let weights2 = inst.q2_weights();
    let aligned_offset = inst.mean_norm_sq().sqrt() * inv_sqrt_alpha;

    let acc = montecarlo::run_paired(sampling, |rng| {
        let g = CVector::from_fn(m, |_, _| complex_normal(rng));
        let w1: f64 = (0..m)
            .map(|i| lambda[i] * (g[i] + beta[i] * inv_sqrt_alpha).norm_sqr())
            .sum();
        let g_hat = &v_adj * &g;
        let mut w2 = weights2[0] * (g_hat[0] + aligned_offset).norm_sqr();
        for i in 1..m {
            w2 += weights2[i] * g_hat[i].norm_sqr();
        }
        ((k * w1).ln_1p(), (k * w2).ln_1p())
    });
    Ok(ConditionalPair {
        mean_first: acc.first.mean(),
        mean_second: acc.second.mean(),
        se_first: acc.first.std_error(),
        se_second: acc.second.std_error(),
        difference_se: acc.difference.std_error(),
        k1,
        k2,
        n_samples: sampling.n_samples,
        seed: sampling.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_normal_vector, cvector, haar_unitary, CMatrix};
    use crate::montecarlo::stream_rng;
    use crate::stochastic_order::random_simplex;
    use rand::Rng;

    fn fig1_model() -> ChannelMeanModel {
        ChannelMeanModel::new(cvector(&[(0.3518, 0.2496), (-0.4039, -1.0437)]), 0.1).unwrap()
    }

    fn rel_diff(a: f64, b: f64) -> f64 {
        let scale = a.abs().max(b.abs());
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    }

    #[test]
    fn gain_degenerate_and_direct() {
        let q = SourceCovariance::isotropic(2);
        let quiet = ChannelMeanModel::new(CVector::zeros(2), 0.0).unwrap();
        let p = LinkParams::new(3.0, 7.0).unwrap();
        assert!((amplifier_gain(&q, &quiet, &p).unwrap() - 7f64.sqrt()).abs() < 1e-15);
        let scatter = ChannelMeanModel::new(CVector::zeros(2), 1.0).unwrap();
        let unit = LinkParams::new(1.0, 1.0).unwrap();
        assert!((amplifier_gain(&q, &scatter, &unit).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gain_meets_relay_budget_for_beamforming() {
        let model = fig1_model();
        let v = complete_orthonormal_basis(model.mu()).unwrap();
        let q = SourceCovariance::from_eigen(v, vec![1.0, 0.0]).unwrap();
        let params = LinkParams::from_db(10.0, 15.0).unwrap();
        let eta = amplifier_gain(&q, &model, &params).unwrap();
        let budget = eta * eta * (1.0 + params.gamma() * (model.mean_norm_sq() + model.alpha()));
        assert!((budget - params.g_relay()).abs() < 1e-12 * params.g_relay());
    }

    #[test]
    fn integrands_vanish_on_dead_links() {
        let model = fig1_model();
        let params = LinkParams::new(5.0, 20.0).unwrap();
        let v = complete_orthonormal_basis(model.mu()).unwrap();
        let q = SourceCovariance::from_eigen(v.clone(), vec![1.0, 0.0]).unwrap();
        let orth: CVector = v.column(1).into_owned();
        let h_f = Complex64::new(0.7, -0.2);
        assert!(integrand_raw(&orth, h_f, &q, &model, &params).unwrap() < 1e-15);
        assert!(integrand_meanfeedback(&orth, h_f, &q, &model, &params).unwrap() < 1e-15);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(integrand_raw(model.mu(), zero, &q, &model, &params).unwrap(), 0.0);
        assert_eq!(integrand_meanfeedback(model.mu(), zero, &q, &model, &params).unwrap(), 0.0);
    }

    #[test]
    fn raw_and_meanfeedback_forms_agree() {
        let mut rng = stream_rng(31, 0);
        for _ in 0..2_000 {
            let m = rng.random_range(2..6);
            let mu = complex_normal_vector(m, &mut rng).scale(rng.random::<f64>() * 2.0);
            let model = ChannelMeanModel::new(mu, rng.random::<f64>() * 2.0).unwrap();
            let params = LinkParams::new(
                10f64.powf(rng.random_range(-2.0..3.0)),
                10f64.powf(rng.random_range(-1.0..4.0)),
            )
            .unwrap();
            let q = SourceCovariance::from_eigen(haar_unitary(m, &mut rng), random_simplex(m, &mut rng)).unwrap();
            let h_b = sample_backward_channel(&model, &mut rng);
            let h_f = complex_normal(&mut rng);
            let a = integrand_raw(&h_b, h_f, &q, &model, &params).unwrap();
            let b = integrand_meanfeedback(&h_b, h_f, &q, &model, &params).unwrap();
            assert!(rel_diff(a, b) <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn meanfeedback_arithmetic_and_limits() {
        // G|h_F|^2 = 10, h^H Q h = 1, mu^H Q mu + alpha = 1, gamma = 1.
        let model = ChannelMeanModel::new(CVector::zeros(2), 1.0).unwrap();
        let q = SourceCovariance::from_eigen(CMatrix::identity(2, 2), vec![1.0, 0.0]).unwrap();
        let h_b = cvector(&[(1.0, 0.0), (0.0, 0.0)]);
        let params = LinkParams::new(1.0, 10.0).unwrap();
        let v = integrand_meanfeedback(&h_b, Complex64::new(1.0, 0.0), &q, &model, &params).unwrap();
        assert!((v - (1.0f64 + 10.0 / 12.0).ln()).abs() < 1e-15);
        // gamma -> inf: denominator tends to mu^H Q mu + alpha
        let huge = LinkParams::new(1e300, 10.0).unwrap();
        let v = integrand_meanfeedback(&h_b, Complex64::new(1.0, 0.0), &q, &model, &huge).unwrap();
        assert!((v - 11f64.ln()).abs() < 1e-14);
        let off = SourceCovariance::from_matrix_unchecked(CMatrix::identity(2, 2)).unwrap();
        assert!(integrand_meanfeedback(&h_b, Complex64::new(1.0, 0.0), &off, &model, &params).is_err());
    }

    #[test]
    fn dead_forward_channel_has_zero_capacity() {
        let model = fig1_model();
        let est = estimate_capacity(
            &SourceCovariance::isotropic(2),
            &model,
            &LinkParams::new(10.0, 30.0).unwrap(),
            &FadingDistribution::constant(Complex64::new(0.0, 0.0)),
            &Sampling::new(5_000, 1),
        )
        .unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn isotropic_covariance_is_basis_invariant() {
        let model = ChannelMeanModel::new(CVector::zeros(2), 1.0).unwrap();
        let params = LinkParams::new(10.0, 10.0).unwrap();
        let sampling = Sampling::new(50_000, 2);
        let base = estimate_capacity(&SourceCovariance::isotropic(2), &model, &params, &FadingDistribution::Rayleigh, &sampling)
            .unwrap();
        let mut rng = stream_rng(32, 0);
        for _ in 0..5 {
            let q = SourceCovariance::isotropic(2).rotated(&haar_unitary(2, &mut rng)).unwrap();
            let est = estimate_capacity(&q, &model, &params, &FadingDistribution::Rayleigh, &sampling).unwrap();
            assert!(rel_diff(est.mean, base.mean) < 1e-12);
        }
    }

    #[test]
    fn estimate_is_reproducible_and_records_provenance() {
        let model = fig1_model();
        let params = LinkParams::from_db(5.0, 15.0).unwrap();
        let s = Sampling::new(20_000, 77).with_workers(3);
        let q = SourceCovariance::isotropic(2);
        let a = estimate_capacity(&q, &model, &params, &FadingDistribution::Rayleigh, &s).unwrap();
        let b = estimate_capacity(&q, &model, &params, &FadingDistribution::Rayleigh, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.n_samples, a.seed, a.workers), (20_000, 77, 3));
        assert!(estimate_capacity(&q, &model, &params, &FadingDistribution::Rayleigh, &Sampling::new(10, 0)).is_err());
    }

    #[test]
    fn zero_scatter_short_circuit() {
        let model = ChannelMeanModel::new(fig1_model().mu().clone(), 0.0).unwrap();
        let params = LinkParams::from_db(10.0, 15.0).unwrap();
        let fading = FadingDistribution::constant(Complex64::new(1.0, 0.0));
        let q = SourceCovariance::isotropic(2);
        let est = estimate_capacity(&q, &model, &params, &fading, &Sampling::new(1_000, 0)).unwrap();
        let direct = 0.5 * integrand_meanfeedback(model.mu(), Complex64::new(1.0, 0.0), &q, &model, &params).unwrap();
        assert!((est.mean - direct).abs() < 1e-14);
        assert!(est.std_error < 1e-14);
    }

    #[test]
    fn capacity_grows_with_snr_and_relay_power() {
        let model = fig1_model();
        let q = SourceCovariance::isotropic(2);
        let s = Sampling::new(100_000, 4);
        let mut prev: Option<CapacityEstimate> = None;
        for &gdb in &[-5.0, 0.0, 5.0, 10.0, 20.0] {
            let est = estimate_capacity(&q, &model, &LinkParams::from_db(gdb, 15.0).unwrap(), &FadingDistribution::Rayleigh, &s)
                .unwrap();
            if let Some(p) = prev {
                assert!(est.mean >= p.mean - 3.0 * est.pooled_se(&p));
            }
            prev = Some(est);
        }
        let mut prev: Option<CapacityEstimate> = None;
        for &g in &[1.0, 3.0, 10.0, 100.0] {
            let est = estimate_capacity(&q, &model, &LinkParams::new(10.0, g).unwrap(), &FadingDistribution::Rayleigh, &s)
                .unwrap();
            if let Some(p) = prev {
                assert!(est.mean >= p.mean - 3.0 * est.pooled_se(&p));
            }
            prev = Some(est);
        }
    }

    #[test]
    fn comparison_matches_separate_estimates() {
        let model = fig1_model();
        let params = LinkParams::from_db(10.0, 15.0).unwrap();
        let s = Sampling::new(20_000, 8);
        let q1 = SourceCovariance::isotropic(2);
        let v = complete_orthonormal_basis(model.mu()).unwrap();
        let q2 = SourceCovariance::from_eigen(v, vec![0.9, 0.1]).unwrap();
        let cmp = compare_capacities(&q1, &q2, &model, &params, &FadingDistribution::Rayleigh, &s).unwrap();
        let a = estimate_capacity(&q1, &model, &params, &FadingDistribution::Rayleigh, &s).unwrap();
        let b = estimate_capacity(&q2, &model, &params, &FadingDistribution::Rayleigh, &s).unwrap();
        assert!(rel_diff(cmp.first.mean, a.mean) < 1e-12);
        assert!(rel_diff(cmp.second.mean, b.mean) < 1e-12);
        assert!((cmp.difference - (b.mean - a.mean)).abs() < 1e-12);
        assert!(cmp.difference_se < a.pooled_se(&b));
    }

    #[test]
    fn uniform_spectrum_pair_coincides() {
        let inst = ComparisonInstance::matched(
            vec![0.5, 0.5],
            vec![Complex64::new(0.4, 0.1), Complex64::new(-1.0, 0.6)],
            0.3,
        )
        .unwrap();
        let params = LinkParams::new(10.0, 20.0).unwrap();
        let pair = conditional_capacity_pair(&inst, &params, Complex64::new(1.0, 0.0), &Sampling::new(100_000, 3)).unwrap();
        assert!((pair.mean_second - pair.mean_first).abs() <= 3.0 * pair.se_first.hypot(pair.se_second));
    }

    #[test]
    fn conditional_pair_dominance_and_matching() {
        let mut rng = stream_rng(33, 0);
        let params = LinkParams::from_db(10.0, 15.0).unwrap();
        for k in 0..100 {
            let inst = ComparisonInstance::random(2 + k % 3, &mut rng);
            let h_f = complex_normal(&mut rng);
            let (k1, k2) = k_factors(&inst, &params, h_f);
            assert!((k1 - k2).abs() <= 1e-12 * k1.max(1.0));
            let pair = conditional_capacity_pair(&inst, &params, h_f, &Sampling::new(20_000, k as u64)).unwrap();
            assert!(pair.second_dominates(3.0), "instance {k}: {pair:?}");
        }
    }

    #[test]
    fn unmatched_pair_is_rejected() {
        let inst = ComparisonInstance::with_phi_hat(
            vec![0.5, 0.5],
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            1.0,
            1.0,
        )
        .unwrap();
        let params = LinkParams::new(1.0, 1.0).unwrap();
        let r = conditional_capacity_pair(&inst, &params, Complex64::new(1.0, 0.0), &Sampling::new(1_000, 0));
        assert!(matches!(r, Err(Error::UnmatchedComparison { .. })));
    }

    #[test]
    fn relay_limit_matches_miso() {
        let model = fig1_model();
        let v = complete_orthonormal_basis(model.mu()).unwrap();
        let q = SourceCovariance::from_eigen(v, vec![0.8, 0.2]).unwrap();
        let s = Sampling::new(100_000, 5);
        let relay = estimate_capacity(&q, &model, &LinkParams::new(10.0, 1e8).unwrap(), &FadingDistribution::Rayleigh, &s)
            .unwrap();
        let miso = estimate_miso_capacity(&q, &model, 10.0, &FadingDistribution::Rayleigh, &s).unwrap();
        assert!((relay.mean - miso.mean).abs() <= 3.0 * relay.pooled_se(&miso));
        assert!(relay.mean <= miso.mean);
    }
}
