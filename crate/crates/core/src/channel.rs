//! Channel and covariance data model.
//!
//! The source-relay (backward) channel is `h_B = mu + sqrt(alpha) * h_w`
//! with `h_w ~ CN(0, I_M)`; the relay-destination (forward) channel is a
//! scalar `h_F` drawn from a [`FadingDistribution`]. Transmit covariances
//! are Hermitian PSD matrices with unit trace.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_FORM_TOL: f64 = 1e-10;

/// Unit circularly-symmetric complex Gaussian draw (`E|g|^2 = 1`).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn complex_normal_vector<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CVector {
    CVector::from_fn(m, |_, _| complex_normal(rng))
}

/// Builds a complex vector from `(re, im)` pairs.
pub fn cvector(pairs: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|&(re, im)| Complex64::new(re, im)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMeanModel {
    mu: CVector,
    alpha: f64,
}

impl ChannelMeanModel {
    pub fn new(mu: CVector, alpha: f64) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::param("mu", format!("need M >= 2 antennas, got {}", mu.len())));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        if mu.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::param("mu", "entries must be finite"));
        }
        Ok(ChannelMeanModel { mu, alpha })
    }

    pub fn mu(&self) -> &CVector {
        &self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of source antennas `M`.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mean_norm_sq(&self) -> f64 {
        self.mu.norm_squared()
    }

    pub fn mean_norm(&self) -> f64 {
        self.mu.norm()
    }

    /// Noncentrality `||mu||^2 / alpha` of the beam-aligned component.
    pub fn k_factor(&self) -> f64 {
        self.mean_norm_sq() / self.alpha
    }

    /// Same scatter, mean rotated by `u`.
    pub fn rotated(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.nrows())?;
        ChannelMeanModel::new(u * &self.mu, self.alpha)
    }

    /// Same direction and scatter, mean rescaled to the given norm.
    pub fn with_mean_norm(&self, norm: f64) -> Result<Self> {
        let current = self.mean_norm();
        if current == 0.0 {
            return Err(Error::ZeroMean);
        }
        ChannelMeanModel::new(self.mu.scale(norm / current), self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkParams {
    gamma: f64,
    g_relay: f64,
}

impl LinkParams {
    pub fn new(gamma: f64, g_relay: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be > 0, got {gamma}")));
        }
        if !(g_relay.is_finite() && g_relay > 0.0) {
            return Err(Error::param("g_relay", format!("must be > 0, got {g_relay}")));
        }
        Ok(LinkParams { gamma, g_relay })
    }

    pub fn from_db(gamma_db: f64, g_relay_db: f64) -> Result<Self> {
        LinkParams::new(db_to_linear(gamma_db), db_to_linear(g_relay_db))
    }

    /// Transmit SNR (linear).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Relay power budget `G` (linear).
    pub fn g_relay(&self) -> f64 {
        self.g_relay
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Law of the forward channel coefficient `h_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FadingDistribution {
    /// `CN(0, 1)`, i.e. Rayleigh envelope with unit mean power.
    Rayleigh,
    /// A fixed coefficient; `Constant(0)` models a dead forward link.
    Constant { re: f64, im: f64 },
}

impl FadingDistribution {
    pub fn constant(h: Complex64) -> Self {
        FadingDistribution::Constant { re: h.re, im: h.im }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            FadingDistribution::Rayleigh => complex_normal(rng),
            FadingDistribution::Constant { re, im } => Complex64::new(re, im),
        }
    }

    pub fn mean_power(&self) -> f64 {
        match *self {
            FadingDistribution::Rayleigh => 1.0,
            FadingDistribution::Constant { re, im } => re * re + im * im,
        }
    }

    pub fn is_rayleigh(&self) -> bool {
        matches!(self, FadingDistribution::Rayleigh)
    }
}

/// `h_B = mu + sqrt(alpha) g`, `g ~ CN(0, I)`.
pub fn sample_backward_channel<R: Rng + ?Sized>(model: &ChannelMeanModel, rng: &mut R) -> CVector {
    if model.alpha == 0.0 {
        return model.mu.clone();
    }
    let scale = model.alpha.sqrt();
    let mut h = complex_normal_vector(model.dim(), rng);
    for (hi, mi) in h.iter_mut().zip(model.mu.iter()) {
        *hi = mi + *hi * scale;
    }
    h
}

/// Unitary `V` whose first column is `mu / ||mu||`.
///
/// Built from the Householder reflector `H = I - 2 v v^H / (v^H v)` with
/// `v = u + e^{i theta} e_1`, where `u = mu/||mu||` and `theta = arg(u_1)`.
/// `H` maps `u` to `-e^{i theta} e_1`, so its first column is
/// `-e^{-i theta} u`; rescaling that column by `-e^{i theta}` yields `u`.
pub fn complete_orthonormal_basis(mu: &CVector) -> Result<CMatrix> {
    let norm = mu.norm();
    if mu.is_empty() || norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroMean);
    }
    let m = mu.len();
    let u = mu.unscale(norm);
    let phase = if u[0].norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        u[0] / u[0].norm()
    };
    let mut v = u.clone();
    v[0] += phase;
    let v_norm_sq = v.norm_squared();
    let mut basis = CMatrix::identity(m, m);
    for j in 0..m {
        for i in 0..m {
            basis[(i, j)] -= v[i] * v[j].conj() * (2.0 / v_norm_sq);
        }
    }
    let first = -phase;
    for i in 0..m {
        basis[(i, 0)] *= first;
    }
    // Column 0 is exactly u up to rounding; pin it.
    basis.set_column(0, &u);
    Ok(basis)
}

/// Haar-distributed random unitary (QR of a complex Ginibre matrix with the
/// phases of `diag(R)` absorbed into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(m, m, |_, _| complex_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let ph = if d.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..m {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Real part of `h^H A h`, no clipping.
pub(crate) fn hermitian_form(h: &CVector, a: &CMatrix) -> f64 {
    let m = h.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..m {
            row += a[(i, j)] * h[j];
        }
        acc += h[i].conj() * row;
    }
    acc.re
}

/// `h^H Q h`, clipped at zero.
pub fn quadratic_form(h: &CVector, q: &SourceCovariance) -> Result<f64> {
    check_dim(q.dim(), h.len())?;
    Ok(hermitian_form(h, &q.matrix).max(0.0))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenForm {
    pub basis: CMatrix,
    pub weights: Vec<f64>,
}

/// Transmit covariance `Q`, optionally carrying its eigen factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCovariance {
    matrix: CMatrix,
    eigen: Option<EigenForm>,
}

impl SourceCovariance {
    /// Validated covariance from a full matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let q = SourceCovariance::from_matrix_unchecked(matrix)?;
        q.ensure_valid()?;
        Ok(q)
    }

    /// Wraps a square matrix without checking the covariance invariants.
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Result<Self> {
        check_dim(matrix.nrows(), matrix.ncols())?;
        Ok(SourceCovariance { matrix, eigen: None })
    }

    /// `basis * diag(weights) * basis^H`, validated.
    pub fn from_eigen(basis: CMatrix, weights: Vec<f64>) -> Result<Self> {
        check_dim(basis.nrows(), basis.ncols())?;
        check_dim(basis.nrows(), weights.len())?;
        let m = weights.len();
        let mut matrix = CMatrix::zeros(m, m);
        for (k, &w) in weights.iter().enumerate() {
            let col = basis.column(k);
            for j in 0..m {
                let cj = col[j].conj() * w;
                for i in 0..m {
                    matrix[(i, j)] += col[i] * cj;
                }
            }
        }
        let q = SourceCovariance {
            matrix,
            eigen: Some(EigenForm { basis, weights }),
        };
        q.ensure_valid()?;
        Ok(q)
    }

    /// `I / M`.
    pub fn isotropic(m: usize) -> Self {
        let basis = CMatrix::identity(m, m);
        SourceCovariance {
            matrix: basis.unscale(m as f64),
            eigen: Some(EigenForm {
                basis,
                weights: vec![1.0 / m as f64; m],
            }),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> Option<&EigenForm> {
        self.eigen.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `U Q U^H`; the eigen form, if any, is carried along as `(U V, weights)`.
    pub fn rotated(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.nrows())?;
        match &self.eigen {
            Some(e) => SourceCovariance::from_eigen(u * &e.basis, e.weights.clone()),
            None => {
                let r = u * &self.matrix * u.adjoint();
                let sym = (&r + r.adjoint()).unscale(2.0);
                SourceCovariance::new(sym)
            }
        }
    }

    fn ensure_valid(&self) -> Result<()> {
        let report = validate_covariance(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidCovariance(report.summary()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// `max |Q - Q^H|` entrywise.
    pub hermitian_residual: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
    /// `|tr Q - 1|`.
    pub trace_residual: f64,
    /// `max |V^H V - I|`, when an eigen form is present.
    pub basis_residual: Option<f64>,
    /// `max |V diag(w) V^H - Q|`, when an eigen form is present.
    pub reconstruction_residual: Option<f64>,
    pub hermitian_ok: bool,
    pub psd_ok: bool,
    pub trace_ok: bool,
    pub eigen_form_ok: bool,
}

impl CovarianceReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian_ok && self.psd_ok && self.trace_ok && self.eigen_form_ok
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.hermitian_ok {
            parts.push(format!("not Hermitian (residual {:e})", self.hermitian_residual));
        }
        if !self.psd_ok {
            parts.push(format!("not PSD (min eigenvalue {:e})", self.min_eigenvalue));
        }
        if !self.trace_ok {
            parts.push(format!("trace off by {:e}", self.trace_residual));
        }
        if !self.eigen_form_ok {
            parts.push(format!(
                "eigen form inconsistent (basis {:?}, reconstruction {:?})",
                self.basis_residual, self.reconstruction_residual
            ));
        }
        if parts.is_empty() {
            "ok".to_string()
        } else {
            parts.join("; ")
        }
    }
}

fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermitian, PSD, unit-trace and eigen-form checks with violation magnitudes.
pub fn validate_covariance(q: &SourceCovariance) -> CovarianceReport {
    let a = &q.matrix;
    let m = a.nrows();
    let hermitian_residual = max_abs_entry(&(a - a.adjoint()));
    let herm = (a + a.adjoint()).unscale(2.0);
    let min_eigenvalue = if m == 0 {
        0.0
    } else {
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    };
    let trace_residual = (a.trace().re - 1.0).abs();

    let (basis_residual, reconstruction_residual) = match &q.eigen {
        Some(e) => {
            let gram = e.basis.adjoint() * &e.basis;
            let basis_res = max_abs_entry(&(gram - CMatrix::identity(m, m)));
            let diag = CMatrix::from_diagonal(&CVector::from_iterator(
                m,
                e.weights.iter().map(|&w| Complex64::new(w, 0.0)),
            ));
            let rebuilt = &e.basis * diag * e.basis.adjoint();
            (Some(basis_res), Some(max_abs_entry(&(rebuilt - a))))
        }
        None => (None, None),
    };
    let eigen_form_ok = basis_residual.is_none_or(|r| r <= EIGEN_FORM_TOL)
        && reconstruction_residual.is_none_or(|r| r <= EIGEN_FORM_TOL)
        && q.eigen.as_ref().is_none_or(|e| e.weights.iter().all(|&w| w >= -PSD_TOL));

    CovarianceReport {
        hermitian_residual,
        min_eigenvalue,
        trace_residual,
        basis_residual,
        reconstruction_residual,
        hermitian_ok: hermitian_residual <= HERMITIAN_TOL,
        psd_ok: min_eigenvalue >= -PSD_TOL,
        trace_ok: trace_residual <= TRACE_TOL,
        eigen_form_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::stream_rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig1_mu() -> CVector {
        cvector(&[(0.3518, 0.2496), (-0.4039, -1.0437)])
    }

    fn max_dev_from_identity(v: &CMatrix) -> f64 {
        let m = v.nrows();
        max_abs_entry(&(v.adjoint() * v - CMatrix::identity(m, m)))
    }

    #[test]
    fn model_rejects_bad_inputs() {
        assert!(ChannelMeanModel::new(cvector(&[(1.0, 0.0)]), 0.1).is_err());
        assert!(ChannelMeanModel::new(fig1_mu(), -0.1).is_err());
        assert!(ChannelMeanModel::new(cvector(&[(f64::NAN, 0.0), (0.0, 0.0)]), 0.1).is_err());
        assert!(LinkParams::new(0.0, 1.0).is_err());
        assert!(LinkParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn zero_scatter_sampling_is_the_mean() {
        let model = ChannelMeanModel::new(fig1_mu(), 0.0).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..10 {
            assert_eq!(sample_backward_channel(&model, &mut rng), fig1_mu());
        }
    }

    #[test]
    fn centered_sample_mean_vanishes() {
        let m = 3;
        let model = ChannelMeanModel::new(CVector::zeros(m), 1.0).unwrap();
        let mut rng = stream_rng(2, 0);
        let n = 1_000_000;
        let mut sum = CVector::zeros(m);
        for _ in 0..n {
            sum += sample_backward_channel(&model, &mut rng);
        }
        let mean = sum.unscale(n as f64);
        assert!(mean.norm() <= 4.0 * (m as f64 / n as f64).sqrt(), "{}", mean.norm());
    }

    #[test]
    fn fig1_per_entry_variance_is_alpha() {
        let model = ChannelMeanModel::new(fig1_mu(), 0.1).unwrap();
        let mut rng = stream_rng(3, 0);
        let n = 1_000_000;
        // Per-entry moments of |h_i - mu_i|^2, whose mean is alpha.
        let mut sums = [0.0f64; 2];
        let mut sq = [0.0f64; 2];
        for _ in 0..n {
            let h = sample_backward_channel(&model, &mut rng);
            for i in 0..2 {
                let d = (h[i] - model.mu()[i]).norm_sqr();
                sums[i] += d;
                sq[i] += d * d;
            }
        }
        for i in 0..2 {
            let mean = sums[i] / n as f64;
            let var = sq[i] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!((mean - 0.1).abs() <= 3.0 * se, "entry {i}: {mean} vs 0.1 (se {se})");
        }
    }

    #[test]
    fn axis_aligned_basis_is_identity() {
        let v = complete_orthonormal_basis(&cvector(&[(1.0, 0.0), (0.0, 0.0)])).unwrap();
        assert!(max_abs_entry(&(v - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn fig1_basis_first_column() {
        let mu = fig1_mu();
        assert!((mu.norm_squared() - 1.43851).abs() < 1e-4);
        let v = complete_orthonormal_basis(&mu).unwrap();
        let u = mu.unscale(mu.norm());
        assert!((v.column(0) - u).norm() < 1e-15);
        assert!(max_dev_from_identity(&v) < 1e-12);
    }

    #[test]
    fn basis_is_deterministic_and_rejects_zero() {
        let mu = cvector(&[(0.0, 0.0), (0.3, -2.0), (1.0, 1.0)]);
        let a = complete_orthonormal_basis(&mu).unwrap();
        let b = complete_orthonormal_basis(&mu).unwrap();
        assert_eq!(a, b);
        assert!(max_dev_from_identity(&a) < 1e-12);
        assert_eq!(complete_orthonormal_basis(&CVector::zeros(3)), Err(Error::ZeroMean));
    }

    #[test]
    fn isotropic_quadratic_form() {
        let q = SourceCovariance::isotropic(3);
        let h = cvector(&[(1.0, 2.0), (-0.5, 0.0), (0.0, 3.0)]);
        assert!((quadratic_form(&h, &q).unwrap() - h.norm_squared() / 3.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_rank_one_form_vanishes() {
        let v = cvector(&[(FRAC_1_SQRT_2, 0.0), (0.0, FRAC_1_SQRT_2)]);
        let basis = complete_orthonormal_basis(&v).unwrap();
        let q = SourceCovariance::from_eigen(basis.clone(), vec![1.0, 0.0]).unwrap();
        let h: CVector = basis.column(1).into_owned().scale(2.5);
        assert!(quadratic_form(&h, &q).unwrap() < 1e-15);
    }

    #[test]
    fn quadratic_form_matches_double_sum() {
        let mut rng = stream_rng(4, 0);
        for m in 2..6 {
            let u = haar_unitary(m, &mut rng);
            let mut w: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            let q = SourceCovariance::from_eigen(u, w).unwrap();
            let h = complex_normal_vector(m, &mut rng);
            let mut brute = Complex64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    brute += h[i].conj() * q.matrix()[(i, j)] * h[j];
                }
            }
            assert!(brute.im.abs() < 1e-12);
            assert!((quadratic_form(&h, &q).unwrap() - brute.re).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_form_dimension_mismatch() {
        let q = SourceCovariance::isotropic(2);
        let h = CVector::zeros(3);
        assert_eq!(
            quadratic_form(&h, &q),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn validation_reports() {
        assert!(validate_covariance(&SourceCovariance::isotropic(4)).is_valid());

        let bad_trace = SourceCovariance::from_matrix_unchecked(CMatrix::from_diagonal(
            &CVector::from_vec(vec![c(0.6, 0.0), c(0.6, 0.0)]),
        ))
        .unwrap();
        let r = validate_covariance(&bad_trace);
        assert!(!r.trace_ok && r.psd_ok && r.hermitian_ok);
        assert!((r.trace_residual - 0.2).abs() < 1e-12);

        let not_psd = SourceCovariance::from_matrix_unchecked(CMatrix::from_diagonal(
            &CVector::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]),
        ))
        .unwrap();
        let r = validate_covariance(&not_psd);
        assert!(!r.psd_ok && r.trace_ok);
        assert!((r.min_eigenvalue + 0.2).abs() < 1e-12);

        let mut skew = CMatrix::identity(2, 2).unscale(2.0);
        skew[(0, 1)] = c(0.1, 0.0);
        let r = validate_covariance(&SourceCovariance::from_matrix_unchecked(skew).unwrap());
        assert!(!r.hermitian_ok);
        assert!(SourceCovariance::new(CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(15.0) - 31.622_776_6).abs() < 1e-7);
        assert!((linear_to_db(db_to_linear(-7.5)) + 7.5).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_forward_channel_has_unit_power() {
        let mut rng = stream_rng(5, 0);
        let n = 200_000;
        let p: f64 = (0..n)
            .map(|_| FadingDistribution::Rayleigh.sample(&mut rng).norm_sqr())
            .sum::<f64>()
            / n as f64;
        // Exponential(1): standard error 1/sqrt(n).
        assert!((p - 1.0).abs() < 4.0 / (n as f64).sqrt());
        assert_eq!(FadingDistribution::constant(c(0.0, 0.0)).mean_power(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop, prop_assert, prop_assume, proptest, Strategy};

        fn arb_vec(m: usize) -> impl Strategy<Value = CVector> {
            prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), m)
                .prop_map(|p| cvector(&p))
        }

        proptest! {
            #[test]
            fn basis_is_unitary_with_mean_first(mu in (2usize..7).prop_flat_map(arb_vec)) {
                prop_assume!(mu.norm() > 1e-6);
                let v = complete_orthonormal_basis(&mu).unwrap();
                prop_assert!(max_dev_from_identity(&v) < 1e-12);
                let u = mu.unscale(mu.norm());
                prop_assert!((v.column(0) - u).norm() < 1e-12);
            }

            #[test]
            fn quadratic_form_is_rotation_invariant(seed in any::<u64>(), m in 2usize..6) {
                let mut rng = stream_rng(seed, 0);
                let u = haar_unitary(m, &mut rng);
                let basis = haar_unitary(m, &mut rng);
                let mut w: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                let q = SourceCovariance::from_eigen(basis, w).unwrap();
                let h = complex_normal_vector(m, &mut rng);
                let ua = u.adjoint();
                let q_rot = q.rotated(&ua).unwrap();
                let lhs = quadratic_form(&(&ua * &h), &q_rot).unwrap();
                let rhs = quadratic_form(&h, &q).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }
}
