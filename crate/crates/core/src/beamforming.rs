//! Rank-one optimality test under Rayleigh forward fading.
//!
//! With `D1 = (alpha gamma + 1 + gamma |mu|^2) / G`, the variable `Z` lives on
//! `(0, D1]` with density
//! `p_Z(z) = D1/(alpha gamma z^2) exp(-[|mu|^2/alpha + (D1/z - 1)/(alpha gamma)]) I0(2|mu| sqrt(D1/z - 1) / (alpha sqrt(gamma)))`.
//! Beamforming is optimal iff
//! `f = E Z + E[Z e^Z E1(Z)] / G - E[Z^2 e^Z E1(Z)] - D2 <= 0`.

use rand::Rng;
use serde::Serialize;

use crate::channel::{ChannelMeanModel, LinkParams};
use crate::error::{Error, Result};
use crate::montecarlo::{self, Sampling, MIN_SAMPLES};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::specfun::{bessel_i0_scaled, expx_gamma0, sample_ncx2};

/// Requested relative accuracy of every expectation.
pub const EXPECTATION_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamformingInstance {
    pub mean_norm_sq: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub g_relay: f64,
    pub d1: f64,
    pub d2: f64,
}

impl BeamformingInstance {
    pub fn new(model: &ChannelMeanModel, params: &LinkParams) -> Result<Self> {
        Self::from_parts(model.mean_norm_sq(), model.alpha(), params)
    }

    pub fn from_parts(mean_norm_sq: f64, alpha: f64, params: &LinkParams) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be > 0, got {alpha}")));
        }
        if !(mean_norm_sq >= 0.0 && mean_norm_sq.is_finite()) {
            return Err(Error::param("mean_norm_sq", format!("must be >= 0, got {mean_norm_sq}")));
        }
        let (gamma, g) = (params.gamma(), params.g_relay());
        let d1 = (alpha * gamma + 1.0 + gamma * mean_norm_sq) / g;
        let d2 = d1 / (alpha * gamma + 1.0) * (1.0 - gamma * mean_norm_sq / g * expx_gamma0(d1)?);
        Ok(BeamformingInstance { mean_norm_sq, alpha, gamma, g_relay: g, d1, d2 })
    }

    /// `|mu|^2 / alpha`
    pub fn noncentrality(&self) -> f64 {
        self.mean_norm_sq / self.alpha
    }

    /// `Z = D1 / (1 + alpha gamma X)`, `X` noncentral chi-square(2) with
    /// noncentrality `|mu|^2 / alpha`.
    pub fn sample_z<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = sample_ncx2(self.noncentrality(), rng);
        self.d1 / (1.0 + self.alpha * self.gamma * x)
    }

    fn density_unchecked(&self, z: f64) -> f64 {
        let ag = self.alpha * self.gamma;
        let y = (self.d1 / z - 1.0).max(0.0);
        let gap = self.noncentrality().sqrt() - (y / ag).sqrt();
        let tail = (-gap * gap).exp();
        if tail == 0.0 {
            return 0.0;
        }
        let arg = 2.0 * self.mean_norm_sq.sqrt() * y.sqrt() / (self.alpha * self.gamma.sqrt());
        // i0e is finite for finite arguments
        let bessel = bessel_i0_scaled(arg).unwrap_or(0.0);
        self.d1 / (ag * z * z) * tail * bessel
    }
}

/// `p_Z(z)` for `0 < z <= D1`, using `exp(-(sqrt(c) - sqrt(y/(alpha gamma)))^2) i0e(b)`.
pub fn pz_density(z: f64, inst: &BeamformingInstance) -> Result<f64> {
    if !(z > 0.0 && z <= inst.d1) {
        return Err(Error::param("z", format!("must lie in (0, {}], got {z}", inst.d1)));
    }
    Ok(inst.density_unchecked(z))
}

/// The three expectations in the optimality condition, plus the quadrature
/// normalization of `p_Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BfExpectations {
    pub ez: f64,
    pub ez_expg: f64,
    pub ez2_expg: f64,
    pub normalization: f64,
}

/// `int_0^{D1} h(z) p_Z(z) dz`, split at `D1/10`; the lower piece is mapped
/// by `z = (D1/10) / v`, `v in [1, inf)`, which tames the `e^{-c/z}/z^2` end.
pub(crate) fn expect<F: Fn(f64) -> f64>(inst: &BeamformingInstance, h: F, scale: f64) -> Result<f64> {
    let split = inst.d1 / 10.0;
    let opts = QuadOptions { abs_tol: 1e-14 * scale, rel_tol: 1e-10, max_subdivisions: 4_000 };
    let upper = integrate(|z| h(z) * inst.density_unchecked(z), split, inst.d1, &opts)?;
    let lower = integrate_to_infinity(
        |v| {
            let z = split / v;
            if z <= 0.0 {
                0.0
            } else {
                h(z) * inst.density_unchecked(z) * split / (v * v)
            }
        },
        1.0,
        &opts,
    )?;
    let value = upper.value + lower.value;
    let error = upper.error + lower.error;
    let allowed = (EXPECTATION_REL_TOL * value.abs()).max(1e-13 * scale);
    if error > allowed {
        return Err(Error::Quadrature {
            achieved: error / value.abs().max(f64::MIN_POSITIVE),
            requested: EXPECTATION_REL_TOL,
        });
    }
    Ok(value)
}

fn z_expg(z: f64) -> f64 {
    z * expx_gamma0(z).unwrap_or(0.0)
}

pub fn bf_expectations(inst: &BeamformingInstance) -> Result<BfExpectations> {
    let d1 = inst.d1;
    Ok(BfExpectations {
        ez: expect(inst, |z| z, d1)?,
        ez_expg: expect(inst, z_expg, z_expg(d1))?,
        ez2_expg: expect(inst, |z| z * z_expg(z), d1 * z_expg(d1))?,
        normalization: expect(inst, |_| 1.0, 1.0)?,
    })
}

impl BfExpectations {
    /// `f = E Z + E[Z e^Z E1(Z)] / G - E[Z^2 e^Z E1(Z)] - D2`
    pub fn f_value(&self, inst: &BeamformingInstance) -> f64 {
        self.ez + self.ez_expg / inst.g_relay - self.ez2_expg - inst.d2
    }
}

/// Decision function; beamforming is optimal iff the result is `<= 0`.
pub fn f_gamma(gamma: f64, model: &ChannelMeanModel, g_relay: f64) -> Result<f64> {
    let inst = BeamformingInstance::new(model, &LinkParams::new(gamma, g_relay)?)?;
    Ok(bf_expectations(&inst)?.f_value(&inst))
}

/// Sign-change root of `f` in `gamma`, bisected in `ln gamma` until
/// `|f| <= 1e-6 D1`.
pub fn bf_threshold(model: &ChannelMeanModel, g_relay: f64, bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::param("bracket", format!("[{lo}, {hi}] must satisfy 0 < lo < hi")));
    }
    let eval = |gamma: f64| -> Result<(f64, f64)> {
        let inst = BeamformingInstance::new(model, &LinkParams::new(gamma, g_relay)?)?;
        Ok((bf_expectations(&inst)?.f_value(&inst), inst.d1))
    };
    let (f_lo, _) = eval(lo)?;
    let (f_hi, _) = eval(hi)?;
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let (f, scale) = eval(mid.exp())?;
        if f.abs() <= 1e-6 * scale || (b - a) < 1e-14 {
            return Ok(mid.exp());
        }
        if (f > 0.0) == lo_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Monte Carlo mean and standard error of one expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McValue {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BfMonteCarlo {
    pub ez: McValue,
    pub ez_expg: McValue,
    pub ez2_expg: McValue,
}

/// Sampling oracle for [`bf_expectations`] built on [`BeamformingInstance::sample_z`].
pub fn bf_expectations_mc(inst: &BeamformingInstance, sampling: &Sampling) -> Result<BfMonteCarlo> {
    sampling.validate(MIN_SAMPLES)?;
    let banks = montecarlo::draw_banks(sampling, |rng| inst.sample_z(rng));
    let summarize = |h: &(dyn Fn(f64) -> f64 + Sync)| {
        let acc = montecarlo::average_banks(&banks, |&z| h(z));
        McValue { mean: acc.mean(), std_error: acc.std_error() }
    };
    Ok(BfMonteCarlo {
        ez: summarize(&|z| z),
        ez_expg: summarize(&z_expg),
        ez2_expg: summarize(&|z| z * z_expg(z)),
    })
}
