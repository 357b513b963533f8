//! Special functions and noncentral chi-square(2) kernels.
//!
//! Everything that can overflow is evaluated in scaled form:
//! `e^{-x} I0(x)` and `e^{x} E1(x)` are the primitives, never the raw
//! Bessel or exponential-integral values at large argument.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::channel::complex_normal;
use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_EPS: f64 = 1e-17;
const I0_SERIES_MAX: f64 = 20.0;
const E1_SERIES_MAX: f64 = 1.0;
const E1_ASYMPTOTIC_MIN: f64 = 500.0;
const SIMPLEX_TOL: f64 = 1e-12;

/// `e^{-x} I0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::param("x", format!("must be >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= I0_SERIES_MAX {
        // sum (x/2)^{2k} / (k!)^2, all terms positive
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > SERIES_EPS * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        Ok(sum * (-x).exp())
    } else {
        // Hankel expansion: sum_k ((2k-1)!!)^2 / (k! 8^k x^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < SERIES_EPS * sum {
                break;
            }
        }
        Ok(sum / (2.0 * PI * x).sqrt())
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::param("x", format!("must be > 0, got {x}")))
    }
}

/// `E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)`, for small `x`.
fn e1_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < SERIES_EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `e^x E1(x)` by the modified Lentz continued fraction; valid for `x > 1`.
fn expx_e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `e^x E1(x) ~ sum_k (-1)^k k! / x^{k+1}` for large `x`.
fn expx_e1_asymptotic(x: f64) -> f64 {
    let mut term = 1.0 / x;
    let mut sum = term;
    for k in 1..40 {
        let next = -term * k as f64 / x;
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < SERIES_EPS * sum {
            break;
        }
    }
    sum
}

/// Complementary incomplete gamma `Gamma(0, x)`, i.e. the exponential integral `E1(x)`.
pub fn gamma0(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x <= E1_SERIES_MAX {
        Ok(e1_series(x))
    } else {
        Ok(expx_gamma0(x)? * (-x).exp())
    }
}

/// `e^x Gamma(0, x)` without forming either factor at large `x`.
pub fn expx_gamma0(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= E1_SERIES_MAX {
        x.exp() * e1_series(x)
    } else if x <= E1_ASYMPTOTIC_MIN {
        expx_e1_continued_fraction(x)
    } else {
        expx_e1_asymptotic(x)
    })
}

/// `|g + sqrt(c)|^2` with `g ~ CN(0, 1)`: noncentral chi-square with two
/// degrees of freedom (unit-variance complex convention), mean `1 + c`.
pub fn sample_ncx2<R: Rng + ?Sized>(noncentrality: f64, rng: &mut R) -> f64 {
    let g = complex_normal(rng);
    let re = g.re + noncentrality.sqrt();
    re * re + g.im * g.im
}

/// Convex combination `W = sum_i w_i X_i` of independent noncentral
/// chi-square(2) variables `X_i` with noncentralities `c_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    noncentralities: Vec<f64>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, noncentralities: Vec<f64>) -> Result<Self> {
        if weights.len() != noncentralities.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: noncentralities.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::param("weights", "empty mixture"));
        }
        if weights.iter().chain(&noncentralities).any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::param("weights", "entries must be finite and >= 0"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::param("weights", format!("must sum to 1, got {total}")));
        }
        Ok(MixtureSpec {
            weights,
            noncentralities,
        })
    }

    /// `(phi, (1-phi)/(M-1), ...)` weights with all noncentrality on the
    /// first, beam-aligned component.
    pub fn beam_aligned(phi: f64, m: usize, noncentrality: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::param("m", "need at least two components"));
        }
        let rest = (1.0 - phi) / (m - 1) as f64;
        let mut weights = vec![rest; m];
        weights[0] = phi;
        let mut nonc = vec![0.0; m];
        nonc[0] = noncentrality;
        MixtureSpec::new(weights, nonc)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn noncentralities(&self) -> &[f64] {
        &self.noncentralities
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.noncentralities)
            .map(|(w, c)| w * (1.0 + c))
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.weights
            .iter()
            .zip(&self.noncentralities)
            .map(|(&w, &c)| w * sample_ncx2(c, rng))
            .sum()
    }
}

/// `log E[e^{-sW}] = -sum_i [ln(1 + w_i s) + w_i c_i s / (1 + w_i s)]`.
pub fn log_mgf_mixture(spec: &MixtureSpec, s: f64) -> Result<f64> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::param("s", format!("must be > 0, got {s}")));
    }
    Ok(-spec
        .weights
        .iter()
        .zip(&spec.noncentralities)
        .map(|(&w, &c)| {
            let ws = w * s;
            ws.ln_1p() + c * ws / (1.0 + ws)
        })
        .sum::<f64>())
}

/// Laplace transform `E[e^{-sW}]` of the mixture, in `(0, 1]`.
pub fn mgf_mixture(spec: &MixtureSpec, s: f64) -> Result<f64> {
    log_mgf_mixture(spec, s).map(f64::exp)
}
