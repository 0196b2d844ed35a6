//! Closed-form expressions for the Wigner functions, cross-term
//! coefficients, success probabilities and the temperature relation.
//!
//! These are a second, independent evaluation path. The only numerical
//! liberty taken is that `1 - e^{i phi}` is formed without cancellation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::expm1_i;
use crate::states::Sign;
use crate::C64;

/// `K` and `J` of the thermal cross term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTermCoeffs {
    pub k: C64,
    pub j: C64,
}

/// `1 - e^{i phi}`.
fn kappa(phi: f64) -> C64 {
    -expm1_i(phi)
}

pub fn coeffs(v: f64, phi: f64) -> CrossTermCoeffs {
    let k = C64::new(2.0, 0.0) + (v - 1.0) * kappa(phi);
    let (s, c) = ((phi / 2.0).sin(), (phi / 2.0).cos());
    let j = C64::new(s, v * c) / C64::new(2.0 * v * s, 2.0 * c);
    CrossTermCoeffs { k, j }
}

/// Displaced thermal Wigner function `2/(pi V) exp(-2|beta - d|^2 / V)`.
pub fn wth(beta: C64, v: f64, d: C64) -> f64 {
    2.0 / (PI * v) * (-2.0 * (beta - d).norm_sqr() / v).exp()
}

/// Cross-term Wigner function for real `d`.
pub fn vc(beta: C64, v: f64, d: f64, phi: f64) -> C64 {
    let CrossTermCoeffs { k, j } = coeffs(v, phi);
    let rot = C64::from_polar(1.0, phi);
    let exponent = -(2.0 / k) * kappa(phi) * d * d - (beta - 2.0 * rot * d / k) * (beta.conj() - 2.0 * d / k) / j;
    (C64::new((2.0 / PI).ln(), 0.0) - (j * k).ln() + exponent).exp()
}

/// Qubit-oscillator Wigner function in the closed form that weights the
/// cross term by `2 alpha`. The constructed state carries `2 conj(alpha)`
/// there, so the two agree on the real qubit axis and are mirror images
/// in the qubit plane otherwise.
pub fn wigner_ent_ref(alpha: C64, beta: C64, v: f64, d: f64, phi: f64) -> f64 {
    let c = vc(beta, v, d, phi);
    let rot = C64::from_polar(d, phi);
    let braces = C64::new(wth(beta, v, C64::new(d, 0.0)), 0.0)
        + 2.0 * alpha * c
        + 2.0 * (alpha * c).conj()
        + (4.0 * alpha.norm_sqr() - 1.0) * wth(beta, v, rot);
    (1.0 / PI * (-2.0 * alpha.norm_sqr()).exp() * braces).re
}

/// `Re[(2/K) exp(-2 (1 - e^{i phi}) d^2 / K)]`, the trace of the cross
/// operator `int P_th |a e^{i phi}><a|`.
pub fn cross_trace(v: f64, d: f64, phi: f64) -> f64 {
    let k = coeffs(v, phi).k;
    (2.0 / k * (-2.0 * kappa(phi) * d * d / k).exp()).re
}

/// Trace of the unnormalized four-term superposition.
pub fn superposition_raw_trace(v: f64, d: f64, phi: f64, sign: Sign) -> f64 {
    2.0 + 2.0 * sign.value() * cross_trace(v, d, phi)
}

/// Normalized superposition Wigner function.
pub fn wigner_sup_ref(beta: C64, v: f64, d: f64, phi: f64, sign: Sign) -> Result<f64> {
    let raw = superposition_raw_trace(v, d, phi, sign);
    if raw.abs() < 1e-12 * (2.0 + 2.0 * cross_trace(v, d, phi).abs()) {
        return Err(Error::ZeroTrace { trace: raw });
    }
    let s = sign.value();
    let c = vc(beta, v, d, phi);
    let braces = wth(beta, v, C64::new(d, 0.0)) + s * c.re + s * c.conj().re + wth(beta, v, C64::from_polar(d, phi));
    Ok(braces / raw)
}

/// Short form `P+- = (1 +- exp(-2 d^2 / V)) / 2`; returned as `(P+, P-)`.
/// Agrees with [`success_probability_trace`] only at `V = 1`.
pub fn success_probability_closed(v: f64, d: f64) -> (f64, f64) {
    let e = (-2.0 * d * d / v).exp();
    ((1.0 + e) / 2.0, (1.0 - e) / 2.0)
}

/// Success probabilities from the trace of the projected state,
/// `(1 +- Re[(2/K) exp(-2 (1 - e^{i phi}) d^2/K)]) / 2`; returned as `(P+, P-)`.
pub fn success_probability_trace(v: f64, d: f64, phi: f64) -> (f64, f64) {
    let c = cross_trace(v, d, phi);
    ((1.0 + c) / 2.0, (1.0 - c) / 2.0)
}

/// Temperature in units of `h nu` from `e^{h nu / tau} = (V+1)/(V-1)`.
pub fn temperature_of_variance(v: f64) -> Result<f64> {
    if !(v >= 1.0) {
        return Err(Error::BadVariance(v));
    }
    if v == 1.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (2.0 / (v - 1.0)).ln_1p())
}
