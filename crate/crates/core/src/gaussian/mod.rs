//! Closed-form algebra over Gaussian-weighted coherent-state dyadics.
//!
//! Phase-space convention: `beta = x + i p`, `int W dx dp = 1`, vacuum
//! `W = (2/pi) exp(-2|beta|^2)`, so a thermal state of variance `V` has
//! x-variance `V/4`. Every formula in this crate uses this convention.

mod channels;
mod integral;
mod state;
mod term;

pub use channels::{add_vacuum_mode, apply_beam_splitter, apply_loss, apply_loss_all, displace, phase_rotate};
pub use integral::{check_convergent, gaussian_integral, ComplexGaussian, Moments};
pub use state::{NormStatus, PhasePoint, StateSum};
pub use term::{
    coherent_dyadic_wigner_kernel, Affine, GaussianDyadicTerm, GaussianMeasure, ModeAmplitudes, QubitDyadic,
    WignerGaussianTerm,
};

/// Wigner value of `state` at `point`.
pub fn wigner_eval(state: &StateSum, point: &PhasePoint) -> crate::Result<f64> {
    state.wigner(point)
}

/// `e^{i phi} - 1` without cancellation for small `phi`.
pub fn expm1_i(phi: f64) -> crate::C64 {
    let h = (0.5 * phi).sin();
    crate::C64::new(-2.0 * h * h, phi.sin())
}
