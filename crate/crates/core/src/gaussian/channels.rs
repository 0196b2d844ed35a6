//! Exact channels on [`StateSum`]: every map acts on the affine amplitudes
//! and frames of each term and stays inside the Gaussian exponent class.

use super::state::StateSum;
use super::term::{Affine, GaussianDyadicTerm, ModeAmplitudes};
use crate::error::{Error, Result};
use crate::C64;

fn check_mode(state: &StateSum, mode: usize) -> Result<()> {
    if mode >= state.num_modes() {
        return Err(Error::BadMode {
            index: mode,
            num_modes: state.num_modes(),
        });
    }
    Ok(())
}

/// Appends a vacuum mode.
pub fn add_vacuum_mode(state: &StateSum) -> Result<StateSum> {
    state.map_terms(state.num_modes() + 1, |t| {
        let r = t.measure.dim();
        let mut t = t.clone();
        t.modes.push(ModeAmplitudes {
            ket: Affine::constant(r, C64::new(0.0, 0.0)),
            bra: Affine::constant(r, C64::new(0.0, 0.0)),
            frame: C64::new(0.0, 0.0),
        });
        Ok(t)
    })
}

/// Beam splitter with `(mu_i, mu_j) -> (sqrt(T) mu_i + sqrt(1-T) mu_j,
/// -sqrt(1-T) mu_i + sqrt(T) mu_j)` on coherent amplitudes.
pub fn apply_beam_splitter(
    state: &StateSum,
    mode_i: usize,
    mode_j: usize,
    transmittance: f64,
) -> Result<StateSum> {
    check_mode(state, mode_i)?;
    check_mode(state, mode_j)?;
    if mode_i == mode_j {
        return Err(Error::SameMode(mode_i));
    }
    if !(0.0..=1.0).contains(&transmittance) {
        return Err(Error::BadTransmittance(transmittance));
    }
    let ct = C64::new(transmittance.sqrt(), 0.0);
    let cr = C64::new((1.0 - transmittance).sqrt(), 0.0);
    state.map_terms(state.num_modes(), |t| {
        let mut t = t.clone();
        let (a, b) = (t.modes[mode_i].clone(), t.modes[mode_j].clone());
        t.modes[mode_i] = ModeAmplitudes {
            ket: a.ket.combine(ct, &b.ket, cr),
            bra: a.bra.combine(ct, &b.bra, cr),
            frame: ct * a.frame + cr * b.frame,
        };
        t.modes[mode_j] = ModeAmplitudes {
            ket: a.ket.combine(-cr, &b.ket, ct),
            bra: a.bra.combine(-cr, &b.bra, ct),
            frame: -cr * a.frame + ct * b.frame,
        };
        Ok(t)
    })
}

fn lossy_term(t: &GaussianDyadicTerm, mode: usize, eta: f64) -> GaussianDyadicTerm {
    let mut t = t.clone();
    let r = t.measure.dim();
    let k = 1.0 - eta;
    let amp = &t.modes[mode];
    let (u, a) = (amp.ket.coeffs.clone(), amp.ket.offset);
    let (v, b) = (amp.bra.coeffs.clone(), amp.bra.offset);
    // exp(-(1-eta) (|mu|^2/2 + |nu|^2/2 - mu conj(nu))), with mu, nu affine in z
    for j in 0..r {
        for kk in 0..r {
            t.measure.p[(j, kk)] +=
                k * (0.5 * u[j].conj() * u[kk] + 0.5 * v[j].conj() * v[kk] - v[j].conj() * u[kk]);
        }
    }
    for kk in 0..r {
        t.measure.s[kk] -= k * (0.5 * a.conj() * u[kk] + 0.5 * b.conj() * v[kk] - b.conj() * u[kk]);
        t.measure.t[kk] -= k * (0.5 * a * u[kk].conj() + 0.5 * b * v[kk].conj() - a * v[kk].conj());
    }
    t.log_weight -= k * (0.5 * a.norm_sqr() + 0.5 * b.norm_sqr() - a * b.conj());
    let s = C64::new(eta.sqrt(), 0.0);
    let amp = &mut t.modes[mode];
    amp.ket = amp.ket.scaled(s);
    amp.bra = amp.bra.scaled(s);
    amp.frame *= s;
    t
}

/// Amplitude damping for time `gamma_t` on one mode:
/// `|a><b| -> exp(-(1-e^{-gt})((|a|^2+|b|^2)/2 - a b*)) |e^{-gt/2} a><e^{-gt/2} b|`.
pub fn apply_loss(state: &StateSum, mode: usize, gamma_t: f64) -> Result<StateSum> {
    check_mode(state, mode)?;
    if !(gamma_t >= 0.0) {
        return Err(Error::NegativeTime(gamma_t));
    }
    if gamma_t == 0.0 {
        return Ok(state.clone());
    }
    let eta = (-gamma_t).exp();
    state.map_terms(state.num_modes(), |t| Ok(lossy_term(t, mode, eta)))
}

/// Loss with the same `gamma_t` on every oscillator mode.
pub fn apply_loss_all(state: &StateSum, gamma_t: f64) -> Result<StateSum> {
    let mut s = state.clone();
    for m in 0..state.num_modes() {
        s = apply_loss(&s, m, gamma_t)?;
    }
    Ok(s)
}

/// `D(delta) rho D(delta)^dag` on one mode.
pub fn displace(state: &StateSum, mode: usize, delta: C64) -> Result<StateSum> {
    check_mode(state, mode)?;
    state.map_terms(state.num_modes(), |t| {
        let mut t = t.clone();
        t.modes[mode].frame += delta;
        Ok(t)
    })
}

/// `e^{i theta n} rho e^{-i theta n}` on one mode.
pub fn phase_rotate(state: &StateSum, mode: usize, theta: f64) -> Result<StateSum> {
    check_mode(state, mode)?;
    let rot = C64::from_polar(1.0, theta);
    state.map_terms(state.num_modes(), |t| {
        let mut t = t.clone();
        let amp = &mut t.modes[mode];
        amp.ket = amp.ket.scaled(rot);
        amp.bra = amp.bra.scaled(rot);
        amp.frame *= rot;
        Ok(t)
    })
}
