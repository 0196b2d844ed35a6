//! Constructors for displaced thermal states, their Kerr-generated
//! superpositions, and the two-mode entangled variants.
//!
//! Every constructor builds a real, non-negative displacement `d` in a
//! canonical frame and rotates to `arg(d)` afterwards.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{
    add_vacuum_mode, apply_beam_splitter, expm1_i, phase_rotate, Affine, GaussianDyadicTerm, GaussianMeasure,
    ModeAmplitudes, NormStatus, QubitDyadic, StateSum,
};
use crate::C64;

/// Conditional phase `phi = lambda t` imprinted by the cross-Kerr coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrInteractionSpec {
    phi: f64,
}

impl KerrInteractionSpec {
    pub fn new(phi: f64) -> Result<Self> {
        if !(phi > -2.0 * PI && phi <= 2.0 * PI) {
            return Err(Error::InvalidParameter(format!("phi = {phi} outside (-2pi, 2pi]")));
        }
        Ok(Self { phi })
    }

    /// `phi = pi`, the cat case.
    pub fn cat() -> Self {
        Self { phi: PI }
    }

    pub fn from_coupling(lambda: f64, t: f64) -> Result<Self> {
        Self::new(lambda * t)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "p" => Ok(Sign::Plus),
            "-" | "minus" | "m" => Ok(Sign::Minus),
            other => Err(Error::InvalidParameter(format!("unknown sign '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub sign: Sign,
    pub probability: f64,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `scale * w_index + offset`, or the bare offset for a point measure.
fn amp(measure: &GaussianMeasure, index: usize, scale: C64, offset: C64) -> Affine {
    let r = measure.dim();
    if r == 0 {
        Affine::constant(0, offset)
    } else {
        Affine::single(r, index, scale, offset)
    }
}

fn mode(frame: C64, ket: Affine, bra: Affine) -> ModeAmplitudes {
    ModeAmplitudes { ket, bra, frame }
}

fn sign_weight(sign: Sign) -> C64 {
    C64::new(sign.value(), 0.0).ln()
}

fn check_finite(d: C64) -> Result<()> {
    if d.re.is_finite() && d.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("non-finite displacement {d}")))
    }
}

fn rotate_all(state: StateSum, theta: f64) -> Result<StateSum> {
    if theta == 0.0 {
        return Ok(state);
    }
    (0..state.num_modes()).try_fold(state, |s, m| phase_rotate(&s, m, theta))
}

/// `rho_th(V, d) = int P_th(V, d) |a><a|`, normalized.
pub fn displaced_thermal(v: f64, d: C64) -> Result<StateSum> {
    check_finite(d)?;
    let measure = GaussianMeasure::centered_thermal(v, 1)?;
    let w = amp(&measure, 0, one(), zero());
    let t = GaussianDyadicTerm::in_frames(measure, vec![mode(d, w.clone(), w)], zero(), None);
    StateSum::new(1, false, vec![t])?.normalize()
}

/// Vacuum state of one mode.
pub fn vacuum() -> StateSum {
    displaced_thermal(1.0, zero()).expect("vacuum is valid")
}

/// The four dyadic families `|a><a|`, `|a e^{i phi}><a|`, its adjoint and
/// `|a e^{i phi}><a e^{i phi}|` integrated against `P_th(V, d)` with real
/// `d`, each with its own well-conditioned frame.
fn kerr_dyadics(v: f64, d: f64, phi: f64) -> Result<[GaussianDyadicTerm; 4]> {
    let measure = GaussianMeasure::centered_thermal(v, 1)?;
    let rot = C64::from_polar(1.0, phi);
    let half_shift = 0.5 * d * expm1_i(phi);
    let diag = GaussianDyadicTerm::in_frames(
        measure.clone(),
        vec![mode(C64::new(d, 0.0), amp(&measure, 0, one(), zero()), amp(&measure, 0, one(), zero()))],
        zero(),
        None,
    );
    let rotated = GaussianDyadicTerm::in_frames(
        measure.clone(),
        vec![mode(d * rot, amp(&measure, 0, rot, zero()), amp(&measure, 0, rot, zero()))],
        zero(),
        None,
    );
    let cross = GaussianDyadicTerm::in_frames(
        measure.clone(),
        vec![mode(
            C64::new(d, 0.0) + half_shift,
            amp(&measure, 0, rot, half_shift),
            amp(&measure, 0, one(), -half_shift),
        )],
        zero(),
        None,
    );
    let cross_adj = cross.adjoint();
    Ok([diag, cross, cross_adj, rotated])
}

/// `rho^{sup(+-)} ∝ int P_th {|a><a| +- |a e^{i phi}><a| +- h.c. + |a e^{i phi}><a e^{i phi}|}`,
/// normalized; the raw trace is kept in the norm status.
pub fn thermal_superposition(v: f64, d: C64, kerr: KerrInteractionSpec, sign: Sign) -> Result<StateSum> {
    check_finite(d)?;
    let [diag, mut cross, mut cross_adj, rotated] = kerr_dyadics(v, d.norm(), kerr.phi())?;
    cross.log_weight += sign_weight(sign);
    cross_adj.log_weight += sign_weight(sign);
    let raw = StateSum::new(1, false, vec![diag, cross, cross_adj, rotated])?;
    rotate_all(raw.normalize()?, d.arg())
}

/// Raw four-term sum of [`thermal_superposition`] (trace not divided out).
pub fn thermal_superposition_raw(v: f64, d: C64, kerr: KerrInteractionSpec, sign: Sign) -> Result<StateSum> {
    check_finite(d)?;
    let [diag, mut cross, mut cross_adj, rotated] = kerr_dyadics(v, d.norm(), kerr.phi())?;
    cross.log_weight += sign_weight(sign);
    cross_adj.log_weight += sign_weight(sign);
    rotate_all(StateSum::new(1, false, vec![diag, cross, cross_adj, rotated])?, d.arg())
}

/// Qubit (first phase-space coordinate) entangled with a thermal oscillator
/// after the cross-Kerr interaction:
/// `1/2 int P_th {|0><0|(x)|a><a| + |1><0|(x)|a e^{i phi}><a| + h.c. + |1><1|(x)|a e^{i phi}><a e^{i phi}|}`.
pub fn micro_macro_entangled(v: f64, d: C64, kerr: KerrInteractionSpec) -> Result<StateSum> {
    check_finite(d)?;
    let [diag, cross, cross_adj, rotated] = kerr_dyadics(v, d.norm(), kerr.phi())?;
    let tag = |mut t: GaussianDyadicTerm, ket: u8, bra: u8| {
        t.qubit = Some(QubitDyadic { ket, bra });
        t.log_weight += C64::new(0.5f64.ln(), 0.0);
        t
    };
    let terms = vec![
        tag(diag, 0, 0),
        tag(cross, 1, 0),
        tag(cross_adj, 0, 1),
        tag(rotated, 1, 1),
    ];
    rotate_all(StateSum::new(1, true, terms)?.normalize()?, d.arg())
}

/// Projects the qubit onto `(|0> +- |1>)/sqrt 2`. Returns the normalized
/// oscillator state and the outcome probability (the projected raw trace).
pub fn measure_qubit_superposed_basis(state: &StateSum, sign: Sign) -> Result<(StateSum, MeasurementOutcome)> {
    let s = sign.value();
    let projected = state.contract_qubit(|j, k| 0.5 * s.powi(i32::from(j) + i32::from(k)))?;
    let probability = projected.trace()?;
    let reduced = projected.normalize()?;
    Ok((reduced, MeasurementOutcome { sign, probability }))
}

/// Traces out the qubit.
pub fn trace_qubit(state: &StateSum) -> Result<StateSum> {
    state.contract_qubit(|j, k| if j == k { 1.0 } else { 0.0 })
}

/// Probability of each outcome of [`measure_qubit_superposed_basis`] applied
/// to [`micro_macro_entangled`], from the raw superposition trace.
pub fn success_probability(v: f64, d: C64, kerr: KerrInteractionSpec, sign: Sign) -> Result<f64> {
    Ok(thermal_superposition_raw(v, d, kerr, sign)?.trace()? / 4.0)
}

/// `rho^{tm(+-)} ∝ rho_th(d)(x)rho_th(d) +- s(d)(x)s(d) +- s(-d)(x)s(-d) + rho_th(-d)(x)rho_th(-d)`
/// with `s(V, d) = int P_th(V, d) |-a><a|`; each mode has its own thermal variable.
pub fn two_mode_thermal_entangled(v: f64, d: C64, sign: Sign) -> Result<StateSum> {
    check_finite(d)?;
    let dr = d.norm();
    let measure = GaussianMeasure::centered_thermal(v, 2)?;
    let w = |j: usize, scale: f64, offset: f64| amp(&measure, j, C64::new(scale, 0.0), C64::new(offset, 0.0));
    let lobe = |centre: f64| {
        GaussianDyadicTerm::in_frames(
            measure.clone(),
            (0..2)
                .map(|j| mode(C64::new(centre, 0.0), w(j, 1.0, 0.0), w(j, 1.0, 0.0)))
                .collect(),
            zero(),
            None,
        )
    };
    let mut sigma = GaussianDyadicTerm::in_frames(
        measure.clone(),
        (0..2).map(|j| mode(zero(), w(j, -1.0, -dr), w(j, 1.0, dr))).collect(),
        sign_weight(sign),
        None,
    );
    let sigma_adj = sigma.adjoint();
    sigma.log_weight += zero();
    let terms = vec![lobe(dr), sigma, sigma_adj, lobe(-dr)];
    rotate_all(StateSum::new(2, false, terms)?.normalize()?, d.arg())
}

/// Thermal superposition sent through a beam splitter with a vacuum ancilla.
pub fn bs_split_superposition(
    v: f64,
    d: C64,
    kerr: KerrInteractionSpec,
    sign: Sign,
    transmittance: f64,
) -> Result<StateSum> {
    let single = thermal_superposition(v, d, kerr, sign)?;
    let two = add_vacuum_mode(&single)?;
    apply_beam_splitter(&two, 0, 1, transmittance)
}

/// `(|a> +- |-a>)/norm`, the `V = 1` case at `phi = pi`.
pub fn pure_cat(alpha: C64, sign: Sign) -> Result<StateSum> {
    thermal_superposition(1.0, alpha, KerrInteractionSpec::cat(), sign)
}

/// `a (x) b` for states without qubits, or with a qubit in `a` only.
pub fn tensor_product(a: &StateSum, b: &StateSum) -> Result<StateSum> {
    if b.has_qubit() {
        return Err(Error::HasQubit);
    }
    let mut terms = Vec::new();
    for ta in a.terms() {
        for tb in b.terms() {
            let (ra, rb) = (ta.measure.dim(), tb.measure.dim());
            let r = ra + rb;
            let mut p = DMatrix::zeros(r, r);
            p.view_mut((0, 0), (ra, ra)).copy_from(&ta.measure.p);
            p.view_mut((ra, ra), (rb, rb)).copy_from(&tb.measure.p);
            let s = DVector::from_iterator(r, ta.measure.s.iter().chain(tb.measure.s.iter()).cloned());
            let t = DVector::from_iterator(r, ta.measure.t.iter().chain(tb.measure.t.iter()).cloned());
            let measure = GaussianMeasure {
                p,
                s,
                t,
                log_norm: ta.measure.log_norm + tb.measure.log_norm,
            };
            let pad = |aff: &Affine, before: usize, after: usize| Affine {
                coeffs: std::iter::repeat_n(zero(), before)
                    .chain(aff.coeffs.iter().cloned())
                    .chain(std::iter::repeat_n(zero(), after))
                    .collect(),
                offset: aff.offset,
            };
            let mut modes: Vec<ModeAmplitudes> = ta
                .modes
                .iter()
                .map(|m| mode(m.frame, pad(&m.ket, 0, rb), pad(&m.bra, 0, rb)))
                .collect();
            modes.extend(tb.modes.iter().map(|m| mode(m.frame, pad(&m.ket, ra, 0), pad(&m.bra, ra, 0))));
            terms.push(GaussianDyadicTerm {
                measure,
                modes,
                log_weight: ta.log_weight + tb.log_weight,
                qubit: ta.qubit,
            });
        }
    }
    StateSum::new(a.num_modes() + b.num_modes(), a.has_qubit(), terms)
}

/// Raw trace recorded when a constructor normalized the state.
pub fn recorded_raw_trace(state: &StateSum) -> Option<f64> {
    match state.norm_status() {
        NormStatus::Normalized { constant } => Some(constant),
        NormStatus::Raw => None,
    }
}
