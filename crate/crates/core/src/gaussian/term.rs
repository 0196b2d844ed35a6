//! Gaussian-weighted coherent-state dyadics and their compilation to
//! closed-form Wigner Gaussians.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use super::integral::{check_convergent, ComplexGaussian};
use crate::error::{Error, Result};
use crate::C64;

/// Wigner function of the dyadic `|mu><nu|` at `beta`:
/// `(2/pi) exp(-2(beta-mu)(conj(beta)-conj(nu)) + mu conj(nu) - |mu|^2/2 - |nu|^2/2)`.
pub fn coherent_dyadic_wigner_kernel(mu: C64, nu: C64, beta: C64) -> C64 {
    let e = -2.0 * (beta - mu) * (beta - nu).conj() + mu * nu.conj()
        - 0.5 * mu.norm_sqr()
        - 0.5 * nu.norm_sqr();
    (2.0 / PI) * e.exp()
}

/// Affine map `z -> coeffs . z + offset` over the integration variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub coeffs: Vec<C64>,
    pub offset: C64,
}

impl Affine {
    pub fn constant(dim: usize, offset: C64) -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0); dim],
            offset,
        }
    }

    /// `scale * z_index + offset`.
    pub fn single(dim: usize, index: usize, scale: C64, offset: C64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        coeffs[index] = scale;
        Self { coeffs, offset }
    }

    pub fn scaled(&self, k: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            offset: self.offset * k,
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &Affine, b: C64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            offset: a * self.offset + b * other.offset,
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.coeffs.iter().zip(z).map(|(c, v)| c * v).sum::<C64>() + self.offset
    }

    fn approx_eq(&self, other: &Affine, tol: f64) -> bool {
        let scale = 1.0 + self.offset.norm().max(other.offset.norm());
        (self.offset - other.offset).norm() <= tol * scale
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a - b).norm() <= tol * (1.0 + a.norm()))
    }
}

/// Gaussian weight `exp(-z^H P z + s.z + t.conj(z) + log_norm)` over `dim`
/// complex variables. `dim = 0` is a point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    pub p: DMatrix<C64>,
    pub s: DVector<C64>,
    pub t: DVector<C64>,
    pub log_norm: C64,
}

impl GaussianMeasure {
    pub fn point() -> Self {
        Self {
            p: DMatrix::zeros(0, 0),
            s: DVector::zeros(0),
            t: DVector::zeros(0),
            log_norm: C64::new(0.0, 0.0),
        }
    }

    /// Product of `dim` independent centered thermal weights
    /// `2/(pi (V-1)) exp(-2|w|^2/(V-1))`. `V = 1` gives a point mass.
    pub fn centered_thermal(v: f64, dim: usize) -> Result<Self> {
        if !(v >= 1.0) || !v.is_finite() {
            return Err(Error::BadVariance(v));
        }
        if v == 1.0 {
            return Ok(Self::point());
        }
        let p = 2.0 / (v - 1.0);
        Ok(Self {
            p: DMatrix::from_diagonal_element(dim, dim, C64::new(p, 0.0)),
            s: DVector::zeros(dim),
            t: DVector::zeros(dim),
            log_norm: C64::new(dim as f64 * (p / PI).ln(), 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Ok(());
        }
        check_convergent(&self.p)
    }

    fn adjoint(&self) -> Self {
        Self {
            p: self.p.adjoint(),
            s: self.t.map(|v| v.conj()),
            t: self.s.map(|v| v.conj()),
            log_norm: self.log_norm.conj(),
        }
    }
}

/// Qubit dyadic `|ket><bra|` attached to a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QubitDyadic {
    pub ket: u8,
    pub bra: u8,
}

impl QubitDyadic {
    /// Wigner kernel of `|ket><bra|` for basis states `|0>`, `|1>`.
    pub fn kernel(&self, alpha: C64) -> C64 {
        let base = (2.0 / PI) * (-2.0 * alpha.norm_sqr()).exp();
        let poly = match (self.ket, self.bra) {
            (0, 0) => C64::new(1.0, 0.0),
            (1, 1) => C64::new(4.0 * alpha.norm_sqr() - 1.0, 0.0),
            (1, 0) => 2.0 * alpha.conj(),
            (0, 1) => 2.0 * alpha,
            _ => unreachable!("qubit labels are 0 or 1"),
        };
        base * poly
    }

    pub fn trace(&self) -> f64 {
        if self.ket == self.bra {
            1.0
        } else {
            0.0
        }
    }
}

/// Ket and bra amplitudes of one mode, relative to a displacement frame:
/// the mode operator is `D(frame) |ket(z)><bra(z)| D(frame)^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub ket: Affine,
    pub bra: Affine,
    pub frame: C64,
}

/// `int d^2z  measure(z) e^{log_weight}  (x)_m D(c_m)|mu_m(z)><nu_m(z)|D(c_m)^dag`,
/// optionally tensored with a qubit dyadic.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDyadicTerm {
    pub measure: GaussianMeasure,
    pub modes: Vec<ModeAmplitudes>,
    pub log_weight: C64,
    pub qubit: Option<QubitDyadic>,
}

impl GaussianDyadicTerm {
    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Builds a term from amplitudes given relative to per-mode frames.
    ///
    /// The caller describes `|c + ket(z)><c + bra(z)|`; the displacement
    /// phase `i Im(conj(c) (ket - bra))` picked up when moving into the frame
    /// is folded into the measure. Local offsets should be computed without
    /// cancellation; this is where large-amplitude precision is kept.
    pub fn in_frames(
        measure: GaussianMeasure,
        modes: Vec<ModeAmplitudes>,
        log_weight: C64,
        qubit: Option<QubitDyadic>,
    ) -> Self {
        let mut term = Self {
            measure,
            modes,
            log_weight,
            qubit,
        };
        let r = term.measure.dim();
        for m in 0..term.modes.len() {
            let c = term.modes[m].frame;
            let ket = &term.modes[m].ket;
            let bra = &term.modes[m].bra;
            let diff = ket.combine(C64::new(1.0, 0.0), bra, C64::new(-1.0, 0.0));
            for k in 0..r {
                term.measure.s[k] += 0.5 * c.conj() * diff.coeffs[k];
                term.measure.t[k] -= 0.5 * c * diff.coeffs[k].conj();
            }
            term.log_weight += C64::new(0.0, (c.conj() * diff.offset).im);
        }
        term
    }

    pub fn adjoint(&self) -> Self {
        Self {
            measure: self.measure.adjoint(),
            modes: self
                .modes
                .iter()
                .map(|m| ModeAmplitudes {
                    ket: m.bra.clone(),
                    bra: m.ket.clone(),
                    frame: m.frame,
                })
                .collect(),
            log_weight: self.log_weight.conj(),
            qubit: self.qubit.map(|q| QubitDyadic {
                ket: q.bra,
                bra: q.ket,
            }),
        }
    }

    /// Structural equality up to a relative tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()));
        if self.qubit != other.qubit
            || self.modes.len() != other.modes.len()
            || self.measure.dim() != other.measure.dim()
        {
            return false;
        }
        let (la, lb) = (self.log_weight + self.measure.log_norm, other.log_weight + other.measure.log_norm);
        let dphase = (la.im - lb.im + PI).rem_euclid(2.0 * PI) - PI;
        if (la.re - lb.re).abs() > tol * (1.0 + la.re.abs().max(lb.re.abs())) || dphase.abs() > tol * (1.0 + la.im.abs()) {
            return false;
        }
        let m = &self.measure;
        let o = &other.measure;
        if !m.p.iter().zip(o.p.iter()).all(|(a, b)| close(*a, *b))
            || !m.s.iter().zip(o.s.iter()).all(|(a, b)| close(*a, *b))
            || !m.t.iter().zip(o.t.iter()).all(|(a, b)| close(*a, *b))
        {
            return false;
        }
        self.modes.iter().zip(&other.modes).all(|(a, b)| {
            close(a.frame, b.frame) && a.ket.approx_eq(&b.ket, tol) && a.bra.approx_eq(&b.bra, tol)
        })
    }

    /// Whether every mode has identical ket and bra amplitudes.
    pub fn is_diagonal(&self) -> bool {
        self.modes.iter().all(|m| m.ket == m.bra) && self.qubit.is_none_or(|q| q.ket == q.bra)
    }

    /// Performs the measure integral in closed form.
    pub fn compile(&self) -> Result<WignerGaussianTerm> {
        let r = self.measure.dim();
        let nm = self.modes.len();
        let n = r + nm;
        let mut g = ComplexGaussian::zeros(n);
        g.log_const = self.log_weight + self.measure.log_norm;
        for j in 0..r {
            for k in 0..r {
                g.quad[(j, k)] += self.measure.p[(j, k)];
            }
            g.holo[j] += self.measure.s[j];
            g.anti[j] += self.measure.t[j];
        }
        let ln_two_over_pi = C64::new((2.0 / PI).ln(), 0.0);
        for (m, amp) in self.modes.iter().enumerate() {
            let (u, a) = (&amp.ket.coeffs, amp.ket.offset);
            let (v, b) = (&amp.bra.coeffs, amp.bra.offset);
            let bi = r + m;
            // -2 beta conj(beta)
            g.quad[(bi, bi)] += 2.0;
            // 2 beta conj(nu)
            for j in 0..r {
                g.quad[(j, bi)] -= 2.0 * v[j].conj();
            }
            g.holo[bi] += 2.0 * b.conj();
            // 2 mu conj(beta)
            for k in 0..r {
                g.quad[(bi, k)] -= 2.0 * u[k];
            }
            g.anti[bi] += 2.0 * a;
            // -mu conj(nu) - |mu|^2/2 - |nu|^2/2
            for j in 0..r {
                for k in 0..r {
                    g.quad[(j, k)] += v[j].conj() * u[k] + 0.5 * u[j].conj() * u[k] + 0.5 * v[j].conj() * v[k];
                }
            }
            for k in 0..r {
                g.holo[k] -= b.conj() * u[k] + 0.5 * a.conj() * u[k] + 0.5 * b.conj() * v[k];
                g.anti[k] -= a * v[k].conj() + 0.5 * a * u[k].conj() + 0.5 * b * v[k].conj();
            }
            g.log_const += ln_two_over_pi - a * b.conj() - 0.5 * a.norm_sqr() - 0.5 * b.norm_sqr();
        }
        let gaussian = g.integrate_leading(r)?;
        check_convergent(&gaussian.quad)?;
        Ok(WignerGaussianTerm {
            gaussian,
            frames: self.modes.iter().map(|m| m.frame).collect(),
            qubit: self.qubit,
            diagonal: self.is_diagonal(),
        })
    }
}

/// Compiled, integration-free Wigner function of one term: a complex Gaussian
/// in the frame-relative phase-space variables, times the qubit kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGaussianTerm {
    pub gaussian: ComplexGaussian,
    pub frames: Vec<C64>,
    pub qubit: Option<QubitDyadic>,
    pub diagonal: bool,
}

impl WignerGaussianTerm {
    pub fn num_modes(&self) -> usize {
        self.frames.len()
    }

    /// Value at oscillator phase point `beta` (and qubit point `alpha`).
    #[inline]
    pub fn eval(&self, alpha: Option<C64>, beta: &[C64]) -> C64 {
        let mut local = [C64::new(0.0, 0.0); 8];
        let n = beta.len();
        let local = if n <= 8 {
            for m in 0..n {
                local[m] = beta[m] - self.frames[m];
            }
            &local[..n]
        } else {
            unreachable!("at most eight oscillator modes")
        };
        let osc = self.gaussian.log_eval(local).exp();
        match (self.qubit, alpha) {
            (Some(q), Some(a)) => osc * q.kernel(a),
            _ => osc,
        }
    }

    /// Log of the full phase-space integral, qubit traced.
    pub fn log_trace(&self) -> Result<Option<C64>> {
        if self.qubit.is_some_and(|q| q.trace() == 0.0) {
            return Ok(None);
        }
        self.gaussian.log_integral().map(Some)
    }

    /// Gaussian in frame-relative coordinates of `self`, for `other`.
    pub fn other_in_my_frame(&self, other: &WignerGaussianTerm) -> ComplexGaussian {
        let delta: Vec<C64> = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a - b)
            .collect();
        other.gaussian.translated(&delta)
    }
}
