use std::f64::consts::PI;

use super::integral::ComplexGaussian;
use super::term::{GaussianDyadicTerm, QubitDyadic, WignerGaussianTerm};
use crate::error::{Error, Result};
use crate::C64;

const ADJOINT_TOL: f64 = 1e-10;

/// Per-mode complex phase-space point. For qubit-tagged states the qubit
/// coordinate comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint(pub Vec<C64>);

impl PhasePoint {
    pub fn new(coords: Vec<C64>) -> Self {
        assert!(
            coords.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "phase point components must be finite"
        );
        Self(coords)
    }

    pub fn single(beta: C64) -> Self {
        Self::new(vec![beta])
    }

    pub fn pair(a: C64, b: C64) -> Self {
        Self::new(vec![a, b])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormStatus {
    Raw,
    /// Weights were divided by `constant` (the raw trace).
    Normalized { constant: f64 },
}

/// Finite sum of Gaussian dyadic terms over `num_modes` oscillator modes,
/// optionally tensored with a qubit. Immutable; compiled on construction.
#[derive(Debug, Clone)]
pub struct StateSum {
    num_modes: usize,
    has_qubit: bool,
    terms: Vec<GaussianDyadicTerm>,
    compiled: Vec<WignerGaussianTerm>,
    norm_status: NormStatus,
}

impl StateSum {
    /// Checks adjoint pairing and compiles every term.
    pub fn new(num_modes: usize, has_qubit: bool, terms: Vec<GaussianDyadicTerm>) -> Result<Self> {
        Self::build(num_modes, has_qubit, terms, NormStatus::Raw)
    }

    fn build(
        num_modes: usize,
        has_qubit: bool,
        terms: Vec<GaussianDyadicTerm>,
        norm_status: NormStatus,
    ) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.num_modes() != num_modes {
                return Err(Error::BadMode {
                    index: t.num_modes(),
                    num_modes,
                });
            }
            if t.qubit.is_some() != has_qubit {
                return Err(if has_qubit { Error::NoQubit } else { Error::HasQubit });
            }
            t.measure.validate()?;
            let adj = t.adjoint();
            if !terms.iter().any(|o| o.approx_eq(&adj, ADJOINT_TOL)) {
                return Err(Error::NotHermitian(i));
            }
        }
        let compiled = terms.iter().map(|t| t.compile()).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            num_modes,
            has_qubit,
            terms,
            compiled,
            norm_status,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn has_qubit(&self) -> bool {
        self.has_qubit
    }

    /// Number of phase-space coordinates a [`PhasePoint`] must carry.
    pub fn phase_space_dim(&self) -> usize {
        self.num_modes + usize::from(self.has_qubit)
    }

    pub fn terms(&self) -> &[GaussianDyadicTerm] {
        &self.terms
    }

    pub fn compiled(&self) -> &[WignerGaussianTerm] {
        &self.compiled
    }

    pub fn norm_status(&self) -> NormStatus {
        self.norm_status
    }

    /// Terms carrying the qubit dyadic `|ket><bra|`.
    pub fn qubit_block(&self, ket: u8, bra: u8) -> Vec<&GaussianDyadicTerm> {
        self.terms
            .iter()
            .filter(|t| t.qubit == Some(QubitDyadic { ket, bra }))
            .collect()
    }

    /// Rebuilds with each term passed through `f`.
    pub fn map_terms<F>(&self, num_modes: usize, f: F) -> Result<StateSum>
    where
        F: Fn(&GaussianDyadicTerm) -> Result<GaussianDyadicTerm>,
    {
        let terms = self.terms.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::build(num_modes, self.has_qubit, terms, self.norm_status)
    }

    /// Sum of the terms of `self` and `other` with weights multiplied by
    /// `a` and `b`; the result is raw.
    pub fn weighted_sum(&self, a: f64, other: &StateSum, b: f64) -> Result<StateSum> {
        if self.num_modes != other.num_modes || self.has_qubit != other.has_qubit {
            return Err(Error::InvalidParameter("mismatched state shapes".into()));
        }
        let scale = |t: &GaussianDyadicTerm, k: f64| {
            let mut t = t.clone();
            t.log_weight += C64::new(k, 0.0).ln();
            t
        };
        let mut terms: Vec<_> = self.terms.iter().map(|t| scale(t, a)).collect();
        terms.extend(other.terms.iter().map(|t| scale(t, b)));
        Self::new(self.num_modes, self.has_qubit, terms)
    }

    /// Replaces the qubit dyadic `|j><k|` by the scalar `f(j, k)` and drops
    /// the qubit. Terms with a zero factor are removed.
    pub fn contract_qubit<F>(&self, f: F) -> Result<StateSum>
    where
        F: Fn(u8, u8) -> f64,
    {
        if !self.has_qubit {
            return Err(Error::NoQubit);
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let q = t.qubit.expect("qubit-tagged state");
            let k = f(q.ket, q.bra);
            if k == 0.0 {
                continue;
            }
            let mut t = t.clone();
            t.qubit = None;
            t.log_weight += C64::new(k, 0.0).ln();
            terms.push(t);
        }
        Self::new(self.num_modes, false, terms)
    }

    /// Closed-form trace.
    pub fn trace(&self) -> Result<f64> {
        let (tr, _) = self.trace_with_scale()?;
        Ok(tr)
    }

    /// Trace and the sum of absolute term traces (a cancellation scale).
    fn trace_with_scale(&self) -> Result<(f64, f64)> {
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for w in &self.compiled {
            if let Some(l) = w.log_trace()? {
                let v = l.exp();
                sum += v;
                scale += v.norm();
            }
        }
        Ok((sum.re, scale))
    }

    /// Divides every weight by the trace.
    pub fn normalize(&self) -> Result<StateSum> {
        let (tr, scale) = self.trace_with_scale()?;
        if !(tr.abs() > 1e-12 * scale) || tr.abs() < 1e-300 {
            return Err(Error::ZeroTrace { trace: tr });
        }
        let shift = C64::new(tr, 0.0).ln();
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.log_weight -= shift;
                t
            })
            .collect();
        let constant = match self.norm_status {
            NormStatus::Raw => tr,
            NormStatus::Normalized { constant } => constant * tr,
        };
        Self::build(
            self.num_modes,
            self.has_qubit,
            terms,
            NormStatus::Normalized { constant },
        )
    }

    /// Real Wigner value.
    pub fn wigner(&self, point: &PhasePoint) -> Result<f64> {
        let (v, scale) = self.wigner_complex(point)?;
        if v.im.abs() > 1e-9 * v.re.abs().max(1e-3 * scale) + 1e-12 {
            return Err(Error::ImaginaryResidual {
                real: v.re,
                imag: v.im,
            });
        }
        Ok(v.re)
    }

    /// Wigner value without the residual check, with the sum of absolute
    /// term values.
    pub fn wigner_complex(&self, point: &PhasePoint) -> Result<(C64, f64)> {
        if point.0.len() != self.phase_space_dim() {
            return Err(Error::PointDimension {
                expected: self.phase_space_dim(),
                got: point.0.len(),
            });
        }
        let (alpha, beta) = if self.has_qubit {
            (Some(point.0[0]), &point.0[1..])
        } else {
            (None, &point.0[..])
        };
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for w in &self.compiled {
            let v = w.eval(alpha, beta);
            sum += v;
            scale += v.norm();
        }
        Ok((sum, scale))
    }

    /// Fast real Wigner value for hot loops (no residual check).
    #[inline]
    pub fn wigner_unchecked(&self, beta: &[C64]) -> f64 {
        let mut acc = 0.0;
        for w in &self.compiled {
            acc += w.eval(None, beta).re;
        }
        acc
    }

    /// `Tr(A B) = pi^M int W_A W_B` for two states with the same shape.
    pub fn overlap(&self, other: &StateSum) -> Result<f64> {
        if self.num_modes != other.num_modes || self.has_qubit != other.has_qubit {
            return Err(Error::InvalidParameter("mismatched state shapes".into()));
        }
        let mut sum = C64::new(0.0, 0.0);
        for a in &self.compiled {
            for b in &other.compiled {
                let qubit_factor = match (a.qubit, b.qubit) {
                    (Some(qa), Some(qb)) => {
                        if qa.bra == qb.ket && qb.bra == qa.ket {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    _ => 1.0,
                };
                if qubit_factor == 0.0 {
                    continue;
                }
                let prod = a.gaussian.product(&a.other_in_my_frame(b));
                sum += prod.log_integral()?.exp();
            }
        }
        Ok(sum.re * PI.powi(self.num_modes as i32))
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> Result<f64> {
        self.overlap(self)
    }

    /// `<a^dag a>` of oscillator `mode`, from second moments of the compiled
    /// Gaussians: `int W (|beta|^2 - 1/2)`.
    pub fn mean_photon(&self, mode: usize) -> Result<f64> {
        if mode >= self.num_modes {
            return Err(Error::BadMode {
                index: mode,
                num_modes: self.num_modes,
            });
        }
        let mut sum = C64::new(0.0, 0.0);
        for w in &self.compiled {
            if w.qubit.is_some_and(|q| q.trace() == 0.0) {
                continue;
            }
            let mo = w.gaussian.moments()?;
            let c = w.frames[mode];
            let local_sq = mo.covariance[(mode, mode)] + mo.mean[mode] * mo.mean_conj[mode];
            let second = local_sq + c.conj() * mo.mean[mode] + c * mo.mean_conj[mode] + c.norm_sqr();
            sum += mo.log_mass.exp() * (second - 0.5);
        }
        Ok(sum.re)
    }

    pub fn total_mean_photon(&self) -> Result<f64> {
        (0..self.num_modes).map(|m| self.mean_photon(m)).sum()
    }

    /// One-variable Gaussians of each term after integrating out every
    /// oscillator mode other than `mode` (qubit traced), with the term's frame
    /// on `mode` and whether the term is diagonal.
    pub(crate) fn single_mode_reductions(&self, mode: usize) -> Result<Vec<(ComplexGaussian, C64, bool)>> {
        if mode >= self.num_modes {
            return Err(Error::BadMode {
                index: mode,
                num_modes: self.num_modes,
            });
        }
        let mut out = Vec::new();
        for w in &self.compiled {
            if w.qubit.is_some_and(|q| q.trace() == 0.0) {
                continue;
            }
            let g = w.gaussian.marginal_of(mode)?;
            out.push((g, w.frames[mode], w.diagonal));
        }
        Ok(out)
    }
}
