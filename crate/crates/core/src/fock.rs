//! Truncated Fock-space oracle.
//!
//! Dense density matrices over `|0>..|N>` per mode. Displacements use the
//! truncated generator in a padded space, diagonalized once per padded size:
//! `D(r e^{i t}) = R(t - pi/2) exp(i r (a + a^dag)) R(t - pi/2)^dag` with
//! `R(s) = e^{i s n}`. Wigner values come from displaced parity,
//! `W = (2/pi)^M Tr[rho (D(2 beta) Pi)^{(x) M}]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::states::Sign;
use crate::C64;

/// Largest tail mass a constructed operator may carry.
pub const MAX_TAIL: f64 = 1e-8;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Eigen-decomposition of `a + a^dag` truncated to `n` levels.
struct Quadrature {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

thread_local! {
    static QUADRATURES: RefCell<HashMap<usize, Rc<Quadrature>>> = RefCell::new(HashMap::new());
}

fn quadrature(n: usize) -> Rc<Quadrature> {
    QUADRATURES.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut x = DMatrix::<f64>::zeros(n, n);
                for k in 1..n {
                    let s = (k as f64).sqrt();
                    x[(k - 1, k)] = s;
                    x[(k, k - 1)] = s;
                }
                let eig = SymmetricEigen::new(x);
                Rc::new(Quadrature {
                    vectors: eig.eigenvectors,
                    values: eig.eigenvalues,
                })
            })
            .clone()
    })
}

fn padded_size(levels: usize, beta: C64) -> usize {
    let r = beta.norm();
    let extra = ((r * r).ceil() + 10.0 * r.ceil() + 10.0) as usize;
    levels + (levels / 4).max(extra)
}

/// Top-left `levels x levels` block of `D(beta)`, from the padded generator.
pub fn displacement_block(beta: C64, levels: usize) -> DMatrix<C64> {
    let pad = padded_size(levels, beta);
    let q = quadrature(pad);
    let r = beta.norm();
    let theta = beta.arg() - PI / 2.0;
    let phases: Vec<C64> = q.values.iter().map(|&l| C64::from_polar(1.0, r * l)).collect();
    let mut block = DMatrix::<C64>::zeros(levels, levels);
    for n in 0..levels {
        for m in 0..levels {
            let mut acc = zero();
            for k in 0..pad {
                acc += phases[k] * (q.vectors[(n, k)] * q.vectors[(m, k)]);
            }
            block[(n, m)] = acc * C64::from_polar(1.0, theta * (n as f64 - m as f64));
        }
    }
    block
}

/// `(D(2 beta) Pi)` restricted to `levels` levels.
fn parity_kernel(beta: C64, levels: usize) -> DMatrix<C64> {
    let mut m = displacement_block(2.0 * beta, levels);
    for col in (1..levels).step_by(2) {
        for row in 0..levels {
            m[(row, col)] = -m[(row, col)];
        }
    }
    m
}

/// `Tr[A M]`.
fn trace_product(a: &DMatrix<C64>, m: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = zero();
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * m[(j, i)];
        }
    }
    acc
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

fn check_tail(cutoff: usize, tail: f64) -> Result<()> {
    if tail > MAX_TAIL {
        return Err(Error::CutoffTooSmall { cutoff, tail });
    }
    Ok(())
}

/// Common read-out interface of the oracle operators.
pub trait OracleState {
    /// Length of a phase point (qubit coordinate first when present).
    fn phase_dim(&self) -> usize;
    fn wigner(&self, point: &[C64]) -> f64;
    fn trace(&self) -> f64;
    fn purity(&self) -> f64;
    fn mean_photon(&self, mode: usize) -> f64;
    fn tail_mass(&self) -> f64;
}

/// Single-mode operator.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub cutoff: usize,
    pub matrix: DMatrix<C64>,
    pub tail_mass: f64,
}

impl FockOperator {
    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, k: f64) -> FockOperator {
        FockOperator {
            cutoff: self.cutoff,
            matrix: &self.matrix * C64::new(k, 0.0),
            tail_mass: self.tail_mass,
        }
    }

    pub fn normalized(&self) -> Result<FockOperator> {
        let tr = self.matrix.trace().re;
        if tr.abs() < 1e-300 {
            return Err(Error::ZeroTrace { trace: tr });
        }
        Ok(self.scaled(1.0 / tr))
    }

    /// Photon-number parity `Pi rho`.
    pub fn parity_left(&self) -> FockOperator {
        let mut m = self.matrix.clone();
        for row in (1..self.levels()).step_by(2) {
            for col in 0..self.levels() {
                m[(row, col)] = -m[(row, col)];
            }
        }
        FockOperator { matrix: m, ..self.clone() }
    }

    /// `rho Pi`.
    pub fn parity_right(&self) -> FockOperator {
        let mut m = self.matrix.clone();
        for col in (1..self.levels()).step_by(2) {
            for row in 0..self.levels() {
                m[(row, col)] = -m[(row, col)];
            }
        }
        FockOperator { matrix: m, ..self.clone() }
    }

    /// Fidelity `<psi| rho |psi>` with a pure state given by amplitudes.
    pub fn expectation_in(&self, psi: &DVector<C64>) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }
}

impl OracleState for FockOperator {
    fn phase_dim(&self) -> usize {
        1
    }

    fn wigner(&self, point: &[C64]) -> f64 {
        let m = parity_kernel(point[0], self.levels());
        2.0 / PI * trace_product(&self.matrix, &m).re
    }

    fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    fn purity(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }

    fn mean_photon(&self, _mode: usize) -> f64 {
        (0..self.levels()).map(|n| n as f64 * self.matrix[(n, n)].re).sum()
    }

    fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// Photon-number distribution of a thermal state with mean `nbar`
/// displaced by `disp`, up to where it has decayed below `1e-300` past
/// its mean: `p_n = e^{-D^2/(1+nbar)}/(1+nbar) r^n L_n(-D^2/(nbar(1+nbar)))`,
/// `r = nbar/(1+nbar)`, using the forward Laguerre recurrence on `r^n L_n`.
fn photon_distribution(nbar: f64, disp: f64) -> Vec<f64> {
    let d2 = disp * disp;
    let mean = nbar + d2;
    let mut p = Vec::new();
    if nbar == 0.0 {
        let mut v = (-d2).exp();
        for n in 0.. {
            p.push(v);
            if (n as f64) > mean && v < 1e-300 {
                break;
            }
            v *= d2 / (n as f64 + 1.0);
            if d2 == 0.0 {
                break;
            }
        }
        return p;
    }
    let a = (-d2 / (1.0 + nbar)).exp() / (1.0 + nbar);
    let r = nbar / (1.0 + nbar);
    let shift = d2 / ((1.0 + nbar) * (1.0 + nbar));
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 0.. {
        p.push(a * cur);
        if (n as f64) > mean && a * cur < 1e-300 {
            break;
        }
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * r * cur + shift * cur - nf * r * r * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    p
}

/// Smallest cutoff whose occupation tail `sum_{n > N} p_n` is below
/// `epsilon`, for variance `v` and displacement `|d| + beta_max`.
pub fn cutoff_selector(v: f64, d: f64, beta_max: f64, epsilon: f64) -> usize {
    let nbar = (v - 1.0) / 2.0;
    let p = photon_distribution(nbar, d.abs() + beta_max.abs());
    let mut tail = 0.0;
    let mut n = p.len();
    while n > 0 {
        tail += p[n - 1];
        if tail >= epsilon {
            return n - 1;
        }
        n -= 1;
    }
    0
}

/// Thermal state of variance `v` displaced by `d`, truncated at `cutoff`.
pub fn fock_thermal(v: f64, d: C64, cutoff: usize) -> Result<FockOperator> {
    if !(v >= 1.0) {
        return Err(Error::BadVariance(v));
    }
    let levels = cutoff + 1;
    let pad = padded_size(levels, d);
    let nbar = (v - 1.0) / 2.0;
    let weights: Vec<f64> = (0..pad)
        .map(|n| {
            if nbar == 0.0 {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (n as f64 * (nbar / (nbar + 1.0)).ln()).exp() / (nbar + 1.0)
            }
        })
        .collect();
    let disp = displacement_block(d, pad);
    let mut matrix = DMatrix::<C64>::zeros(levels, levels);
    for i in 0..levels {
        for j in 0..=i {
            let mut acc = zero();
            for n in 0..pad {
                if weights[n] > 0.0 {
                    acc += disp[(i, n)] * disp[(j, n)].conj() * weights[n];
                }
            }
            matrix[(i, j)] = acc;
            matrix[(j, i)] = acc.conj();
        }
    }
    let tail_mass = (1.0 - matrix.trace().re).max(0.0);
    check_tail(cutoff, tail_mass)?;
    Ok(FockOperator {
        cutoff,
        matrix,
        tail_mass,
    })
}

/// `(1 +- U) rho_th (1 +- U^dag)` with `U = e^{i phi n}`, normalized, and
/// its raw trace.
pub fn projector_states(v: f64, d: C64, phi: f64, sign: Sign, cutoff: usize) -> Result<(FockOperator, f64)> {
    let th = fock_thermal(v, d, cutoff)?;
    let s = sign.value();
    let levels = cutoff + 1;
    let f: Vec<C64> = (0..levels)
        .map(|n| C64::new(1.0, 0.0) + s * C64::from_polar(1.0, phi * n as f64))
        .collect();
    let mut m = th.matrix.clone();
    for i in 0..levels {
        for j in 0..levels {
            m[(i, j)] *= f[i] * f[j].conj();
        }
    }
    let raw = m.trace().re;
    let scale = th.matrix.trace().re;
    if raw.abs() <= 1e-12 * scale.max(1e-300) {
        return Err(Error::ZeroTrace { trace: raw });
    }
    let tail_mass = 4.0 * th.tail_mass / raw.abs();
    check_tail(cutoff, tail_mass)?;
    let op = FockOperator {
        cutoff,
        matrix: m / C64::new(raw, 0.0),
        tail_mass,
    };
    Ok((op, raw))
}

/// `(|a> +- |-a>)` normalized.
pub fn fock_cat(alpha: C64, sign: Sign, cutoff: usize) -> Result<FockOperator> {
    Ok(projector_states(1.0, alpha, PI, sign, cutoff)?.0)
}

/// Coherent-state amplitudes `<n|alpha>` for `n <= cutoff`.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> DVector<C64> {
    let lf = ln_factorials(cutoff);
    DVector::from_iterator(
        cutoff + 1,
        (0..=cutoff).map(|n| {
            let mag = if alpha.norm() == 0.0 {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-0.5 * alpha.norm_sqr() + n as f64 * alpha.norm().ln() - 0.5 * lf[n]).exp()
            };
            C64::from_polar(mag, alpha.arg() * n as f64)
        }),
    )
}

/// Amplitude-damping channel for time `gamma_t` via its Kraus operators.
pub fn fock_loss(rho: &FockOperator, gamma_t: f64) -> Result<FockOperator> {
    if !(gamma_t >= 0.0) {
        return Err(Error::NegativeTime(gamma_t));
    }
    let coeff = kraus_table(rho.cutoff, (-gamma_t).exp());
    let levels = rho.levels();
    let mut out = DMatrix::<C64>::zeros(levels, levels);
    for i in 0..levels {
        for j in 0..levels {
            let v = rho.matrix[(i, j)];
            for k in 0..=i.min(j) {
                out[(i - k, j - k)] += v * coeff[i][k] * coeff[j][k];
            }
        }
    }
    Ok(FockOperator {
        cutoff: rho.cutoff,
        matrix: out,
        tail_mass: rho.tail_mass,
    })
}

/// `c[n][k] = sqrt(C(n,k) eta^{n-k} (1-eta)^k)`.
fn kraus_table(cutoff: usize, eta: f64) -> Vec<Vec<f64>> {
    let lf = ln_factorials(cutoff);
    (0..=cutoff)
        .map(|n| {
            (0..=n)
                .map(|k| {
                    if eta == 1.0 {
                        return if k == 0 { 1.0 } else { 0.0 };
                    }
                    if eta == 0.0 {
                        return if k == n { 1.0 } else { 0.0 };
                    }
                    (0.5 * (lf[n] - lf[k] - lf[n - k] + (n - k) as f64 * eta.ln() + k as f64 * (1.0 - eta).ln()))
                        .exp()
                })
                .collect()
        })
        .collect()
}

/// Two-mode operator `sum_k c_k A_k (x) B_k`.
#[derive(Debug, Clone)]
pub struct ProductSumOperator {
    pub cutoff: usize,
    pub terms: Vec<(C64, DMatrix<C64>, DMatrix<C64>)>,
    pub tail_mass: f64,
}

impl ProductSumOperator {
    pub fn normalized(&self) -> Result<ProductSumOperator> {
        let tr = self.trace();
        if tr.abs() < 1e-300 {
            return Err(Error::ZeroTrace { trace: tr });
        }
        Ok(ProductSumOperator {
            cutoff: self.cutoff,
            terms: self
                .terms
                .iter()
                .map(|(c, a, b)| (c / tr, a.clone(), b.clone()))
                .collect(),
            tail_mass: self.tail_mass,
        })
    }

    /// Expands into the number-restricted basis (entries beyond the total
    /// cutoff are dropped).
    pub fn to_dense(&self) -> TwoModeOperator {
        let basis = NumberBasis::new(self.cutoff);
        let dim = basis.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for r in 0..dim {
            let (i1, i2) = basis.pair(r);
            for c in 0..dim {
                let (j1, j2) = basis.pair(c);
                m[(r, c)] = self.terms.iter().map(|(k, a, b)| k * a[(i1, j1)] * b[(i2, j2)]).sum();
            }
        }
        TwoModeOperator {
            basis,
            matrix: m,
            tail_mass: self.tail_mass,
        }
    }
}

impl OracleState for ProductSumOperator {
    fn phase_dim(&self) -> usize {
        2
    }

    fn wigner(&self, point: &[C64]) -> f64 {
        let levels = self.cutoff + 1;
        let m1 = parity_kernel(point[0], levels);
        let m2 = parity_kernel(point[1], levels);
        let s: C64 = self
            .terms
            .iter()
            .map(|(k, a, b)| k * trace_product(a, &m1) * trace_product(b, &m2))
            .sum();
        (2.0 / PI).powi(2) * s.re
    }

    fn trace(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, a, b)| k * a.trace() * b.trace())
            .sum::<C64>()
            .re
    }

    fn purity(&self) -> f64 {
        let mut s = zero();
        for (k, a, b) in &self.terms {
            for (l, c, d) in &self.terms {
                s += k * l * trace_product(a, c) * trace_product(b, d);
            }
        }
        s.re
    }

    fn mean_photon(&self, mode: usize) -> f64 {
        let n_of = |m: &DMatrix<C64>| (0..m.nrows()).map(|n| m[(n, n)] * n as f64).sum::<C64>();
        self.terms
            .iter()
            .map(|(k, a, b)| {
                if mode == 0 {
                    k * n_of(a) * b.trace()
                } else {
                    k * a.trace() * n_of(b)
                }
            })
            .sum::<C64>()
            .re
    }

    fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// `rho_th(d)(x)rho_th(d) +- s(d)(x)s(d) +- s(-d)(x)s(-d) + rho_th(-d)(x)rho_th(-d)`
/// with `s(d) = Pi rho_th(d)`, normalized.
pub fn fock_two_mode_entangled(v: f64, d: C64, sign: Sign, cutoff: usize) -> Result<ProductSumOperator> {
    let r = fock_thermal(v, d, cutoff)?;
    let pr = r.parity_left();
    let rp = r.parity_right();
    let prp = pr.parity_right();
    let s = C64::new(sign.value(), 0.0);
    let one = C64::new(1.0, 0.0);
    let raw = ProductSumOperator {
        cutoff,
        terms: vec![
            (one, r.matrix.clone(), r.matrix.clone()),
            (s, pr.matrix.clone(), pr.matrix.clone()),
            (s, rp.matrix.clone(), rp.matrix.clone()),
            (one, prp.matrix.clone(), prp.matrix.clone()),
        ],
        tail_mass: 0.0,
    };
    let tr = raw.trace();
    if tr.abs() <= 1e-12 * 4.0 {
        return Err(Error::ZeroTrace { trace: tr });
    }
    let tail_mass = 8.0 * r.tail_mass / tr.abs();
    check_tail(cutoff, tail_mass)?;
    Ok(ProductSumOperator { tail_mass, ..raw.normalized()? })
}

/// Two-mode basis `|n1, n2>` with `n1 + n2 <= cutoff`, ordered by total
/// number and then by `n1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberBasis {
    pub cutoff: usize,
    pairs: Vec<(usize, usize)>,
}

impl NumberBasis {
    pub fn new(cutoff: usize) -> Self {
        let mut pairs = Vec::new();
        for s in 0..=cutoff {
            for n1 in 0..=s {
                pairs.push((n1, s - n1));
            }
        }
        Self { cutoff, pairs }
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, idx: usize) -> (usize, usize) {
        self.pairs[idx]
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        let s = n1 + n2;
        s * (s + 1) / 2 + n1
    }

    fn block_start(s: usize) -> usize {
        s * (s + 1) / 2
    }
}

/// Two-mode operator in the number-restricted basis.
#[derive(Debug, Clone)]
pub struct TwoModeOperator {
    pub basis: NumberBasis,
    pub matrix: DMatrix<C64>,
    pub tail_mass: f64,
}

impl TwoModeOperator {
    /// `rho (x) |0><0|`.
    pub fn with_vacuum(rho: &FockOperator) -> Self {
        let basis = NumberBasis::new(rho.cutoff);
        let dim = basis.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..rho.levels() {
            for j in 0..rho.levels() {
                m[(basis.index(i, 0), basis.index(j, 0))] = rho.matrix[(i, j)];
            }
        }
        Self {
            basis,
            matrix: m,
            tail_mass: rho.tail_mass,
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Beam splitter `a^dag -> sqrt(T) a^dag - sqrt(1-T) b^dag`,
    /// `b^dag -> sqrt(1-T) a^dag + sqrt(T) b^dag`.
    pub fn beam_splitter(&self, transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::BadTransmittance(transmittance));
        }
        let cutoff = self.basis.cutoff;
        let blocks: Vec<DMatrix<C64>> = (0..=cutoff).map(|s| bs_block(s, transmittance)).collect();
        let mut out = DMatrix::<C64>::zeros(self.basis.dim(), self.basis.dim());
        for s in 0..=cutoff {
            let rs = NumberBasis::block_start(s);
            for t in 0..=cutoff {
                let cs = NumberBasis::block_start(t);
                let block = self.matrix.view((rs, cs), (s + 1, t + 1));
                let rotated = &blocks[s] * block * blocks[t].adjoint();
                out.view_mut((rs, cs), (s + 1, t + 1)).copy_from(&rotated);
            }
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: out,
            tail_mass: self.tail_mass,
        })
    }

    /// Amplitude damping on one mode.
    pub fn loss(&self, mode: usize, gamma_t: f64) -> Result<Self> {
        if mode > 1 {
            return Err(Error::BadMode { index: mode, num_modes: 2 });
        }
        if !(gamma_t >= 0.0) {
            return Err(Error::NegativeTime(gamma_t));
        }
        if gamma_t == 0.0 {
            return Ok(self.clone());
        }
        let coeff = kraus_table(self.basis.cutoff, (-gamma_t).exp());
        let dim = self.basis.dim();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        let pick = |p: (usize, usize)| if mode == 0 { p.0 } else { p.1 };
        let lower = |p: (usize, usize), k: usize| if mode == 0 { (p.0 - k, p.1) } else { (p.0, p.1 - k) };
        for r in 0..dim {
            let pr = self.basis.pair(r);
            for c in 0..dim {
                let v = self.matrix[(r, c)];
                if v == zero() {
                    continue;
                }
                let pc = self.basis.pair(c);
                let (nr, nc) = (pick(pr), pick(pc));
                for k in 0..=nr.min(nc) {
                    let (a, b) = (lower(pr, k), lower(pc, k));
                    out[(self.basis.index(a.0, a.1), self.basis.index(b.0, b.1))] += v * coeff[nr][k] * coeff[nc][k];
                }
            }
        }
        Ok(Self {
            basis: self.basis.clone(),
            matrix: out,
            tail_mass: self.tail_mass,
        })
    }
}

/// Matrix of the beam splitter on the total-number-`s` block, in the
/// basis `|n1, s - n1>`, `n1 = 0..=s`.
fn bs_block(s: usize, transmittance: f64) -> DMatrix<C64> {
    let lf = ln_factorials(s);
    let binom = |n: usize, k: usize| (lf[n] - lf[k] - lf[n - k]).exp();
    let (ct, cr) = (transmittance.sqrt(), (1.0 - transmittance).sqrt());
    let mut u = DMatrix::<C64>::zeros(s + 1, s + 1);
    for m in 0..=s {
        let n = s - m;
        // (ct a - cr b)^m (cr a + ct b)^n |0> / sqrt(m! n!)
        for i in 0..=m {
            for j in 0..=n {
                let p = i + j;
                let q = s - p;
                let coef = binom(m, i)
                    * binom(n, j)
                    * ct.powi(i as i32)
                    * (-cr).powi((m - i) as i32)
                    * cr.powi(j as i32)
                    * ct.powi((n - j) as i32)
                    * (0.5 * (lf[p] + lf[q] - lf[m] - lf[n])).exp();
                u[(p, m)] += C64::new(coef, 0.0);
            }
        }
    }
    u
}

impl OracleState for TwoModeOperator {
    fn phase_dim(&self) -> usize {
        2
    }

    fn wigner(&self, point: &[C64]) -> f64 {
        let levels = self.basis.cutoff + 1;
        let m1 = parity_kernel(point[0], levels);
        let m2 = parity_kernel(point[1], levels);
        let dim = self.basis.dim();
        let mut acc = zero();
        for r in 0..dim {
            let (a1, a2) = self.basis.pair(r);
            for c in 0..dim {
                let (b1, b2) = self.basis.pair(c);
                acc += self.matrix[(r, c)] * m1[(b1, a1)] * m2[(b2, a2)];
            }
        }
        (2.0 / PI).powi(2) * acc.re
    }

    fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    fn purity(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }

    fn mean_photon(&self, mode: usize) -> f64 {
        (0..self.basis.dim())
            .map(|r| {
                let (n1, n2) = self.basis.pair(r);
                let n = if mode == 0 { n1 } else { n2 };
                n as f64 * self.matrix[(r, r)].re
            })
            .sum()
    }

    fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// Splits a single-mode state on a beam splitter with a vacuum ancilla and
/// applies loss `gamma_t` to both outputs.
pub fn oracle_bs_and_loss(rho: &FockOperator, transmittance: f64, gamma_t: f64) -> Result<TwoModeOperator> {
    TwoModeOperator::with_vacuum(rho)
        .beam_splitter(transmittance)?
        .loss(0, gamma_t)?
        .loss(1, gamma_t)
}

/// Qubit (levels 0, 1) times oscillator, index `q * (N + 1) + n`.
#[derive(Debug, Clone)]
pub struct QubitOscillatorOperator {
    pub cutoff: usize,
    pub matrix: DMatrix<C64>,
    pub tail_mass: f64,
}

/// `1/2 sum_{jk} |j><k| (x) U^j rho_th U^{-k}` with `U = e^{i phi n}`.
pub fn fock_micro_macro(v: f64, d: C64, phi: f64, cutoff: usize) -> Result<QubitOscillatorOperator> {
    let th = fock_thermal(v, d, cutoff)?;
    let levels = cutoff + 1;
    let mut m = DMatrix::<C64>::zeros(2 * levels, 2 * levels);
    for j in 0..2 {
        for k in 0..2 {
            for a in 0..levels {
                for b in 0..levels {
                    let ph = C64::from_polar(1.0, phi * (j as f64 * a as f64 - k as f64 * b as f64));
                    m[(j * levels + a, k * levels + b)] = 0.5 * ph * th.matrix[(a, b)];
                }
            }
        }
    }
    Ok(QubitOscillatorOperator {
        cutoff,
        matrix: m,
        tail_mass: th.tail_mass,
    })
}

impl QubitOscillatorOperator {
    /// Projects the qubit on `(|0> +- |1>)/sqrt 2`; returns the normalized
    /// oscillator state and the outcome probability.
    pub fn measure_superposed(&self, sign: Sign) -> Result<(FockOperator, f64)> {
        let levels = self.cutoff + 1;
        let s = sign.value();
        let mut m = DMatrix::<C64>::zeros(levels, levels);
        for j in 0..2 {
            for k in 0..2 {
                let w = 0.5 * s.powi((j + k) as i32);
                for a in 0..levels {
                    for b in 0..levels {
                        m[(a, b)] += w * self.matrix[(j * levels + a, k * levels + b)];
                    }
                }
            }
        }
        let p = m.trace().re;
        if p.abs() < 1e-14 {
            return Err(Error::ZeroTrace { trace: p });
        }
        let op = FockOperator {
            cutoff: self.cutoff,
            matrix: m / C64::new(p, 0.0),
            tail_mass: self.tail_mass / p,
        };
        Ok((op, p))
    }
}

impl OracleState for QubitOscillatorOperator {
    fn phase_dim(&self) -> usize {
        2
    }

    fn wigner(&self, point: &[C64]) -> f64 {
        let levels = self.cutoff + 1;
        let mq = parity_kernel(point[0], 2);
        let mo = parity_kernel(point[1], levels);
        let mut acc = zero();
        for j in 0..2 {
            for k in 0..2 {
                for a in 0..levels {
                    for b in 0..levels {
                        acc += self.matrix[(j * levels + a, k * levels + b)] * mq[(k, j)] * mo[(b, a)];
                    }
                }
            }
        }
        (2.0 / PI).powi(2) * acc.re
    }

    fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    fn purity(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }

    fn mean_photon(&self, _mode: usize) -> f64 {
        let levels = self.cutoff + 1;
        (0..2 * levels)
            .map(|r| (r % levels) as f64 * self.matrix[(r, r)].re)
            .sum()
    }

    fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// `(pi^2/4) [W(a,b) + W(a,b') + W(a',b) - W(a',b')]` on a two-mode oracle state.
pub fn oracle_bell<S: OracleState + ?Sized>(rho: &S, a: C64, a2: C64, b: C64, b2: C64) -> f64 {
    PI * PI / 4.0 * (rho.wigner(&[a, b]) + rho.wigner(&[a, b2]) + rho.wigner(&[a2, b]) - rho.wigner(&[a2, b2]))
}

/// Single-mode displaced-parity Wigner value.
pub fn displaced_parity_wigner(rho: &FockOperator, beta: C64) -> f64 {
    rho.wigner(&[beta])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = c(0.7, -1.1);
        let d = displacement_block(alpha, 30);
        let want = coherent_amplitudes(alpha, 29);
        for n in 0..30 {
            assert!((d[(n, 0)] - want[n]).norm() < 1e-12, "{n}");
        }
    }

    #[test]
    fn vacuum_and_one_photon_parity() {
        let vac = fock_thermal(1.0, c(0.0, 0.0), 4).unwrap();
        assert!((displaced_parity_wigner(&vac, c(0.0, 0.0)) - 2.0 / PI).abs() < 1e-14);
        let mut m = DMatrix::zeros(5, 5);
        m[(1, 1)] = c(1.0, 0.0);
        let one = FockOperator {
            cutoff: 4,
            matrix: m,
            tail_mass: 0.0,
        };
        assert!((displaced_parity_wigner(&one, c(0.0, 0.0)) + 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn thermal_populations() {
        let th = fock_thermal(3.0, c(0.0, 0.0), 60).unwrap();
        for n in 0..10 {
            let want = 0.5f64.powi(n as i32 + 1);
            assert!((th.matrix[(n, n)].re - want).abs() < 1e-14);
        }
        let dth = fock_thermal(3.0, c(1.0, 0.0), 60).unwrap();
        assert!((dth.mean_photon(0) - 2.0).abs() < 1e-8);
        assert!(dth.min_eigenvalue() > -1e-12);
        assert!(dth.hermiticity_error() < 1e-14);
    }

    #[test]
    fn small_cutoff_is_reported() {
        assert!(matches!(fock_thermal(3.0, c(2.0, 0.0), 5), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn cutoff_selector_ranges() {
        assert!(cutoff_selector(1.0, 0.0, 0.0, 1e-10) <= 4);
        // displacement 3 on n_bar = 1: mean 10, tail below 1e-10 first at 72
        let n = cutoff_selector(3.0, 1.0, 2.0, 1e-10);
        assert_eq!(n, 72);
        let p = photon_distribution(1.0, 3.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(p[n + 1..].iter().sum::<f64>() < 1e-10);
        assert!(p[n..].iter().sum::<f64>() >= 1e-10);
        let n = cutoff_selector(5.0, 2.0, 0.0, 1e-10);
        let th = fock_thermal(5.0, c(2.0, 0.0), n).unwrap();
        assert!(th.tail_mass < 1e-10);
    }

    #[test]
    fn cat_parity_support() {
        let even = fock_cat(c(1.0, 0.0), Sign::Plus, 30).unwrap();
        let odd = fock_cat(c(1.0, 0.0), Sign::Minus, 30).unwrap();
        for n in (1..30).step_by(2) {
            assert!(even.matrix[(n, n)].norm() < 1e-15);
            assert!(odd.matrix[(n - 1, n - 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn loss_keeps_coherent_states_coherent() {
        let coh = fock_thermal(1.0, c(1.0, 0.0), 30).unwrap();
        let lost = fock_loss(&coh, 2f64.ln()).unwrap();
        let psi = coherent_amplitudes(c(0.5f64.sqrt(), 0.0), 30);
        assert!(lost.expectation_in(&psi) > 1.0 - 1e-8);
        let same = fock_loss(&coh, 0.0).unwrap();
        assert!((same.matrix - coh.matrix).camax() < 1e-15);
    }

    #[test]
    fn beam_splitter_splits_coherent_amplitude() {
        let coh = fock_thermal(1.0, c(1.2, 0.0), 30).unwrap();
        let two = TwoModeOperator::with_vacuum(&coh).beam_splitter(0.5).unwrap();
        assert!((two.trace() - coh.trace()).abs() < 1e-13);
        let a = c(1.2 / 2f64.sqrt(), 0.0);
        let w = two.wigner(&[a, -a]);
        assert!((w - (2.0 / PI).powi(2)).abs() < 1e-9, "{w}");
    }

    #[test]
    fn two_mode_loss_matches_single_mode_loss_on_product() {
        let coh = fock_thermal(3.0, c(0.5, 0.2), 40).unwrap();
        let two = TwoModeOperator::with_vacuum(&coh).loss(0, 0.3).unwrap();
        let one = fock_loss(&coh, 0.3).unwrap();
        for (b, z) in [(c(0.1, 0.2), c(0.0, 0.0)), (c(-0.4, 0.3), c(0.2, 0.0))] {
            let want = one.wigner(&[b]) * (2.0 / PI) * (-2.0 * z.norm_sqr()).exp();
            assert!((two.wigner(&[b, z]) - want).abs() < 1e-12);
        }
    }
}
