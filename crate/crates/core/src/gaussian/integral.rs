//! Complex Gaussian functions of several complex variables and their
//! closed-form integrals.
//!
//! A [`ComplexGaussian`] over variables `x = (x_1, .., x_n)` is the function
//!
//! ```text
//! exp( -sum_jk conj(x_j) Q_jk x_k + sum_k h_k x_k + sum_j g_j conj(x_j) + c )
//! ```
//!
//! with no `x_j x_k` or `conj(x_j) conj(x_k)` monomials. Integrals are over
//! `d^2x = d Re(x) d Im(x)` per variable and use
//!
//! ```text
//! int d^2n x exp(-x^H Q x + h.x + g.conj(x)) = pi^n / det(Q) * exp(h^T Q^-1 g)
//! ```
//!
//! which holds whenever the hermitian part of `Q` is positive definite.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Integral of `exp(-z^H P z + s.z + t.conj(z))` over `r = P.nrows()` complex
/// variables, returned as a complex logarithm.
pub fn gaussian_integral(p: &DMatrix<C64>, s: &DVector<C64>, t: &DVector<C64>) -> Result<C64> {
    let r = p.nrows();
    assert_eq!(p.ncols(), r, "P must be square");
    assert_eq!(s.len(), r);
    assert_eq!(t.len(), r);
    if r == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    check_convergent(p)?;
    let lu = p.clone().lu();
    let pinv_t = lu.solve(t).ok_or(Error::NonConvergent { min_eigenvalue: 0.0 })?;
    let quad = s.transpose() * pinv_t;
    Ok(quad[(0, 0)] + r as f64 * PI.ln() - lu.determinant().ln())
}

/// Fails with `NonConvergent` unless `(P + P^H)/2` is positive definite.
pub fn check_convergent(p: &DMatrix<C64>) -> Result<()> {
    let herm = (p + p.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = herm
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eigenvalue > 0.0 {
        return Ok(());
    }
    Err(Error::NonConvergent { min_eigenvalue })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGaussian {
    pub quad: DMatrix<C64>,
    pub holo: DVector<C64>,
    pub anti: DVector<C64>,
    pub log_const: C64,
}

/// Closed-form first and second moments of a [`ComplexGaussian`].
#[derive(Debug, Clone)]
pub struct Moments {
    /// Log of the total integral.
    pub log_mass: C64,
    /// Normalised `<x_k>`.
    pub mean: DVector<C64>,
    /// Normalised `<conj(x_k)>`.
    pub mean_conj: DVector<C64>,
    /// `Q^-1`; the connected part of `<x_k conj(x_j)>` is `Q^-1_kj`.
    pub covariance: DMatrix<C64>,
}

impl ComplexGaussian {
    pub fn zeros(n: usize) -> Self {
        Self {
            quad: DMatrix::zeros(n, n),
            holo: DVector::zeros(n),
            anti: DVector::zeros(n),
            log_const: C64::new(0.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.quad.nrows()
    }

    /// Exponent at `x`.
    #[inline]
    pub fn log_eval(&self, x: &[C64]) -> C64 {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let mut acc = self.log_const;
        for k in 0..n {
            acc += self.holo[k] * x[k] + self.anti[k] * x[k].conj();
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += x[j].conj() * self.quad[(j, k)];
            }
            acc -= row * x[k];
        }
        acc
    }

    /// Integrates out the first `r` variables, leaving a Gaussian over the rest.
    pub fn integrate_leading(&self, r: usize) -> Result<ComplexGaussian> {
        let n = self.dim();
        assert!(r <= n);
        if r == 0 {
            return Ok(self.clone());
        }
        let m = n - r;
        let hzz = self.quad.view((0, 0), (r, r)).into_owned();
        check_convergent(&hzz)?;
        let hzb = self.quad.view((0, r), (r, m)).into_owned();
        let hbz = self.quad.view((r, 0), (m, r)).into_owned();
        let hbb = self.quad.view((r, r), (m, m)).into_owned();
        let sz = self.holo.rows(0, r).into_owned();
        let sb = self.holo.rows(r, m).into_owned();
        let tz = self.anti.rows(0, r).into_owned();
        let tb = self.anti.rows(r, m).into_owned();

        let lu = hzz.clone().lu();
        let singular = || Error::NonConvergent { min_eigenvalue: 0.0 };
        let inv_hzb = lu.solve(&hzb).ok_or_else(singular)?;
        let inv_tz = lu.solve(&tz).ok_or_else(singular)?;
        let lu_t = hzz.transpose().lu();
        let inv_t_sz = lu_t.solve(&sz).ok_or_else(singular)?;

        let quad = hbb - &hbz * &inv_hzb;
        let holo = sb - hzb.transpose() * inv_t_sz;
        let anti = tb - hbz * &inv_tz;
        let log_const = self.log_const + (sz.transpose() * inv_tz)[(0, 0)] + r as f64 * PI.ln()
            - lu.determinant().ln();
        Ok(ComplexGaussian {
            quad,
            holo,
            anti,
            log_const,
        })
    }

    /// Moves variable indices so that `order[i]` becomes variable `i`.
    pub fn permuted(&self, order: &[usize]) -> ComplexGaussian {
        let n = self.dim();
        assert_eq!(order.len(), n);
        ComplexGaussian {
            quad: DMatrix::from_fn(n, n, |i, j| self.quad[(order[i], order[j])]),
            holo: DVector::from_fn(n, |i, _| self.holo[order[i]]),
            anti: DVector::from_fn(n, |i, _| self.anti[order[i]]),
            log_const: self.log_const,
        }
    }

    /// Integrates out every variable except `keep`.
    pub fn marginal_of(&self, keep: usize) -> Result<ComplexGaussian> {
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).filter(|&i| i != keep).collect();
        order.push(keep);
        self.permuted(&order).integrate_leading(n - 1)
    }

    /// Log of the integral over all variables.
    pub fn log_integral(&self) -> Result<C64> {
        gaussian_integral(&self.quad, &self.holo, &self.anti).map(|v| v + self.log_const)
    }

    pub fn moments(&self) -> Result<Moments> {
        let n = self.dim();
        check_convergent(&self.quad)?;
        let singular = || Error::NonConvergent { min_eigenvalue: 0.0 };
        let covariance = self.quad.clone().try_inverse().ok_or_else(singular)?;
        let mean = &covariance * &self.anti;
        let mean_conj = covariance.transpose() * &self.holo;
        let log_mass = if n == 0 {
            self.log_const
        } else {
            self.log_const + (self.holo.transpose() * &mean)[(0, 0)] + n as f64 * PI.ln()
                - self.quad.determinant().ln()
        };
        Ok(Moments {
            log_mass,
            mean,
            mean_conj,
            covariance,
        })
    }

    /// The function `x -> self(x + delta)`.
    pub fn translated(&self, delta: &[C64]) -> ComplexGaussian {
        let n = self.dim();
        let d = DVector::from_column_slice(delta);
        let dc = d.map(|v| v.conj());
        let q_d = &self.quad * &d;
        let dc_q = dc.transpose() * &self.quad;
        let holo = &self.holo - dc_q.transpose();
        let anti = &self.anti - &q_d;
        let mut log_const = self.log_const;
        for k in 0..n {
            log_const += -dc[k] * q_d[k] + self.holo[k] * d[k] + self.anti[k] * dc[k];
        }
        ComplexGaussian {
            quad: self.quad.clone(),
            holo,
            anti,
            log_const,
        }
    }

    /// Pointwise product.
    pub fn product(&self, other: &ComplexGaussian) -> ComplexGaussian {
        ComplexGaussian {
            quad: &self.quad + &other.quad,
            holo: &self.holo + &other.holo,
            anti: &self.anti + &other.anti,
            log_const: self.log_const + other.log_const,
        }
    }

    /// For a one-variable Gaussian in `beta = x + i p`, the log of the
    /// integral over `p` as a function of `x`: `-a x^2 + b x + c`.
    pub fn x_marginal_coeffs(&self) -> Result<(C64, C64, C64)> {
        assert_eq!(self.dim(), 1, "x-marginal needs a single variable");
        let a = self.quad[(0, 0)];
        if a.re <= 0.0 {
            return Err(Error::NonConvergent { min_eigenvalue: a.re });
        }
        let h = self.holo[0];
        let g = self.anti[0];
        let diff = h - g;
        let c = self.log_const + 0.5 * PI.ln() - 0.5 * a.ln() - diff * diff / (4.0 * a);
        Ok((a, h + g, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(p: C64, s: C64, t: C64) -> (DMatrix<C64>, DVector<C64>, DVector<C64>) {
        (
            DMatrix::from_element(1, 1, p),
            DVector::from_element(1, s),
            DVector::from_element(1, t),
        )
    }

    #[test]
    fn unit_gaussian_integrates_to_pi() {
        let (p, s, t) = scalar(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let v = gaussian_integral(&p, &s, &t).unwrap();
        assert!((v - c(PI.ln(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn linear_terms_complete_the_square() {
        let (p, s, t) = scalar(c(2.0, 0.0), c(2.0, 0.0), c(2.0, 0.0));
        let v = gaussian_integral(&p, &s, &t).unwrap();
        assert!((v - c((PI / 2.0).ln() + 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn thermal_measure_prefactor() {
        let v = 3.0;
        let (p, s, t) = scalar(c(2.0 / (v - 1.0), 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let val = gaussian_integral(&p, &s, &t).unwrap();
        // pi / p = pi (V - 1) / 2, which the 2/(pi (V-1)) prefactor cancels.
        assert!((val - c(PI.ln(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_quad_with_positive_hermitian_part() {
        // Real-axis check of the analytically continued formula.
        let (p, s, t) = scalar(c(1.5, 0.7), c(0.3, -0.2), c(0.1, 0.4));
        let closed = gaussian_integral(&p, &s, &t).unwrap().exp();
        let n = 600;
        let h = 16.0 / n as f64;
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let z = c(-8.0 + (i as f64 + 0.5) * h, -8.0 + (j as f64 + 0.5) * h);
                acc += (-p[(0, 0)] * z.norm_sqr() + s[0] * z + t[0] * z.conj()).exp();
            }
        }
        acc *= h * h;
        assert!((acc - closed).norm() < 1e-9, "{acc} vs {closed}");
    }

    #[test]
    fn divergent_measure_is_rejected() {
        let (p, s, t) = scalar(c(-0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            gaussian_integral(&p, &s, &t),
            Err(Error::NonConvergent { .. })
        ));
        let p2 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let z2 = DVector::zeros(2);
        assert!(gaussian_integral(&p2, &z2, &z2).is_err());
    }

    #[test]
    fn partial_then_full_integration_agrees() {
        let q = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.1),
                c(0.3, -0.2),
                c(0.1, 0.0),
                c(-0.1, 0.4),
                c(1.7, 0.0),
                c(0.2, 0.2),
                c(0.0, 0.3),
                c(0.1, -0.1),
                c(1.1, -0.3),
            ],
        );
        let g = ComplexGaussian {
            quad: q,
            holo: DVector::from_vec(vec![c(0.2, 0.1), c(-0.3, 0.0), c(0.5, 0.5)]),
            anti: DVector::from_vec(vec![c(0.1, -0.4), c(0.2, 0.2), c(-0.1, 0.0)]),
            log_const: c(0.3, 1.0),
        };
        let full = g.log_integral().unwrap();
        let staged = g.integrate_leading(2).unwrap().log_integral().unwrap();
        assert!((full.exp() - staged.exp()).norm() < 1e-12);
        let other = g.marginal_of(1).unwrap().log_integral().unwrap();
        assert!((full.exp() - other.exp()).norm() < 1e-12);
    }

    #[test]
    fn translation_matches_shifted_evaluation() {
        let g = ComplexGaussian {
            quad: DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.2, 0.1), c(0.3, 0.0), c(1.0, 0.5)]),
            holo: DVector::from_vec(vec![c(0.2, 0.1), c(-0.3, 0.0)]),
            anti: DVector::from_vec(vec![c(0.1, -0.4), c(0.2, 0.2)]),
            log_const: c(0.1, 0.0),
        };
        let delta = [c(0.7, -1.2), c(-0.4, 0.3)];
        let x = [c(0.2, 0.5), c(-0.6, 0.1)];
        let shifted: Vec<C64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
        let direct = g.log_eval(&shifted);
        let moved = g.translated(&delta).log_eval(&x);
        assert!((direct - moved).norm() < 1e-13);
    }

    #[test]
    fn moments_of_displaced_round_gaussian() {
        // exp(-2|x - m|^2): mean m, <|x|^2> - |m|^2 = 1/2.
        let m = c(0.4, -0.9);
        let g = ComplexGaussian {
            quad: DMatrix::from_element(1, 1, c(2.0, 0.0)),
            holo: DVector::from_element(1, 2.0 * m.conj()),
            anti: DVector::from_element(1, 2.0 * m),
            log_const: c(-2.0 * m.norm_sqr() + (2.0 / PI).ln(), 0.0),
        };
        let mo = g.moments().unwrap();
        assert!((mo.log_mass.exp() - 1.0).norm() < 1e-13);
        assert!((mo.mean[0] - m).norm() < 1e-13);
        assert!((mo.mean_conj[0] - m.conj()).norm() < 1e-13);
        assert!((mo.covariance[(0, 0)] - 0.5).norm() < 1e-13);
    }

    #[test]
    fn x_marginal_of_vacuum() {
        let g = ComplexGaussian {
            quad: DMatrix::from_element(1, 1, c(2.0, 0.0)),
            holo: DVector::zeros(1),
            anti: DVector::zeros(1),
            log_const: c((2.0 / PI).ln(), 0.0),
        };
        let (a, b, c0) = g.x_marginal_coeffs().unwrap();
        for x in [-0.7, 0.0, 0.3, 1.1] {
            let v = (-a * x * x + b * x + c0).exp();
            let want = (2.0 / PI).sqrt() * (-2.0 * x * x).exp();
            assert!((v - want).norm() < 1e-14);
        }
    }
}
