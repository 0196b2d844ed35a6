//! Quadrature marginals, fringe visibility and spacing, parity correlations,
//! the CHSH combination and linear entropy.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{phase_rotate, PhasePoint, StateSum};
use crate::C64;

/// Sampled quadrature distribution. `theta = 0` is `x`, `theta = pi/2` is `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCurve {
    pub theta: f64,
    pub mode: usize,
    pub points: Vec<(f64, f64)>,
}

impl MarginalCurve {
    pub fn step(&self) -> f64 {
        if self.points.len() < 2 {
            return 0.0;
        }
        self.points[1].0 - self.points[0].0
    }

    /// Trapezoid integral of the density.
    pub fn integral(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    /// Positions of strict local maxima above `rel` times the global maximum.
    pub fn peaks(&self, rel: f64) -> Vec<f64> {
        let max = self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        self.points
            .windows(3)
            .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1 && w[1].1 > rel * max)
            .map(|w| w[1].0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityResult {
    pub v: f64,
    pub i_max: f64,
    pub i_min: f64,
    pub x_max: f64,
    pub x_min: f64,
}

/// One term's contribution to a marginal: `exp(-a u^2 + b u + c)` with
/// `u = x - shift`.
#[derive(Debug, Clone, Copy)]
struct Component {
    a: C64,
    b: C64,
    c: C64,
    shift: f64,
    diagonal: bool,
}

impl Component {
    fn value(&self, x: f64) -> C64 {
        let u = x - self.shift;
        (-self.a * u * u + self.b * u + self.c).exp()
    }

    fn center(&self) -> f64 {
        self.shift + self.b.re / (2.0 * self.a.re)
    }

    fn sigma(&self) -> f64 {
        (0.5 / self.a.re).sqrt()
    }

    fn log_peak(&self) -> f64 {
        self.c.re + self.b.re * self.b.re / (4.0 * self.a.re)
    }

    /// Local angular frequency of the phase at the envelope centre.
    fn wavenumber(&self) -> f64 {
        let u0 = self.center() - self.shift;
        self.b.im - 2.0 * self.a.im * u0
    }
}

/// Closed-form marginal of one mode along a rotated quadrature axis.
#[derive(Debug, Clone)]
pub struct QuadratureMarginal {
    theta: f64,
    mode: usize,
    components: Vec<Component>,
}

const MAX_SAMPLES: usize = 4_000_000;

impl QuadratureMarginal {
    pub fn new(state: &StateSum, mode: usize, theta: f64) -> Result<Self> {
        let rotated = if theta == 0.0 {
            state.clone()
        } else {
            phase_rotate(state, mode, -theta)?
        };
        let components = rotated
            .single_mode_reductions(mode)?
            .into_iter()
            .map(|(g, frame, diagonal)| {
                let (a, b, c) = g.x_marginal_coeffs()?;
                Ok(Component {
                    a,
                    b,
                    c,
                    shift: frame.re,
                    diagonal,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { theta, mode, components })
    }

    pub fn density(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.value(x).re).sum()
    }

    /// The part of the density coming from off-diagonal terms.
    pub fn interference(&self, x: f64) -> f64 {
        self.components.iter().filter(|c| !c.diagonal).map(|c| c.value(x).re).sum()
    }

    fn max_log_peak(&self) -> f64 {
        self.components.iter().map(|c| c.log_peak()).fold(f64::NEG_INFINITY, f64::max)
    }

    fn significant(&self, interference_only: bool, rel: f64) -> Vec<&Component> {
        let floor = self.max_log_peak() + rel.ln();
        self.components
            .iter()
            .filter(|c| (!interference_only || !c.diagonal) && c.log_peak() >= floor)
            .collect()
    }

    /// Period of the fastest significant interference oscillation.
    pub fn fringe_period(&self) -> Option<f64> {
        let k = self
            .significant(true, 1e-6)
            .iter()
            .map(|c| c.wavenumber().abs())
            .fold(0.0, f64::max);
        (k > 0.0).then(|| 2.0 * PI / k)
    }

    fn window_of(comps: &[&Component]) -> (f64, f64) {
        comps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let (m, s) = (c.center(), 12.0 * c.sigma());
            (lo.min(m - s), hi.max(m + s))
        })
    }

    /// Default sampling window: every significant lobe with 12 standard
    /// deviations on each side.
    pub fn window(&self) -> (f64, f64) {
        Self::window_of(&self.significant(false, 1e-12))
    }

    /// Window around the significant interference terms, or the full
    /// window when there are none.
    pub fn fringe_window(&self) -> (f64, f64) {
        let inter = self.significant(true, 1e-6);
        if inter.is_empty() {
            self.window()
        } else {
            Self::window_of(&inter)
        }
    }

    /// Grid step resolving both the narrowest lobe and the fringes.
    pub fn auto_step(&self) -> f64 {
        let sigma = self
            .significant(false, 1e-12)
            .iter()
            .map(|c| c.sigma())
            .fold(f64::INFINITY, f64::min);
        let mut step = sigma / 20.0;
        if let Some(p) = self.fringe_period() {
            step = step.min(p / 40.0);
        }
        step
    }

    pub fn sample(&self, lo: f64, hi: f64, steps: usize) -> MarginalCurve {
        let steps = steps.max(2);
        let h = (hi - lo) / (steps - 1) as f64;
        let points = (0..steps)
            .map(|i| {
                let x = lo + h * i as f64;
                (x, self.density(x))
            })
            .collect();
        MarginalCurve {
            theta: self.theta,
            mode: self.mode,
            points,
        }
    }

    fn steps_for(&self, lo: f64, hi: f64) -> usize {
        (((hi - lo) / self.auto_step()).ceil() as usize + 1).clamp(2, MAX_SAMPLES)
    }

    /// Sample on the default window at the automatic resolution.
    pub fn sample_auto(&self) -> MarginalCurve {
        let (lo, hi) = self.window();
        self.sample(lo, hi, self.steps_for(lo, hi))
    }

    fn check_resolution(&self, step: f64) -> Result<()> {
        if let Some(period) = self.fringe_period() {
            if step > period / 40.0 {
                return Err(Error::ResolutionTooCoarse { step, period });
            }
        }
        Ok(())
    }

    /// Fringe contrast, with the extrema refined on the closed form.
    pub fn visibility(&self, steps: Option<usize>) -> Result<VisibilityResult> {
        let (lo, hi) = self.fringe_window();
        let n = match steps {
            Some(n) => {
                let step = (hi - lo) / (n.max(2) - 1) as f64;
                self.check_resolution(step)?;
                n.max(2)
            }
            None => self.steps_for(lo, hi),
        };
        let curve = self.sample(lo, hi, n);
        visibility_of(&curve, |x| self.density(x))
    }

    /// Twice the mean gap between sign changes of the interference part.
    pub fn fringe_spacing(&self) -> Result<f64> {
        let (lo, hi) = self.fringe_window();
        let n = self.steps_for(lo, hi);
        let h = (hi - lo) / (n - 1) as f64;
        let f = |x: f64| self.interference(x);
        let mut crossings = Vec::new();
        let mut prev = (lo, f(lo));
        for i in 1..n {
            let x = lo + h * i as f64;
            let y = f(x);
            if prev.1 != 0.0 && y != 0.0 && (prev.1 < 0.0) != (y < 0.0) {
                crossings.push(bisect_root(&f, prev.0, x));
            }
            prev = (x, y);
        }
        if crossings.len() < 4 {
            return Err(Error::NoFringes);
        }
        let span = crossings[crossings.len() - 1] - crossings[0];
        Ok(2.0 * span / (crossings.len() - 1) as f64)
    }
}

fn bisect_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for an extremum of `f` on `[a, b]`.
fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, maximize: bool) -> (f64, f64) {
    let g = |x: f64| if maximize { -f(x) } else { f(x) };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Visibility of a sampled curve. `refine` is the underlying density, used
/// to polish the sampled extrema.
pub fn visibility_of<F: Fn(f64) -> f64>(curve: &MarginalCurve, refine: F) -> Result<VisibilityResult> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Err(Error::InvalidParameter("marginal needs at least three samples".into()));
    }
    let (gi, _) = pts
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.1 > acc.1 { (i, p.1) } else { acc });
    let global = pts[gi].1;
    let is_max = |i: usize| {
        i > 0 && i + 1 < pts.len() && pts[i].1 > pts[i - 1].1 && pts[i].1 > pts[i + 1].1 && pts[i].1 > 1e-9 * global
    };
    let left = (1..gi).rev().find(|&i| is_max(i));
    let right = (gi + 1..pts.len().saturating_sub(1)).find(|&i| is_max(i));
    let polish_max = |i: usize| {
        if i == 0 || i + 1 >= pts.len() {
            (pts[i].0, pts[i].1)
        } else {
            golden(&refine, pts[i - 1].0, pts[i + 1].0, true)
        }
    };
    let (x_max, i_max) = polish_max(gi);
    if left.is_none() && right.is_none() {
        return Ok(VisibilityResult {
            v: 0.0,
            i_max,
            i_min: i_max,
            x_max,
            x_min: x_max,
        });
    }
    let (from, to) = (left.unwrap_or(gi), right.unwrap_or(gi));
    let mi = (from..=to)
        .min_by(|&a, &b| pts[a].1.partial_cmp(&pts[b].1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty range");
    let (x_min, raw_min) = golden(&refine, pts[mi.saturating_sub(1)].0, pts[(mi + 1).min(pts.len() - 1)].0, false);
    let i_min = raw_min.max(0.0);
    Ok(VisibilityResult {
        v: (i_max - i_min) / (i_max + i_min),
        i_max,
        i_min,
        x_max,
        x_min,
    })
}

/// Marginal along the axis at angle `theta`, sampled on `window` with
/// `steps` points; both default to values derived from the state.
pub fn marginal(
    state: &StateSum,
    mode: usize,
    theta: f64,
    window: Option<(f64, f64)>,
    steps: Option<usize>,
) -> Result<MarginalCurve> {
    let m = QuadratureMarginal::new(state, mode, theta)?;
    let (lo, hi) = window.unwrap_or_else(|| m.window());
    let n = steps.unwrap_or_else(|| m.steps_for(lo, hi));
    Ok(m.sample(lo, hi, n))
}

pub fn visibility(state: &StateSum, mode: usize, theta: f64) -> Result<VisibilityResult> {
    QuadratureMarginal::new(state, mode, theta)?.visibility(None)
}

pub fn fringe_spacing(state: &StateSum, mode: usize, theta: f64) -> Result<f64> {
    QuadratureMarginal::new(state, mode, theta)?.fringe_spacing()
}

/// Displaced-parity expectation `(pi/2)^M W`.
pub fn parity_correlation(state: &StateSum, point: &PhasePoint) -> Result<f64> {
    let e = (PI / 2.0).powi(state.num_modes() as i32) * state.wigner(point)?;
    if e.abs() > 1.0 + 1e-8 {
        return Err(Error::ParityOutOfRange(e));
    }
    Ok(e)
}

/// `(pi^2/4) [W(a,b) + W(a,b') + W(a',b) - W(a',b')]`.
pub fn bell_chsh(state: &StateSum, a: C64, a2: C64, b: C64, b2: C64) -> Result<f64> {
    if state.num_modes() != 2 || state.has_qubit() {
        return Err(Error::InvalidParameter("CHSH needs a two-mode oscillator state".into()));
    }
    let w = |x: C64, y: C64| state.wigner(&PhasePoint::pair(x, y));
    Ok(PI * PI / 4.0 * (w(a, b)? + w(a, b2)? + w(a2, b)? - w(a2, b2)?))
}

/// Unchecked CHSH combination for optimizer loops.
#[inline]
pub fn bell_chsh_fast(state: &StateSum, a: C64, a2: C64, b: C64, b2: C64) -> f64 {
    let w = |x: C64, y: C64| state.wigner_unchecked(&[x, y]);
    PI * PI / 4.0 * (w(a, b) + w(a, b2) + w(a2, b) - w(a2, b2))
}

/// `1 - Tr rho^2`.
pub fn linear_entropy(state: &StateSum) -> Result<f64> {
    Ok(1.0 - state.purity()?)
}
