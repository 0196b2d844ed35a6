use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};
use thermocat::agreement::{self, AgreementRow};
use thermocat::bell::{maximize_bell_with, scales_for, survival_time, BellOptions, BellResult};
use thermocat::fock::{cutoff_selector, projector_states};
use thermocat::gaussian::{apply_loss_all, displace, PhasePoint, StateSum};
use thermocat::observables::{linear_entropy, MarginalCurve, QuadratureMarginal};
use thermocat::reference::{success_probability_closed, success_probability_trace, temperature_of_variance};
use thermocat::states::{
    bs_split_superposition, displaced_thermal, measure_qubit_superposed_basis, micro_macro_entangled,
    recorded_raw_trace, success_probability, thermal_superposition, two_mode_thermal_entangled, KerrInteractionSpec,
    Sign,
};

use crate::args::{Case, Grid, RunConfig, StateKind};
use crate::error::Result;
use crate::output::{fmt, num, nums, Output};

/// What a subcommand hands back for the manifest.
#[derive(Debug, Default)]
pub struct Report {
    pub params: Value,
    pub results: Value,
    pub unconverged: usize,
    pub oracle_failures: usize,
}

const BELL_HEADER: [&str; 10] = ["b_max", "a_re", "a_im", "a2_re", "a2_im", "b_re", "b_im", "b2_re", "b2_im", "converged"];

fn sign_str(s: Sign) -> String {
    s.symbol().to_string()
}

fn kerr(phi: f64) -> Result<KerrInteractionSpec> {
    Ok(KerrInteractionSpec::new(phi)?)
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn curve_rows(curve: &MarginalCurve) -> Vec<Vec<String>> {
    curve.points.iter().map(|(x, y)| vec![fmt(*x), fmt(*y)]).collect()
}

fn bell_fields(r: &BellResult) -> Vec<String> {
    let mut v = vec![fmt(r.b_max)];
    for z in r.settings {
        v.push(fmt(z.re));
        v.push(fmt(z.im));
    }
    v.push(r.converged.to_string());
    v
}

fn bell_json(r: &BellResult) -> Value {
    json!({
        "b_max": num(r.b_max),
        "settings": r.settings.iter().map(|z| json!([num(z.re), num(z.im)])).collect::<Vec<_>>(),
        "converged": r.converged,
    })
}

fn bell_opts(v: f64, d: f64) -> BellOptions {
    BellOptions::default().with_scales(&scales_for(v, d))
}

fn sample(m: &QuadratureMarginal, grid: Option<Grid>, window: (f64, f64), max_points: usize) -> MarginalCurve {
    match grid {
        Some(g) => m.sample(g.min, g.max, g.steps),
        None => {
            let n = (((window.1 - window.0) / m.auto_step()).ceil() as usize + 1).clamp(2, max_points);
            m.sample(window.0, window.1, n)
        }
    }
}

/// Central stretch of at most `periods` fringes inside the state's window.
fn fringe_view(m: &QuadratureMarginal, periods: f64) -> (f64, f64) {
    let (lo, hi) = m.window();
    match m.fringe_period() {
        Some(p) => {
            let (flo, fhi) = m.fringe_window();
            let mid = 0.5 * (flo + fhi);
            ((mid - 0.5 * periods * p).max(lo), (mid + 0.5 * periods * p).min(hi))
        }
        None => (lo, hi),
    }
}

pub fn fig1(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let v = cfg.variance.unwrap_or(100.0);
    let d = cfg.displacement.unwrap_or(100.0);
    let phi = cfg.phi.unwrap_or(PI);
    let sign = cfg.sign.unwrap_or(Sign::Minus);
    let grid = cfg.grid(None)?;
    let state = thermal_superposition(v, c(d), kerr(phi)?, sign)?;

    let mx = QuadratureMarginal::new(&state, 0, 0.0)?;
    let mp = QuadratureMarginal::new(&state, 0, PI / 2.0)?;
    let cx = sample(&mx, grid, mx.window(), 200_001);
    let cp = sample(&mp, grid, fringe_view(&mp, 200.0), 200_001);
    out.csv("fig1_marginal_x.csv", &["x", "density"], curve_rows(&cx))?;
    out.csv("fig1_marginal_p.csv", &["p", "density"], curve_rows(&cp))?;

    let mut results = Map::new();
    for (name, m) in [("x", &mx), ("p", &mp)] {
        let vis = m.visibility(None)?;
        let spacing = m.fringe_spacing().ok();
        results.insert(
            name.into(),
            json!({
                "visibility": num(vis.v),
                "i_max": num(vis.i_max),
                "i_min": num(vis.i_min),
                "fringe_spacing": spacing.map(num),
            }),
        );
    }
    let sampled = QuadratureMarginal::new(&state, 0, 0.0)?.sample_auto();
    results.insert("x_peaks".into(), nums(&sampled.peaks(0.5)));
    results.insert("x_peak_grid_step".into(), num(sampled.step()));
    if d != 0.0 {
        results.insert("spacing_pi_over_2d".into(), num(PI / (2.0 * d.abs())));
    }
    Ok(Report {
        params: json!({ "variance": num(v), "displacement": num(d), "phi": num(phi), "sign": sign_str(sign) }),
        results: Value::Object(results),
        ..Report::default()
    })
}

pub fn fig2(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let v = cfg.variance.unwrap_or(100.0);
    let d = cfg.displacement.unwrap_or(1.0);
    let phi = cfg.phi.unwrap_or(PI);
    let grid = cfg.grid(Some(Grid {
        min: -3.0,
        max: 3.0,
        steps: 121,
    }))?
    .expect("default grid");
    let axis = grid.points();
    let mut results = Map::new();
    let mut states = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let label = if sign == Sign::Plus { "plus" } else { "minus" };
        let state = match thermal_superposition(v, c(d), kerr(phi)?, sign) {
            Ok(s) => s,
            Err(thermocat::Error::ZeroTrace { .. }) => {
                results.insert(label.into(), json!({ "vanishing": true }));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut rows = Vec::with_capacity(axis.len() * axis.len());
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for &p in &axis {
            for &x in &axis {
                let w = state.wigner(&PhasePoint::single(C64::new(x, p)))?;
                if w > best.0 {
                    best = (w, x, p);
                }
                if w < worst.0 {
                    worst = (w, x, p);
                }
                rows.push(vec![fmt(x), fmt(p), fmt(w)]);
            }
        }
        out.csv(&format!("fig2_wigner_{label}.csv"), &["x", "p", "w"], rows)?;
        let origin = state.wigner(&PhasePoint::single(C64::new(0.0, 0.0)))?;
        results.insert(
            label.into(),
            json!({
                "w_origin": num(origin),
                "grid_max": { "w": num(best.0), "x": num(best.1), "p": num(best.2) },
                "grid_min": { "w": num(worst.0), "x": num(worst.1), "p": num(worst.2) },
            }),
        );
        states.push((label, state));
    }
    for (axis_name, theta) in [("x", 0.0), ("p", PI / 2.0)] {
        let margs: Vec<QuadratureMarginal> = states
            .iter()
            .map(|(_, s)| QuadratureMarginal::new(s, 0, theta))
            .collect::<std::result::Result<_, _>>()?;
        let mut header = vec![axis_name.to_string()];
        header.extend(states.iter().map(|(l, _)| (*l).to_string()));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = axis.iter().map(|&x| {
            let mut r = vec![fmt(x)];
            r.extend(margs.iter().map(|m| fmt(m.density(x))));
            r
        });
        out.csv(&format!("fig2_marginal_{axis_name}.csv"), &header, rows)?;
    }

    let (tp, tm) = success_probability_trace(v, d, phi);
    let (fp, fm) = success_probability_closed(v, d);
    let (ov, od) = (5.0, 1.0);
    let n = cutoff_selector(ov, od, 0.0, 1e-12);
    let (_, raw) = projector_states(ov, c(od), PI, Sign::Minus, n)?;
    results.insert(
        "probabilities".into(),
        json!({
            "trace_based": { "plus": num(tp), "minus": num(tm) },
            "formula_1_pm_exp": { "plus": num(fp), "minus": num(fm) },
            "oracle_check": {
                "variance": num(ov),
                "displacement": num(od),
                "oracle_minus": num(raw / 4.0),
                "trace_based_minus": num(success_probability_trace(ov, od, PI).1),
                "formula_minus": num(success_probability_closed(ov, od).1),
            },
        }),
    );
    Ok(Report {
        params: json!({
            "variance": num(v), "displacement": num(d), "phi": num(phi),
            "grid": { "min": num(grid.min), "max": num(grid.max), "steps": grid.steps },
        }),
        results: Value::Object(results),
        ..Report::default()
    })
}

pub fn fig3(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let v = cfg.variance.unwrap_or(5.0);
    let d = cfg.displacement.unwrap_or(2000.0);
    let phi = cfg.phi.unwrap_or(PI / 1000.0);
    let sign = cfg.sign.unwrap_or(Sign::Minus);
    let grid = cfg.grid(None)?;
    let state = thermal_superposition(v, c(d), kerr(phi)?, sign)?;
    // move the lobe midpoint to the origin
    let mid = 0.5 * (c(d) + C64::from_polar(d, phi));
    let centered = displace(&state, 0, -mid)?;
    let theta = phi / 2.0;
    let mx = QuadratureMarginal::new(&centered, 0, theta)?;
    let mp = QuadratureMarginal::new(&centered, 0, theta + PI / 2.0)?;
    let cx = sample(&mx, grid, fringe_view(&mx, 200.0), 200_001);
    let cp = sample(&mp, grid, mp.window(), 200_001);
    out.csv("fig3_marginal_x_rotated.csv", &["x_rotated", "density"], curve_rows(&cx))?;
    out.csv("fig3_marginal_p_rotated.csv", &["p_rotated", "density"], curve_rows(&cp))?;
    let vis = mx.visibility(None)?;
    let lobes = QuadratureMarginal::new(&centered, 0, theta + PI / 2.0)?.sample_auto().peaks(0.5);
    Ok(Report {
        params: json!({ "variance": num(v), "displacement": num(d), "phi": num(phi), "sign": sign_str(sign) }),
        results: json!({
            "trace": num(state.trace()?),
            "rotation": num(theta),
            "recentering_shift": [num(-mid.re), num(-mid.im)],
            "visibility_x_rotated": num(vis.v),
            "fringe_period": mx.fringe_period().map(num),
            "fringe_spacing": mx.fringe_spacing().ok().map(num),
            "p_rotated_lobes": nums(&lobes),
        }),
        ..Report::default()
    })
}

const FIG4A_D: [f64; 11] = [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0, 200.0, 300.0];
const FIG4B_V: [f64; 11] = [1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

pub fn fig4a(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let variances = cfg.variance.map_or(vec![100.0, 1000.0], |v| vec![v]);
    let sign = cfg.sign.unwrap_or(Sign::Plus);
    let ds = cfg.grid(None)?.map_or(FIG4A_D.to_vec(), |g| g.points());
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut unconverged = 0;
    for &v in &variances {
        for &d in &ds {
            let state = two_mode_thermal_entangled(v, c(d), sign)?;
            let r = maximize_bell_with(&state, &bell_opts(v, d))?;
            unconverged += usize::from(!r.converged);
            let mut row = vec![fmt(v), fmt(d)];
            row.extend(bell_fields(&r));
            rows.push(row);
            table.push(json!({ "variance": num(v), "displacement": num(d), "bell": bell_json(&r) }));
        }
    }
    let mut header = vec!["V", "d"];
    header.extend(BELL_HEADER);
    out.csv("fig4a.csv", &header, rows)?;
    Ok(Report {
        params: json!({ "variances": nums(&variances), "displacements": nums(&ds), "sign": sign_str(sign) }),
        results: json!({ "rows": table }),
        unconverged,
        ..Report::default()
    })
}

pub fn fig4b(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let d = cfg.displacement.unwrap_or(0.0);
    let phi = cfg.phi.unwrap_or(PI);
    let sign = cfg.sign.unwrap_or(Sign::Plus);
    let t = cfg.transmittance.unwrap_or(0.5);
    let vs = match cfg.grid(None)? {
        Some(g) => g.points(),
        None => cfg.variance.map_or(FIG4B_V.to_vec(), |v| vec![v]),
    };
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut unconverged = 0;
    for &v in &vs {
        let mut row = vec![fmt(v), fmt(d)];
        match bs_split_superposition(v, c(d), kerr(phi)?, sign, t) {
            Ok(state) => {
                let r = maximize_bell_with(&state, &bell_opts(v, d))?;
                unconverged += usize::from(!r.converged);
                row.extend(bell_fields(&r));
                row.push(String::new());
                table.push(json!({ "variance": num(v), "bell": bell_json(&r) }));
            }
            Err(thermocat::Error::ZeroTrace { .. }) => {
                row.extend(std::iter::repeat_n(String::new(), BELL_HEADER.len()));
                row.push("vanishing state".into());
                table.push(json!({ "variance": num(v), "note": "vanishing state" }));
            }
            Err(e) => return Err(e.into()),
        }
        rows.push(row);
    }
    let mut header = vec!["V", "d"];
    header.extend(BELL_HEADER);
    header.push("note");
    out.csv("fig4b.csv", &header, rows)?;
    Ok(Report {
        params: json!({
            "variances": nums(&vs), "displacement": num(d), "phi": num(phi),
            "sign": sign_str(sign), "transmittance": num(t),
        }),
        results: json!({ "rows": table }),
        unconverged,
        ..Report::default()
    })
}

struct LossCase {
    name: &'static str,
    v: f64,
    d: f64,
    phi: f64,
    sign: Sign,
    t: f64,
}

impl LossCase {
    fn state(&self, gamma_t: f64) -> thermocat::Result<StateSum> {
        let split = bs_split_superposition(self.v, c(self.d), KerrInteractionSpec::new(self.phi)?, self.sign, self.t)?;
        apply_loss_all(&split, gamma_t)
    }
}

pub fn decoherence(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let preset = |case: Case| match case {
        Case::V3d1 => LossCase { name: "v3d1", v: 3.0, d: 1.0, phi: PI, sign: Sign::Minus, t: 0.5 },
        Case::Cat => LossCase { name: "cat", v: 1.0, d: 2.2, phi: PI, sign: Sign::Plus, t: 0.5 },
        Case::V10d0 => LossCase { name: "v10d0", v: 10.0, d: 0.0, phi: PI, sign: Sign::Plus, t: 0.5 },
        Case::Custom => LossCase {
            name: "custom",
            v: cfg.variance.unwrap_or(3.0),
            d: cfg.displacement.unwrap_or(1.0),
            phi: cfg.phi.unwrap_or(PI),
            sign: cfg.sign.unwrap_or(Sign::Minus),
            t: cfg.transmittance.unwrap_or(0.5),
        },
    };
    let custom_given = cfg.variance.is_some() || cfg.displacement.is_some();
    let cases: Vec<LossCase> = match cfg.case {
        Some(c) => vec![preset(c)],
        None if custom_given => vec![preset(Case::Custom)],
        None => vec![preset(Case::V3d1), preset(Case::Cat), preset(Case::V10d0)],
    };
    let gammas = match cfg.gamma_t {
        Some(g) if cfg.grid(None)?.is_none() => vec![g],
        _ => cfg
            .grid(Some(Grid {
                min: 0.0,
                max: 0.1,
                steps: 41,
            }))?
            .expect("default grid")
            .points(),
    };
    if gammas.iter().any(|g| *g < 0.0) {
        return Err(crate::error::CliError::BadParam("gamma-t grid must be non-negative".into()));
    }
    let mut results = Map::new();
    let mut params = Map::new();
    let mut unconverged = 0;
    for case in &cases {
        let opts = bell_opts(case.v, case.d);
        let mut rows = Vec::new();
        for &g in &gammas {
            let r = maximize_bell_with(&case.state(g)?, &opts)?;
            unconverged += usize::from(!r.converged);
            let mut row = vec![fmt(g)];
            row.extend(bell_fields(&r));
            rows.push(row);
        }
        let mut header = vec!["gamma_t"];
        header.extend(BELL_HEADER);
        out.csv(&format!("decoherence_{}.csv", case.name), &header, rows)?;
        let crossing = match survival_time(|g| case.state(g), &opts, 1e-3) {
            Ok(s) => json!({
                "gamma_t": num(s.gamma_t),
                "b_max_at_zero": num(s.b_max_at_zero),
                "used_scan": s.used_scan,
            }),
            Err(thermocat::Error::NoViolationAtZero(b)) => json!({ "no_violation_at_zero": num(b) }),
            Err(e) => return Err(e.into()),
        };
        results.insert(case.name.into(), json!({ "crossing": crossing }));
        params.insert(
            case.name.into(),
            json!({
                "variance": num(case.v), "displacement": num(case.d), "phi": num(case.phi),
                "sign": sign_str(case.sign), "transmittance": num(case.t),
            }),
        );
    }
    params.insert("gamma_t".into(), nums(&gammas));
    Ok(Report {
        params: Value::Object(params),
        results: Value::Object(results),
        unconverged,
        ..Report::default()
    })
}

pub fn oracle_check(_cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let seed = 0x0a11_c0de;
    let rows = agreement::run(seed)?;
    let failures = rows.iter().filter(|r| !r.passes()).count();
    let line = |r: &AgreementRow| {
        vec![
            r.family.name().to_string(),
            fmt(r.v),
            fmt(r.d),
            r.phi.map(fmt).unwrap_or_default(),
            r.sign.map(sign_str).unwrap_or_default(),
            fmt(r.wigner_err),
            fmt(r.purity_err),
            fmt(r.photon_err),
            r.bell_err.map(fmt).unwrap_or_default(),
            r.vanishing.to_string(),
            r.passes().to_string(),
        ]
    };
    out.csv(
        "oracle_check.csv",
        &[
            "family", "V", "d", "phi", "sign", "wigner_err", "purity_err", "photon_err", "bell_err", "vanishing", "pass",
        ],
        rows.iter().map(line),
    )?;
    let worst = |f: fn(&AgreementRow) -> f64| num(rows.iter().map(f).fold(0.0, f64::max));
    Ok(Report {
        params: json!({
            "seed": seed,
            "tolerances": {
                "wigner": num(agreement::WIGNER_TOL), "purity": num(agreement::PURITY_TOL),
                "mean_photon": num(agreement::PHOTON_TOL), "bell": num(agreement::BELL_TOL),
            },
        }),
        results: json!({
            "cases": rows.len(),
            "failures": failures,
            "worst": {
                "wigner": worst(|r| r.wigner_err),
                "purity": worst(|r| r.purity_err),
                "mean_photon": worst(|r| r.photon_err),
                "bell": worst(|r| r.bell_err.unwrap_or(0.0)),
            },
        }),
        oracle_failures: failures,
        ..Report::default()
    })
}

fn describe(state: &StateSum) -> Result<Map<String, Value>> {
    let mut m = Map::new();
    m.insert("trace".into(), num(state.trace()?));
    m.insert("purity".into(), num(state.purity()?));
    m.insert("linear_entropy".into(), num(linear_entropy(state)?));
    let oscillators = state.num_modes();
    let photons: Vec<f64> = (0..oscillators)
        .map(|k| state.mean_photon(k))
        .collect::<thermocat::Result<_>>()?;
    m.insert("mean_photon".into(), nums(&photons));
    m.insert("mean_photon_total".into(), num(photons.iter().sum()));
    if let Some(raw) = recorded_raw_trace(state) {
        m.insert("raw_trace".into(), num(raw));
    }
    Ok(m)
}

pub fn state_info(cfg: &RunConfig, out: &mut Output) -> Result<Report> {
    let kind = cfg.state.unwrap_or(StateKind::Superposition);
    let v = cfg.variance.unwrap_or(3.0);
    let d = cfg.displacement.unwrap_or(1.0);
    let phi = cfg.phi.unwrap_or(PI);
    let sign = cfg.sign.unwrap_or(Sign::Minus);
    let t = cfg.transmittance.unwrap_or(0.5);
    let g = cfg.gamma_t.unwrap_or(0.0);
    let k = kerr(phi)?;
    let mut extra = Map::new();
    let state = match kind {
        StateKind::Thermal => displaced_thermal(v, c(d))?,
        StateKind::Superposition => {
            extra.insert("success_probability".into(), num(success_probability(v, c(d), k, sign)?));
            thermal_superposition(v, c(d), k, sign)?
        }
        StateKind::MicroMacro => micro_macro_entangled(v, c(d), k)?,
        StateKind::Measured => {
            let (s, outcome) = measure_qubit_superposed_basis(&micro_macro_entangled(v, c(d), k)?, sign)?;
            extra.insert("outcome_probability".into(), num(outcome.probability));
            s
        }
        StateKind::TwoMode => two_mode_thermal_entangled(v, c(d), sign)?,
        StateKind::Split => bs_split_superposition(v, c(d), k, sign, t)?,
    };
    let state = if g > 0.0 { apply_loss_all(&state, g)? } else { state };
    let mut info = describe(&state)?;
    info.extend(extra);
    info.insert("temperature".into(), num(temperature_of_variance(v)?));
    let info = Value::Object(info);
    out.json("state_info.json", &info)?;
    println!("{}", serde_json::to_string_pretty(&info)?);
    Ok(Report {
        params: json!({
            "state": kind.name(), "variance": num(v), "displacement": num(d), "phi": num(phi),
            "sign": sign_str(sign), "transmittance": num(t), "gamma_t": num(g),
        }),
        results: info,
        ..Report::default()
    })
}
