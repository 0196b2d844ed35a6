//! Closed form against the truncated Fock-space oracle, shared by several
//! test targets.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermocat::fock::{
    cutoff_selector, fock_micro_macro, fock_two_mode_entangled, oracle_bell, oracle_bs_and_loss, projector_states,
    OracleState,
};
use thermocat::observables::bell_chsh;
use thermocat::states::{
    bs_split_superposition, micro_macro_entangled, thermal_superposition, two_mode_thermal_entangled,
    KerrInteractionSpec, Sign,
};
use thermocat::{Error, PhasePoint, StateSum, C64};

pub type Res = Result<(), String>;

fn check<F: FnOnce() -> String>(ok: bool, msg: F) -> Res {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

const VARIANCES: [f64; 3] = [1.0, 3.0, 5.0];
const DISPLACEMENTS: [f64; 3] = [0.0, 1.0, 2.0];
const PHASES: [f64; 2] = [PI / 2.0, PI];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    C64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

fn compare<O: OracleState>(label: &str, closed: &StateSum, oracle: &O, rng: &mut ChaCha8Rng) -> Res {
    let dim = closed.phase_space_dim();
    if dim != oracle.phase_dim() {
        return Err(format!("{label}: dimension mismatch"));
    }
    for _ in 0..20 {
        let pt: Vec<C64> = (0..dim).map(|_| random_point(rng, 2.0)).collect();
        let w = closed.wigner(&PhasePoint::new(pt.clone())).map_err(|e| e.to_string())?;
        let o = oracle.wigner(&pt);
        check((w - o).abs() < 1e-6, || format!("{label} wigner at {pt:?}: {w} vs {o}"))?;
    }
    let (p, po) = (closed.purity().map_err(|e| e.to_string())?, oracle.purity());
    check((p - po).abs() < 1e-6, || format!("{label} purity {p} vs {po}"))?;
    let modes = if closed.has_qubit() { 1 } else { closed.num_modes() };
    for m in 0..modes {
        let (n, no) = (closed.mean_photon(m).map_err(|e| e.to_string())?, oracle.mean_photon(m));
        check((n - no).abs() < 1e-6, || format!("{label} mean photon {m}: {n} vs {no}"))?;
    }
    Ok(())
}

fn compare_bell<O: OracleState>(label: &str, closed: &StateSum, oracle: &O, rng: &mut ChaCha8Rng) -> Res {
    for _ in 0..10 {
        let s: Vec<C64> = (0..4).map(|_| random_point(rng, 1.0)).collect();
        let b = bell_chsh(closed, s[0], s[1], s[2], s[3]).map_err(|e| e.to_string())?;
        let bo = oracle_bell(oracle, s[0], s[1], s[2], s[3]);
        check((b - bo).abs() < 1e-4, || format!("{label} bell at {s:?}: {b} vs {bo}"))?;
    }
    Ok(())
}

pub fn superposition_family() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for v in VARIANCES {
        for d in DISPLACEMENTS {
            let n = cutoff_selector(v, d, 2.0, 1e-10);
            for phi in PHASES {
                for sign in [Sign::Plus, Sign::Minus] {
                    let label = format!("sup V={v} d={d} phi={phi} {}", sign.symbol());
                    let kerr = KerrInteractionSpec::new(phi).map_err(|e| e.to_string())?;
                    match (
                        thermal_superposition(v, c(d, 0.0), kerr, sign),
                        projector_states(v, c(d, 0.0), phi, sign, n),
                    ) {
                        (Ok(s), Ok((o, _))) => compare(&label, &s, &o, &mut rng)?,
                        (Err(Error::ZeroTrace { .. }), Err(Error::ZeroTrace { .. })) => {}
                        (a, b) => return Err(format!("{label}: {:?} / {:?}", a.err(), b.err())),
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn micro_macro_family() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for v in VARIANCES {
        for d in DISPLACEMENTS {
            let n = cutoff_selector(v, d, 2.0, 1e-10);
            for phi in PHASES {
                let label = format!("ent V={v} d={d} phi={phi}");
                let s = micro_macro_entangled(v, c(d, 0.0), KerrInteractionSpec::new(phi).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                let o = fock_micro_macro(v, c(d, 0.0), phi, n).map_err(|e| e.to_string())?;
                compare(&label, &s, &o, &mut rng)?;
                for sign in [Sign::Plus, Sign::Minus] {
                    match (thermocat::states::measure_qubit_superposed_basis(&s, sign), o.measure_superposed(sign)) {
                        (Ok((ms, out)), Ok((mo, p))) => {
                            check((out.probability - p).abs() < 1e-8, || format!("{label} P{}", sign.symbol()))?;
                            compare(&format!("{label} measured {}", sign.symbol()), &ms, &mo, &mut rng)?;
                        }
                        (Err(Error::ZeroTrace { .. }), Err(Error::ZeroTrace { .. })) => {}
                        (a, b) => return Err(format!("{label} {}: {:?} / {:?}", sign.symbol(), a.err(), b.err())),
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn two_mode_family() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for v in VARIANCES {
        for d in DISPLACEMENTS {
            let n = cutoff_selector(v, d, 2.0, 1e-10);
            for sign in [Sign::Plus, Sign::Minus] {
                let label = format!("tm V={v} d={d} {}", sign.symbol());
                match (
                    two_mode_thermal_entangled(v, c(d, 0.0), sign),
                    fock_two_mode_entangled(v, c(d, 0.0), sign, n),
                ) {
                    (Ok(s), Ok(o)) => {
                        compare(&label, &s, &o, &mut rng)?;
                        compare_bell(&label, &s, &o, &mut rng)?;
                    }
                    (Err(Error::ZeroTrace { .. }), Err(Error::ZeroTrace { .. })) => {}
                    (a, b) => return Err(format!("{label}: {:?} / {:?}", a.err(), b.err())),
                }
            }
        }
    }
    Ok(())
}

pub fn split_family() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (v, d, phi, sign, gt) in [
        (1.0, 1.0, PI, Sign::Plus, 0.0),
        (3.0, 1.0, PI, Sign::Minus, 0.0),
        (3.0, 1.0, PI / 2.0, Sign::Plus, 0.1),
        (3.0, 0.0, PI, Sign::Plus, 0.05),
        (1.0, 1.5, PI, Sign::Minus, 0.3),
    ] {
        let label = format!("split V={v} d={d} phi={phi} {} gt={gt}", sign.symbol());
        let kerr = KerrInteractionSpec::new(phi).map_err(|e| e.to_string())?;
        let s = bs_split_superposition(v, c(d, 0.0), kerr, sign, 0.5).map_err(|e| e.to_string())?;
        let s = thermocat::gaussian::apply_loss_all(&s, gt).map_err(|e| e.to_string())?;
        let n = cutoff_selector(v, d, 2.0, 1e-10);
        let (single, _) = projector_states(v, c(d, 0.0), phi, sign, n).map_err(|e| e.to_string())?;
        let o = oracle_bs_and_loss(&single, 0.5, gt).map_err(|e| e.to_string())?;
        compare(&label, &s, &o, &mut rng)?;
        compare_bell(&label, &s, &o, &mut rng)?;
    }
    Ok(())
}
