use std::f64::consts::PI;

use proptest::prelude::*;
use thermocat::bell::CIRELSON;
use thermocat::fock::{fock_loss, oracle_bell, projector_states, OracleState, TwoModeOperator};
use thermocat::gaussian::{add_vacuum_mode, apply_beam_splitter, apply_loss, displace, phase_rotate};
use thermocat::observables::{bell_chsh, parity_correlation, QuadratureMarginal};
use thermocat::states::{
    displaced_thermal, tensor_product, thermal_superposition, two_mode_thermal_entangled, KerrInteractionSpec, Sign,
};
use thermocat::{PhasePoint, StateSum, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn superposition() -> impl Strategy<Value = StateSum> {
    (1.0..6.0f64, 0.3..3.0f64, 0.2..PI, sign()).prop_map(|(v, d, phi, s)| {
        thermal_superposition(v, c(d, 0.0), KerrInteractionSpec::new(phi).unwrap(), s).unwrap()
    })
}

fn entangled() -> impl Strategy<Value = StateSum> {
    (1.0..10.0f64, 0.3..4.0f64, sign())
        .prop_map(|(v, d, s)| two_mode_thermal_entangled(v, c(d, 0.0), s).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cirelson_bound_at_fixed_settings(s in entangled(), a in complex(1.0), a2 in complex(1.0), b in complex(1.0), b2 in complex(1.0)) {
        prop_assert!(bell_chsh(&s, a, a2, b, b2).unwrap().abs() <= CIRELSON + 1e-9);
    }

    #[test]
    fn separable_states_obey_chsh(
        v1 in 1.0..5.0f64, v2 in 1.0..5.0f64, d1 in complex(2.0), d2 in complex(2.0),
        a in complex(1.0), a2 in complex(1.0), b in complex(1.0), b2 in complex(1.0),
    ) {
        let s = tensor_product(&displaced_thermal(v1, d1).unwrap(), &displaced_thermal(v2, d2).unwrap()).unwrap();
        prop_assert!(bell_chsh(&s, a, a2, b, b2).unwrap().abs() <= 2.0 + 1e-9);
    }

    #[test]
    fn loss_is_a_semigroup(s in superposition(), g1 in 0.0..1.0f64, g2 in 0.0..1.0f64, z in complex(2.0)) {
        let two = apply_loss(&apply_loss(&s, 0, g1).unwrap(), 0, g2).unwrap();
        let one = apply_loss(&s, 0, g1 + g2).unwrap();
        let p = PhasePoint::single(z);
        let (w2, w1) = (two.wigner(&p).unwrap(), one.wigner(&p).unwrap());
        prop_assert!((w2 - w1).abs() < 1e-10, "{w2} vs {w1}");
    }

    #[test]
    fn beam_splitter_keeps_trace_and_purity(s in superposition(), t in 0.0..1.0f64) {
        let two = add_vacuum_mode(&s).unwrap();
        let out = apply_beam_splitter(&two, 0, 1, t).unwrap();
        prop_assert!(close(out.trace().unwrap(), 1.0, 1e-10));
        prop_assert!(close(out.purity().unwrap(), s.purity().unwrap(), 1e-9));
    }

    #[test]
    fn displacement_and_rotation_are_invertible(s in superposition(), delta in complex(3.0), theta in -PI..PI, z in complex(2.0)) {
        let back = displace(&displace(&s, 0, delta).unwrap(), 0, -delta).unwrap();
        let turned = phase_rotate(&phase_rotate(&s, 0, theta).unwrap(), 0, -theta).unwrap();
        let p = PhasePoint::single(z);
        let w = s.wigner(&p).unwrap();
        prop_assert!((back.wigner(&p).unwrap() - w).abs() < 1e-12);
        prop_assert!((turned.wigner(&p).unwrap() - w).abs() < 1e-12);
        prop_assert!(close(back.purity().unwrap(), s.purity().unwrap(), 1e-10));
    }

    #[test]
    fn marginals_are_normalized(s in superposition(), theta in 0.0..PI) {
        let m = QuadratureMarginal::new(&s, 0, theta).unwrap();
        prop_assert!((m.sample_auto().integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn parity_stays_in_range(s in entangled(), a in complex(3.0), b in complex(3.0)) {
        prop_assert!(parity_correlation(&s, &PhasePoint::pair(a, b)).unwrap().abs() <= 1.0 + 1e-12);
    }
}

/// Same invariants evaluated inside the Fock oracle.
#[test]
fn oracle_channels_and_bounds() {
    let (rho, _) = projector_states(3.0, c(1.0, 0.0), PI, Sign::Minus, 40).unwrap();
    assert!(rho.min_eigenvalue() > -1e-8 && rho.hermiticity_error() < 1e-10);

    let one = fock_loss(&fock_loss(&rho, 0.2).unwrap(), 0.3).unwrap();
    let both = fock_loss(&rho, 0.5).unwrap();
    for z in [c(0.0, 0.0), c(0.3, -0.4), c(-1.0, 0.2)] {
        assert!((one.wigner(&[z]) - both.wigner(&[z])).abs() < 1e-10);
    }

    let split = TwoModeOperator::with_vacuum(&rho).beam_splitter(0.3).unwrap();
    assert!((split.trace() - rho.trace()).abs() < 1e-10);
    assert!((split.purity() - rho.purity()).abs() < 1e-8);
    assert!(split.min_eigenvalue() > -1e-8 && split.hermiticity_error() < 1e-10);

    let settings = [c(0.0, 0.05), c(0.1, -0.2), c(-0.3, 0.0), c(0.2, 0.2)];
    let b = oracle_bell(&split, settings[0], settings[1], settings[2], settings[3]);
    assert!(b.abs() <= CIRELSON + 1e-9);
}
