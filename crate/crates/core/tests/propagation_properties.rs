use std::f64::consts::{FRAC_PI_2, PI};

use double_lambda::checks::{dissipation_order, oracle_gap, reference_protocols};
use double_lambda::efficiency::constant_efficiency_closed;
use double_lambda::propagation::*;
use double_lambda::protocols::*;
use proptest::prelude::*;

fn fine() -> IntegratorOptions {
    IntegratorOptions::with_density(80.0)
}

#[test]
fn norm_never_increases() {
    for alpha in [1.0, 10.0, 100.0] {
        for spec in reference_protocols(alpha) {
            let traj = propagate_reduced(&spec.profile().unwrap(), alpha, FieldState::INCIDENT_PROBE, &Default::default()).unwrap();
            for w in traj.states.windows(2) {
                assert!(w[1].norm_sqr() <= w[0].norm_sqr() + 1e-15);
            }
        }
    }
}

#[test]
fn dissipation_identity_converges() {
    let p = adiabatic_protocol(10.0, 5.0, 1.0).unwrap();
    let (order, res) = dissipation_order(&p, &[8.0, 16.0, 32.0, 64.0]).unwrap();
    assert!((3.5..=4.5).contains(&order), "{order} {res:?}");
    assert!(res.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn lab_and_adiabatic_frames_agree_pointwise() {
    for alpha in [1.0, 10.0, 100.0] {
        for spec in reference_protocols(alpha) {
            let p = spec.profile().unwrap();
            // the α = 1 logistic ramp is only 0.05 wide
            let opts = IntegratorOptions::with_density(320.0);
            let lab = propagate_reduced(&p, alpha, FieldState::INCIDENT_PROBE, &opts).unwrap();
            let start = to_adiabatic(p.theta_before_entry(), FieldState::INCIDENT_PROBE);
            let adia = propagate_adiabatic(&p, alpha, start, &opts).unwrap();
            assert_eq!(lab.zeta, adia.zeta);
            for ((s, t), a) in lab.states.iter().zip(&lab.theta).zip(&adia.states) {
                let rotated = to_adiabatic(*t, *s);
                assert!((rotated.x - a.x).abs() < 1e-8 && (rotated.y - a.y).abs() < 1e-8);
            }
            let out = from_adiabatic(p.theta_after_exit(), adia.after_exit);
            assert!((out.omega_s - lab.final_state().omega_s).abs() < 1e-8);
        }
    }
}

#[test]
fn halving_the_step_cuts_error_sixteenfold() {
    let alpha = 10.0;
    let p = constant_protocol(alpha).unwrap();
    let exact = constant_efficiency_closed(alpha).unwrap().sqrt();
    let err = |d: f64| {
        let s = propagate_reduced_final(&p, alpha, FieldState::INCIDENT_PROBE, &IntegratorOptions::with_density(d))
            .unwrap()
            .omega_s;
        (s - exact).abs()
    };
    for d in [2.0, 4.0] {
        let ratio = err(d) / err(2.0 * d);
        assert!((13.0..19.0).contains(&ratio), "density {d}: ratio {ratio}");
    }
}

#[test]
fn exact_closure_reproduces_reduced_model() {
    for alpha in [1.0, 10.0, 100.0] {
        for spec in reference_protocols(alpha) {
            let gap = oracle_gap(&spec.profile().unwrap(), &Default::default()).unwrap();
            assert!(gap < 1e-8, "alpha={alpha} {}: {gap}", spec.protocol.name());
        }
    }
}

#[test]
fn dephasing_lowers_conversion() {
    use double_lambda::bloch_steady::Rates;
    let p = constant_protocol(20.0).unwrap();
    let clean = propagate_exact(&p, 20.0, &Rates::symmetric(1.0), FieldState::INCIDENT_PROBE, &Default::default())
        .unwrap()
        .conversion_efficiency();
    let noisy = propagate_exact(&p, 20.0, &Rates::new(1.0, 1.0, 0.05).unwrap(), FieldState::INCIDENT_PROBE, &Default::default())
        .unwrap()
        .conversion_efficiency();
    assert!(noisy < clean);
}

#[test]
fn constant_rate_at_branch_point_matches_adiabatic_integration() {
    let alpha = 2.0 * PI;
    let p = constant_protocol(alpha).unwrap();
    let traj = propagate_adiabatic(&p, alpha, AdiabaticState::new(0.0, 1.0), &fine()).unwrap();
    let eta = traj.after_exit.y.powi(2);
    let expected = (-PI).exp() * (1.0 + PI / 2.0).powi(2);
    assert!((eta - expected).abs() < 1e-10, "{eta} vs {expected}");
}

proptest! {
    #[test]
    fn frame_round_trip(theta in -4.0f64..4.0, p in -3.0f64..3.0, s in -3.0f64..3.0) {
        let f = FieldState::new(p, s);
        let a = to_adiabatic(theta, f);
        prop_assert!((a.norm_sqr() - f.norm_sqr()).abs() < 1e-13);
        let back = from_adiabatic(theta, a);
        prop_assert!((back.omega_p - p).abs() < 1e-14 && (back.omega_s - s).abs() < 1e-14);
    }

    #[test]
    fn interior_jump_leaves_fields_continuous(
        at in 0.1f64..0.9, before in 0.0f64..FRAC_PI_2, after in 0.0f64..FRAC_PI_2,
    ) {
        // a near-vertical segment approximates a jump; the lab fields across
        // it change only by the loss over its width
        let alpha = 4.0;
        let z = at * alpha;
        let width = 1e-9;
        let p = ThetaProfile::from_samples(
            alpha,
            vec![0.0, z, z + width, alpha],
            vec![1.2, before, after, 0.3],
        ).unwrap();
        let traj = propagate_reduced(&p, alpha, FieldState::INCIDENT_PROBE, &Default::default()).unwrap();
        let i = traj.zeta.iter().position(|&q| q == z).unwrap();
        let (l, r) = (traj.states[i], traj.states[i + 1]);
        prop_assert!((l.omega_p - r.omega_p).abs() < 1e-9);
        prop_assert!((l.omega_s - r.omega_s).abs() < 1e-9);
        // and the same rotation in the adiabatic frame is exact
        let a = to_adiabatic(before, l);
        let rotated = rotate_frame(before, after, a);
        let lab = from_adiabatic(after, rotated);
        prop_assert!((lab.omega_p - l.omega_p).abs() < 1e-15 && (lab.omega_s - l.omega_s).abs() < 1e-15);
    }
}
