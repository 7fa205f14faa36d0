mod common;

use std::f64::consts::PI;

use delay_hopf::charpoly::{char_spec_at, char_spec_p0};
use delay_hopf::diagnostics::*;
use delay_hopf::model::{equilibrium, EquilibriumLabel, FinancialSystem, State, SystemParams};
use delay_hopf::rhp_oracle::count_rhp_roots_auto;

fn run(params: SystemParams, label: EquilibriumLabel, tau: f64, component: usize) -> OscillationReport {
    let setup = CrossCheckSetup::for_equilibrium(label);
    let eq = equilibrium(&params, label).unwrap();
    let sys = FinancialSystem::new(params, setup.frame);
    let traj = simulate(&sys, tau, &setup.initial, setup.horizon, setup.step).unwrap();
    let center = sys.to_frame(&eq.point).component(component);
    analyze_oscillation(&traj, component, center, &setup.envelope).unwrap()
}

#[test]
fn p0_reference_cross_check_passes() {
    let p = SystemParams::P0_REFERENCE;
    let eq = equilibrium(&p, EquilibriumLabel::P0).unwrap();
    let r = cross_check(
        &p,
        &eq,
        &[0.7, 1.2],
        &CrossCheckSetup::for_equilibrium(EquilibriumLabel::P0),
    );
    assert!(r.passed(), "{:?}", r.disagreements);
    assert_eq!(r.rows[0].oracle_count, Some(0));
    assert_eq!(r.rows[0].envelope, Some(EnvelopeTrend::Decaying));
    assert_eq!(r.rows[1].oracle_count, Some(2));
    assert_eq!(r.rows[1].envelope, Some(EnvelopeTrend::Growing));
}

#[test]
fn p1_reference_cross_check_passes() {
    let p = SystemParams::P1_REFERENCE;
    let eq = equilibrium(&p, EquilibriumLabel::P1).unwrap();
    let r = cross_check(
        &p,
        &eq,
        &[0.2, 0.34],
        &CrossCheckSetup::for_equilibrium(EquilibriumLabel::P1),
    );
    assert!(r.passed(), "{:?}", r.disagreements);
    assert_eq!(r.rows[0].regime, Regime::StableBelowTau0);
    assert_eq!(r.rows[1].regime, Regime::UnstableInWindow);
}

#[test]
fn cross_check_reports_a_wrong_claim() {
    // a setup too short to see the growth at tau = 1.2 makes the envelope
    // disagree with the analysis, and that must surface
    let p = SystemParams::P0_REFERENCE;
    let eq = equilibrium(&p, EquilibriumLabel::P0).unwrap();
    let mut setup = CrossCheckSetup::for_equilibrium(EquilibriumLabel::P0);
    setup.horizon = 3.0;
    let r = cross_check(&p, &eq, &[1.2], &setup);
    assert!(!r.passed());
}

#[test]
fn onset_periods_follow_crossing_frequency() {
    let v = classify_p0(&SystemParams::P0_REFERENCE).unwrap();
    let r = run(SystemParams::P0_REFERENCE, EquilibriumLabel::P0, v.tau0.unwrap(), 1);
    assert_eq!(r.envelope_trend, EnvelopeTrend::Sustained);
    let want = 2.0 * PI / v.omega0.unwrap();
    assert!((r.period_estimate.unwrap() - want).abs() < 0.05 * want);

    let v = classify_p1(&SystemParams::P1_REFERENCE).unwrap();
    let r = run(SystemParams::P1_REFERENCE, EquilibriumLabel::P1, v.tau0.unwrap(), 0);
    assert_eq!(r.envelope_trend, EnvelopeTrend::Sustained);
    let want = 2.0 * PI / v.omega0.unwrap();
    assert!(
        (r.period_estimate.unwrap() - want).abs() < 0.05 * want,
        "{r:?} vs {want}"
    );
}

#[test]
fn p0_bifurcation_lives_in_y() {
    let tau0 = classify_p0(&SystemParams::P0_REFERENCE).unwrap().tau0.unwrap();
    for c in [0, 2, 3] {
        let r = run(SystemParams::P0_REFERENCE, EquilibriumLabel::P0, tau0, c);
        assert_eq!(r.envelope_trend, EnvelopeTrend::Decaying, "component {c}");
    }
    let y = run(SystemParams::P0_REFERENCE, EquilibriumLabel::P0, tau0, 1);
    assert_eq!(y.envelope_trend, EnvelopeTrend::Sustained);
}

#[test]
fn verdicts_agree_with_root_counts() {
    let mut rng = common::rng(31);
    for _ in 0..20 {
        let p = common::hopf_p0_params(&mut rng);
        let v = classify_p0(&p).unwrap();
        assert_eq!(v.regime, Regime::HopfAtTau0);
        let spec = char_spec_p0(&p).unwrap();
        let (t0, t1) = (v.tau0.unwrap(), v.tau1.unwrap());
        assert_eq!(count_rhp_roots_auto(&spec, 0.5 * t0).unwrap().count, 0);
        assert!(count_rhp_roots_auto(&spec, 0.5 * (t0 + t1)).unwrap().count >= 2);
    }
    for _ in 0..20 {
        let (p, eq, _) = common::hopf_p1_params(&mut rng);
        let v = classify_p1(&p).unwrap();
        let spec = char_spec_at(&p, &eq).unwrap();
        let t0 = v.tau0.unwrap();
        assert_eq!(count_rhp_roots_auto(&spec, 0.5 * t0).unwrap().count, 0);
        if v.transversality_sign == Some(1.0) {
            let t1 = v.tau1.unwrap();
            assert!(count_rhp_roots_auto(&spec, 0.5 * (t0 + t1)).unwrap().count >= 2);
        }
    }
}

#[test]
fn feedback_destabilizes_p1() {
    let off = classify_p1(&SystemParams::P1_REFERENCE.with_feedback(0.0)).unwrap();
    assert_eq!(off.regime, Regime::StableAllTau);
    let on = classify_p1(&SystemParams::P1_REFERENCE).unwrap();
    assert_eq!(on.regime, Regime::HopfAtTau0);
    assert!(on.tau0.unwrap().is_finite());
}

#[test]
fn p2_verdict_mirrors_p1() {
    let p = SystemParams::P1_REFERENCE;
    let v1 = classify(&p, EquilibriumLabel::P1).unwrap();
    let v2 = classify(&p, EquilibriumLabel::P2).unwrap();
    assert_eq!(v2.label, EquilibriumLabel::P2);
    assert_eq!(v1.tau0, v2.tau0);
    let eq2 = equilibrium(&p, EquilibriumLabel::P2).unwrap();
    let r = cross_check(
        &p,
        &eq2,
        &[0.2],
        &CrossCheckSetup {
            initial: State::new(-2.0, 2.0, -2.0, -2.0),
            ..CrossCheckSetup::for_equilibrium(EquilibriumLabel::P2)
        },
    );
    assert!(r.passed(), "{:?}", r.disagreements);
}

#[test]
fn blown_up_runs_count_as_growing() {
    let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
    let states = vec![[0.0; 4]; 100];
    let mut traj = delay_hopf::Trajectory::from_knots(times, states.clone(), states).unwrap();
    traj.blow_up = Some(10.0);
    let r = analyze_oscillation(&traj, 0, 0.0, &EnvelopeConfig::default()).unwrap();
    assert_eq!(r.envelope_trend, EnvelopeTrend::Growing);
    assert!(analyze_oscillation(&traj, 4, 0.0, &EnvelopeConfig::default()).is_err());
}
