mod common;

use delay_hopf::charpoly::char_spec_at;
use delay_hopf::dde::{integrate, DelaySystem, History};
use delay_hopf::diagnostics::simulate;
use delay_hopf::model::{equilibria, rhs, FinancialSystem, Frame, State, SystemParams};
use delay_hopf::rhp_oracle::count_rhp_roots_auto;
use proptest::prelude::*;

struct PureDelay;

impl DelaySystem<1> for PureDelay {
    fn rhs(&self, _t: f64, _current: &[f64; 1], delayed: &[f64; 1]) -> [f64; 1] {
        *delayed
    }
}

/// `y' = y(t-1)` with unit history: `y(t) = sum_{j=0}^{floor(t)+1} (t-j+1)^j / j!`.
fn pure_delay_exact(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for j in 0..=(t.floor() as i32 + 1) {
        if j > 0 {
            fact *= j as f64;
        }
        let base = t - j as f64 + 1.0;
        if base >= 0.0 {
            sum += base.powi(j) / fact;
        }
    }
    sum
}

fn end_error(step: f64, t_end: f64) -> f64 {
    let traj = integrate(&PureDelay, 1.0, &History::Constant([1.0]), t_end, step).unwrap();
    (traj.sample(t_end).unwrap()[0] - pure_delay_exact(t_end)).abs()
}

#[test]
fn exact_reference_solution() {
    assert_eq!(pure_delay_exact(1.0), 2.0);
    assert_eq!(pure_delay_exact(2.0), 3.5);
    assert!((pure_delay_exact(0.5) - 1.5).abs() < 1e-15);
}

#[test]
fn fourth_order_once_polynomial_exactness_ends() {
    // piecewise polynomial of degree <= 4 up to t = 4 is reproduced exactly,
    // so the error only shows later
    let steps = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let errs: Vec<f64> = steps.iter().map(|&h| end_error(h, 6.0)).collect();
    for pair in errs.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((12.0..=20.0).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn polynomial_stretch_is_exact_to_rounding() {
    for h in [0.1, 0.02, 0.005] {
        assert!(end_error(h, 4.0) < 1e-12, "{h}");
    }
}

/// RK4 on the delay-free system, written out independently.
fn rk4_ode(p: &SystemParams, x0: State, h: f64, n: usize) -> State {
    let f = |s: &State| rhs(s, s, p);
    let mut x = x0;
    for _ in 0..n {
        let k1 = f(&x);
        let k2 = f(&(x + k1 * (h / 2.0)));
        let k3 = f(&(x + k2 * (h / 2.0)));
        let k4 = f(&(x + k3 * h));
        x = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_delay_is_the_ode(seed in 0u64..10_000) {
        let mut rng = common::rng(seed);
        let p = common::random_params(&mut rng);
        let x0 = State::new(0.3, 1.0, -0.2, 0.1);
        let traj = simulate(&FinancialSystem::new(p, Frame::Original), 0.0, &x0, 5.0, 0.01).unwrap();
        let want = rk4_ode(&p.with_feedback(0.0), x0, 0.01, 500);
        let got = State::from_array(traj.last_state());
        prop_assert!((got - want).norm_inf() < 1e-12 * (1.0 + want.norm_inf()));
    }

    #[test]
    fn runs_are_bit_identical(seed in 0u64..10_000, tau in 0.05..2.0f64) {
        let p = common::random_params(&mut common::rng(seed));
        let sys = FinancialSystem::new(p, Frame::ShiftedP0);
        let x0 = State::new(0.1, 0.2, 0.0, -0.1);
        let a = simulate(&sys, tau, &x0, 20.0, 0.01).unwrap();
        let b = simulate(&sys, tau, &x0, 20.0, 0.01).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn continuity_across_samples(tau in 0.3..2.0f64, t in 0.0..10.0f64) {
        let traj = integrate(&PureDelay, tau, &History::Constant([1.0]), 10.0, tau / 8.0).unwrap();
        let a = traj.sample(t).unwrap()[0];
        let b = traj.sample((t + 1e-9).min(traj.end())).unwrap()[0];
        prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
    }
}

#[test]
fn equilibria_are_held() {
    let mut rng = common::rng(17);
    let mut checked = 0;
    for _ in 0..200 {
        let p = common::random_params(&mut rng);
        let tau = 0.5;
        for eq in equilibria(&p).unwrap() {
            // roundoff in the right-hand side is only amplified where the
            // equilibrium is unstable, so only stable ones are held to 1e-9
            let spec = char_spec_at(&p, &eq).unwrap();
            if count_rhp_roots_auto(&spec, tau).map(|c| c.count) != Ok(0) {
                continue;
            }
            let traj = simulate(&FinancialSystem::new(p, Frame::Original), tau, &eq.point, 100.0, 0.01).unwrap();
            let worst = traj
                .states
                .iter()
                .map(|s| (State::from_array(*s) - eq.point).norm_inf())
                .fold(0.0, f64::max);
            assert!(worst < 1e-9, "{p:?} {:?}: {worst}", eq.label);
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn reference_equilibria_held_in_both_frames() {
    for (p, tau) in [(SystemParams::P0_REFERENCE, 0.7), (SystemParams::P1_REFERENCE, 0.2)] {
        for eq in equilibria(&p).unwrap() {
            for frame in [Frame::Original, Frame::ShiftedP0] {
                let sys = FinancialSystem::new(p, frame);
                let start = sys.to_frame(&eq.point);
                let traj = simulate(&sys, tau, &start, 100.0, 0.01).unwrap();
                for s in &traj.states {
                    let s = sys.from_frame(&State::from_array(*s));
                    assert!((s - eq.point).norm_inf() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn p0_reference_stable_case_converges() {
    let sys = FinancialSystem::new(SystemParams::P0_REFERENCE, Frame::ShiftedP0);
    let traj = simulate(&sys, 0.7, &State::new(1.0, 2.0, 0.5, 0.5), 200.0, 1e-3).unwrap();
    let at50 = State::from_array(traj.sample(50.0).unwrap()).norm_inf();
    let at200 = State::from_array(traj.sample(200.0).unwrap()).norm_inf();
    assert!(at200 < at50);
}
