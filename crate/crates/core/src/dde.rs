//! Fixed-step method-of-steps integration of delay systems.
//!
//! The step is shrunk so that an integer number of steps spans one delay.
//! Then every delayed stage time `t_i + c h - tau` (with `c` in
//! `{0, 1/2, 1}`) falls on a knot or a knot midpoint of an already computed
//! step, and the delayed state is read off the cubic Hermite interpolant
//! built from stored states and right-hand sides. The seams at multiples of
//! `tau` coincide with knots.

use crate::{Error, Result};

/// Magnitude beyond which a run is stopped and flagged as blown up.
pub const BLOW_UP: f64 = 1e12;
/// Step used when none is given.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `x'(t) = f(t, x(t), x(t - tau))`.
pub trait DelaySystem<const N: usize> {
    fn rhs(&self, t: f64, current: &[f64; N], delayed: &[f64; N]) -> [f64; N];
}

/// A stored point of a dense solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    pub derivative: [f64; N],
}

/// Initial data on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum History<const N: usize> {
    Constant([f64; N]),
    /// Knots with strictly increasing times covering `[-tau, 0]`.
    Sampled(Vec<Knot<N>>),
}

impl<const N: usize> History<N> {
    fn validate(&self, tau: f64) -> Result<()> {
        let History::Sampled(knots) = self else {
            return Ok(());
        };
        if knots.is_empty() {
            return Err(Error::InvalidInput("sampled history has no knots".into()));
        }
        if knots.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidInput("history knot times must increase strictly".into()));
        }
        let (first, last) = (knots[0].t, knots[knots.len() - 1].t);
        if first > -tau + 1e-12 * (1.0 + tau) || last.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "sampled history spans [{first}, {last}], needs [{}, 0]",
                -tau
            )));
        }
        Ok(())
    }

    pub fn start(&self, tau: f64) -> f64 {
        match self {
            History::Constant(_) => -tau,
            History::Sampled(k) => k[0].t,
        }
    }

    pub fn at(&self, t: f64) -> [f64; N] {
        match self {
            History::Constant(v) => *v,
            History::Sampled(knots) => hermite_lookup(knots, t),
        }
    }
}

fn hermite<const N: usize>(a: &Knot<N>, b: &Knot<N>, t: f64) -> [f64; N] {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    if s == 0.0 {
        return a.state;
    }
    if s == 1.0 {
        return b.state;
    }
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    std::array::from_fn(|i| h00 * a.state[i] + h10 * h * a.derivative[i] + h01 * b.state[i] + h11 * h * b.derivative[i])
}

fn hermite_lookup<const N: usize>(knots: &[Knot<N>], t: f64) -> [f64; N] {
    if knots.len() == 1 {
        return knots[0].state;
    }
    let i = knots.partition_point(|k| k.t <= t).clamp(1, knots.len() - 1);
    hermite(&knots[i - 1], &knots[i], t)
}

/// A finished, immutable integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    /// Right-hand side at each knot.
    pub derivatives: Vec<[f64; N]>,
    pub tau: f64,
    /// Effective step (the requested one, shrunk to divide `tau`).
    pub step: f64,
    pub history: History<N>,
    /// Time at which the run exceeded [`BLOW_UP`] or went non-finite.
    pub blow_up: Option<f64>,
}

impl<const N: usize> Trajectory<N> {
    /// Wraps externally produced knots (`t >= 0`) as a trajectory with
    /// constant history equal to the first state.
    pub fn from_knots(times: Vec<f64>, states: Vec<[f64; N]>, derivatives: Vec<[f64; N]>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() || times.len() != derivatives.len() {
            return Err(Error::InvalidInput(
                "knot arrays must be nonempty and of equal length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("knot times must increase strictly".into()));
        }
        let step = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Ok(Trajectory {
            history: History::Constant(states[0]),
            times,
            states,
            derivatives,
            tau: 0.0,
            step,
            blow_up: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn last_state(&self) -> [f64; N] {
        self.states[self.states.len() - 1]
    }

    pub fn knot(&self, i: usize) -> Knot<N> {
        Knot {
            t: self.times[i],
            state: self.states[i],
            derivative: self.derivatives[i],
        }
    }

    /// Dense output on `[history start, end]`.
    pub fn sample(&self, t: f64) -> Result<[f64; N]> {
        let lo = self.history.start(self.tau).min(self.start());
        let hi = self.end();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, start: lo, end: hi });
        }
        if t < self.start() {
            return Ok(self.history.at(t));
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i > 0 && self.times[i - 1] == t {
            return Ok(self.states[i - 1]);
        }
        let i = i.clamp(1, self.len() - 1);
        Ok(hermite(&self.knot(i - 1), &self.knot(i), t))
    }

    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }

    /// `NonFiniteState` if the run was cut short by blow-up.
    pub fn ensure_finite(&self) -> Result<&Self> {
        match self.blow_up {
            Some(t) => Err(Error::NonFiniteState { t }),
            None => Ok(self),
        }
    }
}

fn axpy<const N: usize>(x: &[f64; N], a: f64, y: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| x[i] + a * y[i])
}

fn out_of_bounds<const N: usize>(x: &[f64; N]) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP)
}

/// Integrates `system` on `[0, t_end]` from `history`.
///
/// With `tau > 0` the effective step is `tau / ceil(tau / step)` and the run
/// ends at the first multiple of it not below `t_end`. With `tau = 0` the
/// delayed argument equals the current state and the scheme is plain RK4.
pub fn integrate<S: DelaySystem<N>, const N: usize>(
    system: &S,
    tau: f64,
    history: &History<N>,
    t_end: f64,
    step: f64,
) -> Result<Trajectory<N>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("tau must be nonnegative, got {tau}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    if tau > 0.0 && step > tau / 4.0 {
        return Err(Error::StepTooLarge { step, tau });
    }
    history.validate(tau)?;

    let (h, per_delay) = if tau > 0.0 {
        let m = (tau / step - 1e-9).ceil().max(1.0);
        (tau / m, m as usize)
    } else {
        (step, 0)
    };
    let n_steps = (t_end / h - 1e-9).ceil().max(1.0) as usize;

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut derivs: Vec<[f64; N]> = Vec::with_capacity(n_steps + 1);

    // State at (i + c - per_delay) h, read from history or from step i - per_delay.
    let delayed_at = |states: &[[f64; N]], derivs: &[[f64; N]], i: usize, c: f64| -> [f64; N] {
        let offset = i as f64 + c - per_delay as f64;
        if offset <= 0.0 {
            return history.at(offset * h);
        }
        let j = i - per_delay;
        if c == 1.0 {
            return states[j + 1];
        }
        let a = Knot {
            t: j as f64 * h,
            state: states[j],
            derivative: derivs[j],
        };
        let b = Knot {
            t: (j + 1) as f64 * h,
            state: states[j + 1],
            derivative: derivs[j + 1],
        };
        hermite(&a, &b, (j as f64 + c) * h)
    };

    let x0 = history.at(0.0);
    let d0 = if tau == 0.0 {
        system.rhs(0.0, &x0, &x0)
    } else {
        system.rhs(0.0, &x0, &history.at(-tau))
    };
    times.push(0.0);
    states.push(x0);
    derivs.push(d0);
    let mut blow_up = out_of_bounds(&x0).then_some(0.0);

    for i in 0..n_steps {
        if blow_up.is_some() {
            break;
        }
        let t = i as f64 * h;
        let x = states[i];
        let (dm, d1) = if tau == 0.0 {
            ([0.0; N], [0.0; N])
        } else {
            (
                delayed_at(&states, &derivs, i, 0.5),
                delayed_at(&states, &derivs, i, 1.0),
            )
        };
        let k1 = derivs[i];
        let x2 = axpy(&x, 0.5 * h, &k1);
        let k2 = system.rhs(t + 0.5 * h, &x2, if tau == 0.0 { &x2 } else { &dm });
        let x3 = axpy(&x, 0.5 * h, &k2);
        let k3 = system.rhs(t + 0.5 * h, &x3, if tau == 0.0 { &x3 } else { &dm });
        let x4 = axpy(&x, h, &k3);
        let k4 = system.rhs(t + h, &x4, if tau == 0.0 { &x4 } else { &d1 });
        let next: [f64; N] = std::array::from_fn(|n| x[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]));
        let t_next = (i + 1) as f64 * h;
        if out_of_bounds(&next) {
            blow_up = Some(t_next);
            break;
        }
        let dn = if tau == 0.0 {
            system.rhs(t_next, &next, &next)
        } else {
            system.rhs(t_next, &next, &d1)
        };
        times.push(t_next);
        states.push(next);
        derivs.push(dn);
    }

    Ok(Trajectory {
        times,
        states,
        derivatives: derivs,
        tau,
        step: h,
        history: history.clone(),
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y'(t) = y(t - 1)`.
    struct PureDelay;

    impl DelaySystem<1> for PureDelay {
        fn rhs(&self, _t: f64, _current: &[f64; 1], delayed: &[f64; 1]) -> [f64; 1] {
            *delayed
        }
    }

    /// `y' = -y`, ignoring the delay.
    struct Decay;

    impl DelaySystem<1> for Decay {
        fn rhs(&self, _t: f64, current: &[f64; 1], _delayed: &[f64; 1]) -> [f64; 1] {
            [-current[0]]
        }
    }

    #[test]
    fn pure_delay_known_values() {
        let traj = integrate(&PureDelay, 1.0, &History::Constant([1.0]), 2.0, 0.01).unwrap();
        assert!((traj.sample(1.0).unwrap()[0] - 2.0).abs() < 1e-12);
        assert!((traj.sample(2.0).unwrap()[0] - 3.5).abs() < 1e-12);
        assert!((traj.sample(0.5).unwrap()[0] - 1.5).abs() < 1e-12);
        assert_eq!(traj.sample(-0.5).unwrap(), [1.0]);
    }

    #[test]
    fn step_alignment() {
        let traj = integrate(&PureDelay, 1.0, &History::Constant([1.0]), 2.0, 0.03).unwrap();
        assert!((traj.step - 1.0 / 34.0).abs() < 1e-15);
        assert!(traj.end() >= 2.0 - 1e-12);
        assert!((traj.end() - 2.0).abs() < traj.step);
    }

    #[test]
    fn validation_errors() {
        let h = History::Constant([1.0]);
        assert!(matches!(
            integrate(&PureDelay, 1.0, &h, 2.0, 0.3),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(integrate(&PureDelay, 1.0, &h, 2.0, 0.0).is_err());
        assert!(integrate(&PureDelay, 1.0, &h, 0.0, 0.01).is_err());
        assert!(integrate(&PureDelay, -1.0, &h, 1.0, 0.01).is_err());
        let gap = History::Sampled(vec![Knot {
            t: 0.0,
            state: [1.0],
            derivative: [0.0],
        }]);
        assert!(integrate(&PureDelay, 1.0, &gap, 1.0, 0.01).is_err());
    }

    #[test]
    fn sampled_history_matches_constant() {
        let knots = vec![
            Knot {
                t: -1.0,
                state: [1.0],
                derivative: [0.0],
            },
            Knot {
                t: 0.0,
                state: [1.0],
                derivative: [0.0],
            },
        ];
        let a = integrate(&PureDelay, 1.0, &History::Sampled(knots), 2.0, 0.01).unwrap();
        let b = integrate(&PureDelay, 1.0, &History::Constant([1.0]), 2.0, 0.01).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn zero_delay_is_plain_rk4() {
        let traj = integrate(&Decay, 0.0, &History::Constant([1.0]), 1.0, 0.1).unwrap();
        let mut y = 1.0f64;
        for _ in 0..10 {
            let k1 = -y;
            let k2 = -(y + 0.05 * k1);
            let k3 = -(y + 0.05 * k2);
            let k4 = -(y + 0.1 * k3);
            y += 0.1 / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert_eq!(traj.last_state()[0], y);
        assert!((y - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn sample_exact_at_knots_and_linear() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let states: Vec<[f64; 1]> = times.iter().map(|t| [3.0 * t - 1.0]).collect();
        let derivs = vec![[3.0]; 11];
        let traj = Trajectory::from_knots(times.clone(), states.clone(), derivs).unwrap();
        for (t, s) in times.iter().zip(&states) {
            assert_eq!(traj.sample(*t).unwrap(), *s);
        }
        for t in [0.013, 0.5, 0.777, 0.999] {
            assert!((traj.sample(t).unwrap()[0] - (3.0 * t - 1.0)).abs() < 1e-12);
        }
        assert!(matches!(traj.sample(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(traj.sample(f64::NAN), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn from_knots_validation() {
        assert!(Trajectory::<1>::from_knots(vec![], vec![], vec![]).is_err());
        assert!(Trajectory::from_knots(vec![0.0, 0.0], vec![[0.0]; 2], vec![[0.0]; 2]).is_err());
        assert!(Trajectory::from_knots(vec![0.0], vec![[0.0]; 2], vec![[0.0]; 1]).is_err());
    }

    struct Explode;

    impl DelaySystem<1> for Explode {
        fn rhs(&self, _t: f64, current: &[f64; 1], _delayed: &[f64; 1]) -> [f64; 1] {
            [current[0] * current[0]]
        }
    }

    #[test]
    fn blow_up_truncates() {
        let traj = integrate(&Explode, 0.5, &History::Constant([1.0]), 5.0, 0.01).unwrap();
        let t = traj.blow_up.expect("y' = y^2 from 1 blows up at t = 1");
        assert!(t > 0.9 && t < 1.1);
        assert!(traj.end() < t);
        assert!(matches!(traj.ensure_finite(), Err(Error::NonFiniteState { .. })));
    }
}
