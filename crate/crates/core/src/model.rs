//! The delayed financial system, its equilibria and linearizations.
//!
//! In original coordinates the system reads
//!
//! ```text
//! x' = z + (y - a) x + u
//! y' = 1 - b y - x^2 + K (y - y(t - tau))
//! z' = -x - c z
//! u' = -d x y - k u
//! ```
//!
//! with `x` the interest rate, `y` investment demand, `z` the price index
//! and `u` the average profit margin.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix4;

use crate::dde::DelaySystem;
use crate::{Error, Result};

/// Model constants. All six are nonnegative; `feedback` is the strength
/// `K` of the delayed investment-demand feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Saving amount.
    pub a: f64,
    /// Cost per investment.
    pub b: f64,
    /// Elasticity of demand of commercial markets.
    pub c: f64,
    /// Profit-margin coupling to interest rate and investment.
    pub d: f64,
    /// Profit-margin damping.
    pub k: f64,
    /// Delay-feedback strength `K`.
    pub feedback: f64,
}

impl SystemParams {
    /// Parameter set whose origin-shifted `P0` undergoes a Hopf bifurcation
    /// at `tau0 ~ 1.15912`.
    pub const P0_REFERENCE: SystemParams = SystemParams {
        a: 5.0,
        b: 0.4,
        c: 1.5,
        d: 0.2,
        k: 0.17,
        feedback: 1.0,
    };

    /// Parameter set with three equilibria whose `P1` undergoes a Hopf
    /// bifurcation at `tau0 ~ 0.30329`.
    pub const P1_REFERENCE: SystemParams = SystemParams {
        a: 0.2,
        b: 0.2,
        c: 2.5,
        d: 0.2,
        k: 1.0,
        feedback: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64, k: f64, feedback: f64) -> Result<Self> {
        let p = SystemParams {
            a,
            b,
            c,
            d,
            k,
            feedback,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameters(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `(name, value)` pairs in declaration order.
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("k", self.k),
            ("K", self.feedback),
        ]
    }

    pub fn with_feedback(self, feedback: f64) -> Self {
        SystemParams { feedback, ..self }
    }

    pub(crate) fn require_positive_b(&self) -> Result<()> {
        if self.b > 0.0 {
            Ok(())
        } else {
            Err(Error::DegenerateParameters(format!(
                "b must be positive for the stability analysis, got {}",
                self.b
            )))
        }
    }

    /// `(kb + abck + cd - ck) / (c (d - k))`; its sign decides between one
    /// and three equilibria, and when positive it equals `theta^2`.
    pub fn equilibrium_ratio(&self) -> Result<f64> {
        let SystemParams { a, b, c, d, k, .. } = *self;
        if b == 0.0 {
            return Err(Error::DegenerateParameters("b = 0".into()));
        }
        if c == 0.0 {
            return Err(Error::DegenerateParameters("c = 0".into()));
        }
        if d == k {
            return Err(Error::DegenerateParameters(format!("d = k = {d}")));
        }
        Ok((k * b + a * b * c * k + c * d - c * k) / (c * (d - k)))
    }
}

/// A point of the four-dimensional state space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    /// Interest rate.
    pub x: f64,
    /// Investment demand.
    pub y: f64,
    /// Price index.
    pub z: f64,
    /// Average profit margin.
    pub u: f64,
}

impl State {
    pub const ZERO: State = State {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        u: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64, u: f64) -> Self {
        State { x, y, z, u }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.z, self.u]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        State::new(v[0], v[1], v[2], v[3])
    }

    pub fn norm_inf(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Component by index: 0 = x, 1 = y, 2 = z, 3 = u.
    pub fn component(&self, index: usize) -> f64 {
        self.to_array()[index]
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.x + o.x, self.y + o.y, self.z + o.z, self.u + o.u)
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.x - o.x, self.y - o.y, self.z - o.z, self.u - o.u)
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, s: f64) -> State {
        State::new(self.x * s, self.y * s, self.z * s, self.u * s)
    }
}

/// Right-hand side in original coordinates. Only the `y` component of
/// `delayed` enters.
pub fn rhs(current: &State, delayed: &State, params: &SystemParams) -> State {
    let SystemParams {
        a,
        b,
        c,
        d,
        k,
        feedback,
    } = *params;
    let State { x, y, z, u } = *current;
    State {
        x: z + (y - a) * x + u,
        y: 1.0 - b * y - x * x + feedback * (y - delayed.y),
        z: -x - c * z,
        u: -d * x * y - k * u,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumLabel {
    P0,
    P1,
    P2,
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquilibriumLabel::P0 => "P0",
            EquilibriumLabel::P1 => "P1",
            EquilibriumLabel::P2 => "P2",
        })
    }
}

impl std::str::FromStr for EquilibriumLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P0" | "p0" => Ok(EquilibriumLabel::P0),
            "P1" | "p1" => Ok(EquilibriumLabel::P1),
            "P2" | "p2" => Ok(EquilibriumLabel::P2),
            other => Err(Error::InvalidInput(format!("unknown equilibrium {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub label: EquilibriumLabel,
    pub point: State,
    /// `sqrt(kb(1+ac)/(c(d-k)) + 1)` for `P1`/`P2`; absent for `P0`.
    pub theta: Option<f64>,
}

impl Equilibrium {
    /// `theta` with the sign carried by the `x` coordinate (`+` at `P1`,
    /// `-` at `P2`), or zero at `P0`.
    pub fn signed_theta(&self) -> f64 {
        match (self.label, self.theta) {
            (EquilibriumLabel::P1, Some(t)) => t,
            (EquilibriumLabel::P2, Some(t)) => -t,
            _ => 0.0,
        }
    }
}

/// `P0 = (0, 1/b, 0, 0)`; when the equilibrium ratio is positive also
/// `P1 = (theta, k(1+ac)/(c(k-d)), -theta/c, d(1+ac) theta/(c(d-k)))` and
/// its `x, z, u` mirror `P2`. A ratio of exactly zero counts as the
/// single-equilibrium case.
pub fn equilibria(params: &SystemParams) -> Result<Vec<Equilibrium>> {
    params.validate()?;
    let ratio = params.equilibrium_ratio()?;
    let SystemParams { a, b, c, d, k, .. } = *params;
    let p0 = Equilibrium {
        label: EquilibriumLabel::P0,
        point: State::new(0.0, 1.0 / b, 0.0, 0.0),
        theta: None,
    };
    if ratio <= 0.0 {
        return Ok(vec![p0]);
    }
    let theta_sq = k * b * (1.0 + a * c) / (c * (d - k)) + 1.0;
    let theta = theta_sq.sqrt();
    let y = k * (1.0 + a * c) / (c * (k - d));
    let u_scale = d * (1.0 + a * c) / (c * (d - k));
    let p1 = Equilibrium {
        label: EquilibriumLabel::P1,
        point: State::new(theta, y, -theta / c, u_scale * theta),
        theta: Some(theta),
    };
    let p2 = Equilibrium {
        label: EquilibriumLabel::P2,
        point: State::new(-theta, y, theta / c, -u_scale * theta),
        theta: Some(theta),
    };
    Ok(vec![p0, p1, p2])
}

pub fn equilibrium(params: &SystemParams, label: EquilibriumLabel) -> Result<Equilibrium> {
    equilibria(params)?
        .into_iter()
        .find(|e| e.label == label)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "{label} does not exist for these parameters (single-equilibrium regime)"
            ))
        })
}

/// `y -> y - 1/b`, moving `P0` to the origin.
pub fn shift_to_origin(state: &State, params: &SystemParams) -> State {
    State {
        y: state.y - 1.0 / params.b,
        ..*state
    }
}

pub fn unshift(state: &State, params: &SystemParams) -> State {
    State {
        y: state.y + 1.0 / params.b,
        ..*state
    }
}

/// Linearization `J0 + e^{-lambda tau} Jtau` split into its instantaneous
/// and delayed parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianPair {
    pub j0: Matrix4<f64>,
    pub jtau: Matrix4<f64>,
}

/// Closed-form Jacobians at an equilibrium. At `P2` the `P1` formulas are
/// used with `theta -> -theta`.
pub fn jacobians_at(eq: &Equilibrium, params: &SystemParams) -> JacobianPair {
    let SystemParams {
        a,
        b,
        c,
        d,
        k,
        feedback,
    } = *params;
    let mut jtau = Matrix4::zeros();
    jtau[(1, 1)] = -feedback;
    let j0 = match eq.label {
        EquilibriumLabel::P0 => Matrix4::new(
            1.0 / b - a,
            0.0,
            1.0,
            1.0, //
            0.0,
            -b + feedback,
            0.0,
            0.0, //
            -1.0,
            0.0,
            -c,
            0.0, //
            -d / b,
            0.0,
            0.0,
            -k,
        ),
        EquilibriumLabel::P1 | EquilibriumLabel::P2 => {
            let th = eq.signed_theta();
            Matrix4::new(
                (k + a * c * d) / (c * (k - d)),
                th,
                1.0,
                1.0, //
                -2.0 * th,
                -b + feedback,
                0.0,
                0.0, //
                -1.0,
                0.0,
                -c,
                0.0, //
                -d * k * (1.0 + a * c) / (c * (k - d)),
                -d * th,
                0.0,
                -k,
            )
        }
    };
    JacobianPair { j0, jtau }
}

/// Coordinate frame for simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    #[default]
    Original,
    /// `Y = y - 1/b`, so that `P0` sits at the origin.
    ShiftedP0,
}

/// The system as a [`DelaySystem`] in a chosen frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinancialSystem {
    pub params: SystemParams,
    pub frame: Frame,
}

impl FinancialSystem {
    pub fn new(params: SystemParams, frame: Frame) -> Self {
        FinancialSystem { params, frame }
    }

    /// Map a state into this system's frame from original coordinates.
    pub fn to_frame(&self, s: &State) -> State {
        match self.frame {
            Frame::Original => *s,
            Frame::ShiftedP0 => shift_to_origin(s, &self.params),
        }
    }

    pub fn from_frame(&self, s: &State) -> State {
        match self.frame {
            Frame::Original => *s,
            Frame::ShiftedP0 => unshift(s, &self.params),
        }
    }
}

impl DelaySystem<4> for FinancialSystem {
    fn rhs(&self, _t: f64, current: &[f64; 4], delayed: &[f64; 4]) -> [f64; 4] {
        let cur = State::from_array(*current);
        let del = State::from_array(*delayed);
        // The shift only translates y, so derivatives carry over unchanged.
        let out = match self.frame {
            Frame::Original => rhs(&cur, &del, &self.params),
            Frame::ShiftedP0 => rhs(&unshift(&cur, &self.params), &unshift(&del, &self.params), &self.params),
        };
        out.to_array()
    }
}
