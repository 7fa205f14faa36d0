//! Characteristic functions `R(lambda) + Q(lambda) e^{-lambda tau}` at the
//! equilibria, and the Routh–Hurwitz gates applied to them.

use num_complex::Complex64;

use crate::model::{Equilibrium, EquilibriumLabel, SystemParams};
use crate::poly;
use crate::{Error, Result};

/// A retarded quasi-polynomial `R(lambda) + Q(lambda) e^{-lambda tau}`
/// with monic `R` and `deg Q < deg R`.
pub trait Characteristic {
    /// Coefficients of `R`, ascending.
    fn delay_free(&self) -> Vec<f64>;

    /// Coefficients of `Q`, ascending.
    fn delayed(&self) -> Vec<f64>;

    fn value(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let e = (-lambda * tau).exp();
        poly::eval_complex(&self.delay_free(), lambda) + poly::eval_complex(&self.delayed(), lambda) * e
    }

    /// `d/d lambda` of [`Characteristic::value`].
    fn lambda_derivative(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let q = self.delayed();
        let e = (-lambda * tau).exp();
        let dr = poly::eval_complex(&poly::derivative(&self.delay_free()), lambda);
        let dq = poly::eval_complex(&poly::derivative(&q), lambda);
        dr + (dq - poly::eval_complex(&q, lambda) * tau) * e
    }

    /// `d/d tau` of [`Characteristic::value`].
    fn tau_derivative(&self, lambda: Complex64, tau: f64) -> Complex64 {
        -lambda * poly::eval_complex(&self.delayed(), lambda) * (-lambda * tau).exp()
    }

    /// The polynomial obtained at `tau = 0`, ascending.
    fn at_zero_delay(&self) -> Vec<f64> {
        poly::add(&self.delay_free(), &self.delayed())
    }

    /// Radius outside of which no root with `Re lambda >= 0` exists.
    ///
    /// For `Re lambda >= 0` we have `|e^{-lambda tau}| <= 1`, so a root
    /// satisfies `|lambda|^n <= sum (|r_i| + |q_i|) |lambda|^i`, which forces
    /// `|lambda| < 1 + max_i (|r_i| + |q_i|)`.
    fn root_bound(&self) -> f64 {
        let r = self.delay_free();
        let q = self.delayed();
        let n = r.len() - 1;
        let lead = r[n];
        let worst = (0..n)
            .map(|i| (r[i].abs() + q.get(i).map_or(0.0, |v| v.abs())) / lead.abs())
            .fold(0.0, f64::max);
        1.0 + worst
    }
}

/// Characteristic data at `P0`:
/// `[lambda + b - K + K e^{-lambda tau}] (lambda^3 + p1 lambda^2 + p2 lambda + p3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharSpecP0 {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub b: f64,
    pub feedback: f64,
}

impl CharSpecP0 {
    pub fn cubic(&self) -> [f64; 4] {
        [self.p3, self.p2, self.p1, 1.0]
    }

    /// The transcendental factor `lambda + b - K + K e^{-lambda tau}`.
    pub fn transcendental_factor(&self, lambda: Complex64, tau: f64) -> Complex64 {
        lambda + self.b - self.feedback + self.feedback * (-lambda * tau).exp()
    }
}

impl Characteristic for CharSpecP0 {
    fn delay_free(&self) -> Vec<f64> {
        poly::mul(&[self.b - self.feedback, 1.0], &self.cubic())
    }

    fn delayed(&self) -> Vec<f64> {
        self.cubic().iter().map(|c| c * self.feedback).collect()
    }

    // Factored form keeps the transcendental factor isolated.
    fn value(&self, lambda: Complex64, tau: f64) -> Complex64 {
        self.transcendental_factor(lambda, tau) * poly::eval_complex(&self.cubic(), lambda)
    }

    fn lambda_derivative(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let cubic = self.cubic();
        let t = self.transcendental_factor(lambda, tau);
        let dt = 1.0 - self.feedback * tau * (-lambda * tau).exp();
        dt * poly::eval_complex(&cubic, lambda) + t * poly::eval_complex(&poly::derivative(&cubic), lambda)
    }
}

/// Characteristic data at `P1` (and `P2`):
/// `R = lambda^4 + a1 lambda^3 + b1 lambda^2 + c1 lambda + d1`,
/// `Q = a2 lambda^3 + b2 lambda^2 + c2 lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharSpecP1 {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

impl Characteristic for CharSpecP1 {
    fn delay_free(&self) -> Vec<f64> {
        vec![self.d1, self.c1, self.b1, self.a1, 1.0]
    }

    fn delayed(&self) -> Vec<f64> {
        vec![0.0, self.c2, self.b2, self.a2]
    }
}

/// An arbitrary retarded quasi-polynomial, mostly for synthetic checks.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPolynomial {
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

impl QuasiPolynomial {
    pub fn new(r: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let deg_r = r.iter().rposition(|&c| c != 0.0);
        let deg_q = q.iter().rposition(|&c| c != 0.0);
        match (deg_r, deg_q) {
            (None, _) | (Some(0), Some(_)) => Err(Error::InvalidInput("R must be nonconstant and dominate Q".into())),
            (Some(dr), Some(dq)) if dq >= dr => {
                Err(Error::InvalidInput(format!("deg Q = {dq} must be below deg R = {dr}")))
            }
            (Some(dr), _) => {
                let mut r = r;
                r.truncate(dr + 1);
                Ok(QuasiPolynomial { r, q })
            }
        }
    }
}

impl Characteristic for QuasiPolynomial {
    fn delay_free(&self) -> Vec<f64> {
        self.r.clone()
    }

    fn delayed(&self) -> Vec<f64> {
        self.q.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CharSpec {
    P0(CharSpecP0),
    P1(CharSpecP1),
    Custom(QuasiPolynomial),
}

impl Characteristic for CharSpec {
    fn delay_free(&self) -> Vec<f64> {
        match self {
            CharSpec::P0(s) => s.delay_free(),
            CharSpec::P1(s) => s.delay_free(),
            CharSpec::Custom(s) => s.delay_free(),
        }
    }

    fn delayed(&self) -> Vec<f64> {
        match self {
            CharSpec::P0(s) => s.delayed(),
            CharSpec::P1(s) => s.delayed(),
            CharSpec::Custom(s) => s.delayed(),
        }
    }

    fn value(&self, lambda: Complex64, tau: f64) -> Complex64 {
        match self {
            CharSpec::P0(s) => s.value(lambda, tau),
            CharSpec::P1(s) => s.value(lambda, tau),
            CharSpec::Custom(s) => s.value(lambda, tau),
        }
    }

    fn lambda_derivative(&self, lambda: Complex64, tau: f64) -> Complex64 {
        match self {
            CharSpec::P0(s) => s.lambda_derivative(lambda, tau),
            CharSpec::P1(s) => s.lambda_derivative(lambda, tau),
            CharSpec::Custom(s) => s.lambda_derivative(lambda, tau),
        }
    }
}

impl From<CharSpecP0> for CharSpec {
    fn from(s: CharSpecP0) -> Self {
        CharSpec::P0(s)
    }
}

impl From<CharSpecP1> for CharSpec {
    fn from(s: CharSpecP1) -> Self {
        CharSpec::P1(s)
    }
}

pub fn char_spec_p0(params: &SystemParams) -> Result<CharSpecP0> {
    params.require_positive_b()?;
    let SystemParams {
        a,
        b,
        c,
        d,
        k,
        feedback,
    } = *params;
    Ok(CharSpecP0 {
        p1: k + a + c - 1.0 / b,
        p2: c * k + a * k + a * c - (k + c - d) / b + 1.0,
        p3: (1.0 + a * c - c / b) * k + c * d / b,
        b,
        feedback,
    })
}

/// Coefficients at `P1`/`P2`. `theta` enters only squared, so both
/// equilibria share them.
pub fn char_spec_p1(params: &SystemParams, eq: &Equilibrium) -> Result<CharSpecP1> {
    let theta = match (eq.label, eq.theta) {
        (EquilibriumLabel::P1 | EquilibriumLabel::P2, Some(t)) => t,
        _ => {
            return Err(Error::InvalidInput(format!(
                "char_spec_p1 needs P1 or P2, got {}",
                eq.label
            )))
        }
    };
    let SystemParams {
        a,
        b,
        c,
        d,
        k,
        feedback: kk,
    } = *params;
    if d == k {
        return Err(Error::DegenerateParameters(format!("d = k = {d}")));
    }
    let th2 = theta * theta;
    let s = c * (d - k);
    Ok(CharSpecP1 {
        a1: b + c + k - kk + (a * c * d + k) / s,
        b1: 1.0 + c * k + 2.0 * th2 + (c + k) * (b - kk) + (a * c * d * (b + c - kk) + k * (b + c - d + k - kk)) / s,
        c1: (b - kk) / s * (c * d + k * (k - d) + c * c * (a * d + k * (d - k))) + 2.0 * (c - d + k) * th2,
        d1: 2.0 * c * (k - d) * th2,
        a2: kk,
        b2: (c + k + (a * c * d + k) / s) * kk,
        c2: (1.0 + c * k + (a * d * c * c + k * (c - d + k)) / s) * kk,
    })
}

/// Convenience dispatch on the equilibrium label.
pub fn char_spec_at(params: &SystemParams, eq: &Equilibrium) -> Result<CharSpec> {
    match eq.label {
        EquilibriumLabel::P0 => char_spec_p0(params).map(CharSpec::P0),
        _ => char_spec_p1(params, eq).map(CharSpec::P1),
    }
}

/// One strict inequality `margin > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateCondition {
    pub label: &'static str,
    pub margin: f64,
}

impl GateCondition {
    pub fn holds(&self) -> bool {
        self.margin > 0.0
    }
}

/// Per-condition outcome of a Routh–Hurwitz test.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityGate {
    pub conditions: Vec<GateCondition>,
}

impl StabilityGate {
    pub fn passes(&self) -> bool {
        self.conditions.iter().all(GateCondition::holds)
    }

    pub fn violations(&self) -> Vec<&'static str> {
        self.conditions.iter().filter(|c| !c.holds()).map(|c| c.label).collect()
    }

    /// Some inequality holds with equality; the criterion says nothing there.
    pub fn marginal(&self) -> bool {
        self.conditions.iter().any(|c| c.margin == 0.0)
    }
}

pub const P0_P1_POSITIVE: &str = "p1>0";
pub const P0_P3_POSITIVE: &str = "p3>0";
pub const P0_HURWITZ: &str = "p1p2>p3";

/// `p1 > 0, p3 > 0, p1 p2 > p3` for the cubic factor.
pub fn routh_hurwitz_p0(spec: &CharSpecP0) -> StabilityGate {
    StabilityGate {
        conditions: vec![
            GateCondition {
                label: P0_P1_POSITIVE,
                margin: spec.p1,
            },
            GateCondition {
                label: P0_P3_POSITIVE,
                margin: spec.p3,
            },
            GateCondition {
                label: P0_HURWITZ,
                margin: spec.p1 * spec.p2 - spec.p3,
            },
        ],
    }
}

pub const P1_A_POSITIVE: &str = "a1+a2>0";
pub const P1_SECOND_MINOR: &str = "(a1+a2)(b1+b2)-(c1+c2)>0";
pub const P1_D_POSITIVE: &str = "d1>0";
pub const P1_THIRD_MINOR: &str = "(c1+c2)[(a1+a2)(b1+b2)-(c1+c2)]-(a1+a2)^2 d1>0";

/// Routh–Hurwitz for the zero-delay quartic
/// `lambda^4 + (a1+a2) lambda^3 + (b1+b2) lambda^2 + (c1+c2) lambda + d1`.
pub fn routh_hurwitz_p1_tau0(spec: &CharSpecP1) -> StabilityGate {
    let a = spec.a1 + spec.a2;
    let b = spec.b1 + spec.b2;
    let c = spec.c1 + spec.c2;
    let second = a * b - c;
    StabilityGate {
        conditions: vec![
            GateCondition {
                label: P1_A_POSITIVE,
                margin: a,
            },
            GateCondition {
                label: P1_SECOND_MINOR,
                margin: second,
            },
            GateCondition {
                label: P1_D_POSITIVE,
                margin: spec.d1,
            },
            GateCondition {
                label: P1_THIRD_MINOR,
                margin: c * second - a * a * spec.d1,
            },
        ],
    }
}
