//! Pure-imaginary crossings of the characteristic roots and the delays at
//! which they happen.
//!
//! At `P0` only the transcendental factor `lambda + b - K + K e^{-lambda tau}`
//! can reach the imaginary axis, at the single frequency
//! `omega_+ = sqrt(2Kb - b^2)`. At `P1` a crossing `lambda = i omega` requires
//! `|R(i omega)| = |Q(i omega)|`, which in `z = omega^2` is the quartic
//! `h(z) = z^4 + p z^3 + q z^2 + u z + v`; its stationary points come from a
//! depressed resolvent cubic solved by Cardano's formula.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::charpoly::{char_spec_p0, char_spec_p1, CharSpecP1, Characteristic};
use crate::model::{Equilibrium, SystemParams};
use crate::poly;
use crate::{Error, Result};

/// Crossing residual accepted for a ladder entry.
pub const CROSSING_TOL: f64 = 1e-8;
/// Imaginary parts below this count as real roots.
pub const REALNESS_TOL: f64 = 1e-9;
/// Relative slack on `h(z*) <= 0`, so a rounded tangency still counts.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Guard on `|h'(z0)|` and on the simple-root denominator.
pub const SIMPLICITY_TOL: f64 = 1e-10;

/// Which arccos branch produced a ladder entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `omega tau` in `[0, pi]` modulo `2 pi`.
    Principal,
    /// `omega tau` in `[pi, 2 pi]` modulo `2 pi`.
    Mirrored,
}

/// One critical delay: at `tau`, `i omega` is a characteristic root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderEntry {
    /// Frequency index (1-based, ascending frequency for `P1`; always 1 at `P0`).
    pub k: usize,
    /// Repetition index: `0, 1, ..` at `P0`, `1, 2, ..` at `P1`.
    pub j: usize,
    pub tau: f64,
    pub omega: f64,
    pub residual: f64,
    pub branch: Branch,
}

/// `sqrt(2Kb - b^2)` when `K > b/2`.
pub fn omega_plus(params: &SystemParams) -> Option<f64> {
    let SystemParams { b, feedback, .. } = *params;
    if feedback > b / 2.0 {
        Some((2.0 * feedback * b - b * b).sqrt())
    } else {
        None
    }
}

/// `tau_j = arccos((K - b)/K)/omega_+ + 2 j pi/omega_+` for `j = 0..=j_max`.
pub fn tau_ladder_p0(params: &SystemParams, j_max: usize) -> Result<Vec<LadderEntry>> {
    let spec = char_spec_p0(params)?;
    let omega = omega_plus(params)
        .ok_or_else(|| Error::NoCrossing(format!("K = {} <= b/2 = {}", params.feedback, params.b / 2.0)))?;
    let k_fb = params.feedback;
    let base = ((k_fb - params.b) / k_fb).acos() / omega;
    let lambda = Complex64::new(0.0, omega);
    Ok((0..=j_max)
        .map(|j| {
            let tau = base + 2.0 * PI * j as f64 / omega;
            LadderEntry {
                k: 1,
                j,
                tau,
                omega,
                residual: spec.value(lambda, tau).norm(),
                branch: Branch::Principal,
            }
        })
        .collect())
}

/// `h(z) = z^4 + p z^3 + q z^2 + u z + v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticSpec {
    pub p: f64,
    pub q: f64,
    pub u: f64,
    pub v: f64,
    /// The characteristic data this quartic was built from, if any.
    pub source: Option<CharSpecP1>,
}

impl QuarticSpec {
    pub fn from_coefficients(p: f64, q: f64, u: f64, v: f64) -> Self {
        QuarticSpec {
            p,
            q,
            u,
            v,
            source: None,
        }
    }

    /// Ascending coefficients of `h`.
    pub fn coefficients(&self) -> [f64; 5] {
        [self.v, self.u, self.q, self.p, 1.0]
    }

    pub fn h(&self, z: f64) -> f64 {
        poly::eval(&self.coefficients(), z)
    }

    pub fn h_prime(&self, z: f64) -> f64 {
        ((4.0 * z + 3.0 * self.p) * z + 2.0 * self.q) * z + self.u
    }

    pub fn h_prime_complex(&self, z: Complex64) -> Complex64 {
        ((z * 4.0 + 3.0 * self.p) * z + 2.0 * self.q) * z + self.u
    }
}

/// `|R(i omega)|^2 - |Q(i omega)|^2` as a quartic in `z = omega^2`.
pub fn quartic_from_spec(spec: &CharSpecP1) -> QuarticSpec {
    let CharSpecP1 {
        a1,
        b1,
        c1,
        d1,
        a2,
        b2,
        c2,
    } = *spec;
    QuarticSpec {
        p: a1 * a1 - 2.0 * b1 - a2 * a2,
        q: b1 * b1 + 2.0 * d1 - 2.0 * a1 * c1 - b2 * b2 + 2.0 * a2 * c2,
        u: c1 * c1 - 2.0 * b1 * d1 - c2 * c2,
        v: d1 * d1,
        source: Some(*spec),
    }
}

/// Stationary points of `h` via `y = z + p/4`, `y^3 + p1_res y + q1_res = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventReport {
    pub p1_res: f64,
    pub q1_res: f64,
    /// `(q1_res/2)^2 + (p1_res/3)^3`.
    pub discriminant: f64,
    pub y: [Complex64; 3],
    pub z: [Complex64; 3],
}

fn sigma() -> Complex64 {
    Complex64::new(-0.5, 3f64.sqrt() / 2.0)
}

pub fn resolvent(quartic: &QuarticSpec) -> ResolventReport {
    let QuarticSpec { p, q, u, .. } = *quartic;
    let p1_res = q / 2.0 - 3.0 * p * p / 16.0;
    let q1_res = p * p * p / 32.0 - p * q / 8.0 + u / 4.0;
    let disc = (q1_res / 2.0).powi(2) + (p1_res / 3.0).powi(3);
    let s = sigma();
    let s2 = s * s;

    let y = if disc >= 0.0 {
        // Real radicands: real cube roots, one real and two conjugate roots.
        let sq = disc.sqrt();
        let m = Complex64::new((-q1_res / 2.0 + sq).cbrt(), 0.0);
        let n = Complex64::new((-q1_res / 2.0 - sq).cbrt(), 0.0);
        [m + n, s * m + s2 * n, s2 * m + s * n]
    } else {
        // Conjugate radicands; pairing the principal root with its conjugate
        // keeps m n = -p1_res/3 real, so all three roots are real.
        let a = Complex64::new(-q1_res / 2.0, (-disc).sqrt());
        let m = a.powf(1.0 / 3.0);
        let n = m.conj();
        [m + n, s * m + s2 * n, s2 * m + s * n].map(|y| Complex64::new(y.re, 0.0))
    };
    let z = y.map(|y| y - p / 4.0);
    ResolventReport {
        p1_res,
        q1_res,
        discriminant: disc,
        y,
        z,
    }
}

/// Outcome of the resolvent-based positive-root test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveRootTest {
    pub has_positive_root: bool,
    /// A stationary point `z* > 0` with `h(z*) <= 0`. Absent when `v < 0`
    /// decides the answer on its own.
    pub witness: Option<f64>,
}

/// Decides whether `h` has a positive root from its stationary points.
///
/// With a nonnegative discriminant `h` has a single minimum at `z1`; with a
/// negative one all three stationary points are real. A positive root exists
/// iff some real stationary point `z* > 0` has `h(z*) <= 0`. Equality is
/// included in both branches: `h(z*) = 0` there means a positive double root.
/// It is judged up to [`TANGENCY_TOL`] relative to the size of the terms of `h`.
///
/// The characteristic quartic always has `v >= 0`. For other quartics
/// `v < 0` means `h(0) < 0`, so a positive root exists regardless.
pub fn positive_root_test(quartic: &QuarticSpec, report: &ResolventReport) -> PositiveRootTest {
    if quartic.v < 0.0 {
        return PositiveRootTest {
            has_positive_root: true,
            witness: None,
        };
    }
    let slack = |z: f64| {
        let terms = [
            quartic.v,
            quartic.u * z,
            quartic.q * z * z,
            quartic.p * z.powi(3),
            z.powi(4),
        ];
        TANGENCY_TOL * terms.iter().map(|t| t.abs()).sum::<f64>()
    };
    let candidates: Vec<f64> = if report.discriminant >= 0.0 {
        vec![report.z[0].re]
    } else {
        report.z.iter().map(|z| z.re).collect()
    };
    let witness = candidates
        .into_iter()
        .filter(|&z| z > 0.0 && quartic.h(z) <= slack(z))
        .min_by(|a, b| quartic.h(*a).total_cmp(&quartic.h(*b)));
    PositiveRootTest {
        has_positive_root: witness.is_some(),
        witness,
    }
}

/// All positive real roots of `h`, ascending, with multiplicity.
///
/// Computed from the companion-matrix eigenvalues, independently of the
/// resolvent. A conjugate pair whose real part nearly annihilates `h` is
/// accepted as a double real root.
pub fn quartic_positive_roots(quartic: &QuarticSpec) -> Vec<f64> {
    let coeffs = quartic.coefficients();
    let residual_ok = |x: f64| quartic.h(x).abs() < 1e-9 * (1.0 + x.powi(4));
    let mut out: Vec<f64> = poly::roots(&coeffs)
        .into_iter()
        .filter(|z| {
            let scale = 1.0 + z.norm();
            z.im.abs() < REALNESS_TOL * scale || (z.im.abs() < 1e-6 * scale && residual_ok(z.re))
        })
        .map(|z| z.re)
        .filter(|&x| x > 0.0)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Critical delays at `P1` for the given positive roots `z*` of `h`.
///
/// For `omega = sqrt(z*)`, `cos(omega tau)` is fixed by the coefficients; the
/// principal arccos branch is tried first and the mirrored one
/// `2 pi - arccos` used when the principal one fails to annihilate the
/// characteristic function. Repeated roots are collapsed. Entries are sorted
/// by delay.
pub fn tau_ladder_p1(spec: &CharSpecP1, roots: &[f64], j_max: usize) -> Result<Vec<LadderEntry>> {
    if roots.is_empty() {
        return Err(Error::NoCrossing("h has no positive roots".into()));
    }
    if j_max == 0 {
        return Err(Error::InvalidInput("j_max must be at least 1".into()));
    }
    let mut distinct: Vec<f64> = Vec::with_capacity(roots.len());
    for &z in roots {
        if distinct
            .last()
            .is_none_or(|&prev| (z - prev).abs() > 1e-9 * (1.0 + z.abs()))
        {
            distinct.push(z);
        }
    }

    let CharSpecP1 {
        a1,
        b1,
        c1,
        d1,
        a2,
        b2,
        c2,
    } = *spec;
    let mut ladder = Vec::new();
    for (idx, &z) in distinct.iter().enumerate() {
        let w = z.sqrt();
        let w2 = z;
        let w4 = z * z;
        let num = (b2 - a1 * a2) * w4 + (a1 * c2 + a2 * c1 - b1 * b2) * w2 + b2 * d1 - c1 * c2;
        let den = a2 * a2 * w4 + (b2 * b2 - 2.0 * a2 * c2) * w2 + c2 * c2;
        if den == 0.0 {
            return Err(Error::BranchFailure {
                omega: w,
                principal: f64::NAN,
                mirrored: f64::NAN,
            });
        }
        let angle = (num / den).clamp(-1.0, 1.0).acos();
        let lambda = Complex64::new(0.0, w);
        let residual = |t: f64| spec.value(lambda, t).norm();

        let principal = angle / w;
        let mirrored = (2.0 * PI - angle) / w;
        let (base, branch, res) = if residual(principal) < CROSSING_TOL {
            (principal, Branch::Principal, residual(principal))
        } else if residual(mirrored) < CROSSING_TOL {
            (mirrored, Branch::Mirrored, residual(mirrored))
        } else {
            return Err(Error::BranchFailure {
                omega: w,
                principal: residual(principal),
                mirrored: residual(mirrored),
            });
        };
        for j in 1..=j_max {
            let tau = base + 2.0 * (j - 1) as f64 * PI / w;
            ladder.push(LadderEntry {
                k: idx + 1,
                j,
                tau,
                omega: w,
                residual: if j == 1 { res } else { residual(tau) },
                branch,
            });
        }
    }
    ladder.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    Ok(ladder)
}

/// `d Re lambda / d tau` at `(i omega_+, tau_j)`:
/// `omega_+^2 / ((cos omega_+ tau_j - K tau_j)^2 + sin^2 omega_+ tau_j)`.
pub fn transversality_p0(params: &SystemParams, tau_j: f64) -> Result<f64> {
    let w = omega_plus(params).ok_or_else(|| Error::NoCrossing("K <= b/2".into()))?;
    let kt = params.feedback * tau_j;
    let (s, c) = (w * tau_j).sin_cos();
    Ok(w * w / ((c - kt).powi(2) + s * s))
}

/// Crossing speed data for the first `P1` crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransversalityP1 {
    pub h_prime: f64,
    /// Sign of `h'(z0)`, which is the sign of `d Re lambda / d tau`.
    pub sign: f64,
    /// `|R'(i w) e^{i w tau} + Q'(i w) - tau Q(i w)|`; nonzero iff the root is simple.
    pub simplicity: f64,
    /// `omega0^2 h'(z0) / simplicity^2`, the crossing speed itself.
    pub rate: f64,
}

pub fn transversality_p1(spec: &CharSpecP1, omega0: f64, tau0: f64) -> Result<TransversalityP1> {
    let quartic = quartic_from_spec(spec);
    let z0 = omega0 * omega0;
    let h_prime = quartic.h_prime(z0);
    if h_prime.abs() < SIMPLICITY_TOL {
        return Err(Error::DegenerateCrossing { h_prime });
    }
    let lambda = Complex64::new(0.0, omega0);
    let r = spec.delay_free();
    let q = spec.delayed();
    let dr = poly::eval_complex(&poly::derivative(&r), lambda);
    let dq = poly::eval_complex(&poly::derivative(&q), lambda);
    let qv = poly::eval_complex(&q, lambda);
    let simplicity = (dr * (lambda * tau0).exp() + dq - qv * tau0).norm();
    if simplicity < SIMPLICITY_TOL {
        return Err(Error::DegenerateCrossing { h_prime });
    }
    Ok(TransversalityP1 {
        h_prime,
        sign: h_prime.signum(),
        simplicity,
        rate: z0 * h_prime / (simplicity * simplicity),
    })
}

/// Everything known about the first crossing at an equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDelayReport {
    pub omega0: f64,
    pub z0: f64,
    pub ladder: Vec<LadderEntry>,
    pub tau0: f64,
    /// Next critical delay after `tau0`, if the ladder reaches it.
    pub tau1: Option<f64>,
    pub transversality_sign: f64,
    /// `d Re lambda / d tau` at `tau0`.
    pub transversality_rate: f64,
    pub residuals: Vec<f64>,
}

impl CriticalDelayReport {
    fn from_ladder(ladder: Vec<LadderEntry>) -> Self {
        let first = ladder[0];
        CriticalDelayReport {
            omega0: first.omega,
            z0: first.omega * first.omega,
            tau0: first.tau,
            tau1: ladder.get(1).map(|e| e.tau),
            residuals: ladder.iter().map(|e| e.residual).collect(),
            ladder,
            transversality_sign: f64::NAN,
            transversality_rate: f64::NAN,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Critical delay at `P0`. `j_max >= 1` is needed for `tau1`.
pub fn critical_delay_p0(params: &SystemParams, j_max: usize) -> Result<CriticalDelayReport> {
    let ladder = tau_ladder_p0(params, j_max)?;
    let mut report = CriticalDelayReport::from_ladder(ladder);
    let rate = transversality_p0(params, report.tau0)?;
    report.transversality_rate = rate;
    report.transversality_sign = rate.signum();
    Ok(report)
}

/// Critical delay at `P1`/`P2` through the quartic, its positive roots and
/// the branch-verified arccos ladder. `j_max >= 2` guarantees `tau1`.
pub fn critical_delay_p1(params: &SystemParams, eq: &Equilibrium, j_max: usize) -> Result<CriticalDelayReport> {
    let spec = char_spec_p1(params, eq)?;
    let quartic = quartic_from_spec(&spec);
    let roots = quartic_positive_roots(&quartic);
    let ladder = tau_ladder_p1(&spec, &roots, j_max)?;
    let mut report = CriticalDelayReport::from_ladder(ladder);
    let t = transversality_p1(&spec, report.omega0, report.tau0)?;
    report.transversality_sign = t.sign;
    report.transversality_rate = t.rate;
    Ok(report)
}
