//! Independent checks on the closed-form crossing analysis.
//!
//! [`count_rhp_roots`] counts characteristic roots with positive real part
//! by the argument principle on a rectangle that provably encloses all of
//! them. [`track_root`] follows one root in `tau` by predictor-corrector
//! continuation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::charpoly::Characteristic;
use crate::{Error, Result};

/// Below this `|f|` on the contour a root is considered too close.
pub const CONTOUR_CLEARANCE: f64 = 1e-6;
/// Largest accepted distance of `winding / 2 pi` from an integer.
pub const WINDING_TOL: f64 = 0.1;
/// Perturbations attempted before giving up with `ContourOnRoot`.
pub const MAX_RETRIES: usize = 5;
/// Residual every continuation point must meet.
pub const TRACK_TOL: f64 = 1e-8;

const MAX_BISECTIONS: u32 = 50;
const MAX_ARG_STEP: f64 = PI / 3.0;

/// Rectangle `[left_offset, depth] x [-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub half_width: f64,
    pub depth: f64,
    /// Initial samples per edge, refined adaptively.
    pub samples: usize,
    /// Real part of the left edge; zero unless the contour was perturbed.
    pub left_offset: f64,
}

impl ContourSpec {
    pub fn new(half_width: f64, depth: f64, samples: usize) -> Result<Self> {
        if !(half_width > 0.0 && depth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "contour extents must be positive, got H = {half_width}, R = {depth}"
            )));
        }
        if samples < 64 {
            return Err(Error::InvalidInput(format!(
                "need at least 64 samples per edge, got {samples}"
            )));
        }
        Ok(ContourSpec {
            half_width,
            depth,
            samples,
            left_offset: 0.0,
        })
    }

    /// Twice the root bound of `spec` in both directions, 256 samples.
    pub fn enclosing<C: Characteristic + ?Sized>(spec: &C) -> Self {
        let r = 2.0 * spec.root_bound();
        ContourSpec {
            half_width: r,
            depth: r,
            samples: 256,
            left_offset: 0.0,
        }
    }

    fn perturbed(&self, attempt: usize) -> Self {
        ContourSpec {
            left_offset: 1e-5 * 10f64.powi(attempt as i32 - 1),
            half_width: self.half_width * (1.0 + 0.01 * attempt as f64),
            ..*self
        }
    }

    /// Corners, counterclockwise from the bottom left.
    fn corners(&self) -> [Complex64; 4] {
        let (l, r, h) = (self.left_offset, self.depth, self.half_width);
        [
            Complex64::new(l, -h),
            Complex64::new(r, -h),
            Complex64::new(r, h),
            Complex64::new(l, h),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCount {
    pub count: usize,
    pub winding_residual: f64,
    /// The contour actually used, after any perturbation.
    pub contour: ContourSpec,
}

struct EdgeScan {
    increment: f64,
    min_modulus: f64,
}

fn arg_step(from: Complex64, to: Complex64) -> f64 {
    (to / from).arg()
}

fn refine<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
    min_modulus: &mut f64,
) -> f64 {
    let d = arg_step(fa, fb);
    if depth >= MAX_BISECTIONS {
        return d;
    }
    let m = (a + b) * 0.5;
    let fm = f(m);
    *min_modulus = min_modulus.min(fm.norm());
    let d1 = arg_step(fa, fm);
    let d2 = arg_step(fm, fb);
    if d1.abs() < MAX_ARG_STEP && d2.abs() < MAX_ARG_STEP {
        d1 + d2
    } else {
        refine(f, a, m, fa, fm, depth + 1, min_modulus) + refine(f, m, b, fm, fb, depth + 1, min_modulus)
    }
}

fn scan_edge<F: Fn(Complex64) -> Complex64>(f: &F, from: Complex64, to: Complex64, samples: usize) -> EdgeScan {
    let mut increment = 0.0;
    let mut prev_z = from;
    let mut prev_f = f(from);
    let mut min_modulus = prev_f.norm();
    for i in 1..=samples {
        let z = from + (to - from) * (i as f64 / samples as f64);
        let fz = f(z);
        min_modulus = min_modulus.min(fz.norm());
        increment += refine(f, prev_z, z, prev_f, fz, 0, &mut min_modulus);
        prev_z = z;
        prev_f = fz;
    }
    EdgeScan { increment, min_modulus }
}

fn wind<C: Characteristic + ?Sized>(spec: &C, tau: f64, contour: &ContourSpec) -> (f64, f64) {
    let f = |z: Complex64| spec.value(z, tau);
    let c = contour.corners();
    let mut total = 0.0;
    let mut min_modulus = f64::INFINITY;
    // edges in fixed order so the sum is reproducible
    for i in 0..4 {
        let scan = scan_edge(&f, c[i], c[(i + 1) % 4], contour.samples);
        total += scan.increment;
        min_modulus = min_modulus.min(scan.min_modulus);
    }
    (total / (2.0 * PI), min_modulus)
}

/// Number of roots of `spec.value(., tau)` inside `contour`.
///
/// The phase of `f` is accumulated along each edge, bisecting any sample
/// interval over which it moves by `pi/3` or more. When the contour comes
/// within [`CONTOUR_CLEARANCE`] of a root it is shifted right and widened,
/// up to [`MAX_RETRIES`] times.
pub fn count_rhp_roots<C: Characteristic + ?Sized>(spec: &C, tau: f64, contour: &ContourSpec) -> Result<RootCount> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tau must be finite and nonnegative, got {tau}"
        )));
    }
    let mut last_min = 0.0;
    for attempt in 0..=MAX_RETRIES {
        let used = if attempt == 0 {
            *contour
        } else {
            contour.perturbed(attempt)
        };
        let (winding, min_modulus) = wind(spec, tau, &used);
        if min_modulus <= CONTOUR_CLEARANCE || !min_modulus.is_finite() {
            last_min = min_modulus;
            continue;
        }
        let rounded = winding.round();
        let residual = (winding - rounded).abs();
        if residual >= WINDING_TOL || rounded < 0.0 {
            return Err(Error::NonIntegerWinding { residual });
        }
        return Ok(RootCount {
            count: rounded as usize,
            winding_residual: residual,
            contour: used,
        });
    }
    Err(Error::ContourOnRoot {
        retries: MAX_RETRIES,
        min_modulus: last_min,
    })
}

/// Convenience: count with [`ContourSpec::enclosing`].
pub fn count_rhp_roots_auto<C: Characteristic + ?Sized>(spec: &C, tau: f64) -> Result<RootCount> {
    count_rhp_roots(spec, tau, &ContourSpec::enclosing(spec))
}

/// One point of a continuation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub tau: f64,
    pub lambda: Complex64,
    pub residual: f64,
}

const MIN_SUBSTEP: f64 = 1e-6;
const NEWTON_ITERS: usize = 30;

fn newton<C: Characteristic + ?Sized>(spec: &C, mut lambda: Complex64, tau: f64) -> Option<(Complex64, f64)> {
    for _ in 0..NEWTON_ITERS {
        let f = spec.value(lambda, tau);
        if f.norm() < 1e-14 {
            break;
        }
        let df = spec.lambda_derivative(lambda, tau);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        lambda -= step;
        if !lambda.is_finite() {
            return None;
        }
        if step.norm() < 1e-15 * (1.0 + lambda.norm()) {
            break;
        }
    }
    let r = spec.value(lambda, tau).norm();
    (r < TRACK_TOL).then_some((lambda, r))
}

/// Follows the root `lambda_start` of `spec` from `tau_start` to `tau_end`
/// in `steps` uniform steps.
///
/// Each step predicts with the tangent `d lambda/d tau = -f_tau/f_lambda` and
/// corrects with Newton. A correction that fails, or lands far from the
/// prediction, is retried with half the step; below a step of `1e-6` the
/// root is declared lost rather than risking a jump to another branch.
pub fn track_root<C: Characteristic + ?Sized>(
    spec: &C,
    lambda_start: Complex64,
    tau_start: f64,
    tau_end: f64,
    steps: usize,
) -> Result<Vec<PathPoint>> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be positive".into()));
    }
    let r0 = spec.value(lambda_start, tau_start).norm();
    if r0 >= TRACK_TOL {
        return Err(Error::InvalidInput(format!(
            "starting point is not a root: residual {r0:e}"
        )));
    }
    let mut path = vec![PathPoint {
        tau: tau_start,
        lambda: lambda_start,
        residual: r0,
    }];
    let dt = (tau_end - tau_start) / steps as f64;
    let mut lambda = lambda_start;
    let mut tau = tau_start;
    for i in 1..=steps {
        let target = if i == steps { tau_end } else { tau_start + dt * i as f64 };
        let mut residual = 0.0;
        while tau != target {
            let mut h = target - tau;
            loop {
                let slope = -spec.tau_derivative(lambda, tau) / spec.lambda_derivative(lambda, tau);
                let predicted = lambda + slope * h;
                let guard = 0.1 * (1.0 + lambda.norm()).max(slope.norm() * h.abs() * 4.0);
                match newton(spec, predicted, tau + h) {
                    Some((l, r)) if (l - predicted).norm() <= guard => {
                        lambda = l;
                        residual = r;
                        tau = if h == target - tau { target } else { tau + h };
                        break;
                    }
                    _ => {
                        h *= 0.5;
                        if h.abs() < MIN_SUBSTEP {
                            return Err(Error::LostRoot { tau });
                        }
                    }
                }
            }
        }
        path.push(PathPoint { tau, lambda, residual });
    }
    Ok(path)
}
