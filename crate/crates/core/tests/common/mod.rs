//! Seeded samplers shared by the integration tests.
#![allow(dead_code)]

use delay_hopf::charpoly::{char_spec_p0, char_spec_p1, routh_hurwitz_p0, routh_hurwitz_p1_tau0, CharSpecP1};
use delay_hopf::critical_delay::{critical_delay_p1, omega_plus, CriticalDelayReport};
use delay_hopf::model::{equilibrium, Equilibrium, EquilibriumLabel, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        a: rng.random_range(0.05..3.0),
        b: rng.random_range(0.05..1.0),
        c: rng.random_range(0.3..3.0),
        d: rng.random_range(0.05..1.0),
        k: rng.random_range(0.05..2.0),
        feedback: rng.random_range(0.1..2.0),
    }
}

/// Parameters with a passing cubic gate and `K > b/2`.
pub fn hopf_p0_params(rng: &mut ChaCha8Rng) -> SystemParams {
    loop {
        let p = random_params(rng);
        let spec = char_spec_p0(&p).unwrap();
        if routh_hurwitz_p0(&spec).passes() && omega_plus(&p).is_some() {
            return p;
        }
    }
}

/// Parameters with three equilibria, a passing zero-delay gate at `P1` and
/// a nondegenerate first crossing.
pub fn hopf_p1_params(rng: &mut ChaCha8Rng) -> (SystemParams, Equilibrium, CriticalDelayReport) {
    loop {
        let p = random_params(rng);
        if !p.equilibrium_ratio().is_ok_and(|r| r > 0.0) {
            continue;
        }
        let eq = equilibrium(&p, EquilibriumLabel::P1).unwrap();
        let spec = char_spec_p1(&p, &eq).unwrap();
        if !routh_hurwitz_p1_tau0(&spec).passes() {
            continue;
        }
        if let Ok(report) = critical_delay_p1(&p, &eq, 2) {
            if report.transversality_rate.abs() > 1e-6 {
                return (p, eq, report);
            }
        }
    }
}

/// Coefficients of moderate size, no structure imposed.
pub fn random_spec_p1(rng: &mut ChaCha8Rng) -> CharSpecP1 {
    let mut c = || rng.random_range(-5.0..5.0);
    CharSpecP1 {
        a1: c(),
        b1: c(),
        c1: c(),
        d1: c(),
        a2: c(),
        b2: c(),
        c2: c(),
    }
}
