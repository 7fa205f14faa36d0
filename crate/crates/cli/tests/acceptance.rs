//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line:
//! `cargo test -p delay-hopf-cli --test acceptance`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use delay_hopf::charpoly::{char_spec_p0, char_spec_p1, routh_hurwitz_p0, routh_hurwitz_p1_tau0, CharSpecP1};
use delay_hopf::critical_delay::{
    critical_delay_p0, critical_delay_p1, omega_plus, positive_root_test, quartic_from_spec, quartic_positive_roots,
    resolvent, transversality_p1,
};
use delay_hopf::dde::{integrate, DelaySystem, History};
use delay_hopf::diagnostics::{classify, Regime};
use delay_hopf::model::{equilibrium, EquilibriumLabel, SystemParams};
use delay_hopf::rhp_oracle::{count_rhp_roots_auto, track_root};
use delay_hopf::{Characteristic, Complex64};
use delay_hopf_cli::commands::{critical_delay_dto, equilibria_report, simulate_report};
use delay_hopf_cli::report::{EnvelopeDto, SimulationReport};
use delay_hopf_cli::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

/// Median wall time of `runs` calls after one warm-up.
fn median_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let out = f();
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .collect();
    times.sort();
    (out, times[runs / 2])
}

fn within(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what} = {got}, want {want} +/- {tol}"))
    }
}

fn under(what: &str, took: Duration, limit: Duration) -> Result<(), String> {
    if took < limit {
        Ok(())
    } else {
        Err(format!("{what} took {took:?}, limit {limit:?}"))
    }
}

fn p0_critical_delay() -> Check {
    let (r, took) = median_time(21, || {
        critical_delay_dto(&SystemParams::P0_REFERENCE, EquilibriumLabel::P0, 3)
    });
    let r = r.map_err(|e| e.to_string())?;
    let (w, t0) = (r.omega0.unwrap(), r.tau0.unwrap());
    within("omega_plus", w, 0.8, 1e-4)?;
    within("tau0", t0, 1.15912, 1e-4)?;
    under("critical-delay", took, Duration::from_millis(1))?;
    Ok(format!("omega_plus = {w:.6}, tau0 = {t0:.6}, {took:?}"))
}

fn p1_equilibrium() -> Check {
    let s = reference_scenario(SystemParams::P1_REFERENCE);
    let (r, took) = median_time(21, || equilibria_report(&s));
    let r = r.map_err(|e| e.to_string())?;
    let p1 = r.equilibria.iter().find(|e| e.label == "P1").ok_or("no P1 reported")?;
    for (name, got, want) in [
        ("x", p1.x, 0.92),
        ("y", p1.y, 0.75),
        ("z", p1.z, -0.37),
        ("u", p1.u, -0.14),
    ] {
        within(name, got, want, 5e-3)?;
    }
    under("equilibria", took, Duration::from_millis(1))?;
    Ok(format!(
        "P1 = ({:.4}, {:.4}, {:.4}, {:.4}), {took:?}",
        p1.x, p1.y, p1.z, p1.u
    ))
}

fn reference_scenario(params: SystemParams) -> Scenario {
    Scenario {
        params,
        equilibrium: EquilibriumLabel::P1,
        frame: delay_hopf::Frame::Original,
        tau: None,
        horizon: 1.0,
        step: 1e-3,
        component: 0,
        outputs: vec![],
        initial: None,
    }
}

fn p1_critical_delay() -> Check {
    let (r, took) = median_time(21, || {
        critical_delay_dto(&SystemParams::P1_REFERENCE, EquilibriumLabel::P1, 3)
    });
    let r = r.map_err(|e| e.to_string())?;
    let t0 = r.tau0.unwrap();
    within("tau0", t0, 0.30329, 1e-4)?;
    under("critical-delay", took, Duration::from_millis(10))?;
    Ok(format!("tau0 = {t0:.6} (omega0 = {:.6}), {took:?}", r.omega0.unwrap()))
}

fn scenario_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
}

fn simulate_file(name: &str) -> Result<SimulationReport, String> {
    let mut s = Scenario::load(&scenario_dir().join(name)).map_err(|e| e.to_string())?;
    s.outputs.clear();
    simulate_report(&s, None, None, None)
        .map(|(r, _)| r)
        .map_err(|e| e.to_string())
}

fn envelope<'a>(r: &'a SimulationReport, c: &str) -> &'a EnvelopeDto {
    r.runs[0].envelope.iter().find(|e| e.component == c).unwrap()
}

fn expect_trend(r: &SimulationReport, c: &str, want: &str) -> Result<f64, String> {
    let e = envelope(r, c);
    match (&e.trend, e.amplitude_ratio) {
        (Some(t), Some(ratio)) if t == want => Ok(ratio),
        _ => Err(format!(
            "tau = {}: {c} is {:?} (ratio {:?}, {:?}), want {want}",
            r.runs[0].tau, e.trend, e.amplitude_ratio, e.note
        )),
    }
}

fn p0_regimes() -> Check {
    let start = Instant::now();
    let a = simulate_file("p0_stable.toml")?;
    let b = simulate_file("p0_onset.toml")?;
    let c = simulate_file("p0_unstable.toml")?;
    let took = start.elapsed();
    let ra = expect_trend(&a, "y", "decaying")?;
    let rb = expect_trend(&b, "y", "sustained")?;
    let rc = expect_trend(&c, "y", "growing")?;
    if !(ra < 0.5 && rc > 2.0) {
        return Err(format!("ratios {ra} / {rc}"));
    }
    let period = envelope(&b, "y").period.ok_or("no period at tau0")?;
    within("period", period, 2.0 * PI / 0.8, 0.05 * 2.0 * PI / 0.8)?;
    for comp in ["x", "z", "u"] {
        expect_trend(&b, comp, "decaying")?;
    }
    under("three simulations", took, Duration::from_secs(5))?;
    Ok(format!(
        "y ratios {ra:.3} / {rb:.4} / {rc:.3}, period {period:.4}, x z u decaying at tau0, {took:?}"
    ))
}

fn p1_regimes() -> Check {
    let start = Instant::now();
    let runs = [
        simulate_file("p1_stable.toml")?,
        simulate_file("p1_onset.toml")?,
        simulate_file("p1_unstable.toml")?,
    ];
    let took = start.elapsed();
    let mut notes = Vec::new();
    for (r, want) in runs.iter().zip(["decaying", "sustained", "growing"]) {
        for comp in ["x", "y"] {
            notes.push(format!("{comp}@{} {:.3}", r.runs[0].tau, expect_trend(r, comp, want)?));
        }
    }
    under("three simulations", took, Duration::from_secs(5))?;
    Ok(format!("{}, {took:?}", notes.join(", ")))
}

/// Root count on a 1e-3 grid over `[0, tau1)`, checked against `tau0`.
fn concordance<C: Characteristic>(name: &str, spec: &C, tau0: f64, tau1: f64) -> Result<String, String> {
    let n = (tau1 / 1e-3).ceil() as usize;
    let mut last_zero = None;
    let mut first_two = None;
    for i in 0..n {
        let tau = i as f64 * 1e-3;
        if tau >= tau1 {
            break;
        }
        let count = count_rhp_roots_auto(spec, tau)
            .map_err(|e| format!("{name} tau = {tau}: {e}"))?
            .count;
        match count {
            0 if first_two.is_none() => last_zero = Some(tau),
            2 if first_two.is_none() => first_two = Some(tau),
            2 => {}
            c => return Err(format!("{name}: count {c} at tau = {tau}")),
        }
    }
    let (lo, hi) = (last_zero.ok_or("never zero")?, first_two.ok_or("never two")?);
    if !(lo < tau0 && tau0 <= hi && hi - lo <= 1e-3 + 1e-12) {
        return Err(format!("{name}: jump in [{lo}, {hi}], tau0 = {tau0}"));
    }
    Ok(format!("{name} jump in [{lo:.3}, {hi:.3}] around {tau0:.5}"))
}

fn oracle_concordance() -> Check {
    let start = Instant::now();
    let p0 = SystemParams::P0_REFERENCE;
    let r0 = critical_delay_p0(&p0, 1).map_err(|e| e.to_string())?;
    let a = concordance("P0", &char_spec_p0(&p0).unwrap(), r0.tau0, r0.tau1.unwrap())?;
    let p1 = SystemParams::P1_REFERENCE;
    let eq = equilibrium(&p1, EquilibriumLabel::P1).unwrap();
    let r1 = critical_delay_p1(&p1, &eq, 2).map_err(|e| e.to_string())?;
    let b = concordance("P1", &char_spec_p1(&p1, &eq).unwrap(), r1.tau0, r1.tau1.unwrap())?;
    let took = start.elapsed();
    under("grids", took, Duration::from_secs(30))?;
    Ok(format!("{a}; {b}; {took:?}"))
}

fn random_spec_p1(rng: &mut ChaCha8Rng) -> CharSpecP1 {
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

fn positive_root_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut disagreements = 0;
    let mut with_root = 0;
    for _ in 0..1000 {
        let q = quartic_from_spec(&random_spec_p1(&mut rng));
        let test = positive_root_test(&q, &resolvent(&q)).has_positive_root;
        let direct = !quartic_positive_roots(&q).is_empty();
        with_root += usize::from(direct);
        disagreements += usize::from(test != direct);
    }
    let took = start.elapsed();
    if disagreements > 0 {
        return Err(format!("{disagreements} disagreements in 1000"));
    }
    under("1000 tests", took, Duration::from_secs(5))?;
    Ok(format!(
        "0 disagreements in 1000 ({with_root} with a positive root), {took:?}"
    ))
}

struct PureDelay;

impl DelaySystem<1> for PureDelay {
    fn rhs(&self, _t: f64, _x: &[f64; 1], delayed: &[f64; 1]) -> [f64; 1] {
        *delayed
    }
}

fn integrator_order() -> Check {
    let start = Instant::now();
    let steps = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let mut errors = Vec::new();
    for h in steps {
        let traj = integrate(&PureDelay, 1.0, &History::Constant([1.0]), 2.0, h).map_err(|e| e.to_string())?;
        let y = traj.sample(2.0).map_err(|e| e.to_string())?[0];
        errors.push((y - 3.5).abs());
    }
    let took = start.elapsed();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let detail = format!(
        "errors [{}], ratios [{}]",
        errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", "),
        ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
    );
    if !ratios.iter().all(|r| (12.0..=20.0).contains(r)) {
        return Err(format!(
            "{detail}; the solution is a quadratic on [1, 2], which RK4 reproduces to rounding"
        ));
    }
    under("five integrations", took, Duration::from_secs(1))?;
    Ok(format!("{detail}, {took:?}"))
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        a: rng.random_range(0.05..3.0),
        b: rng.random_range(0.05..1.0),
        c: rng.random_range(0.3..3.0),
        d: rng.random_range(0.05..1.0),
        k: rng.random_range(0.05..2.0),
        feedback: rng.random_range(0.1..2.0),
    }
}

/// Real-part slope of the root tracked from `tau0 - dt` to `tau0 + dt`.
fn crossing_slope<C: Characteristic>(spec: &C, omega: f64, tau0: f64, dt: f64) -> Result<(f64, f64, f64), String> {
    let on_axis = Complex64::new(0.0, omega);
    let back = track_root(spec, on_axis, tau0, tau0 - dt, 4).map_err(|e| e.to_string())?;
    let start = back.last().unwrap().lambda;
    let path = track_root(spec, start, tau0 - dt, tau0 + dt, 8).map_err(|e| e.to_string())?;
    let end = path.last().unwrap().lambda;
    Ok(((end.re - start.re) / (2.0 * dt), start.re, end.re))
}

fn transversality() -> Check {
    let start = Instant::now();
    let dt = 1e-4;
    let mut failures = Vec::new();
    let mut checked = 0;

    let mut run_p0 = |p: &SystemParams, failures: &mut Vec<String>| {
        let r = critical_delay_p0(p, 0).map_err(|e| e.to_string())?;
        let (slope, before, after) = crossing_slope(&char_spec_p0(p).unwrap(), r.omega0, r.tau0, dt)?;
        if !(slope > 0.0 && before < 0.0 && after > 0.0) {
            failures.push(format!("P0 {p:?}: slope {slope}"));
        }
        checked += 1;
        Ok::<_, String>(())
    };
    run_p0(&SystemParams::P0_REFERENCE, &mut failures)?;
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut found = 0;
    while found < 20 {
        let p = random_params(&mut rng);
        if routh_hurwitz_p0(&char_spec_p0(&p).unwrap()).passes() && omega_plus(&p).is_some() {
            run_p0(&p, &mut failures)?;
            found += 1;
        }
    }

    let mut run_p1 = |p: &SystemParams, failures: &mut Vec<String>| -> Result<bool, String> {
        if !p.equilibrium_ratio().is_ok_and(|r| r > 0.0) {
            return Ok(false);
        }
        let eq = equilibrium(p, EquilibriumLabel::P1).unwrap();
        let spec = char_spec_p1(p, &eq).unwrap();
        if !routh_hurwitz_p1_tau0(&spec).passes() {
            return Ok(false);
        }
        let Ok(r) = critical_delay_p1(p, &eq, 2) else {
            return Ok(false);
        };
        let t = transversality_p1(&spec, r.omega0, r.tau0).map_err(|e| e.to_string())?;
        let (slope, _, _) = crossing_slope(&spec, r.omega0, r.tau0, dt)?;
        if !(slope > 0.0 && slope.signum() == t.h_prime.signum()) {
            failures.push(format!("P1 {p:?}: slope {slope}, h' {}", t.h_prime));
        }
        checked += 1;
        Ok(true)
    };
    if !run_p1(&SystemParams::P1_REFERENCE, &mut failures)? {
        return Err("P1 reference set has no crossing".into());
    }
    let mut found = 0;
    while found < 20 {
        let p = random_params(&mut rng);
        if run_p1(&p, &mut failures)? {
            found += 1;
        }
    }
    let took = start.elapsed();
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    under("tracking", took, Duration::from_secs(30))?;
    Ok(format!(
        "{checked} crossings, all slopes positive and matching h'(z0) at P1, {took:?}"
    ))
}

fn destabilization() -> Check {
    let p = SystemParams::P1_REFERENCE;
    let without = classify(&p.with_feedback(0.0), EquilibriumLabel::P1).map_err(|e| e.to_string())?;
    let with = classify(&p, EquilibriumLabel::P1).map_err(|e| e.to_string())?;
    if without.regime != Regime::StableAllTau {
        return Err(format!("K = 0 gives {:?}", without.regime));
    }
    let stable = with.expected_stable(0.5 * with.tau0.unwrap_or(0.0));
    match (with.regime, with.tau0, with.tau1) {
        (Regime::HopfAtTau0, Some(t0), Some(t1)) if t0.is_finite() && t0 < t1 && stable == Some(true) => Ok(format!(
            "K = 0: stable_all_tau; K = 1: stable below {t0:.5}, Hopf at {t0:.5}, unstable to {t1:.4}"
        )),
        other => Err(format!("K = 1 gives {other:?}")),
    }
}

/// Criteria known not to hold as stated. They still run, and must still fail,
/// so a change in behaviour is noticed.
const UNATTAINABLE: &[usize] = &[8];

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("P0 critical delay", p0_critical_delay),
        ("P1 equilibrium", p1_equilibrium),
        ("P1 critical delay", p1_critical_delay),
        ("P0 regimes", p0_regimes),
        ("P1 regimes", p1_regimes),
        ("oracle concordance", oracle_concordance),
        ("positive-root test vs enumeration", positive_root_oracle),
        ("integrator order at t = 2", integrator_order),
        ("transversality", transversality),
        ("delay destabilizes", destabilization),
    ];
    // Written to the handle, not through `println!`, so the lines survive
    // the harness's output capture.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out);
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let line = match check() {
            Ok(detail) => format!("PASS {n:2} {name}: {detail}"),
            Err(detail) => {
                failed.push(n);
                format!("FAIL {n:2} {name}: {detail}")
            }
        };
        let _ = writeln!(out, "{line}");
    }
    drop(out);
    assert_eq!(failed, UNATTAINABLE, "unexpected set of failing criteria");
}
