//! One function per subcommand. Each returns its report without touching
//! the filesystem, except `simulate`, which also writes series when asked.

use std::path::{Path, PathBuf};

use delay_hopf::critical_delay::{critical_delay_p0, critical_delay_p1};
use delay_hopf::diagnostics::{
    analyze_oscillation, classify, cross_check_point, simulate, CrossCheckSetup, Disagreement, EnvelopeConfig, Regime,
};
use delay_hopf::model::{equilibrium, EquilibriumLabel, FinancialSystem, SystemParams};
use delay_hopf::{Error, Trajectory};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::output::write_series;
use crate::report::{
    CriticalDelayDto, DisagreementDto, EnvelopeDto, EquilibriaReport, GridReport, RowDto, RunDto, SimulationReport,
    StabilityReport, REPORT_VERSION,
};
use crate::scenario::{Output, Scenario, COMPONENTS};

/// Ladder depth used by `critical-delay`.
pub const DEFAULT_J_MAX: usize = 3;

pub fn equilibria_report(s: &Scenario) -> CliResult<EquilibriaReport> {
    EquilibriaReport::build(&s.params)
}

pub fn stability_report(s: &Scenario) -> CliResult<StabilityReport> {
    let verdict = classify(&s.params, s.equilibrium)?;
    Ok(StabilityReport::build(&s.params, &verdict))
}

/// A missing crossing is a result, not an error.
pub fn critical_delay_dto(params: &SystemParams, label: EquilibriumLabel, j_max: usize) -> CliResult<CriticalDelayDto> {
    let report = match label {
        EquilibriumLabel::P0 => critical_delay_p0(params, j_max),
        _ => equilibrium(params, label).and_then(|eq| critical_delay_p1(params, &eq, j_max)),
    };
    match report {
        Ok(r) => Ok(CriticalDelayDto::crossing(params, label, &r)),
        Err(Error::NoCrossing(reason)) => Ok(CriticalDelayDto::no_crossing(params, label, reason)),
        Err(e) => Err(e.into()),
    }
}

pub fn critical_delay_report(s: &Scenario) -> CliResult<CriticalDelayDto> {
    critical_delay_dto(&s.params, s.equilibrium, DEFAULT_J_MAX)
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Validation("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Io(format!("cannot start {n} worker threads: {e}"))),
    }
}

fn envelope_rows(s: &Scenario, system: &FinancialSystem, traj: &Trajectory<4>) -> CliResult<Vec<EnvelopeDto>> {
    let eq = equilibrium(&s.params, s.equilibrium)?;
    let center = system.to_frame(&eq.point);
    let config = EnvelopeConfig::default();
    Ok(COMPONENTS
        .iter()
        .enumerate()
        .map(
            |(i, name)| match analyze_oscillation(traj, i, center.component(i), &config) {
                Ok(r) => EnvelopeDto {
                    component: (*name).into(),
                    trend: Some(r.envelope_trend.as_str().into()),
                    period: r.period_estimate,
                    amplitude_ratio: Some(r.amplitude_ratio),
                    note: None,
                },
                Err(e) => EnvelopeDto {
                    component: (*name).into(),
                    trend: None,
                    period: None,
                    amplitude_ratio: None,
                    note: Some(e.to_string()),
                },
            },
        )
        .collect())
}

/// Integrates every delay of the scenario. With `out = Some((dir, stem))`
/// and a plot output requested, each run's CSV and plot stubs are written
/// as `<stem>.csv` (one delay) or `<stem>_tau<i>.csv`.
pub fn simulate_report(
    s: &Scenario,
    tau_override: Option<f64>,
    jobs: Option<usize>,
    out: Option<(&Path, &str)>,
) -> CliResult<(SimulationReport, Vec<PathBuf>)> {
    let taus = s.taus(tau_override)?;
    let initial = s.initial()?;
    let system = FinancialSystem::new(s.params, s.frame);
    let runs: Vec<CliResult<Trajectory<4>>> = with_pool(jobs, || {
        taus.par_iter()
            .map(|&tau| Ok(simulate(&system, tau, &initial, s.horizon, s.step)?))
            .collect()
    })?;
    let plots: Vec<Output> = s.outputs.iter().copied().filter(|o| *o != Output::Report).collect();
    let mut files = Vec::new();
    let mut rows = Vec::with_capacity(runs.len());
    for (i, (traj, &tau)) in runs.into_iter().zip(&taus).enumerate() {
        let traj = traj?;
        let mut csv = None;
        if let (Some((dir, stem)), false) = (out, plots.is_empty()) {
            let name = if taus.len() == 1 {
                stem.to_string()
            } else {
                format!("{stem}_tau{i:03}")
            };
            files.extend(write_series(dir, &name, &traj, &plots)?);
            csv = Some(format!("{name}.csv"));
        }
        rows.push(RunDto {
            tau,
            effective_step: traj.step,
            knots: traj.len(),
            end: traj.end(),
            blow_up: traj.blow_up,
            csv,
            envelope: envelope_rows(s, &system, &traj)?,
        });
    }
    let report = SimulationReport {
        kind: "simulate".into(),
        version: REPORT_VERSION,
        equilibrium: s.equilibrium.to_string(),
        frame: s.frame.into(),
        horizon: s.horizon,
        step: s.step,
        params: s.params.into(),
        initial: initial.into(),
        runs: rows,
    };
    Ok((report, files))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Sweep,
    CrossCheck,
}

/// Verdict, root count and envelope at every delay, run in parallel and
/// reported in grid order.
pub fn grid_report(
    s: &Scenario,
    tau_override: Option<f64>,
    jobs: Option<usize>,
    kind: GridKind,
) -> CliResult<GridReport> {
    let taus = s.taus(tau_override)?;
    let eq = equilibrium(&s.params, s.equilibrium)?;
    let setup = CrossCheckSetup {
        frame: s.frame,
        initial: s.initial()?,
        horizon: s.horizon,
        step: s.step,
        component: s.component,
        envelope: EnvelopeConfig::default(),
    };
    let verdict = classify(&s.params, s.equilibrium);
    let mut disagreements = Vec::new();
    if let Err(e) = &verdict {
        disagreements.push(Disagreement {
            tau: f64::NAN,
            message: format!("no analytic verdict: {e}"),
        });
    }
    let verdict = verdict.ok();
    let points = with_pool(jobs, || {
        taus.par_iter()
            .map(|&tau| cross_check_point(&s.params, &eq, verdict.as_ref(), tau, &setup))
            .collect::<Vec<_>>()
    })?;
    let mut rows = Vec::with_capacity(points.len());
    for (row, issues) in points {
        rows.push(RowDto::from(&row));
        disagreements.extend(issues);
    }
    Ok(GridReport {
        kind: match kind {
            GridKind::Sweep => "sweep",
            GridKind::CrossCheck => "cross-check",
        }
        .into(),
        version: REPORT_VERSION,
        equilibrium: s.equilibrium.to_string(),
        regime: verdict
            .as_ref()
            .map_or(Regime::Inconclusive, |v| v.regime)
            .as_str()
            .into(),
        tau0: verdict.as_ref().and_then(|v| v.tau0),
        tau1: verdict.as_ref().and_then(|v| v.tau1),
        frame: s.frame.into(),
        horizon: s.horizon,
        step: s.step,
        component: COMPONENTS[s.component].into(),
        passed: disagreements.is_empty(),
        params: s.params.into(),
        initial: setup.initial.into(),
        rows,
        disagreements: disagreements
            .into_iter()
            .map(|d| DisagreementDto {
                tau: d.tau,
                message: d.message,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use delay_hopf::State;

    fn p0_scenario(tau: f64) -> Scenario {
        Scenario {
            params: SystemParams::P0_REFERENCE,
            equilibrium: EquilibriumLabel::P0,
            frame: delay_hopf::Frame::ShiftedP0,
            tau: Some(crate::scenario::TauSpec::Value(tau)),
            horizon: 400.0,
            step: 1e-3,
            component: 1,
            outputs: vec![Output::Report],
            initial: Some(State::new(1.0, 2.0, 0.5, 0.5)),
        }
    }

    #[test]
    fn critical_delay_reference() {
        let r = critical_delay_report(&p0_scenario(1.0)).unwrap();
        assert!(r.crossing);
        assert!((r.tau0.unwrap() - 1.15912).abs() < 1e-5);
        assert!((r.omega0.unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn weak_feedback_has_no_crossing() {
        let p = SystemParams::P0_REFERENCE.with_feedback(0.1);
        let r = critical_delay_dto(&p, EquilibriumLabel::P0, 3).unwrap();
        assert!(!r.crossing);
        assert!(r.reason.is_some() && r.ladder.is_empty());
    }

    #[test]
    fn zero_jobs_rejected() {
        assert!(matches!(
            grid_report(&p0_scenario(0.7), None, Some(0), GridKind::Sweep),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn simulate_needs_initial() {
        let mut s = p0_scenario(0.7);
        s.initial = None;
        assert!(matches!(
            simulate_report(&s, None, None, None),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn step_too_large_is_validation() {
        let mut s = p0_scenario(0.7);
        s.step = 0.5;
        assert!(matches!(
            simulate_report(&s, None, None, None),
            Err(CliError::Validation(_))
        ));
    }
}
