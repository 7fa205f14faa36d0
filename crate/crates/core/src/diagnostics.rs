//! Verdicts: analytic stability classification, envelope analysis of
//! simulated trajectories, and agreement between analysis, root counting
//! and simulation.

use crate::charpoly::{
    char_spec_at, char_spec_p0, char_spec_p1, routh_hurwitz_p0, routh_hurwitz_p1_tau0, StabilityGate,
};
use crate::critical_delay::{
    critical_delay_p0, critical_delay_p1, omega_plus, positive_root_test, quartic_from_spec, resolvent,
};
use crate::dde::{integrate, History, Trajectory, DEFAULT_STEP};
use crate::model::{equilibria, Equilibrium, EquilibriumLabel, FinancialSystem, Frame, State, SystemParams};
use crate::rhp_oracle::count_rhp_roots_auto;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// No crossing for any delay.
    StableAllTau,
    StableBelowTau0,
    /// A Hopf bifurcation at `tau0`: stable below, unstable on `(tau0, tau1)`.
    /// As the regime of a whole verdict this stands for that triple; see
    /// [`StabilityVerdict::regime_at`].
    HopfAtTau0,
    UnstableInWindow,
    /// Hypotheses not met, or a delay the analysis does not cover.
    Inconclusive,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::StableAllTau => "stable_all_tau",
            Regime::StableBelowTau0 => "stable_below_tau0",
            Regime::HopfAtTau0 => "hopf_at_tau0",
            Regime::UnstableInWindow => "unstable_in_window",
            Regime::Inconclusive => "inconclusive",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Regime::StableAllTau,
            Regime::StableBelowTau0,
            Regime::HopfAtTau0,
            Regime::UnstableInWindow,
            Regime::Inconclusive,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown regime {s:?}")))
    }
}

/// What the verdict rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// A Routh–Hurwitz condition at zero delay fails; no analytic verdict.
    GateFailed,
    /// `K <= b/2`: the transcendental factor never reaches the imaginary axis.
    NoCrossingFrequency,
    /// The crossing quartic has no positive root.
    NoPositiveQuarticRoot,
    /// A verified critical-delay ladder with positive crossing speed.
    CrossingLadder,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::GateFailed => "gate_failed",
            Provenance::NoCrossingFrequency => "no_crossing_frequency",
            Provenance::NoPositiveQuarticRoot => "no_positive_quartic_root",
            Provenance::CrossingLadder => "crossing_ladder",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Provenance::GateFailed,
            Provenance::NoCrossingFrequency,
            Provenance::NoPositiveQuarticRoot,
            Provenance::CrossingLadder,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown provenance {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub label: EquilibriumLabel,
    pub regime: Regime,
    pub tau0: Option<f64>,
    pub tau1: Option<f64>,
    pub omega0: Option<f64>,
    pub transversality_sign: Option<f64>,
    pub provenance: Provenance,
    pub gate: StabilityGate,
}

/// Delays within this relative distance of `tau0` count as the bifurcation point.
const AT_TAU0: f64 = 1e-9;

impl StabilityVerdict {
    /// The regime at one particular delay.
    pub fn regime_at(&self, tau: f64) -> Regime {
        match (self.regime, self.tau0) {
            (Regime::HopfAtTau0, Some(t0)) => {
                if (tau - t0).abs() <= AT_TAU0 * t0.max(1.0) {
                    Regime::HopfAtTau0
                } else if tau < t0 {
                    Regime::StableBelowTau0
                } else if self.tau1.is_none_or(|t1| tau < t1) {
                    Regime::UnstableInWindow
                } else {
                    Regime::Inconclusive
                }
            }
            (r, _) => r,
        }
    }

    /// `Some(true)` for asymptotically stable, `Some(false)` for unstable,
    /// `None` where the analysis makes no claim.
    pub fn expected_stable(&self, tau: f64) -> Option<bool> {
        match self.regime_at(tau) {
            Regime::StableAllTau | Regime::StableBelowTau0 => Some(true),
            Regime::UnstableInWindow => Some(false),
            Regime::HopfAtTau0 | Regime::Inconclusive => None,
        }
    }
}

/// Verdict at `P0`.
pub fn classify_p0(params: &SystemParams) -> Result<StabilityVerdict> {
    let spec = char_spec_p0(params)?;
    let gate = routh_hurwitz_p0(&spec);
    let mut verdict = StabilityVerdict {
        label: EquilibriumLabel::P0,
        regime: Regime::Inconclusive,
        tau0: None,
        tau1: None,
        omega0: None,
        transversality_sign: None,
        provenance: Provenance::GateFailed,
        gate,
    };
    if !verdict.gate.passes() {
        return Ok(verdict);
    }
    if omega_plus(params).is_none() {
        verdict.regime = Regime::StableAllTau;
        verdict.provenance = Provenance::NoCrossingFrequency;
        return Ok(verdict);
    }
    let report = critical_delay_p0(params, 1)?;
    verdict.regime = Regime::HopfAtTau0;
    verdict.provenance = Provenance::CrossingLadder;
    verdict.tau0 = Some(report.tau0);
    verdict.tau1 = report.tau1;
    verdict.omega0 = Some(report.omega0);
    verdict.transversality_sign = Some(report.transversality_sign);
    Ok(verdict)
}

/// Verdict at `P1`; `P2` shares its characteristic function.
pub fn classify_p1(params: &SystemParams) -> Result<StabilityVerdict> {
    let eqs = equilibria(params)?;
    let eq = eqs
        .iter()
        .find(|e| e.label == EquilibriumLabel::P1)
        .ok_or_else(|| Error::InvalidParameters("P1 does not exist for these parameters".into()))?;
    let spec = char_spec_p1(params, eq)?;
    let gate = routh_hurwitz_p1_tau0(&spec);
    let mut verdict = StabilityVerdict {
        label: EquilibriumLabel::P1,
        regime: Regime::Inconclusive,
        tau0: None,
        tau1: None,
        omega0: None,
        transversality_sign: None,
        provenance: Provenance::GateFailed,
        gate,
    };
    if !verdict.gate.passes() {
        return Ok(verdict);
    }
    let quartic = quartic_from_spec(&spec);
    if !positive_root_test(&quartic, &resolvent(&quartic)).has_positive_root {
        verdict.regime = Regime::StableAllTau;
        verdict.provenance = Provenance::NoPositiveQuarticRoot;
        return Ok(verdict);
    }
    let report = critical_delay_p1(params, eq, 2)?;
    verdict.regime = Regime::HopfAtTau0;
    verdict.provenance = Provenance::CrossingLadder;
    verdict.tau0 = Some(report.tau0);
    verdict.tau1 = report.tau1;
    verdict.omega0 = Some(report.omega0);
    verdict.transversality_sign = Some(report.transversality_sign);
    Ok(verdict)
}

pub fn classify(params: &SystemParams, label: EquilibriumLabel) -> Result<StabilityVerdict> {
    match label {
        EquilibriumLabel::P0 => classify_p0(params),
        _ => {
            let mut v = classify_p1(params)?;
            v.label = label;
            Ok(v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeTrend {
    Decaying,
    Sustained,
    Growing,
}

impl EnvelopeTrend {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvelopeTrend::Decaying => "decaying",
            EnvelopeTrend::Sustained => "sustained",
            EnvelopeTrend::Growing => "growing",
        }
    }
}

impl std::str::FromStr for EnvelopeTrend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decaying" => Ok(EnvelopeTrend::Decaying),
            "sustained" => Ok(EnvelopeTrend::Sustained),
            "growing" => Ok(EnvelopeTrend::Growing),
            _ => Err(Error::InvalidInput(format!("unknown envelope trend {s:?}"))),
        }
    }
}

/// Thresholds for [`analyze_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    /// Ratio below which the envelope is decaying.
    pub decay_below: f64,
    /// Ratio above which it is growing.
    pub grow_above: f64,
    /// Leading `|deviation|` peaks ignored as start-up transient.
    pub skip_leading_peaks: usize,
    /// Peaks per comparison window.
    pub window_peaks: usize,
    /// Fraction of the horizon per window when there are too few peaks.
    pub fallback_fraction: f64,
    /// Trailing fraction of the horizon used for the period.
    pub period_fraction: f64,
    /// Maxima needed in that window before a period is reported.
    pub min_maxima: usize,
    /// The horizon must cover this many estimated periods.
    pub min_periods: f64,
    /// Peaks below this fraction of the largest deviation are ignored.
    pub noise_floor: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            decay_below: 0.5,
            grow_above: 2.0,
            skip_leading_peaks: 1,
            window_peaks: 4,
            fallback_fraction: 0.1,
            period_fraction: 1.0 / 3.0,
            min_maxima: 4,
            min_periods: 20.0,
            noise_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationReport {
    pub component: usize,
    pub envelope_trend: EnvelopeTrend,
    pub period_estimate: Option<f64>,
    /// Late-window over early-window amplitude.
    pub amplitude_ratio: f64,
}

/// Vertex of the parabola through three equally spaced samples, as an
/// offset in units of the spacing.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den == 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// Envelope and period of `values - center` sampled at increasing `times`.
///
/// Amplitude is tracked through the local maxima of `|values - center|`:
/// the largest of the last `window_peaks` peaks over the largest of the
/// first `window_peaks` after the skipped ones. With too few peaks the
/// largest deviation over the final and the initial `fallback_fraction` of
/// the horizon are compared instead. The period is the mean spacing of the
/// maxima of `values - center` in the trailing `period_fraction`.
pub fn analyze_series(
    times: &[f64],
    values: &[f64],
    center: f64,
    component: usize,
    config: &EnvelopeConfig,
) -> Result<OscillationReport> {
    if times.len() != values.len() {
        return Err(Error::InvalidInput("times and values differ in length".into()));
    }
    if times.len() < 16 {
        return Err(Error::TooShort(format!("{} samples", times.len())));
    }
    let dev: Vec<f64> = values.iter().map(|v| v - center).collect();
    let abs: Vec<f64> = dev.iter().map(|d| d.abs()).collect();
    let scale = abs.iter().copied().fold(0.0, f64::max);
    let floor = config.noise_floor * scale;

    let peaks: Vec<f64> = (1..abs.len() - 1)
        .filter(|&i| abs[i] > abs[i - 1] && abs[i] >= abs[i + 1] && abs[i] > floor)
        .map(|i| abs[i])
        .collect();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let span = t1 - t0;

    let w = config.window_peaks;
    let amplitude_ratio = if peaks.len() >= config.skip_leading_peaks + 2 * w {
        let early = peaks[config.skip_leading_peaks..config.skip_leading_peaks + w]
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let late = peaks[peaks.len() - w..].iter().copied().fold(0.0, f64::max);
        late / early
    } else {
        let cut = config.fallback_fraction * span;
        let window_max = |lo: f64, hi: f64| {
            times
                .iter()
                .zip(&abs)
                .filter(|(t, _)| **t >= lo && **t <= hi)
                .map(|(_, a)| *a)
                .fold(0.0, f64::max)
        };
        let early = window_max(t0, t0 + cut);
        let late = window_max(t1 - cut, t1);
        if early == 0.0 {
            if late == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            late / early
        }
    };

    let start = t1 - config.period_fraction * span;
    let maxima: Vec<f64> = (1..dev.len() - 1)
        .filter(|&i| times[i] >= start && dev[i] > dev[i - 1] && dev[i] >= dev[i + 1] && dev[i] > floor)
        .map(|i| {
            let off = parabolic_offset(dev[i - 1], dev[i], dev[i + 1]);
            let h = if off >= 0.0 {
                times[i + 1] - times[i]
            } else {
                times[i] - times[i - 1]
            };
            times[i] + off * h
        })
        .collect();
    let period_estimate =
        (maxima.len() >= config.min_maxima).then(|| (maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64);
    if let Some(p) = period_estimate {
        if span < config.min_periods * p {
            return Err(Error::TooShort(format!(
                "horizon {span} covers fewer than {} periods of {p}",
                config.min_periods
            )));
        }
    }

    let envelope_trend = if amplitude_ratio < config.decay_below {
        EnvelopeTrend::Decaying
    } else if amplitude_ratio > config.grow_above {
        EnvelopeTrend::Growing
    } else {
        EnvelopeTrend::Sustained
    };
    Ok(OscillationReport {
        component,
        envelope_trend,
        period_estimate,
        amplitude_ratio,
    })
}

/// [`analyze_series`] on one component of a trajectory. A run cut short by
/// blow-up is growing by definition.
pub fn analyze_oscillation<const N: usize>(
    traj: &Trajectory<N>,
    component: usize,
    center: f64,
    config: &EnvelopeConfig,
) -> Result<OscillationReport> {
    if component >= N {
        return Err(Error::InvalidInput(format!(
            "component {component} out of range for {N} states"
        )));
    }
    if traj.blow_up.is_some() {
        return Ok(OscillationReport {
            component,
            envelope_trend: EnvelopeTrend::Growing,
            period_estimate: None,
            amplitude_ratio: f64::INFINITY,
        });
    }
    analyze_series(&traj.times, &traj.component(component), center, component, config)
}

/// Integrates the system from a constant history given in `system`'s frame.
pub fn simulate(system: &FinancialSystem, tau: f64, initial: &State, horizon: f64, step: f64) -> Result<Trajectory<4>> {
    integrate(system, tau, &History::Constant(initial.to_array()), horizon, step)
}

/// How [`cross_check`] simulates each delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheckSetup {
    pub frame: Frame,
    /// Constant history, in `frame` coordinates.
    pub initial: State,
    pub horizon: f64,
    pub step: f64,
    pub component: usize,
    pub envelope: EnvelopeConfig,
}

impl CrossCheckSetup {
    /// History `(1, 2, 0.5, 0.5)` in the shifted frame watching `y` for `P0`;
    /// history `(2, 2, 2, 2)` watching `x` otherwise.
    pub fn for_equilibrium(label: EquilibriumLabel) -> Self {
        match label {
            EquilibriumLabel::P0 => CrossCheckSetup {
                frame: Frame::ShiftedP0,
                initial: State::new(1.0, 2.0, 0.5, 0.5),
                horizon: 400.0,
                step: DEFAULT_STEP,
                component: 1,
                envelope: EnvelopeConfig::default(),
            },
            _ => CrossCheckSetup {
                frame: Frame::Original,
                initial: State::new(2.0, 2.0, 2.0, 2.0),
                horizon: 250.0,
                step: DEFAULT_STEP,
                component: 0,
                envelope: EnvelopeConfig::default(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckRow {
    pub tau: f64,
    pub regime: Regime,
    /// Stability claimed by the analysis, if any.
    pub analytic_stable: Option<bool>,
    pub oracle_count: Option<usize>,
    pub envelope: Option<EnvelopeTrend>,
    pub amplitude_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disagreement {
    pub tau: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheckReport {
    pub label: EquilibriumLabel,
    pub rows: Vec<CrossCheckRow>,
    pub disagreements: Vec<Disagreement>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Evaluates one delay of a cross-check.
pub fn cross_check_point(
    params: &SystemParams,
    eq: &Equilibrium,
    verdict: Option<&StabilityVerdict>,
    tau: f64,
    setup: &CrossCheckSetup,
) -> (CrossCheckRow, Vec<Disagreement>) {
    let mut issues = Vec::new();
    let mut note = |m: String| issues.push(Disagreement { tau, message: m });

    let regime = verdict.map_or(Regime::Inconclusive, |v| v.regime_at(tau));
    let analytic_stable = verdict.and_then(|v| v.expected_stable(tau));

    let oracle_count = match char_spec_at(params, eq).and_then(|s| count_rhp_roots_auto(&s, tau)) {
        Ok(c) => Some(c.count),
        Err(e) => {
            note(format!("root count failed: {e}"));
            None
        }
    };

    let system = FinancialSystem::new(*params, setup.frame);
    let center = system.to_frame(&eq.point).component(setup.component);
    let report = simulate(&system, tau, &setup.initial, setup.horizon, setup.step)
        .and_then(|t| analyze_oscillation(&t, setup.component, center, &setup.envelope));
    let (envelope, amplitude_ratio) = match report {
        Ok(r) => (Some(r.envelope_trend), Some(r.amplitude_ratio)),
        Err(e) => {
            note(format!("simulation unusable: {e}"));
            (None, None)
        }
    };

    if let (Some(s), Some(c)) = (analytic_stable, oracle_count) {
        if s != (c == 0) {
            note(format!(
                "analysis says {}, root count is {c}",
                if s { "stable" } else { "unstable" }
            ));
        }
    }
    let expected = analytic_stable.or(oracle_count.map(|c| c == 0));
    if let (Some(s), Some(e)) = (expected, envelope) {
        let want = if s {
            EnvelopeTrend::Decaying
        } else {
            EnvelopeTrend::Growing
        };
        if e != want {
            note(format!(
                "expected a {} envelope, simulation is {}",
                want.as_str(),
                e.as_str()
            ));
        }
    }

    (
        CrossCheckRow {
            tau,
            regime,
            analytic_stable,
            oracle_count,
            envelope,
            amplitude_ratio,
        },
        issues,
    )
}

/// Compares analytic verdict, root count and simulated envelope at each delay.
pub fn cross_check(
    params: &SystemParams,
    eq: &Equilibrium,
    tau_grid: &[f64],
    setup: &CrossCheckSetup,
) -> CrossCheckReport {
    let verdict = classify(params, eq.label);
    let mut disagreements = Vec::new();
    if let Err(e) = &verdict {
        if !tau_grid.is_empty() {
            disagreements.push(Disagreement {
                tau: f64::NAN,
                message: format!("no analytic verdict: {e}"),
            });
        }
    }
    let verdict = verdict.ok();
    let mut rows = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let (row, issues) = cross_check_point(params, eq, verdict.as_ref(), tau, setup);
        rows.push(row);
        disagreements.extend(issues);
    }
    CrossCheckReport {
        label: eq.label,
        rows,
        disagreements,
    }
}
