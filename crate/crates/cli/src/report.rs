//! TOML reports. Field order is the struct declaration order; scalars come
//! before tables so the layout is stable.

use delay_hopf::critical_delay::{Branch, CriticalDelayReport, LadderEntry, CROSSING_TOL};
use delay_hopf::diagnostics::{CrossCheckRow, EnvelopeTrend, Provenance, Regime, StabilityVerdict};
use delay_hopf::model::{equilibria, Equilibrium, EquilibriumLabel, SystemParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenario::{component_index, FrameDto, ParamsDto, StateDto};

pub const REPORT_VERSION: u32 = 1;

pub fn to_toml<T: Serialize>(report: &T) -> CliResult<String> {
    toml::to_string(report).map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumDto {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl From<&Equilibrium> for EquilibriumDto {
    fn from(e: &Equilibrium) -> Self {
        EquilibriumDto {
            label: e.label.to_string(),
            x: e.point.x,
            y: e.point.y,
            z: e.point.z,
            u: e.point.u,
            theta: e.theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaReport {
    pub kind: String,
    pub version: u32,
    pub params: ParamsDto,
    pub equilibria: Vec<EquilibriumDto>,
}

impl EquilibriaReport {
    pub fn build(params: &SystemParams) -> CliResult<Self> {
        Ok(EquilibriaReport {
            kind: "equilibria".into(),
            version: REPORT_VERSION,
            params: (*params).into(),
            equilibria: equilibria(params)?.iter().map(EquilibriumDto::from).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDto {
    pub condition: String,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityReport {
    pub kind: String,
    pub version: u32,
    pub equilibrium: String,
    pub regime: String,
    pub provenance: String,
    pub gate_passes: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversality_sign: Option<f64>,
    pub params: ParamsDto,
    pub gate: Vec<GateDto>,
}

impl StabilityReport {
    pub fn build(params: &SystemParams, v: &StabilityVerdict) -> Self {
        StabilityReport {
            kind: "stability".into(),
            version: REPORT_VERSION,
            equilibrium: v.label.to_string(),
            regime: v.regime.as_str().into(),
            provenance: v.provenance.as_str().into(),
            gate_passes: v.gate.passes(),
            tau0: v.tau0,
            tau1: v.tau1,
            omega0: v.omega0,
            transversality_sign: v.transversality_sign,
            params: (*params).into(),
            gate: v
                .gate
                .conditions
                .iter()
                .map(|c| GateDto {
                    condition: c.label.into(),
                    margin: c.margin,
                    holds: c.holds(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderDto {
    pub k: usize,
    pub j: usize,
    pub tau: f64,
    pub omega: f64,
    pub residual: f64,
    pub branch: String,
}

impl From<&LadderEntry> for LadderDto {
    fn from(e: &LadderEntry) -> Self {
        LadderDto {
            k: e.k,
            j: e.j,
            tau: e.tau,
            omega: e.omega,
            residual: e.residual,
            branch: match e.branch {
                Branch::Principal => "principal",
                Branch::Mirrored => "mirrored",
            }
            .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalDelayDto {
    pub kind: String,
    pub version: u32,
    pub equilibrium: String,
    pub crossing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversality_sign: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversality_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    pub params: ParamsDto,
    #[serde(default)]
    pub ladder: Vec<LadderDto>,
}

impl CriticalDelayDto {
    pub fn crossing(params: &SystemParams, label: EquilibriumLabel, r: &CriticalDelayReport) -> Self {
        CriticalDelayDto {
            kind: "critical-delay".into(),
            version: REPORT_VERSION,
            equilibrium: label.to_string(),
            crossing: true,
            reason: None,
            omega0: Some(r.omega0),
            z0: Some(r.z0),
            tau0: Some(r.tau0),
            tau1: r.tau1,
            transversality_sign: Some(r.transversality_sign),
            transversality_rate: Some(r.transversality_rate),
            max_residual: Some(r.max_residual()),
            params: (*params).into(),
            ladder: r.ladder.iter().map(LadderDto::from).collect(),
        }
    }

    pub fn no_crossing(params: &SystemParams, label: EquilibriumLabel, reason: String) -> Self {
        CriticalDelayDto {
            kind: "critical-delay".into(),
            version: REPORT_VERSION,
            equilibrium: label.to_string(),
            crossing: false,
            reason: Some(reason),
            omega0: None,
            z0: None,
            tau0: None,
            tau1: None,
            transversality_sign: None,
            transversality_rate: None,
            max_residual: None,
            params: (*params).into(),
            ladder: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeDto {
    pub component: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDto {
    pub tau: f64,
    pub effective_step: f64,
    pub knots: usize,
    pub end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blow_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    pub envelope: Vec<EnvelopeDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationReport {
    pub kind: String,
    pub version: u32,
    pub equilibrium: String,
    pub frame: FrameDto,
    pub horizon: f64,
    pub step: f64,
    pub params: ParamsDto,
    pub initial: StateDto,
    pub runs: Vec<RunDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowDto {
    pub tau: f64,
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_stable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_ratio: Option<f64>,
}

impl From<&CrossCheckRow> for RowDto {
    fn from(r: &CrossCheckRow) -> Self {
        RowDto {
            tau: r.tau,
            regime: r.regime.as_str().into(),
            analytic_stable: r.analytic_stable,
            oracle_count: r.oracle_count,
            envelope: r.envelope.map(|e| e.as_str().into()),
            amplitude_ratio: r.amplitude_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisagreementDto {
    pub tau: f64,
    pub message: String,
}

/// Per-delay table shared by `sweep` and `cross-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridReport {
    pub kind: String,
    pub version: u32,
    pub equilibrium: String,
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    pub frame: FrameDto,
    pub horizon: f64,
    pub step: f64,
    pub component: String,
    pub passed: bool,
    pub params: ParamsDto,
    pub initial: StateDto,
    pub rows: Vec<RowDto>,
    #[serde(default)]
    pub disagreements: Vec<DisagreementDto>,
}

fn parse_as<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

fn check_version(v: u32) -> CliResult<()> {
    check(v == REPORT_VERSION, || format!("unsupported report version {v}"))
}

fn label(s: &str) -> CliResult<EquilibriumLabel> {
    s.parse()
        .map_err(|_| CliError::Validation(format!("bad equilibrium label {s:?}")))
}

fn same<T: PartialEq + std::fmt::Debug>(stored: &T, fresh: &T, what: &str) -> CliResult<()> {
    if stored == fresh {
        Ok(())
    } else {
        Err(CliError::Consistency(format!(
            "{what} report does not match a recomputation"
        )))
    }
}

/// Re-reads a report, checks its invariants and, where cheap, recomputes it
/// from the stored parameters. Returns the report kind.
pub fn validate_report(text: &str) -> CliResult<String> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let kind = table
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| CliError::Parse("report has no `kind`".into()))?
        .to_string();
    match kind.as_str() {
        "equilibria" => {
            let r: EquilibriaReport = parse_as(text)?;
            check_version(r.version)?;
            check(matches!(r.equilibria.len(), 1 | 3), || {
                "expected one or three equilibria".into()
            })?;
            for e in &r.equilibria {
                label(&e.label)?;
            }
            same(&r, &EquilibriaReport::build(&r.params.into())?, "equilibria")?;
        }
        "stability" => {
            let r: StabilityReport = parse_as(text)?;
            check_version(r.version)?;
            let regime: Regime = r.regime.parse()?;
            let _: Provenance = r.provenance.parse()?;
            let lbl = label(&r.equilibrium)?;
            check(r.gate.iter().all(|g| g.holds == (g.margin > 0.0)), || {
                "gate flags contradict margins".into()
            })?;
            check(r.gate_passes == r.gate.iter().all(|g| g.holds), || {
                "gate_passes contradicts conditions".into()
            })?;
            if matches!(
                regime,
                Regime::HopfAtTau0 | Regime::StableBelowTau0 | Regime::UnstableInWindow
            ) {
                check(r.tau0.is_some(), || "regime needs tau0".into())?;
            }
            let params: SystemParams = r.params.into();
            let fresh = delay_hopf::diagnostics::classify(&params, lbl)?;
            same(&r, &StabilityReport::build(&params, &fresh), "stability")?;
        }
        "critical-delay" => {
            let r: CriticalDelayDto = parse_as(text)?;
            check_version(r.version)?;
            let lbl = label(&r.equilibrium)?;
            if r.crossing {
                check(!r.ladder.is_empty(), || "crossing without ladder".into())?;
                check(r.ladder.windows(2).all(|w| w[0].tau <= w[1].tau), || {
                    "ladder not sorted".into()
                })?;
                check(r.tau0 == Some(r.ladder[0].tau), || {
                    "tau0 is not the first ladder entry".into()
                })?;
                check(r.ladder.iter().all(|e| e.residual < CROSSING_TOL), || {
                    "ladder residual too large".into()
                })?;
            } else {
                check(r.ladder.is_empty() && r.tau0.is_none(), || {
                    "no-crossing report carries delays".into()
                })?;
            }
            let params: SystemParams = r.params.into();
            let j_max = r.ladder.iter().map(|e| e.j).max().unwrap_or(3);
            same(
                &r,
                &crate::commands::critical_delay_dto(&params, lbl, j_max)?,
                "critical-delay",
            )?;
        }
        "simulate" => {
            let r: SimulationReport = parse_as(text)?;
            check_version(r.version)?;
            label(&r.equilibrium)?;
            check(!r.runs.is_empty(), || "no runs".into())?;
            for run in &r.runs {
                check(run.knots > 0 && run.end > 0.0, || {
                    format!("empty run at tau = {}", run.tau)
                })?;
                for e in &run.envelope {
                    check(component_index(&e.component).is_some(), || {
                        format!("bad component {:?}", e.component)
                    })?;
                    if let Some(t) = &e.trend {
                        let _: EnvelopeTrend = t.parse()?;
                    }
                }
            }
        }
        "sweep" | "cross-check" => {
            let r: GridReport = parse_as(text)?;
            check_version(r.version)?;
            label(&r.equilibrium)?;
            let _: Regime = r.regime.parse()?;
            check(component_index(&r.component).is_some(), || {
                format!("bad component {:?}", r.component)
            })?;
            check(r.passed == r.disagreements.is_empty(), || {
                "`passed` contradicts disagreements".into()
            })?;
            for row in &r.rows {
                let _: Regime = row.regime.parse()?;
                if let Some(e) = &row.envelope {
                    let _: EnvelopeTrend = e.parse()?;
                }
            }
        }
        other => return Err(CliError::Validation(format!("unknown report kind {other:?}"))),
    }
    Ok(kind)
}
