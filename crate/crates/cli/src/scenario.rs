//! Scenario files.
//!
//! A scenario is TOML. Top-level keys, all optional unless noted:
//!
//! | key           | type                                   | default            |
//! |---------------|----------------------------------------|--------------------|
//! | `equilibrium` | `"P0"`, `"P1"` or `"P2"`               | `"P0"`             |
//! | `frame`       | `"original"` or `"shifted"`            | `"original"`       |
//! | `tau`         | number, or `{ start, stop, count }`    | needed to simulate |
//! | `horizon`     | number > 0                             | `400.0`            |
//! | `step`        | number > 0                             | `0.001`            |
//! | `component`   | `"x"`, `"y"`, `"z"` or `"u"`           | `y` at P0, else `x`|
//! | `outputs`     | subset of `timeseries`, `phase2d`, `phase3d`, `report` | `["timeseries", "report"]` |
//!
//! Tables: `[params]` with `a b c d k K` (required), and `[initial]` with
//! `x y z u`, the constant history in the chosen frame (needed to simulate).
//! `frame = "shifted"` uses `y - 1/b` in place of `y`.

use std::path::Path;

use delay_hopf::model::{EquilibriumLabel, Frame, State, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDto {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub k: f64,
    #[serde(rename = "K")]
    pub feedback: f64,
}

impl From<ParamsDto> for SystemParams {
    fn from(p: ParamsDto) -> Self {
        SystemParams {
            a: p.a,
            b: p.b,
            c: p.c,
            d: p.d,
            k: p.k,
            feedback: p.feedback,
        }
    }
}

impl From<SystemParams> for ParamsDto {
    fn from(p: SystemParams) -> Self {
        ParamsDto {
            a: p.a,
            b: p.b,
            c: p.c,
            d: p.d,
            k: p.k,
            feedback: p.feedback,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDto {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
}

impl From<StateDto> for State {
    fn from(s: StateDto) -> Self {
        State::new(s.x, s.y, s.z, s.u)
    }
}

impl From<State> for StateDto {
    fn from(s: State) -> Self {
        StateDto {
            x: s.x,
            y: s.y,
            z: s.z,
            u: s.u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Value(f64),
    Range { start: f64, stop: f64, count: usize },
}

impl TauSpec {
    /// The delays, `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        match *self {
            TauSpec::Value(t) => vec![t],
            TauSpec::Range { start, count: 1, .. } => vec![start],
            TauSpec::Range { start, stop, count } => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Timeseries,
    Phase2d,
    Phase3d,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameDto {
    Original,
    Shifted,
}

impl From<FrameDto> for Frame {
    fn from(f: FrameDto) -> Self {
        match f {
            FrameDto::Original => Frame::Original,
            FrameDto::Shifted => Frame::ShiftedP0,
        }
    }
}

impl From<Frame> for FrameDto {
    fn from(f: Frame) -> Self {
        match f {
            Frame::Original => FrameDto::Original,
            Frame::ShiftedP0 => FrameDto::Shifted,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    equilibrium: Option<String>,
    frame: Option<FrameDto>,
    tau: Option<TauSpec>,
    horizon: Option<f64>,
    step: Option<f64>,
    component: Option<String>,
    outputs: Option<Vec<Output>>,
    params: ParamsDto,
    initial: Option<StateDto>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub equilibrium: EquilibriumLabel,
    pub frame: Frame,
    pub tau: Option<TauSpec>,
    pub horizon: f64,
    pub step: f64,
    pub component: usize,
    pub outputs: Vec<Output>,
    pub initial: Option<State>,
}

pub const COMPONENTS: [&str; 4] = ["x", "y", "z", "u"];

pub fn component_index(name: &str) -> Option<usize> {
    COMPONENTS.iter().position(|c| *c == name)
}

fn positive(field: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!(
            "`{field}` must be positive and finite, got {v}"
        )))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> CliResult<Scenario> {
        let raw: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let params: SystemParams = raw.params.into();
        params
            .validate()
            .map_err(|e| CliError::Validation(format!("`params`: {e}")))?;
        let equilibrium = match raw.equilibrium.as_deref() {
            None => EquilibriumLabel::P0,
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Validation(format!("`equilibrium` must be P0, P1 or P2, got {s:?}")))?,
        };
        let horizon = positive("horizon", raw.horizon.unwrap_or(400.0))?;
        let step = positive("step", raw.step.unwrap_or(delay_hopf::dde::DEFAULT_STEP))?;
        if let Some(tau) = &raw.tau {
            match *tau {
                TauSpec::Value(t) if !(t >= 0.0 && t.is_finite()) => {
                    return Err(CliError::Validation(format!("`tau` must be nonnegative, got {t}")))
                }
                TauSpec::Range { count: 0, .. } => {
                    return Err(CliError::Validation("`tau.count` must be at least 1".into()))
                }
                TauSpec::Range { start, stop, .. } if !(start >= 0.0 && stop >= start && stop.is_finite()) => {
                    return Err(CliError::Validation(format!(
                        "`tau` range needs 0 <= start <= stop, got {start}..{stop}"
                    )))
                }
                _ => {}
            }
        }
        let component = match raw.component.as_deref() {
            None if equilibrium == EquilibriumLabel::P0 => 1,
            None => 0,
            Some(c) => component_index(c)
                .ok_or_else(|| CliError::Validation(format!("`component` must be x, y, z or u, got {c:?}")))?,
        };
        let mut outputs = raw.outputs.unwrap_or_else(|| vec![Output::Timeseries, Output::Report]);
        let mut seen = Vec::new();
        outputs.retain(|o| {
            let fresh = !seen.contains(o);
            seen.push(*o);
            fresh
        });
        Ok(Scenario {
            params,
            equilibrium,
            frame: raw.frame.map_or(Frame::Original, Frame::from),
            tau: raw.tau,
            horizon,
            step,
            component,
            outputs,
            initial: raw.initial.map(State::from),
        })
    }

    pub fn load(path: &Path) -> CliResult<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The delay grid, with `override_tau` taking precedence.
    pub fn taus(&self, override_tau: Option<f64>) -> CliResult<Vec<f64>> {
        match (override_tau, &self.tau) {
            (Some(t), _) if !(t >= 0.0 && t.is_finite()) => {
                Err(CliError::Validation(format!("--tau must be nonnegative, got {t}")))
            }
            (Some(t), _) => Ok(vec![t]),
            (None, Some(spec)) => Ok(spec.grid()),
            (None, None) => Err(CliError::Validation("`tau` is required for this command".into())),
        }
    }

    pub fn initial(&self) -> CliResult<State> {
        self.initial
            .ok_or_else(|| CliError::Validation("`initial` is required for this command".into()))
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}
