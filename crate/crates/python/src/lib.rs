//! Python bindings. States cross the boundary as `(x, y, z, u)` tuples and
//! equilibria as `"P0"`, `"P1"`, `"P2"`.

use delay_hopf::critical_delay::{
    critical_delay_p0, critical_delay_p1, positive_root_test as root_test, resolvent, Branch, QuarticSpec,
};
use delay_hopf::diagnostics::{analyze_oscillation, EnvelopeConfig};
use delay_hopf::model::{self, EquilibriumLabel, Frame};
use delay_hopf::{charpoly, rhp_oracle, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Tuple4 = (f64, f64, f64, f64);

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameters(_)
        | Error::DegenerateParameters(_)
        | Error::InvalidInput(_)
        | Error::StepTooLarge { .. }
        | Error::OutOfRange { .. }
        | Error::TooShort(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn label(s: &str) -> PyResult<EquilibriumLabel> {
    s.parse().map_err(err)
}

fn frame(s: &str) -> PyResult<Frame> {
    match s {
        "original" => Ok(Frame::Original),
        "shifted" => Ok(Frame::ShiftedP0),
        _ => Err(PyValueError::new_err(format!(
            "frame must be 'original' or 'shifted', got {s:?}"
        ))),
    }
}

fn py_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "None".into(), |v| v.to_string())
}

fn tuple(s: model::State) -> Tuple4 {
    (s.x, s.y, s.z, s.u)
}

/// Model parameters `a, b, c, d, k` and the feedback gain `K`.
#[pyclass(frozen, skip_from_py_object, name = "SystemParams", module = "delay_hopf_py")]
#[derive(Clone, Copy)]
pub struct PySystemParams {
    inner: model::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (a, b, c, d, k, K))]
    #[allow(non_snake_case)]
    fn new(a: f64, b: f64, c: f64, d: f64, k: f64, K: f64) -> PyResult<Self> {
        Ok(PySystemParams {
            inner: model::SystemParams::new(a, b, c, d, k, K).map_err(err)?,
        })
    }

    /// The set with a Hopf bifurcation of `P0` near `tau = 1.15912`.
    #[staticmethod]
    fn reference_p0() -> Self {
        PySystemParams {
            inner: model::SystemParams::P0_REFERENCE,
        }
    }

    /// The set with a Hopf bifurcation of `P1` near `tau = 0.30329`.
    #[staticmethod]
    fn reference_p1() -> Self {
        PySystemParams {
            inner: model::SystemParams::P1_REFERENCE,
        }
    }

    #[allow(non_snake_case)]
    fn with_feedback(&self, K: f64) -> PyResult<Self> {
        let inner = self.inner.with_feedback(K);
        inner.validate().map_err(err)?;
        Ok(PySystemParams { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }
    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }
    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }
    #[getter(K)]
    fn feedback(&self) -> f64 {
        self.inner.feedback
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!(
            "SystemParams(a={}, b={}, c={}, d={}, k={}, K={})",
            p.a, p.b, p.c, p.d, p.k, p.feedback
        )
    }
}

/// `[(label, (x, y, z, u)), ...]`.
#[pyfunction]
fn equilibria(params: &PySystemParams) -> PyResult<Vec<(String, Tuple4)>> {
    Ok(model::equilibria(&params.inner)
        .map_err(err)?
        .into_iter()
        .map(|e| (e.label.to_string(), tuple(e.point)))
        .collect())
}

#[pyclass(frozen, get_all, name = "StabilityVerdict", module = "delay_hopf_py")]
pub struct PyStabilityVerdict {
    equilibrium: String,
    regime: String,
    provenance: String,
    tau0: Option<f64>,
    tau1: Option<f64>,
    omega0: Option<f64>,
    transversality_sign: Option<f64>,
    /// `(condition, margin, holds)` for each gate condition.
    gate: Vec<(String, f64, bool)>,
}

#[pymethods]
impl PyStabilityVerdict {
    fn __repr__(&self) -> String {
        format!(
            "StabilityVerdict({}, regime={}, tau0={}, tau1={})",
            self.equilibrium,
            self.regime,
            py_opt(self.tau0),
            py_opt(self.tau1)
        )
    }
}

#[pyfunction]
#[pyo3(signature = (params, equilibrium = "P0"))]
fn classify(params: &PySystemParams, equilibrium: &str) -> PyResult<PyStabilityVerdict> {
    let v = delay_hopf::diagnostics::classify(&params.inner, label(equilibrium)?).map_err(err)?;
    Ok(PyStabilityVerdict {
        equilibrium: v.label.to_string(),
        regime: v.regime.as_str().into(),
        provenance: v.provenance.as_str().into(),
        tau0: v.tau0,
        tau1: v.tau1,
        omega0: v.omega0,
        transversality_sign: v.transversality_sign,
        gate: v
            .gate
            .conditions
            .iter()
            .map(|c| (c.label.to_string(), c.margin, c.holds()))
            .collect(),
    })
}

#[pyclass(frozen, get_all, name = "CriticalDelay", module = "delay_hopf_py")]
pub struct PyCriticalDelay {
    omega0: f64,
    tau0: f64,
    tau1: Option<f64>,
    transversality_sign: f64,
    transversality_rate: f64,
    /// `(tau, omega, residual, branch)` sorted by delay.
    ladder: Vec<(f64, f64, f64, String)>,
}

#[pymethods]
impl PyCriticalDelay {
    fn __repr__(&self) -> String {
        format!(
            "CriticalDelay(omega0={}, tau0={}, tau1={})",
            self.omega0,
            self.tau0,
            py_opt(self.tau1)
        )
    }
}

/// `None` when no pure-imaginary crossing exists.
#[pyfunction]
#[pyo3(signature = (params, equilibrium = "P0", j_max = 3))]
fn critical_delay(params: &PySystemParams, equilibrium: &str, j_max: usize) -> PyResult<Option<PyCriticalDelay>> {
    let p = &params.inner;
    let r = match label(equilibrium)? {
        EquilibriumLabel::P0 => critical_delay_p0(p, j_max),
        l => model::equilibrium(p, l).and_then(|eq| critical_delay_p1(p, &eq, j_max)),
    };
    let r = match r {
        Ok(r) => r,
        Err(Error::NoCrossing(_)) => return Ok(None),
        Err(e) => return Err(err(e)),
    };
    Ok(Some(PyCriticalDelay {
        omega0: r.omega0,
        tau0: r.tau0,
        tau1: r.tau1,
        transversality_sign: r.transversality_sign,
        transversality_rate: r.transversality_rate,
        ladder: r
            .ladder
            .iter()
            .map(|e| {
                let branch = match e.branch {
                    Branch::Principal => "principal",
                    Branch::Mirrored => "mirrored",
                };
                (e.tau, e.omega, e.residual, branch.to_string())
            })
            .collect(),
    }))
}

/// Characteristic roots with positive real part at delay `tau`.
#[pyfunction]
#[pyo3(signature = (params, tau, equilibrium = "P0"))]
fn count_rhp_roots(params: &PySystemParams, tau: f64, equilibrium: &str) -> PyResult<usize> {
    let eq = model::equilibrium(&params.inner, label(equilibrium)?).map_err(err)?;
    let spec = charpoly::char_spec_at(&params.inner, &eq).map_err(err)?;
    Ok(rhp_oracle::count_rhp_roots_auto(&spec, tau).map_err(err)?.count)
}

/// Whether `z^4 + p z^3 + q z^2 + u z + v` has a positive root, decided
/// from the resolvent cubic.
#[pyfunction]
fn positive_root_test(p: f64, q: f64, u: f64, v: f64) -> bool {
    let quartic = QuarticSpec::from_coefficients(p, q, u, v);
    root_test(&quartic, &resolvent(&quartic)).has_positive_root
}

#[pyclass(frozen, name = "Trajectory", module = "delay_hopf_py")]
pub struct PyTrajectory {
    inner: delay_hopf::Trajectory<4>,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<Tuple4> {
        self.inner.states.iter().map(|s| (s[0], s[1], s[2], s[3])).collect()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.inner.step
    }

    /// Time of blow-up, if the run was cut short.
    #[getter]
    fn blow_up(&self) -> Option<f64> {
        self.inner.blow_up
    }

    /// Dense output at `t`.
    fn sample(&self, t: f64) -> PyResult<Tuple4> {
        let s = self.inner.sample(t).map_err(err)?;
        Ok((s[0], s[1], s[2], s[3]))
    }

    /// `(trend, period, amplitude_ratio)` of component `index` around `center`.
    fn envelope(&self, index: usize, center: f64) -> PyResult<(String, Option<f64>, f64)> {
        let r = analyze_oscillation(&self.inner, index, center, &EnvelopeConfig::default()).map_err(err)?;
        Ok((r.envelope_trend.as_str().into(), r.period_estimate, r.amplitude_ratio))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Integrates from the constant history `initial`, given in `frame`
/// coordinates (`"original"` or `"shifted"`).
#[pyfunction]
#[pyo3(signature = (params, tau, initial, horizon, step = delay_hopf::dde::DEFAULT_STEP, frame = "original"))]
fn simulate(
    py: Python<'_>,
    params: &PySystemParams,
    tau: f64,
    initial: Tuple4,
    horizon: f64,
    step: f64,
    frame: &str,
) -> PyResult<PyTrajectory> {
    let system = model::FinancialSystem::new(params.inner, self::frame(frame)?);
    let start = model::State::new(initial.0, initial.1, initial.2, initial.3);
    let inner = py
        .detach(|| delay_hopf::diagnostics::simulate(&system, tau, &start, horizon, step))
        .map_err(err)?;
    Ok(PyTrajectory { inner })
}

#[pymodule]
fn delay_hopf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyStabilityVerdict>()?;
    m.add_class::<PyCriticalDelay>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(critical_delay, m)?)?;
    m.add_function(wrap_pyfunction!(count_rhp_roots, m)?)?;
    m.add_function(wrap_pyfunction!(positive_root_test, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
