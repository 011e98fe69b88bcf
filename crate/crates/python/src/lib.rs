//! Python module `uncertain_pm`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uncertain_core::io::{self, dot, Diagnostic, Injection};
use uncertain_core::realizations::{DEFAULT_MAX_REALIZATIONS, DEFAULT_SAMPLES};
use uncertain_core::{
    build_optimized, check_soundness, conformance, conformance_bounds, enumerate, enumerate_with_probabilities,
    fire_sequences, filter_udfg, to_behavior_net, udfg, Bounds, ConformanceConfig, DiscoveryConfig, Error,
    ProbabilityConfig, Statistic, SupportMass, Time, UncertainLog, UncertainTrace,
};

create_exception!(uncertain_pm, ResourceBoundError, pyo3::exceptions::PyRuntimeError);

const DEFAULT_MASS: f64 = 0.9999;

fn to_py(e: Error) -> PyErr {
    if e.is_resource_bound() {
        ResourceBoundError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn diagnostics_err(diags: &[Diagnostic]) -> PyErr {
    let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
    PyValueError::new_err(lines.join("\n"))
}

fn mass(m: f64) -> PyResult<SupportMass> {
    SupportMass::new(m).ok_or_else(|| PyValueError::new_err(format!("mass must be in (0,1), got {m}")))
}

fn statistic(s: &str) -> PyResult<Statistic> {
    match s {
        "min" => Ok(Statistic::Min),
        "max" => Ok(Statistic::Max),
        "expected" => Ok(Statistic::Expected),
        other => Err(PyValueError::new_err(format!("unknown statistic {other:?}"))),
    }
}

fn probability_config(seed: Option<u64>, samples: usize, uniform_defaults: bool, m: SupportMass) -> Option<ProbabilityConfig> {
    seed.map(|s| {
        ProbabilityConfig::new(s)
            .with_samples(samples)
            .with_uniform_defaults(uniform_defaults)
            .with_support_mass(m)
    })
}

type BoundsTuple = (u64, u64, Option<f64>);
type Steps = Vec<(String, String)>;

fn bounds_tuple(b: &Bounds) -> BoundsTuple {
    (b.min, b.max, b.expected)
}

/// An uncertain event log.
#[pyclass(name = "UncertainLog", module = "uncertain_pm", frozen)]
struct PyLog {
    log: UncertainLog,
}

impl PyLog {
    fn trace(&self, case_id: &str) -> PyResult<&UncertainTrace> {
        self.log
            .trace(case_id)
            .ok_or_else(|| PyKeyError::new_err(format!("no trace with case id {case_id:?}")))
    }
}

#[pymethods]
impl PyLog {
    /// Parses a `uel-1` document; raises ValueError listing every diagnostic.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse(text).map(|p| PyLog { log: p.log }).map_err(|d| diagnostics_err(&d))
    }

    /// Reads a crisp `case,activity,timestamp` CSV; any bad row raises.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        let imported = io::import_crisp(text.as_bytes()).map_err(|d| diagnostics_err(&[d]))?;
        if imported.is_partial() {
            return Err(diagnostics_err(&imported.diagnostics));
        }
        Ok(PyLog { log: imported.log })
    }

    fn to_json(&self) -> String {
        io::serialize(&self.log)
    }

    fn case_ids(&self) -> Vec<String> {
        self.log.traces.iter().map(|t| t.case_id.clone()).collect()
    }

    #[getter]
    fn event_count(&self) -> usize {
        self.log.event_count()
    }

    fn __len__(&self) -> usize {
        self.log.traces.len()
    }

    fn __repr__(&self) -> String {
        format!("UncertainLog({} traces, {} events)", self.log.traces.len(), self.log.event_count())
    }

    #[pyo3(signature = (case_id, mass=DEFAULT_MASS))]
    fn behavior_graph_edges(&self, case_id: &str, mass: f64) -> PyResult<Vec<(String, String)>> {
        let bg = build_optimized(self.trace(case_id)?, self::mass(mass)?);
        Ok(bg.edge_ids().into_iter().collect())
    }

    #[pyo3(signature = (case_id, mass=DEFAULT_MASS))]
    fn behavior_graph_dot(&self, case_id: &str, mass: f64) -> PyResult<String> {
        Ok(dot::behavior_graph_dot(&build_optimized(self.trace(case_id)?, self::mass(mass)?)))
    }

    #[pyo3(signature = (case_id, mass=DEFAULT_MASS))]
    fn behavior_net(&self, case_id: &str, mass: f64) -> PyResult<PyNet> {
        let net = to_behavior_net(&build_optimized(self.trace(case_id)?, self::mass(mass)?));
        Ok(PyNet { net })
    }

    /// Realizations as `(steps, probability)` pairs, steps being
    /// `(event_id, label)` tuples. Probabilities need a seed.
    #[pyo3(signature = (
        case_id, seed=None, samples=DEFAULT_SAMPLES, uniform_defaults=false,
        max_count=DEFAULT_MAX_REALIZATIONS, mass=DEFAULT_MASS
    ))]
    fn realizations(
        &self,
        case_id: &str,
        seed: Option<u64>,
        samples: usize,
        uniform_defaults: bool,
        max_count: usize,
        mass: f64,
    ) -> PyResult<Vec<(Steps, Option<f64>)>> {
        let m = self::mass(mass)?;
        let trace = self.trace(case_id)?;
        let rs = match probability_config(seed, samples, uniform_defaults, m) {
            Some(cfg) => enumerate_with_probabilities(trace, max_count, cfg),
            None => enumerate(trace, max_count, m),
        }
        .map_err(to_py)?;
        Ok(rs
            .into_iter()
            .map(|r| {
                let steps = r.steps.into_iter().map(|s| (s.event_id, s.label)).collect();
                (steps, r.probability)
            })
            .collect())
    }

    /// UDFG bounds as `{"activities": {a: (min, max, expected)},
    /// "edges": {(a, b): (min, max, expected)}}`.
    #[pyo3(signature = (
        seed=None, samples=DEFAULT_SAMPLES, uniform_defaults=false, filter_min=None, filter_edge=None,
        stat="min", max_count=DEFAULT_MAX_REALIZATIONS, mass=DEFAULT_MASS
    ))]
    #[allow(clippy::too_many_arguments)]
    fn udfg<'py>(
        &self,
        py: Python<'py>,
        seed: Option<u64>,
        samples: usize,
        uniform_defaults: bool,
        filter_min: Option<f64>,
        filter_edge: Option<f64>,
        stat: &str,
        max_count: usize,
        mass: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let m = self::mass(mass)?;
        let stat = statistic(stat)?;
        let cfg = DiscoveryConfig {
            max_realizations: max_count,
            support_mass: m,
            probability: probability_config(seed, samples, uniform_defaults, m),
        };
        let mut u = udfg(&self.log, &cfg).map_err(to_py)?;
        if filter_min.is_some() || filter_edge.is_some() {
            let act = filter_min.unwrap_or(0.0);
            u = filter_udfg(&u, act, filter_edge.unwrap_or(act), stat);
        }
        let acts: BTreeMap<String, BoundsTuple> = u.activities.iter().map(|(k, b)| (k.clone(), bounds_tuple(b))).collect();
        let edges: BTreeMap<(String, String), BoundsTuple> =
            u.edges.iter().map(|(k, b)| (k.clone(), bounds_tuple(b))).collect();
        let out = PyDict::new(py);
        out.set_item("activities", acts)?;
        out.set_item("edges", edges)?;
        Ok(out)
    }

    /// Per-trace alignment cost bounds against `model`.
    #[pyo3(signature = (
        model, seed=None, samples=DEFAULT_SAMPLES, uniform_defaults=false,
        max_count=DEFAULT_MAX_REALIZATIONS, max_states=conformance::DEFAULT_MAX_STATES, mass=DEFAULT_MASS
    ))]
    #[allow(clippy::too_many_arguments)]
    fn conformance<'py>(
        &self,
        py: Python<'py>,
        model: &PyNet,
        seed: Option<u64>,
        samples: usize,
        uniform_defaults: bool,
        max_count: usize,
        max_states: usize,
        mass: f64,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let m = self::mass(mass)?;
        let cfg = ConformanceConfig {
            max_states,
            max_realizations: max_count,
            support_mass: m,
            probability: probability_config(seed, samples, uniform_defaults, m),
        };
        let mut out = Vec::new();
        for t in &self.log.traces {
            let b = conformance_bounds(t, &model.net, &cfg).map_err(to_py)?;
            let d = PyDict::new(py);
            d.set_item("case_id", &b.case_id)?;
            d.set_item("min_cost", b.min_cost)?;
            d.set_item("max_cost", b.max_cost)?;
            d.set_item("expected_cost", b.expected_cost)?;
            d.set_item("best", b.witness_best.labels())?;
            d.set_item("worst", b.witness_worst.labels())?;
            d.set_item("realizations", b.realizations)?;
            out.push(d);
        }
        Ok(out)
    }

    /// Adds strong uncertainty to certain attributes. `magnitude` is a
    /// decimal string or a number.
    #[pyo3(signature = (ts_rate, act_rate, ind_rate, magnitude, k, seed))]
    fn inject(
        &self,
        ts_rate: f64,
        act_rate: f64,
        ind_rate: f64,
        magnitude: &Bound<'_, PyAny>,
        k: usize,
        seed: u64,
    ) -> PyResult<PyLog> {
        let text = match magnitude.extract::<String>() {
            Ok(s) => s,
            Err(_) => magnitude.extract::<f64>()?.to_string(),
        };
        let magnitude: Time = text.parse().map_err(|e| PyValueError::new_err(format!("magnitude: {e}")))?;
        let cfg = Injection {
            timestamp_rate: ts_rate,
            activity_rate: act_rate,
            indeterminacy_rate: ind_rate,
            magnitude,
            extra_labels: k,
            seed,
        };
        Ok(PyLog { log: io::inject(&self.log, &cfg).map_err(to_py)? })
    }
}

/// A Petri net with initial and final markings.
#[pyclass(name = "PetriNet", module = "uncertain_pm", frozen)]
struct PyNet {
    net: uncertain_core::PetriNet,
}

#[pymethods]
impl PyNet {
    /// Parses the `behaviornet-v1` text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        io::parse_net(text).map(|net| PyNet { net }).map_err(|d| diagnostics_err(&d))
    }

    /// A net accepting exactly the given sequence of labels.
    #[staticmethod]
    fn sequence(labels: Vec<String>) -> Self {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        PyNet { net: uncertain_core::petri::sequence_net(&refs) }
    }

    fn to_text(&self) -> String {
        io::net_to_text(&self.net)
    }

    #[pyo3(signature = (name="net"))]
    fn to_dot(&self, name: &str) -> String {
        dot::petri_net_dot(&self.net, name)
    }

    /// Visible label sequences of all complete runs, sorted.
    #[pyo3(signature = (max_count=DEFAULT_MAX_REALIZATIONS))]
    fn language(&self, max_count: usize) -> PyResult<Vec<Vec<String>>> {
        Ok(fire_sequences(&self.net, max_count).map_err(to_py)?.into_iter().collect())
    }

    #[pyo3(signature = (max_states=conformance::DEFAULT_MAX_STATES))]
    fn is_sound(&self, max_states: usize) -> PyResult<bool> {
        Ok(check_soundness(&self.net, max_states).map_err(to_py)?.is_sound())
    }

    /// Optimal alignment cost of `labels` against this net.
    #[pyo3(signature = (labels, max_states=conformance::DEFAULT_MAX_STATES))]
    fn align(&self, labels: Vec<String>, max_states: usize) -> PyResult<u64> {
        let cfg = ConformanceConfig { max_states, ..Default::default() };
        Ok(uncertain_core::align(&labels, &self.net, &cfg).map_err(to_py)?.cost)
    }

    #[getter]
    fn places(&self) -> Vec<String> {
        self.net.places().to_vec()
    }

    #[getter]
    fn transitions(&self) -> Vec<(String, Option<String>)> {
        self.net.transitions().iter().map(|t| (t.id.clone(), t.label.clone())).collect()
    }
}

#[pymodule]
pub fn uncertain_pm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLog>()?;
    m.add_class::<PyNet>()?;
    m.add("ResourceBoundError", m.py().get_type::<ResourceBoundError>())?;
    m.add("FORMAT_VERSION", io::FORMAT_VERSION)?;
    Ok(())
}
