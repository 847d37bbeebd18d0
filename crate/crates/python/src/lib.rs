//! Python bindings for `ccancel`.

use ccancel::io::{map_to_string, parse_map, parse_space, parse_witness, space_to_json, to_pretty, witness_to_string};
use ccancel::{Element, Error, FuelPolicy, PamMap, Slot};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(pyccancel, CancelError, PyException);
create_exception!(pyccancel, ParseError, CancelError);
create_exception!(pyccancel, UndecidedError, CancelError);

const DEFAULT_FUEL: u64 = 1_000_000;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) => ParseError::new_err(e.to_string()),
        Error::Undecided { .. } => UndecidedError::new_err(e.to_string()),
        e => CancelError::new_err(e.to_string()),
    }
}

fn fuel(f: Option<u64>) -> FuelPolicy {
    FuelPolicy::new(f.unwrap_or(DEFAULT_FUEL))
}

/// A disjoint union of `Fin(n)` and `Omega` slots.
#[pyclass(name = "Space", frozen, skip_from_py_object, eq)]
#[derive(Clone, PartialEq)]
struct PySpace(ccancel::Space);

#[pymethods]
impl PySpace {
    /// `slots` holds sizes for finite slots and `None` for `Omega`.
    #[new]
    fn new(slots: Vec<Option<u64>>) -> Self {
        PySpace(ccancel::Space::new(slots.into_iter().map(|s| s.map_or(Slot::Omega, Slot::Fin)).collect::<Vec<_>>()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_space(text).map(PySpace).map_err(py_err)
    }

    fn to_json(&self) -> String {
        to_pretty(&space_to_json(&self.0))
    }

    fn slots(&self) -> Vec<Option<u64>> {
        self.0.slots().iter().map(|s| match s {
            Slot::Fin(n) => Some(*n),
            Slot::Omega => None,
        }).collect()
    }

    fn cardinality(&self) -> Option<u64> {
        self.0.cardinality()
    }

    fn prefix(&self, k: u64) -> Vec<(usize, u64)> {
        self.0.prefix(k).into_iter().map(|e| (e.slot, e.index)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Space({})", self.0)
    }
}

/// A partial map given by finitely many exceptions and progression pieces.
#[pyclass(name = "Map", frozen, skip_from_py_object, eq)]
#[derive(Clone, PartialEq)]
struct PyMap(PamMap);

#[pymethods]
impl PyMap {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_map(text).map(PyMap).map_err(py_err)
    }

    #[staticmethod]
    fn from_table(source: &PySpace, target: &PySpace, pairs: Vec<((usize, u64), (usize, u64))>) -> PyResult<Self> {
        let pairs = pairs.into_iter().map(|((a, x), (b, y))| (Element::new(a, x), Element::new(b, y)));
        PamMap::from_table(&source.0, &target.0, pairs).map(PyMap).map_err(py_err)
    }

    #[staticmethod]
    fn identity(space: &PySpace) -> Self {
        PyMap(PamMap::identity(&space.0))
    }

    fn to_json(&self) -> String {
        map_to_string(&self.0)
    }

    #[getter]
    fn source(&self) -> PySpace {
        PySpace(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> PySpace {
        PySpace(self.0.target().clone())
    }

    fn __call__(&self, slot: usize, index: u64) -> PyResult<Option<(usize, u64)>> {
        let y = self.0.try_eval(Element::new(slot, index)).map_err(py_err)?;
        Ok(y.map(|e| (e.slot, e.index)))
    }

    fn is_injective(&self) -> bool {
        self.0.is_injective()
    }

    fn is_bijective(&self) -> bool {
        self.0.is_bijective()
    }

    fn then(&self, other: &PyMap) -> PyResult<PyMap> {
        self.0.then(&other.0).map(PyMap).map_err(py_err)
    }

    fn invert(&self) -> PyResult<PyMap> {
        self.0.invert().map(PyMap).map_err(py_err)
    }
}

/// A bijection or injection, explicit or computed pointwise.
#[pyclass(name = "Witness", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWitness(ccancel::Witness);

#[pymethods]
impl PyWitness {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_witness(text).map(PyWitness).map_err(py_err)
    }

    /// Pointwise witnesses are sampled on the first `prefix` elements.
    #[pyo3(signature = (prefix = 1000, fuel = None))]
    fn to_json(&self, prefix: u64, fuel: Option<u64>) -> PyResult<String> {
        witness_to_string(&self.0, prefix, fuel.unwrap_or(DEFAULT_FUEL)).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.0.kind() {
            ccancel::WitnessKind::Bijection => "bijection",
            ccancel::WitnessKind::Injection => "injection",
        }
    }

    #[getter]
    fn explicit(&self) -> bool {
        self.0.is_explicit()
    }

    #[getter]
    fn source(&self) -> PySpace {
        PySpace(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> PySpace {
        PySpace(self.0.target().clone())
    }

    fn map(&self) -> Option<PyMap> {
        self.0.as_map().cloned().map(PyMap)
    }

    fn __call__(&self, slot: usize, index: u64) -> PyResult<(usize, u64)> {
        let y = self.0.apply(Element::new(slot, index)).map_err(py_err)?;
        Ok((y.slot, y.index))
    }

    fn inverse(&self, slot: usize, index: u64) -> PyResult<Option<(usize, u64)>> {
        let x = self.0.inverse_eval(Element::new(slot, index)).map_err(py_err)?;
        Ok(x.map(|e| (e.slot, e.index)))
    }

    /// Exhaustive on finite spaces, otherwise on the first `prefix` elements.
    #[pyo3(signature = (prefix = 1000))]
    fn verify(&self, prefix: u64) -> PyResult<(bool, String)> {
        let mode = if self.0.source().cardinality().is_some() && self.0.target().cardinality().is_some() {
            ccancel::VerifyMode::Exhaustive
        } else {
            ccancel::VerifyMode::Prefix(prefix)
        };
        let r = ccancel::verify_witness(&self.0, mode).map_err(py_err)?;
        Ok((r.ok, r.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Witness({}, {} -> {}, {})", self.kind(), self.0.source(), self.0.target(), self.0.provenance())
    }
}

#[pyfunction]
#[pyo3(signature = (f, g, fuel = None))]
fn csb(f: &PyMap, g: &PyMap, fuel: Option<u64>) -> PyResult<PyWitness> {
    ccancel::csb_bijection(&f.0, &g.0, self::fuel(fuel)).map(PyWitness).map_err(py_err)
}

#[pyfunction]
fn subtract(f: &PyMap, a: &PySpace, b: &PySpace, c: &PySpace) -> PyResult<PyWitness> {
    ccancel::subtract_finite_map(&f.0, &a.0, &b.0, &c.0).map(PyWitness).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (s, t, n, fuel = None))]
fn tarski(s: &PyMap, t: &PyMap, n: usize, fuel: Option<u64>) -> PyResult<PyWitness> {
    ccancel::tarski_cancel(&s.0, &t.0, n, self::fuel(fuel)).map(PyWitness).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n, f, fuel = None))]
fn divide(n: usize, f: &PyMap, fuel: Option<u64>) -> PyResult<PyWitness> {
    ccancel::divide_by_n(n, &f.0, self::fuel(fuel)).map(PyWitness).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (f, fuel = None))]
fn divide_by_two(f: &PyMap, fuel: Option<u64>) -> PyResult<PyWitness> {
    ccancel::divide_by_two(&f.0, self::fuel(fuel)).map(PyWitness).map_err(py_err)
}

/// Returns the witness and the per-string leftover counts.
#[pyfunction]
#[pyo3(signature = (f, fuel = None))]
fn divide_by_two_2omega(f: &PyMap, fuel: Option<u64>) -> PyResult<(PyWitness, Vec<usize>)> {
    let (w, report) = ccancel::divide_by_two_2omega(&f.0, self::fuel(fuel)).map_err(py_err)?;
    Ok((PyWitness(w), report.leftovers))
}

#[pyfunction]
#[pyo3(signature = (n, t, fuel = None))]
fn divide_inequality(n: usize, t: &PyMap, fuel: Option<u64>) -> PyResult<PyWitness> {
    ccancel::divide_inequality_by_n(n, &t.0, self::fuel(fuel)).map(PyWitness).map_err(py_err)
}

/// Graphviz text; `kind` is `arrows`, `triangles` or `csb`.
#[pyfunction]
#[pyo3(signature = (kind, f, g = None, n = 3, prefix = 16))]
fn dot(kind: &str, f: &PyMap, g: Option<&PyMap>, n: usize, prefix: u64) -> PyResult<String> {
    let kind: ccancel::DotKind = kind.parse().map_err(py_err)?;
    ccancel::emit_dot(kind, n, &f.0, g.map(|g| &g.0), prefix).map_err(py_err)
}

/// Generates a seeded instance from a JSON spec; returns its named maps.
#[pyfunction]
fn generate_instance(spec: &str) -> PyResult<Vec<(String, PyMap)>> {
    let spec: ccancel::InstanceSpec = serde_json::from_str(spec).map_err(|e| ParseError::new_err(e.to_string()))?;
    let inst = ccancel::generate_instance(&spec).map_err(py_err)?;
    Ok(inst.maps.into_iter().map(|(k, m)| (k, PyMap(m))).collect())
}

#[pymodule]
fn pyccancel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyWitness>()?;
    m.add("CancelError", m.py().get_type::<CancelError>())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("UndecidedError", m.py().get_type::<UndecidedError>())?;
    m.add_function(wrap_pyfunction!(csb, m)?)?;
    m.add_function(wrap_pyfunction!(subtract, m)?)?;
    m.add_function(wrap_pyfunction!(tarski, m)?)?;
    m.add_function(wrap_pyfunction!(divide, m)?)?;
    m.add_function(wrap_pyfunction!(divide_by_two, m)?)?;
    m.add_function(wrap_pyfunction!(divide_by_two_2omega, m)?)?;
    m.add_function(wrap_pyfunction!(divide_inequality, m)?)?;
    m.add_function(wrap_pyfunction!(dot, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instance, m)?)?;
    Ok(())
}
