//! Python bindings. ℚ/ℤ values cross the boundary as `fractions.Fraction`
//! in `[0, 1)`; inputs may be fractions, ints or `"p/q"` strings.

use std::sync::Arc;

use fqline::cochain::alpha_pulled_back;
use fqline::groupoid::GroupoidCocycle;
use fqline::lift::{LiftPath, TorusRep};
use fqline::moduli::{self, SurfaceRep, SL2Z};
use fqline::{Cochain, FiniteGroup, GroupHom, QZ};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: fqline::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, v: QZ) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((v.numerator(), v.denominator()))
}

fn to_qz(obj: &Bound<'_, PyAny>) -> PyResult<QZ> {
    obj.str()?.to_cow()?.parse().map_err(err)
}

fn matrix(m: (i64, i64, i64, i64)) -> PyResult<SL2Z> {
    SL2Z::new(m.0, m.1, m.2, m.3).map_err(err)
}

/// A finite group given by a spec such as `cyclic:4`, `klein4`, `s3`,
/// `cyclic:2*s3` or `file:<path>`.
#[pyclass(name = "Group", frozen)]
struct PyGroup {
    inner: Arc<FiniteGroup>,
}

#[pymethods]
impl PyGroup {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyGroup { inner: Arc::new(FiniteGroup::from_spec(spec).map_err(err)?) })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn mul(&self, a: usize, b: usize) -> PyResult<usize> {
        self.inner.check_element(a).and_then(|a| Ok(self.inner.mul(a, self.inner.check_element(b)?))).map_err(err)
    }

    fn inv(&self, a: usize) -> PyResult<usize> {
        Ok(self.inner.inv(self.inner.check_element(a).map_err(err)?))
    }

    fn element_order(&self, a: usize) -> PyResult<usize> {
        Ok(self.inner.element_order(self.inner.check_element(a).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Group({:?})", self.inner.label())
    }
}

/// A normalized cochain on a finite group; usually the 3-cocycle α.
#[pyclass(name = "Cocycle", frozen)]
struct PyCocycle {
    inner: Cochain,
}

#[pymethods]
impl PyCocycle {
    /// `α(j,k,l) = N·j/n` if `k + l ≥ n`, else 0, on ℤ/n.
    #[staticmethod]
    fn cyclic(n: usize, level: i64) -> PyResult<Self> {
        Ok(PyCocycle { inner: fqline::alpha_cyclic(n, level).map_err(err)? })
    }

    /// Pullback of the cyclic cocycle on ℤ/m along the character sending
    /// element `i` to `images[i]`.
    #[staticmethod]
    fn pulled_back(group: &PyGroup, m: usize, images: Vec<usize>, level: i64) -> PyResult<Self> {
        let target = Arc::new(FiniteGroup::cyclic(m).map_err(err)?);
        let chi = GroupHom::new(group.inner.clone(), target, images).map_err(err)?;
        Ok(PyCocycle { inner: alpha_pulled_back(&chi, level).map_err(err)? })
    }

    #[staticmethod]
    fn zero(group: &PyGroup, degree: usize) -> PyResult<Self> {
        Ok(PyCocycle { inner: Cochain::zero(group.inner.clone(), degree).map_err(err)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyCocycle { inner: Cochain::parse_text(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup { inner: self.inner.group().clone() }
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn value<'py>(&self, py: Python<'py>, args: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        if args.len() != self.inner.degree() || args.iter().any(|&a| a >= self.inner.group().order()) {
            return Err(PyValueError::new_err(format!("bad argument tuple {args:?}")));
        }
        fraction(py, self.inner.get(&args))
    }

    /// `(closed, normalized)`.
    fn validate(&self) -> (bool, bool) {
        let r = self.inner.validate();
        (r.closed, r.normalized)
    }

    /// Whether the cocycle is a coboundary.
    fn is_exact(&self) -> PyResult<bool> {
        Ok(self.inner.coboundary_solve().map_err(err)?.is_exact())
    }

    fn __repr__(&self) -> String {
        format!("Cocycle(group={:?}, degree={})", self.inner.group().label(), self.inner.degree())
    }
}

/// The character `r_diff(ρ, A)` for `ρ = (g, h)` and `A = (a, b, c, d)`.
#[pyfunction]
#[pyo3(signature = (alpha, g, h, matrix, path = "auto", window = None))]
fn r_diff<'py>(
    py: Python<'py>,
    alpha: &PyCocycle,
    g: usize,
    h: usize,
    matrix: (i64, i64, i64, i64),
    path: &str,
    window: Option<i64>,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = TorusRep::new(alpha.inner.group().clone(), g, h).map_err(err)?;
    let path: LiftPath = path.parse().map_err(err)?;
    let m = self::matrix(matrix)?;
    fraction(py, moduli::r_diff_with(&rep, &alpha.inner, &m, path, window).map_err(err)?)
}

#[pyfunction]
fn klein_character<'py>(py: Python<'py>, n: u64, level: i64, matrix: (i64, i64, i64, i64)) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, moduli::klein_character(n, level, &self::matrix(matrix)?).map_err(err)?)
}

#[pyfunction]
fn dehn_character<'py>(py: Python<'py>, alpha: &PyCocycle, g: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, moduli::dehn_character(&alpha.inner, g).map_err(err)?)
}

#[pyfunction]
fn in_gamma1(matrix: (i64, i64, i64, i64), n: u64) -> PyResult<bool> {
    Ok(moduli::in_gamma1(&self::matrix(matrix)?, n))
}

/// Holonomy tuples `(g₁, h₁, …)` of a genus 1 or 2 surface.
#[pyfunction]
#[pyo3(signature = (group, genus = 1))]
fn enumerate_bundles(group: &PyGroup, genus: usize) -> PyResult<Vec<Vec<usize>>> {
    let reps = moduli::enumerate_bundles(&group.inner, genus).map_err(err)?;
    Ok(reps.iter().map(|r| r.images().to_vec()).collect())
}

/// `(orbit, stabilizer)` of a holonomy tuple under conjugation.
#[pyfunction]
fn orbit_stabilizer(group: &PyGroup, images: Vec<usize>) -> PyResult<(Vec<Vec<usize>>, Vec<usize>)> {
    let rep = SurfaceRep::new(group.inner.clone(), images).map_err(err)?;
    let os = moduli::orbit_stabilizer(&rep);
    Ok((os.orbit.iter().map(|r| r.images().to_vec()).collect(), os.stabilizer))
}

/// `(representative, orbit size, vanishes)`.
type OrbitRow = ((usize, usize), usize, bool);

/// One row per orbit of commuting pairs.
#[pyfunction]
fn orbit_characters(alpha: &PyCocycle) -> PyResult<Vec<OrbitRow>> {
    let orbits = moduli::orbit_characters(alpha.inner.group(), &alpha.inner).map_err(err)?;
    Ok(orbits.iter().map(|o| (o.representative.pair(), o.orbit_size, o.vanishes())).collect())
}

#[pyfunction]
fn sections_dimension(alpha: &PyCocycle) -> PyResult<usize> {
    moduli::sections_dimension(alpha.inner.group(), &alpha.inner).map_err(err)
}

/// A ℚ/ℤ-valued cocycle on a finite groupoid presentation, read from the
/// `objects / mor / comp / val` text format.
#[pyclass(name = "GroupoidCocycle", frozen)]
struct PyGroupoidCocycle {
    inner: GroupoidCocycle,
}

#[pymethods]
impl PyGroupoidCocycle {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyGroupoidCocycle { inner: GroupoidCocycle::parse_text(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn objects(&self) -> usize {
        self.inner.presentation().objects()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.presentation().morphisms().iter().map(|m| m.label.clone()).collect()
    }

    /// Descriptions of the failed composition and identity checks.
    fn violations(&self) -> Vec<String> {
        let p = self.inner.presentation();
        self.inner.validate().violations.iter().map(|v| v.describe(p)).collect()
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().is_valid()
    }

    fn sections_dim(&self) -> PyResult<usize> {
        self.inner.sections_dim().map_err(err)
    }

    /// The cocycle changed by the coboundary of the per-object units `tau`.
    fn add_coboundary(&self, tau: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let tau = tau.iter().map(to_qz).collect::<PyResult<Vec<_>>>()?;
        Ok(PyGroupoidCocycle { inner: self.inner.add_coboundary(&tau).map_err(err)? })
    }

    fn value<'py>(&self, py: Python<'py>, label: &str) -> PyResult<Bound<'py, PyAny>> {
        let f = self
            .inner
            .presentation()
            .index_of(label)
            .ok_or_else(|| PyValueError::new_err(format!("no morphism {label:?}")))?;
        fraction(py, self.inner.value(f))
    }
}

#[pymodule]
fn fqline_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyCocycle>()?;
    m.add_class::<PyGroupoidCocycle>()?;
    m.add_function(wrap_pyfunction!(r_diff, m)?)?;
    m.add_function(wrap_pyfunction!(klein_character, m)?)?;
    m.add_function(wrap_pyfunction!(dehn_character, m)?)?;
    m.add_function(wrap_pyfunction!(in_gamma1, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_bundles, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_stabilizer, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_characters, m)?)?;
    m.add_function(wrap_pyfunction!(sections_dimension, m)?)?;
    Ok(())
}
