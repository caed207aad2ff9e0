//! Python bindings: games, exact classical values, quantum biases with
//! certificates, relaxations and simulation.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use xor_arena::classical::{self, DEFAULT_BUDGET};
use xor_arena::game::{self, AnyGame};
use xor_arena::io;
use xor_arena::quantum::{self, CERTIFICATE_TOL};
use xor_arena::sdp::DEFAULT_TOL;
use xor_arena::simulate::{play_sharded, Arena, PlayableStrategy};
use xor_arena::{fl_relax, tsirelson, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::Solver(_) | Error::Singular { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("expected a nonempty rectangular list of rows"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Two-player XOR game given by its cost matrix `π(s,t)·(−1)^f(s,t)`.
#[pyclass(name = "XorGame", module = "xor_arena_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyXorGame(game::XorGame);

#[pymethods]
impl PyXorGame {
    #[new]
    fn new(cost: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self(game::XorGame::from_cost(matrix(&cost)?).map_err(err)?))
    }

    #[staticmethod]
    fn from_tables(pi: Vec<Vec<f64>>, f: Vec<Vec<u8>>) -> PyResult<Self> {
        let f = DMatrix::from_fn(f.len(), f.first().map_or(0, Vec::len), |i, j| f[i][j]);
        Ok(Self(game::XorGame::from_tables(&matrix(&pi)?, &f).map_err(err)?))
    }

    #[staticmethod]
    fn chsh() -> Self {
        Self(game::chsh())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match io::game_from_json(text).map_err(err)? {
            AnyGame::Xor(g) => Ok(Self(g)),
            AnyGame::Binary(_) => Err(PyValueError::new_err("not an XOR game")),
        }
    }

    fn to_json(&self) -> String {
        io::game_to_json(&AnyGame::Xor(self.0.clone()))
    }

    #[getter]
    fn cost(&self) -> Vec<Vec<f64>> {
        rows(self.0.cost())
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.s_count(), self.0.t_count())
    }

    #[getter]
    fn s_labels(&self) -> Vec<String> {
        self.0.s_labels().to_vec()
    }

    #[getter]
    fn t_labels(&self) -> Vec<String> {
        self.0.t_labels().to_vec()
    }

    fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    fn xor_sum(&self, other: &PyXorGame) -> Self {
        Self(self.0.xor_sum(&other.0))
    }

    fn diagnostics(&self) -> Vec<String> {
        self.0.diagnostics()
    }

    fn __repr__(&self) -> String {
        format!("XorGame({}×{})", self.0.s_count(), self.0.t_count())
    }
}

/// Game with arbitrary answer sets and a 0/1 predicate `V(a, b | s, t)`.
#[pyclass(name = "BinaryGame", module = "xor_arena_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyBinaryGame(game::BinaryGame);

#[pymethods]
impl PyBinaryGame {
    #[staticmethod]
    fn watrous() -> Self {
        Self(game::watrous())
    }

    #[staticmethod]
    fn from_xor(g: &PyXorGame) -> Self {
        Self(game::BinaryGame::from_xor(&g.0))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(io::game_from_json(text).map_err(err)?.to_binary()))
    }

    fn to_json(&self) -> String {
        io::game_to_json(&AnyGame::Binary(self.0.clone()))
    }

    fn conjunction(&self, other: &PyBinaryGame) -> Self {
        Self(self.0.conjunction(&other.0))
    }

    fn accepts(&self, a: usize, b: usize, s: usize, t: usize) -> bool {
        self.0.accepts(a, b, s, t)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.s_count(), self.0.t_count())
    }

    fn __repr__(&self) -> String {
        format!(
            "BinaryGame({}×{} questions, {}×{} answers)",
            self.0.s_count(),
            self.0.t_count(),
            self.0.a_arity(),
            self.0.b_arity()
        )
    }
}

fn any_game(obj: &Bound<'_, PyAny>) -> PyResult<AnyGame> {
    if let Ok(g) = obj.cast::<PyXorGame>() {
        return Ok(AnyGame::Xor(g.get().0.clone()));
    }
    if let Ok(g) = obj.cast::<PyBinaryGame>() {
        return Ok(AnyGame::Binary(g.get().0.clone()));
    }
    Err(PyTypeError::new_err("expected an XorGame or a BinaryGame"))
}

/// Feasible point of the dual SDP; its objective bounds the quantum bias.
#[pyclass(name = "DualCertificate", module = "xor_arena_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyCertificate(quantum::DualCertificate);

#[pymethods]
impl PyCertificate {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self(quantum::DualCertificate::new(x, y))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(quantum::DualCertificate::from_json(text).map_err(err)?))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y.clone()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.0.objective
    }

    #[pyo3(signature = (game, tol = CERTIFICATE_TOL))]
    fn verify(&self, game: &PyXorGame, tol: f64) -> PyResult<bool> {
        Ok(quantum::verify_certificate(&self.0, &game.0, tol).map_err(err)?.ok)
    }

    /// Certificate for `g1 ⊕ g2` with objective `self.objective · other.objective`.
    #[pyo3(signature = (g1, other, g2, tol = CERTIFICATE_TOL))]
    fn tensor(&self, g1: &PyXorGame, other: &PyCertificate, g2: &PyXorGame, tol: f64) -> PyResult<Self> {
        Ok(Self(quantum::tensor_certificates(&self.0, &g1.0, &other.0, &g2.0, tol).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("DualCertificate(objective={})", self.0.objective)
    }
}

/// `(bias, alice_answers, bob_answers)`.
#[pyfunction]
#[pyo3(signature = (game, budget = DEFAULT_BUDGET))]
fn classical_bias(game: &PyXorGame, budget: u128) -> PyResult<(f64, Vec<usize>, Vec<usize>)> {
    let (b, w) = classical::classical_bias(&game.0, budget).map_err(err)?;
    Ok((b, w.alice, w.bob))
}

/// `(value, alice_answers, bob_answers)` for the conjunction of XOR games.
#[pyfunction]
#[pyo3(signature = (games, budget = DEFAULT_BUDGET))]
fn classical_value_conjunction(games: Vec<PyXorGame>, budget: u128) -> PyResult<(f64, Vec<usize>, Vec<usize>)> {
    let c = game::conjunction(games.into_iter().map(|g| g.0).collect()).map_err(err)?;
    let (v, w) = classical::classical_value_conjunction(&c, budget).map_err(err)?;
    Ok((v, w.alice, w.bob))
}

#[pyfunction]
#[pyo3(signature = (game, budget = DEFAULT_BUDGET))]
fn classical_value(game: &Bound<'_, PyAny>, budget: u128) -> PyResult<(f64, Vec<usize>, Vec<usize>)> {
    let (v, w) = classical::classical_value_binary(&any_game(game)?.to_binary(), budget).map_err(err)?;
    Ok((v, w.alice, w.bob))
}

#[pyfunction]
#[pyo3(signature = (games, budget = DEFAULT_BUDGET))]
fn classical_corollary_bound(games: Vec<PyXorGame>, budget: u128) -> PyResult<f64> {
    let games: Vec<_> = games.into_iter().map(|g| g.0).collect();
    classical::classical_corollary_bound(&games, budget).map_err(err)
}

/// Dict with `bias`, `value`, `gap`, `certificate` and the unit vectors `xs`, `ys`.
#[pyfunction]
#[pyo3(signature = (game, tol = DEFAULT_TOL))]
fn quantum_bias<'py>(py: Python<'py>, game: &PyXorGame, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| quantum::quantum_bias(&game.0, tol)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("bias", r.bias)?;
    d.set_item("value", r.value)?;
    d.set_item("gap", r.gap)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("certificate", PyCertificate(r.certificate))?;
    let vecs = |vs: &[nalgebra::DVector<f64>]| -> Vec<Vec<f64>> { vs.iter().map(|v| v.iter().copied().collect()).collect() };
    d.set_item("xs", vecs(&r.vectors.xs))?;
    d.set_item("ys", vecs(&r.vectors.ys))?;
    Ok(d)
}

/// `(bound, closed_form)` for the conjunction of the given games.
#[pyfunction]
#[pyo3(signature = (games, tol = DEFAULT_TOL))]
fn quantum_corollary_bound(py: Python<'_>, games: Vec<PyXorGame>, tol: f64) -> PyResult<(f64, f64)> {
    let games: Vec<_> = games.into_iter().map(|g| g.0).collect();
    let r = py.detach(|| quantum::quantum_corollary_bound(&games, tol)).map_err(err)?;
    Ok((r.bound, r.closed_form))
}

#[pyfunction]
#[pyo3(signature = (game, tol = DEFAULT_TOL))]
fn sigma(py: Python<'_>, game: &Bound<'_, PyAny>, tol: f64) -> PyResult<f64> {
    let g = any_game(game)?.to_binary();
    Ok(py.detach(|| fl_relax::sigma(&g, tol)).map_err(err)?.value)
}

#[pyfunction]
#[pyo3(signature = (game, tol = DEFAULT_TOL))]
fn sigma_bar(py: Python<'_>, game: &Bound<'_, PyAny>, tol: f64) -> PyResult<f64> {
    let g = any_game(game)?.to_binary();
    Ok(py.detach(|| fl_relax::sigma_bar(&g, tol)).map_err(err)?.value)
}

/// `(sigma_bar, product of quantum values)`.
#[pyfunction]
#[pyo3(signature = (games, tol = DEFAULT_TOL))]
fn fl_conjunction_check(py: Python<'_>, games: Vec<PyXorGame>, tol: f64) -> PyResult<(f64, f64)> {
    let games: Vec<_> = games.into_iter().map(|g| g.0).collect();
    let r = py.detach(|| fl_relax::fl_conjunction_check(&games, tol)).map_err(err)?;
    Ok((r.sigma_bar, r.product))
}

#[pyfunction]
fn parity_play_probability(w1: f64, w2: f64) -> PyResult<f64> {
    game::parity_play_probability(w1, w2).map_err(err)
}

#[pyfunction]
fn convex_combine(lam: f64, g1: &PyXorGame, g2: &PyXorGame) -> PyResult<PyXorGame> {
    Ok(PyXorGame(game::convex_combine(lam, &g1.0, &g2.0).map_err(err)?))
}

#[pyfunction]
fn catalog(py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
    match game::catalog(name).map_err(err)? {
        AnyGame::Xor(g) => Ok(Py::new(py, PyXorGame(g))?.into_any()),
        AnyGame::Binary(g) => Ok(Py::new(py, PyBinaryGame(g))?.into_any()),
    }
}

/// Plays `optimal-classical` or `optimal-quantum` and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (game, strategy, trials, seed = 0, shards = 1, tol = DEFAULT_TOL))]
fn simulate<'py>(
    py: Python<'py>,
    game: &Bound<'py, PyAny>,
    strategy: &str,
    trials: u64,
    seed: u64,
    shards: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let game = any_game(game)?;
    let run = || -> xor_arena::Result<String> {
        let st = match (strategy, &game) {
            ("optimal-classical", AnyGame::Xor(g)) => {
                PlayableStrategy::from(&classical::classical_bias(g, DEFAULT_BUDGET)?.1)
            }
            ("optimal-classical", AnyGame::Binary(g)) => {
                PlayableStrategy::from(&classical::classical_value_binary(g, DEFAULT_BUDGET)?.1)
            }
            ("optimal-quantum", AnyGame::Xor(g)) => PlayableStrategy::quantum(&tsirelson::strategy_from_vectors(
                &quantum::quantum_bias(g, tol)?.vectors,
            )?)?,
            _ => return Err(Error::InvalidArgument(format!("strategy `{strategy}` is not available for this game"))),
        };
        let arena = match &game {
            AnyGame::Xor(g) => Arena::Xor(g),
            AnyGame::Binary(g) => Arena::Binary(g),
        };
        Ok(play_sharded(&st, arena, trials, seed, shards)?.to_json())
    };
    let text = py.detach(run).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn xor_arena_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyXorGame>()?;
    m.add_class::<PyBinaryGame>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(classical_bias, m)?)?;
    m.add_function(wrap_pyfunction!(classical_value_conjunction, m)?)?;
    m.add_function(wrap_pyfunction!(classical_value, m)?)?;
    m.add_function(wrap_pyfunction!(classical_corollary_bound, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_bias, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_corollary_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_bar, m)?)?;
    m.add_function(wrap_pyfunction!(fl_conjunction_check, m)?)?;
    m.add_function(wrap_pyfunction!(parity_play_probability, m)?)?;
    m.add_function(wrap_pyfunction!(convex_combine, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    m.add("CERTIFICATE_TOL", CERTIFICATE_TOL)?;
    Ok(())
}
