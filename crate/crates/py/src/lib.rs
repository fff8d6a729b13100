//! Python bindings: grids, fields, the I-operator, modified energies,
//! the solver and the experiment drivers. Reports come back as dicts.

use gkdv_core::experiments::{self, DiffConfig, GlobalizeConfig, Q64};
use gkdv_core::functionals;
use gkdv_core::resonance::{self, SamplePlan, SweepReport, TenStratum};
use gkdv_core::solver;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(gkdv, GkdvError, PyException);
create_exception!(gkdv, BlowUpError, GkdvError);

fn err(e: gkdv_core::Error) -> PyErr {
    match e {
        gkdv_core::Error::BlowUp { .. } => BlowUpError::new_err(e.to_string()),
        _ => GkdvError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| GkdvError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Uniform periodic grid of `n` points on `[-L/2, L/2)`.
#[pyclass(frozen, skip_from_py_object, module = "gkdv")]
#[derive(Clone, Copy)]
struct Grid(gkdv_core::Grid);

#[pymethods]
impl Grid {
    #[new]
    fn new(n: usize, length: f64) -> PyResult<Self> {
        gkdv_core::Grid::new(n, length).map(Grid).map_err(err)
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }
    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }
    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }
    #[getter]
    fn dk(&self) -> f64 {
        self.0.dk()
    }
    fn points(&self) -> Vec<f64> {
        self.0.points()
    }
    fn __repr__(&self) -> String {
        format!("Grid(n={}, length={})", self.0.n(), self.0.length())
    }
}

/// Real samples on a grid.
#[pyclass(frozen, skip_from_py_object, module = "gkdv")]
#[derive(Clone)]
struct Field(gkdv_core::Field);

#[pymethods]
impl Field {
    #[new]
    fn new(grid: &Grid, values: Vec<f64>) -> PyResult<Self> {
        gkdv_core::Field::new(grid.0, values).map(Field).map_err(err)
    }
    #[getter]
    fn grid(&self) -> Grid {
        Grid(*self.0.grid())
    }
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }
    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }
    fn scaled(&self, c: f64) -> Field {
        Field(self.0.scaled(c))
    }
    fn mass(&self) -> f64 {
        functionals::mass(&self.0)
    }
    #[pyo3(signature = (mu = -1.0))]
    fn energy(&self, mu: f64) -> PyResult<f64> {
        functionals::energy(&self.0, mu).map_err(err)
    }
    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        gkdv_core::sobolev_norm(&self.0, s).map_err(err)
    }
    fn __len__(&self) -> usize {
        self.0.values().len()
    }
}

/// Smoothed frequency cutoff at `N` with regularity `s`.
#[pyclass(frozen, skip_from_py_object, module = "gkdv")]
#[derive(Clone, Copy)]
struct IParams(gkdv_core::IParams);

#[pymethods]
impl IParams {
    #[new]
    fn new(n: f64, s: f64) -> PyResult<Self> {
        gkdv_core::IParams::new(n, s).map(IParams).map_err(err)
    }
    /// `N = n_index * dk` on `grid`.
    #[staticmethod]
    fn from_index(n_index: f64, s: f64, grid: &Grid) -> PyResult<Self> {
        gkdv_core::IParams::from_index(n_index, s, &grid.0)
            .map(IParams)
            .map_err(err)
    }
    #[getter]
    fn n(&self) -> f64 {
        self.0.n()
    }
    #[getter]
    fn s(&self) -> f64 {
        self.0.s()
    }
    fn m(&self, xi: f64) -> f64 {
        gkdv_core::m_value(xi, &self.0)
    }
}

/// Numerical meaning of the asymptotic relations in the region definitions.
#[pyclass(frozen, skip_from_py_object, module = "gkdv")]
#[derive(Clone, Copy)]
struct Thresholds(gkdv_core::Thresholds);

#[pymethods]
impl Thresholds {
    #[new]
    #[pyo3(signature = (k_much = 100.0, c_gtr = 1.0, r_sim = 2.0, eps_alpha_rel = 1e-9))]
    fn new(k_much: f64, c_gtr: f64, r_sim: f64, eps_alpha_rel: f64) -> PyResult<Self> {
        let th = gkdv_core::Thresholds {
            k_much,
            c_gtr,
            r_sim,
            eps_alpha_rel,
        };
        th.validate().map_err(err)?;
        Ok(Thresholds(th))
    }
    #[getter]
    fn k_much(&self) -> f64 {
        self.0.k_much
    }
    #[getter]
    fn c_gtr(&self) -> f64 {
        self.0.c_gtr
    }
    #[getter]
    fn r_sim(&self) -> f64 {
        self.0.r_sim
    }
    #[getter]
    fn eps_alpha_rel(&self) -> f64 {
        self.0.eps_alpha_rel
    }
}

#[pyfunction]
fn ground_state(grid: &Grid) -> PyResult<Field> {
    gkdv_core::ground_state(grid.0).map(Field).map_err(err)
}

#[pyfunction]
fn apply_i(f: &Field, params: &IParams) -> PyResult<Field> {
    gkdv_core::apply_i(&f.0, &params.0).map(Field).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, params, mu = -1.0))]
fn e1(f: &Field, params: &IParams, mu: f64) -> PyResult<f64> {
    functionals::e1_modified(&f.0, &params.0, mu).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, params, thresholds = None))]
fn e2(f: &Field, params: &IParams, thresholds: Option<&Thresholds>) -> PyResult<f64> {
    let th = thresholds.map(|t| t.0).unwrap_or_default();
    functionals::e2_modified(&f.0, &params.0, &th).map_err(err)
}

/// Sextic correction symbol on six integer indices summing to zero.
#[pyfunction]
#[pyo3(signature = (idx, params, thresholds = None, dk = 1.0))]
fn sigma_tilde6(idx: [i64; 6], params: &IParams, thresholds: Option<&Thresholds>, dk: f64) -> PyResult<f64> {
    let th = thresholds.map(|t| t.0).unwrap_or_default();
    let sum: i64 = idx.iter().sum();
    if sum != 0 {
        return Err(err(gkdv_core::Error::OffHyperplane {
            idx: idx.to_vec(),
            sum,
        }));
    }
    Ok(resonance::sigma_tilde6_raw(&idx, dk, &params.0, &th))
}

/// Imaginary part of the ten-linear remainder symbol.
#[pyfunction]
#[pyo3(signature = (idx, params, thresholds = None, dk = 1.0))]
fn m10_bar(idx: Vec<i64>, params: &IParams, thresholds: Option<&Thresholds>, dk: f64) -> PyResult<f64> {
    let th = thresholds.map(|t| t.0).unwrap_or_default();
    resonance::m10_bar_raw(&idx, dk, &params.0, &th).map_err(err)
}

/// Evolves `f`; returns `(times, fields, drift)` with `snapshots` evenly
/// spaced samples after `t = 0`.
#[pyfunction]
#[pyo3(signature = (f, dt, t_end, mu = -1.0, snapshots = 10, blowup_cap = 1e3, nonlinear = true))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    f: &Field,
    dt: f64,
    t_end: f64,
    mu: f64,
    snapshots: usize,
    blowup_cap: f64,
    nonlinear: bool,
) -> PyResult<(Vec<f64>, Vec<Field>, Bound<'py, PyAny>)> {
    let cfg = gkdv_core::SolverConfig {
        dt,
        t_end,
        mu,
        blowup_cap,
        nonlinear,
        ..Default::default()
    };
    let k = snapshots.max(1);
    let times: Vec<f64> = (0..=k).map(|i| t_end * i as f64 / k as f64).collect();
    let h = py
        .detach(|| solver::evolve(&f.0, &cfg, &times))
        .map_err(err)?;
    let drift = solver::conservation_check(&h, mu).map_err(err)?;
    let fields = h.fields.into_iter().map(Field).collect();
    Ok((h.times, fields, to_py(py, &drift)?))
}

/// Exact exponent bookkeeping at a rational `s` given as `"p/q"`.
#[pyfunction]
fn threshold<'py>(py: Python<'py>, s: &str) -> PyResult<Bound<'py, PyAny>> {
    let q: Q64 = s
        .trim()
        .parse()
        .map_err(|_| GkdvError::new_err(format!("'{s}' is not a rational p/q")))?;
    if q <= Q64::from_integer(0) || q >= Q64::from_integer(1) {
        return Err(GkdvError::new_err("s must lie in (0, 1)"));
    }
    to_py(py, &experiments::threshold_arithmetic(q))
}

#[pyfunction]
fn threshold_table<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &experiments::threshold_table())
}

/// Stratified sup of `|sigma6_tilde|` at each threshold in `n_list`.
#[pyfunction]
#[pyo3(signature = (n_list, s, samples, seed, k_much = 100.0))]
fn verify_sigma_tilde<'py>(
    py: Python<'py>,
    n_list: Vec<f64>,
    s: f64,
    samples: usize,
    seed: u64,
    k_much: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let th = gkdv_core::Thresholds::with_k_much(k_much).map_err(err)?;
    let sweep = py
        .detach(|| {
            n_list
                .iter()
                .map(|&n| resonance::verify_sigma_tilde_bounded(n, s, &th, samples, &SamplePlan::default(), seed))
                .collect::<gkdv_core::Result<Vec<_>>>()
                .map(SweepReport::from_reports)
        })
        .map_err(err)?;
    to_py(py, &sweep)
}

/// Sup of `|M10_bar| / |xi_C|` over high-pair ten-tuples at each threshold.
#[pyfunction]
#[pyo3(signature = (n_list, s, samples, seed, k_much = 4.0))]
fn verify_m10_bar<'py>(
    py: Python<'py>,
    n_list: Vec<f64>,
    s: f64,
    samples: usize,
    seed: u64,
    k_much: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let th = gkdv_core::Thresholds::with_k_much(k_much).map_err(err)?;
    let strata = [TenStratum::HighPair, TenStratum::CancellingHigh];
    let sweep = py
        .detach(|| {
            n_list
                .iter()
                .map(|&n| resonance::verify_m10_bar_bound(n, s, &th, samples, &strata, seed))
                .collect::<gkdv_core::Result<Vec<_>>>()
                .map(SweepReport::from_reports)
        })
        .map_err(err)?;
    to_py(py, &sweep)
}

/// Finite-difference check of the modified energy derivative formulas.
#[pyfunction]
#[pyo3(signature = (modes = None, n_index = 4.0, nonlinear = true))]
fn diff_check<'py>(
    py: Python<'py>,
    modes: Option<Vec<(i64, f64, f64)>>,
    n_index: f64,
    nonlinear: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = DiffConfig {
        n_index,
        nonlinear,
        ..Default::default()
    };
    if let Some(m) = modes {
        cfg.modes = m;
    }
    let r = py.detach(|| experiments::run_diff_formula_check(&cfg)).map_err(err)?;
    to_py(py, &r)
}

/// Sharp Gagliardo-Nirenberg ratio on the ground state and random fields.
#[pyfunction]
#[pyo3(signature = (grid, count, seed))]
fn gn_check<'py>(py: Python<'py>, grid: &Grid, count: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let g = grid.0;
    let r = py.detach(|| experiments::run_gn_check(g, count, seed)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn gn_ratio(f: &Field) -> PyResult<f64> {
    experiments::gn_ratio(&f.0).map_err(err)
}

/// Windowed iteration of the rescaled solution from `u0`.
#[pyfunction]
#[pyo3(signature = (u0, n_index, t_target, s = 0.5, mu = -1.0))]
fn globalize<'py>(
    py: Python<'py>,
    u0: &Field,
    n_index: f64,
    t_target: f64,
    s: f64,
    mu: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = GlobalizeConfig {
        s,
        n_index,
        t_target,
        mu,
        ..Default::default()
    };
    let r = py.detach(|| experiments::globalize_demo(&u0.0, &cfg)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn lambda_for(n_index: f64, s: f64) -> f64 {
    experiments::lambda_for(n_index, s)
}

#[pymodule]
fn gkdv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("GkdvError", py.get_type::<GkdvError>())?;
    m.add("BlowUpError", py.get_type::<BlowUpError>())?;
    // column contract for plotting consumers of the experiment CSVs
    m.add("CSV_COLUMNS", experiments::CSV_HEADER.to_vec())?;
    m.add_class::<Grid>()?;
    m.add_class::<Field>()?;
    m.add_class::<IParams>()?;
    m.add_class::<Thresholds>()?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(apply_i, m)?)?;
    m.add_function(wrap_pyfunction!(e1, m)?)?;
    m.add_function(wrap_pyfunction!(e2, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_tilde6, m)?)?;
    m.add_function(wrap_pyfunction!(m10_bar, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_table, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sigma_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(verify_m10_bar, m)?)?;
    m.add_function(wrap_pyfunction!(diff_check, m)?)?;
    m.add_function(wrap_pyfunction!(gn_check, m)?)?;
    m.add_function(wrap_pyfunction!(gn_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(globalize, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_for, m)?)?;
    Ok(())
}
