//! Python bindings: domains, eigenpairs, ground states and the command runner.

use indefinite_core::cli_io::{configure, run, to_json, Check, Command, Overrides};
use indefinite_core::discretize::{BoxGrid, Discretization, Grid, RadialGrid};
use indefinite_core::eigensolve::{radial_shoot, solve, SolveOptions};
use indefinite_core::geometry::DomainSpec;
use indefinite_core::semilinear::{ground_state, Init, MinimizeOptions};
use indefinite_core::verify::{faber_krahn, ShapeSolver};
use indefinite_core::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Unsupported(_) | Error::ConfigParse { .. } | Error::ConfigKey { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A bounded domain in `R^3` (or `R^dim` for centered balls and annuli).
#[pyclass(name = "Domain", frozen)]
struct PyDomain {
    inner: DomainSpec,
}

#[pymethods]
impl PyDomain {
    #[staticmethod]
    #[pyo3(signature = (radius, center=None))]
    fn ball(radius: f64, center: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = DomainSpec::ball(center.unwrap_or_else(|| vec![0.0; 3]), radius).map_err(py_err)?;
        Ok(PyDomain { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (r_in, r_out, dim=3))]
    fn annulus(r_in: f64, r_out: f64, dim: usize) -> PyResult<Self> {
        Ok(PyDomain { inner: DomainSpec::annulus(vec![0.0; dim], r_in, r_out).map_err(py_err)? })
    }

    #[staticmethod]
    fn two_balls(separation: f64, radius: f64) -> PyResult<Self> {
        Ok(PyDomain { inner: DomainSpec::two_balls(separation, radius).map_err(py_err)? })
    }

    #[staticmethod]
    fn union_of_balls(balls: Vec<(Vec<f64>, f64)>) -> PyResult<Self> {
        Ok(PyDomain { inner: DomainSpec::union_of_balls(balls).map_err(py_err)? })
    }

    #[staticmethod]
    fn box_(center: Vec<f64>, half_widths: Vec<f64>) -> PyResult<Self> {
        Ok(PyDomain { inner: DomainSpec::boxed(center, half_widths).map_err(py_err)? })
    }

    fn volume(&self) -> PyResult<f64> {
        self.inner.volume().map_err(py_err)
    }

    fn indicator(&self, x: Vec<f64>) -> i8 {
        self.inner.indicator(&x)
    }

    fn scale(&self, t: f64) -> PyResult<Self> {
        Ok(PyDomain { inner: self.inner.scale(t).map_err(py_err)? })
    }

    fn schwarz_ball(&self) -> PyResult<Self> {
        Ok(PyDomain { inner: self.inner.schwarz_ball().map_err(py_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Domain({})", self.inner.label())
    }
}

fn discretization(domain: &DomainSpec, half_width: Option<f64>, n: Option<usize>, radial: Option<(usize, f64)>) -> PyResult<Discretization> {
    let grid = match radial {
        Some((m, r_max)) => Grid::Radial(RadialGrid::new(domain.dim, r_max, m).map_err(py_err)?),
        None => {
            let l = half_width.unwrap_or_else(|| ShapeSolver::default().half_width(domain));
            Grid::Box(BoxGrid::new(l, n.unwrap_or(48)).map_err(py_err)?)
        }
    };
    Discretization::new(grid, domain).map_err(py_err)
}

/// The `k` smallest positive eigenvalues of the weighted pencil, on a box
/// grid or, when `radial=(m, r_max)` is given, a radial grid.
#[pyfunction]
#[pyo3(signature = (domain, k=1, half_width=None, n=None, radial=None))]
fn eigenvalues(
    domain: &PyDomain,
    k: usize,
    half_width: Option<f64>,
    n: Option<usize>,
    radial: Option<(usize, f64)>,
) -> PyResult<Vec<f64>> {
    let disc = discretization(&domain.inner, half_width, n, radial)?;
    Ok(solve(&disc, &SolveOptions::new(k)).map_err(py_err)?.lambdas())
}

/// `k`-th radial eigenvalue by shooting; needs a centered ball or annulus.
#[pyfunction]
#[pyo3(signature = (domain, k=1))]
fn shoot(domain: &PyDomain, k: usize) -> PyResult<f64> {
    Ok(radial_shoot(&domain.inner, domain.inner.dim, k, None).map_err(py_err)?.lambda)
}

/// Least-energy level `alpha_p`, `ln |u_p|_inf` and the residual.
#[pyfunction]
#[pyo3(signature = (domain, p, half_width=None, n=None, radial=None))]
fn ground_state_summary(
    domain: &PyDomain,
    p: f64,
    half_width: Option<f64>,
    n: Option<usize>,
    radial: Option<(usize, f64)>,
) -> PyResult<(f64, f64, f64)> {
    let disc = discretization(&domain.inner, half_width, n, radial)?;
    let s = ground_state(&disc, p, Init::Eigenfunction, &MinimizeOptions::default()).map_err(py_err)?;
    Ok((s.alpha_p, s.sup_norm_scaling().ln_m, s.residual))
}

/// `(lhs, rhs, verdict)` of the comparison with the equal-volume ball.
#[pyfunction]
fn faber_krahn_check(domain: &PyDomain) -> PyResult<(f64, f64, bool)> {
    let r = faber_krahn(&domain.inner, &ShapeSolver::default()).map_err(py_err)?;
    Ok((r.lhs, r.rhs, r.verdict))
}

/// Runs a command-line subcommand on config text and returns
/// `(exit_code, json)`.
#[pyfunction]
#[pyo3(signature = (command, config="", check=None))]
fn run_command(command: &str, config: &str, check: Option<&str>) -> PyResult<(i32, String)> {
    let cmd = match command {
        "eig" => Command::Eig,
        "semilinear" => Command::Semilinear,
        "sweep" => Command::Sweep,
        "hks" => Command::Hks,
        "neg-scan" => Command::NegScan,
        "decay-fit" => Command::DecayFit,
        "verify" => {
            let c: Check = check.ok_or_else(|| PyValueError::new_err("verify needs a check name"))?.parse().map_err(py_err)?;
            Command::Verify(c)
        }
        other => return Err(PyValueError::new_err(format!("unknown command `{other}`"))),
    };
    let cfg = configure(config, &Overrides::default()).map_err(py_err)?;
    let report = run(&cfg, cmd).map_err(py_err)?;
    Ok((report.exit_code(), to_json(&report).map_err(py_err)?))
}

#[pymodule]
fn indefinite(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state_summary, m)?)?;
    m.add_function(wrap_pyfunction!(faber_krahn_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
