//! Python bindings: thin wrappers over `bowley_core`, one class per model
//! object and one function per operation, with errors surfaced as ValueError.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;

use bowley_core::growth::{self, TripleFit};
use bowley_core::invariants;
use bowley_core::lsq::NlsOptions;
use bowley_core::prodfit::{self, CdMode};
use bowley_core::series;
use bowley_core::shares;

fn py_err(e: bowley_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn as3(name: &str, v: &[f64]) -> PyResult<[f64; 3]> {
    v.try_into()
        .map_err(|_| PyValueError::new_err(format!("{name} must have exactly 3 entries, got {}", v.len())))
}

/// Aligned labor/capital/production series over consecutive years.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Panel {
    inner: series::EconPanel,
}

#[pymethods]
impl Panel {
    #[new]
    #[pyo3(signature = (years, labor, capital, production, origin_year=None))]
    fn new(
        years: Vec<i32>,
        labor: Vec<f64>,
        capital: Vec<f64>,
        production: Vec<f64>,
        origin_year: Option<i32>,
    ) -> PyResult<Self> {
        let inner = series::EconPanel::new(years, labor, capital, production, origin_year)
            .map_err(py_err)?;
        Ok(Panel { inner })
    }

    /// Parse CSV text with header `year,labor,capital,production`.
    #[staticmethod]
    #[pyo3(signature = (text, origin_year=None))]
    fn from_csv(text: &str, origin_year: Option<i32>) -> PyResult<Self> {
        Ok(Panel {
            inner: series::ingest_csv(text, origin_year).map_err(py_err)?,
        })
    }

    fn to_csv(&self) -> String {
        series::panel_to_csv(&self.inner)
    }

    /// Model time axis t = year - origin_year.
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn years(&self) -> Vec<i32> {
        self.inner.years.clone()
    }

    #[getter]
    fn labor(&self) -> Vec<f64> {
        self.inner.labor.clone()
    }

    #[getter]
    fn capital(&self) -> Vec<f64> {
        self.inner.capital.clone()
    }

    #[getter]
    fn production(&self) -> Vec<f64> {
        self.inner.production.clone()
    }

    #[getter]
    fn origin_year(&self) -> i32 {
        self.inner.origin_year
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Panel({} rows, {}..{})",
            self.inner.len(),
            self.inner.years.first().copied().unwrap_or(0),
            self.inner.years.last().copied().unwrap_or(0)
        )
    }
}

/// Exponential fit x(t) = x0 * exp(b t).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct ExpFit {
    #[pyo3(get)]
    b: f64,
    #[pyo3(get)]
    x0: f64,
    #[pyo3(get)]
    c: f64,
    #[pyo3(get)]
    rss_log: f64,
    #[pyo3(get)]
    rss_raw: f64,
}

#[pymethods]
impl ExpFit {
    fn eval(&self, t: f64) -> f64 {
        growth::eval_exponential(self.b, self.x0, t)
    }

    fn __repr__(&self) -> String {
        format!("ExpFit(b={}, x0={})", self.b, self.x0)
    }
}

impl From<growth::ExpFit> for ExpFit {
    fn from(f: growth::ExpFit) -> Self {
        ExpFit {
            b: f.b,
            x0: f.x0,
            c: f.c,
            rss_log: f.rss_log,
            rss_raw: f.rss_raw,
        }
    }
}

/// Logistic fit x(t) = N x0 / (x0 + (N - x0) exp(-b t)).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct LogisticFit {
    #[pyo3(get)]
    b: f64,
    #[pyo3(get)]
    x0: f64,
    #[pyo3(get)]
    n: f64,
    #[pyo3(get)]
    rss: f64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    near_degenerate: bool,
}

#[pymethods]
impl LogisticFit {
    fn eval(&self, t: f64) -> f64 {
        growth::eval_logistic(self.b, self.x0, self.n, t)
    }

    fn __repr__(&self) -> String {
        format!("LogisticFit(b={}, x0={}, n={})", self.b, self.x0, self.n)
    }
}

impl From<growth::LogisticFit> for LogisticFit {
    fn from(f: growth::LogisticFit) -> Self {
        LogisticFit {
            b: f.b,
            x0: f.x0,
            n: f.n,
            rss: f.rss,
            converged: f.converged,
            near_degenerate: f.near_degenerate,
        }
    }
}

impl LogisticFit {
    fn to_core(&self) -> growth::LogisticFit {
        growth::LogisticFit {
            b: self.b,
            x0: self.x0,
            n: self.n,
            rss: self.rss,
            converged: self.converged,
            near_degenerate: self.near_degenerate,
        }
    }
}

/// Y = scale * L^alpha * K^beta.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct CobbDouglas {
    #[pyo3(get)]
    scale: f64,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    beta: f64,
}

#[pymethods]
impl CobbDouglas {
    #[new]
    fn new(scale: f64, alpha: f64, beta: f64) -> Self {
        CobbDouglas { scale, alpha, beta }
    }

    fn eval(&self, l: f64, k: f64) -> PyResult<f64> {
        invariants::eval_cobb_douglas(&self.to_core(), l, k).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "CobbDouglas(scale={}, alpha={}, beta={})",
            self.scale, self.alpha, self.beta
        )
    }
}

impl CobbDouglas {
    fn to_core(&self) -> invariants::CobbDouglas {
        invariants::CobbDouglas {
            scale: self.scale,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// Bounded surface Y = N_Y L^a K^b / (C |N_L-L|^a |N_K-K|^b + L^a K^b).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct LogisticProduction {
    #[pyo3(get)]
    n_l: f64,
    #[pyo3(get)]
    n_k: f64,
    #[pyo3(get)]
    n_y: f64,
    #[pyo3(get)]
    c: f64,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    beta: f64,
}

#[pymethods]
impl LogisticProduction {
    #[new]
    fn new(n_l: f64, n_k: f64, n_y: f64, c: f64, alpha: f64, beta: f64) -> Self {
        LogisticProduction { n_l, n_k, n_y, c, alpha, beta }
    }

    fn eval(&self, l: f64, k: f64) -> f64 {
        invariants::eval_logistic_production(&self.to_core(), l, k)
    }

    /// Closed-form wage share at (L, K); undefined at L = N_L.
    fn wage_share(&self, l: f64, k: f64) -> PyResult<f64> {
        shares::analytic_logistic_share(&self.to_core(), l, k).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "LogisticProduction(n_l={}, n_k={}, n_y={}, c={}, alpha={}, beta={})",
            self.n_l, self.n_k, self.n_y, self.c, self.alpha, self.beta
        )
    }
}

impl LogisticProduction {
    fn to_core(&self) -> invariants::LogisticProduction {
        invariants::LogisticProduction {
            n_l: self.n_l,
            n_k: self.n_k,
            n_y: self.n_y,
            c: self.c,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// Result of a Cobb-Douglas calibration.
#[pyclass]
struct CobbDouglasFit {
    #[pyo3(get)]
    model: CobbDouglas,
    #[pyo3(get)]
    rss: f64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
}

/// Result of a bounded-surface calibration (growth fits included).
#[pyclass]
struct LogisticSurfaceFit {
    #[pyo3(get)]
    model: LogisticProduction,
    #[pyo3(get)]
    rss: f64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    growth: (LogisticFit, LogisticFit, LogisticFit),
}

#[pyfunction]
fn fit_exponential(ts: Vec<f64>, xs: Vec<f64>) -> PyResult<ExpFit> {
    growth::fit_exponential(&ts, &xs).map(Into::into).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (ts, xs, init=None))]
fn fit_logistic(ts: Vec<f64>, xs: Vec<f64>, init: Option<(f64, f64, f64)>) -> PyResult<LogisticFit> {
    growth::fit_logistic(&ts, &xs, init, &NlsOptions::default())
        .map(Into::into)
        .map_err(py_err)
}

/// Exponential fit of each panel series: (labor, capital, production).
#[pyfunction]
fn fit_exponential_panel(panel: &Panel) -> PyResult<(ExpFit, ExpFit, ExpFit)> {
    let f = growth::fit_exponential_panel(&panel.inner).map_err(py_err)?;
    Ok((f.labor.into(), f.capital.into(), f.production.into()))
}

/// Logistic fit of each panel series: (labor, capital, production).
#[pyfunction]
fn fit_logistic_panel(panel: &Panel) -> PyResult<(LogisticFit, LogisticFit, LogisticFit)> {
    let f = growth::fit_logistic_panel(&panel.inner, &NlsOptions::default()).map_err(py_err)?;
    Ok((f.labor.into(), f.capital.into(), f.production.into()))
}

/// Elasticities under constant returns: (alpha, beta, classification).
#[pyfunction]
fn crs_elasticities(b: Vec<f64>) -> PyResult<(f64, f64, String)> {
    let sol = invariants::crs_elasticities(as3("b", &b)?);
    Ok((sol.alpha, sol.beta, sol.classification.name().to_string()))
}

#[pyfunction]
fn beta_given_alpha(b: Vec<f64>, alpha: f64) -> PyResult<f64> {
    invariants::beta_given_alpha(as3("b", &b)?, alpha).map_err(py_err)
}

#[pyfunction]
fn classify_returns(b: Vec<f64>) -> PyResult<String> {
    invariants::classify_returns(as3("b", &b)?)
        .map(|c| c.name().to_string())
        .map_err(py_err)
}

#[pyfunction]
fn orthogonality_residual(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    invariants::orthogonality_residual(&a, &b).map_err(py_err)
}

/// Calibrate Y = A L^alpha K^beta. Modes: "free", "crs",
/// "alpha-pinned" (requires alpha), "fixed" (requires alpha and beta).
#[pyfunction]
#[pyo3(signature = (panel, mode="free", alpha=None, beta=None))]
fn fit_cobb_douglas(
    panel: &Panel,
    mode: &str,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> PyResult<CobbDouglasFit> {
    let mode = match (mode, alpha, beta) {
        ("free", _, _) => CdMode::Free,
        ("crs", _, _) => CdMode::Crs,
        ("alpha-pinned", Some(a), _) => CdMode::AlphaPinned(a),
        ("alpha-pinned", None, _) => {
            return Err(PyValueError::new_err("mode 'alpha-pinned' requires alpha"))
        }
        ("fixed", Some(a), Some(b)) => CdMode::Fixed { alpha: a, beta: b },
        ("fixed", _, _) => {
            return Err(PyValueError::new_err("mode 'fixed' requires alpha and beta"))
        }
        (other, _, _) => {
            return Err(PyValueError::new_err(format!(
                "unknown mode `{other}`; expected free | crs | alpha-pinned | fixed"
            )))
        }
    };
    let fit = prodfit::fit_cobb_douglas(&panel.inner, mode, &NlsOptions::default())
        .map_err(py_err)?;
    Ok(CobbDouglasFit {
        model: CobbDouglas {
            scale: fit.model.scale,
            alpha: fit.model.alpha,
            beta: fit.model.beta,
        },
        rss: fit.rss,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

/// Calibrate the bounded logistic surface against a panel.
#[pyfunction]
fn fit_logistic_production(panel: &Panel) -> PyResult<LogisticSurfaceFit> {
    let fit = prodfit::fit_logistic_production(&panel.inner, &NlsOptions::default())
        .map_err(py_err)?;
    Ok(LogisticSurfaceFit {
        model: LogisticProduction {
            n_l: fit.model.n_l,
            n_k: fit.model.n_k,
            n_y: fit.model.n_y,
            c: fit.model.c,
            alpha: fit.model.alpha,
            beta: fit.model.beta,
        },
        rss: fit.rss,
        converged: fit.converged,
        iterations: fit.iterations,
        growth: (
            fit.growth.labor.into(),
            fit.growth.capital.into(),
            fit.growth.production.into(),
        ),
    })
}

/// Invariant of the exponential flow: prod(x0^a) * prod(x^a).
#[pyfunction]
fn general_invariant_value(x0: Vec<f64>, a: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    invariants::general_invariant_value(&x0, &a, &x).map_err(py_err)
}

/// Invariant of the logistic flow: prod([x(N-x0)/(x0(N-x))]^a).
#[pyfunction]
fn logistic_invariant_value(x0: Vec<f64>, n: Vec<f64>, a: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    invariants::logistic_invariant_value(&x0, &n, &a, &x).map_err(py_err)
}

#[pyfunction]
fn solve_production_from_invariant(
    x0: Vec<f64>,
    a: Vec<f64>,
    c: f64,
    x1: f64,
    x2: f64,
) -> PyResult<f64> {
    invariants::solve_production_from_invariant(&as3("x0", &x0)?, &as3("a", &a)?, c, x1, x2)
        .map_err(py_err)
}

/// Y = a K^p L^(1-p) / (1 + b K^p L^(-p)).
#[pyfunction]
fn eval_s_shaped(a: f64, b: f64, p: f64, k: f64, l: f64) -> PyResult<f64> {
    invariants::eval_s_shaped(&invariants::SShaped { a, b, p }, k, l).map_err(py_err)
}

#[pyfunction]
fn psi_forward(n: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    invariants::psi_forward(&n, &x).map_err(py_err)
}

#[pyfunction]
fn psi_inverse(n: Vec<f64>, xt: Vec<f64>) -> PyResult<Vec<f64>> {
    invariants::psi_inverse(&n, &xt).map_err(py_err)
}

#[pyfunction]
fn psi_jacobian_diag(n: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    invariants::psi_jacobian_diag(&n, &x).map_err(py_err)
}

#[pyfunction]
fn pushforward_field(b: Vec<f64>, n: Vec<f64>, xt: Vec<f64>) -> PyResult<Vec<f64>> {
    invariants::pushforward_field(&b, &n, &xt).map_err(py_err)
}

/// Fundamental jet invariants (I1, I2, I3, I4) of the prolonged generator
/// (a, b, c) at the jet point (k, l, y, y_k, y_l).
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn fundamental_invariants(
    a: f64,
    b: f64,
    c: f64,
    k: f64,
    l: f64,
    y: f64,
    y_k: f64,
    y_l: f64,
) -> PyResult<[f64; 4]> {
    let g = shares::Generator { a, b, c };
    let p = shares::JetPoint::new(k, l, y, y_k, y_l).map_err(py_err)?;
    shares::fundamental_invariants(&g, &p).map_err(py_err)
}

/// (s_l, s_k) from the four fundamental invariants.
#[pyfunction]
fn shares_from_invariants(inv: Vec<f64>) -> PyResult<(f64, f64)> {
    let arr: [f64; 4] = inv.as_slice().try_into().map_err(|_| {
        PyValueError::new_err(format!("inv must have exactly 4 entries, got {}", inv.len()))
    })?;
    let report = shares::shares_from_invariants(&arr).map_err(py_err)?;
    Ok((report.s_l, report.s_k))
}

/// Central-difference shares (s_l, s_k) of a Python callable f(l, k).
#[pyfunction]
#[pyo3(signature = (f, l, k, h=shares::DEFAULT_SHARE_STEP))]
fn numeric_wage_share(f: Bound<'_, PyAny>, l: f64, k: f64, h: f64) -> PyResult<(f64, f64)> {
    let surface = |l: f64, k: f64| -> f64 {
        f.call1((l, k))
            .and_then(|v| v.extract::<f64>())
            .unwrap_or(f64::NAN)
    };
    let report = shares::numeric_wage_share(&surface, l, k, h).map_err(py_err)?;
    Ok((report.s_l, report.s_k))
}

/// Wage share along fitted logistic flows at the given times.
#[pyfunction]
fn logistic_share_trajectory(
    labor: &LogisticFit,
    capital: &LogisticFit,
    production: &LogisticFit,
    ts: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let fits = TripleFit {
        labor: labor.to_core(),
        capital: capital.to_core(),
        production: production.to_core(),
    };
    shares::logistic_share_trajectory(&fits, &ts).map_err(py_err)
}

/// The bounded surface whose share along the fitted flows reproduces
/// `logistic_share_trajectory` exactly.
#[pyfunction]
fn trajectory_surface(
    labor: &LogisticFit,
    capital: &LogisticFit,
    production: &LogisticFit,
) -> PyResult<LogisticProduction> {
    let fits = TripleFit {
        labor: labor.to_core(),
        capital: capital.to_core(),
        production: production.to_core(),
    };
    let lp = shares::trajectory_surface(&fits).map_err(py_err)?;
    Ok(LogisticProduction {
        n_l: lp.n_l,
        n_k: lp.n_k,
        n_y: lp.n_y,
        c: lp.c,
        alpha: lp.alpha,
        beta: lp.beta,
    })
}

/// Constancy statistics of a share series: (mean, max_abs_deviation,
/// relative_range).
#[pyfunction]
fn share_constancy(values: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let s = shares::summarize(&values).map_err(py_err)?;
    Ok((s.mean, s.max_abs_deviation, s.relative_range))
}

#[pymodule]
fn bowley(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", bowley_core::VERSION)?;
    m.add_class::<Panel>()?;
    m.add_class::<ExpFit>()?;
    m.add_class::<LogisticFit>()?;
    m.add_class::<CobbDouglas>()?;
    m.add_class::<LogisticProduction>()?;
    m.add_class::<CobbDouglasFit>()?;
    m.add_class::<LogisticSurfaceFit>()?;
    m.add_function(wrap_pyfunction!(fit_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponential_panel, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic_panel, m)?)?;
    m.add_function(wrap_pyfunction!(crs_elasticities, m)?)?;
    m.add_function(wrap_pyfunction!(beta_given_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(classify_returns, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonality_residual, m)?)?;
    m.add_function(wrap_pyfunction!(fit_cobb_douglas, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic_production, m)?)?;
    m.add_function(wrap_pyfunction!(general_invariant_value, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_invariant_value, m)?)?;
    m.add_function(wrap_pyfunction!(solve_production_from_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(eval_s_shaped, m)?)?;
    m.add_function(wrap_pyfunction!(psi_forward, m)?)?;
    m.add_function(wrap_pyfunction!(psi_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(psi_jacobian_diag, m)?)?;
    m.add_function(wrap_pyfunction!(pushforward_field, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(shares_from_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(numeric_wage_share, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_share_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_surface, m)?)?;
    m.add_function(wrap_pyfunction!(share_constancy, m)?)?;
    Ok(())
}
