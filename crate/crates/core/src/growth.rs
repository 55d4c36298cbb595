//! Per-series growth models.
//!
//! Both models are solutions of one-parameter flows in the state variable x:
//!
//! ```text
//! exponential:  dx/dt = b·x            x(t) = x⁰·e^{b·t}
//! logistic:     dx/dt = b·x·(1 − x/N)  x(t) = N·x⁰ / (x⁰ + (N − x⁰)·e^{−b·t})
//! ```
//!
//! The exponential fit is a log-linear regression (so the estimate is exact
//! in one closed form); the logistic fit is a raw-scale Levenberg–Marquardt
//! refinement of a self-starting guess. As N → ∞ with x⁰ fixed the logistic
//! curve degenerates to the exponential one, which is why near-plateau-free
//! data leaves N essentially unidentified — such fits are flagged rather than
//! rejected.

use crate::error::{Error, Result};
use crate::lsq::{self, NlsOptions, Termination};
use crate::series::{EconPanel, SeriesKind};

/// Exponential fit x(t) = x⁰·e^{b·t}, estimated as ln x = c + b·t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    /// Growth rate (log-scale slope).
    pub b: f64,
    /// Level at t = 0; equals e^c.
    pub x0: f64,
    /// Log-scale intercept ln x⁰.
    pub c: f64,
    /// Residual sum of squares of the regression on ln x — the quantity the
    /// estimator actually minimizes.
    pub rss_log: f64,
    /// Residual sum of squares against the raw series, for comparison with
    /// fits that minimize raw-scale error.
    pub rss_raw: f64,
}

impl ExpFit {
    pub fn eval(&self, t: f64) -> f64 {
        eval_exponential(self.b, self.x0, t)
    }
}

/// Logistic fit x(t) = N·x⁰ / (x⁰ + (N − x⁰)·e^{−b·t}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFit {
    pub b: f64,
    pub x0: f64,
    /// Carrying capacity.
    pub n: f64,
    /// Raw-scale residual sum of squares.
    pub rss: f64,
    pub converged: bool,
    /// Set when the data barely constrains the plateau (N far above the
    /// observed range, an unconverged run, or parameters outside 0 < x⁰ < N).
    /// The fit is still returned — the caller must see N rather than have the
    /// problem hidden — but downstream trajectory formulas reject such fits.
    pub near_degenerate: bool,
}

impl LogisticFit {
    pub fn eval(&self, t: f64) -> f64 {
        eval_logistic(self.b, self.x0, self.n, t)
    }
}

/// One fit per panel series, same estimator for all three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleFit<F> {
    pub labor: F,
    pub capital: F,
    pub production: F,
}

impl<F> TripleFit<F> {
    pub fn get(&self, kind: SeriesKind) -> &F {
        match kind {
            SeriesKind::Labor => &self.labor,
            SeriesKind::Capital => &self.capital,
            SeriesKind::Production => &self.production,
        }
    }
}

impl TripleFit<ExpFit> {
    /// Growth-rate triple (b_labor, b_capital, b_production).
    pub fn rates(&self) -> [f64; 3] {
        [self.labor.b, self.capital.b, self.production.b]
    }
}

pub fn eval_exponential(b: f64, x0: f64, t: f64) -> f64 {
    x0 * (b * t).exp()
}

pub fn eval_logistic(b: f64, x0: f64, n: f64, t: f64) -> f64 {
    n * x0 / (x0 + (n - x0) * (-b * t).exp())
}

/// Fit x(t) = x⁰·e^{b·t} by linear regression on (t, ln x).
///
/// Requires strictly positive values (the log) and at least two distinct
/// times. Reports both the log-scale RSS (minimized) and the raw-scale RSS.
pub fn fit_exponential(ts: &[f64], xs: &[f64]) -> Result<ExpFit> {
    if ts.len() != xs.len() {
        return Err(Error::LengthMismatch {
            left: ts.len(),
            right: xs.len(),
        });
    }
    for &x in xs {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::NonPositiveInput {
                what: "series value",
                value: x,
            });
        }
    }
    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let line = lsq::linear_fit(ts, &logs)?;
    let b = line.slope;
    let c = line.intercept;
    let x0 = c.exp();
    let rss_raw = ts
        .iter()
        .zip(xs)
        .map(|(&t, &x)| {
            let r = x - eval_exponential(b, x0, t);
            r * r
        })
        .sum();
    Ok(ExpFit {
        b,
        x0,
        c,
        rss_log: line.rss,
        rss_raw,
    })
}

/// Fit the logistic curve to `(ts, xs)` with raw-scale residuals.
///
/// Starting point: either the caller's `(b, x⁰, N)` — validated so that
/// 0 < x⁰ < N and N exceeds every observation, else
/// [`Error::InitOutOfRange`] — or a self-start with N₀ = 1.05·max(x),
/// x⁰₀ = first value, and b₀ from a logit-scale regression of
/// ln(x / (N₀ − x)) on t.
pub fn fit_logistic(
    ts: &[f64],
    xs: &[f64],
    init: Option<(f64, f64, f64)>,
    opts: &NlsOptions,
) -> Result<LogisticFit> {
    if ts.len() != xs.len() {
        return Err(Error::LengthMismatch {
            left: ts.len(),
            right: xs.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::EmptySeries {
            what: "logistic fit input".into(),
        });
    }
    for &x in xs {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::NonPositiveInput {
                what: "series value",
                value: x,
            });
        }
    }
    let max = xs.iter().fold(f64::MIN, |m, &x| m.max(x));

    let start = match init {
        Some((b, x0, n)) => {
            if !(x0 > 0.0 && x0 < n) {
                return Err(Error::InitOutOfRange {
                    reason: format!("need 0 < x0 < N, got x0 = {x0}, N = {n}"),
                });
            }
            if n <= max {
                return Err(Error::InitOutOfRange {
                    reason: format!("N = {n} does not exceed the series maximum {max}"),
                });
            }
            [b, x0, n]
        }
        None => {
            let n0 = 1.05 * max;
            // ln(x/(N₀−x)) is linear in t when the curve is logistic with
            // capacity N₀; its slope estimates b even when N₀ is off.
            let logits: Vec<f64> = xs.iter().map(|&x| (x / (n0 - x)).ln()).collect();
            let b0 = lsq::linear_fit(ts, &logits)?.slope;
            [b0, xs[0], n0]
        }
    };

    let residual = |p: &[f64]| -> Vec<f64> {
        // Steps that leave the model's domain 0 < x⁰ < N read as non-finite,
        // so the solver rejects them and retries with more damping instead of
        // escaping into the mirror-image valley at negative N.
        if !(p[1] > 0.0 && p[1] < p[2]) {
            return vec![f64::INFINITY; ts.len()];
        }
        ts.iter()
            .zip(xs)
            .map(|(&t, &x)| x - eval_logistic(p[0], p[1], p[2], t))
            .collect()
    };
    // ∂model/∂(b, x⁰, N) in closed form; residual rows are the negatives.
    let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
        let (b, x0, n) = (p[0], p[1], p[2]);
        ts.iter()
            .map(|&t| {
                let e = (-b * t).exp();
                let d = x0 + (n - x0) * e;
                let d2 = d * d;
                vec![
                    -(n * x0 * (n - x0) * t * e) / d2,
                    -(n * n * e) / d2,
                    -(x0 * x0 * (1.0 - e)) / d2,
                ]
            })
            .collect()
    };

    let res = lsq::nls_fit(&residual, Some(&jacobian), &start, opts)?;
    let (b, x0, n) = (res.parameters[0], res.parameters[1], res.parameters[2]);
    let converged = res.converged && res.termination != Termination::MaxIterations;
    let near_degenerate = !converged || n >= 10.0 * max || !(x0 > 0.0 && x0 < n);
    Ok(LogisticFit {
        b,
        x0,
        n,
        rss: res.rss,
        converged,
        near_degenerate,
    })
}

/// Exponential fit of each panel series against the panel's time axis.
pub fn fit_exponential_panel(panel: &EconPanel) -> Result<TripleFit<ExpFit>> {
    let ts = panel.times();
    Ok(TripleFit {
        labor: fit_exponential(&ts, &panel.labor)?,
        capital: fit_exponential(&ts, &panel.capital)?,
        production: fit_exponential(&ts, &panel.production)?,
    })
}

/// Logistic fit of each panel series (self-starting).
pub fn fit_logistic_panel(panel: &EconPanel, opts: &NlsOptions) -> Result<TripleFit<LogisticFit>> {
    let ts = panel.times();
    Ok(TripleFit {
        labor: fit_logistic(&ts, &panel.labor, None, opts)?,
        capital: fit_logistic(&ts, &panel.capital, None, opts)?,
        production: fit_logistic(&ts, &panel.production, None, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn exponential_recovery_is_exact_on_clean_data() {
        for &b in &[0.01, 0.05, 0.1] {
            let ts = grid(24);
            let xs: Vec<f64> = ts.iter().map(|&t| eval_exponential(b, 100.0, t)).collect();
            let fit = fit_exponential(&ts, &xs).unwrap();
            assert_relative_eq!(fit.b, b, max_relative = 1e-12);
            assert_relative_eq!(fit.x0, 100.0, max_relative = 1e-12);
            assert!(fit.rss_log < 1e-24);
            assert!(fit.rss_raw < 1e-16);
        }
    }

    #[test]
    fn exponential_rejects_non_positive_values() {
        let err = fit_exponential(&[0.0, 1.0, 2.0], &[1.0, -2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveInput { .. }));
    }

    /// Oracle: integrate dx/dt = b·x·(1 − x/N) with RK4 and compare the
    /// closed form against it, then fit data generated from the closed form.
    #[test]
    fn logistic_closed_form_matches_rk4_integration() {
        let (b, x0, n) = (0.08, 2.0, 180.0);
        let mut x = x0;
        let dt = 1e-3;
        let f = |x: f64| b * x * (1.0 - x / n);
        let mut t = 0.0;
        while t < 40.0 - dt / 2.0 {
            let k1 = f(x);
            let k2 = f(x + 0.5 * dt * k1);
            let k3 = f(x + 0.5 * dt * k2);
            let k4 = f(x + dt * k3);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        assert_relative_eq!(x, eval_logistic(b, x0, n, 40.0), max_relative = 1e-9);
    }

    #[test]
    fn logistic_recovery_on_clean_data() {
        let (b, x0, n) = (0.08, 2.0, 180.0);
        let ts = grid(70);
        let xs: Vec<f64> = ts.iter().map(|&t| eval_logistic(b, x0, n, t)).collect();
        let fit = fit_logistic(&ts, &xs, None, &NlsOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(!fit.near_degenerate);
        assert_relative_eq!(fit.b, b, max_relative = 1e-6);
        assert_relative_eq!(fit.x0, x0, max_relative = 1e-6);
        assert_relative_eq!(fit.n, n, max_relative = 1e-6);
        assert!(fit.rss < 1e-12);
    }

    #[test]
    fn logistic_limit_to_exponential_at_huge_capacity() {
        // With N = 1e9·x⁰ the logistic curve should shadow the exponential
        // one to better than 1e-5 relative for b·t ≤ 5.
        let (b, x0) = (0.1, 3.0);
        let n = 1e9 * x0;
        for i in 0..=50 {
            let t = i as f64;
            let gap = (eval_logistic(b, x0, n, t) - eval_exponential(b, x0, t)).abs()
                / eval_exponential(b, x0, t);
            assert!(gap < 1e-5, "gap {gap} at t = {t}");
        }
    }

    #[test]
    fn plateau_free_data_is_flagged_near_degenerate() {
        // Strictly exponential input: N is weakly identified, so either the
        // capacity runs far above the data or the iteration budget expires.
        let ts = grid(30);
        let xs: Vec<f64> = ts.iter().map(|&t| eval_exponential(0.05, 10.0, t)).collect();
        let max = xs.iter().fold(f64::MIN, |m, &x| m.max(x));
        let fit = fit_logistic(&ts, &xs, None, &NlsOptions::default()).unwrap();
        assert!(fit.near_degenerate);
        if fit.converged {
            assert!(fit.n >= 10.0 * max, "converged with N = {} vs max {max}", fit.n);
            assert_relative_eq!(fit.b, 0.05, max_relative = 0.05);
        }
    }

    #[test]
    fn low_capacity_init_is_rejected() {
        let ts = grid(10);
        let xs: Vec<f64> = ts.iter().map(|&t| eval_logistic(0.2, 5.0, 50.0, t)).collect();
        let err = fit_logistic(&ts, &xs, Some((0.2, 5.0, 20.0)), &NlsOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::InitOutOfRange { .. }));
    }

    #[test]
    fn explicit_init_recovers_the_generator_too() {
        let (b, x0, n) = (0.08, 2.0, 180.0);
        let ts = grid(70);
        let xs: Vec<f64> = ts.iter().map(|&t| eval_logistic(b, x0, n, t)).collect();
        let fit = fit_logistic(&ts, &xs, Some((0.05, 1.0, 200.0)), &NlsOptions::default()).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.n, n, max_relative = 1e-6);
    }
}
