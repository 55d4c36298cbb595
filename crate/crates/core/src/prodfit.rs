//! Calibrating production surfaces against a panel.
//!
//! Two surfaces are fitted, both with raw-scale residuals Y − Ŷ(L, K) so the
//! reported RSS is comparable across models:
//!
//! * Cobb–Douglas Y = A·L^α·K^β, with α and β free, tied by constant returns
//!   (β = 1 − α), or pinned outright. When only α is pinned, β is derived
//!   from the growth-rate orthogonality β = (b₃ − α·b₁)/b₂ with rates taken
//!   from the panel's exponential fits — the two-step estimator the growth
//!   modules exist to support.
//! * the bounded logistic surface, with capacities frozen at the per-series
//!   logistic-growth fits and (α, β, C) refined by Levenberg–Marquardt. C is
//!   optimized as ln C so the level constant can never cross zero mid-fit.
//!
//! Free fits are started from the obvious linearizations (log–log regression
//! for Cobb–Douglas; the logit-style transform of the bounded surface for the
//! logistic one), which is what keeps the refinement short and reliable.

use crate::error::{Error, Result};
use crate::growth::{self, LogisticFit, TripleFit};
use crate::invariants::{beta_given_alpha, eval_logistic_production, CobbDouglas, LogisticProduction};
use crate::lsq::{self, NlsOptions};
use crate::series::EconPanel;

/// Which Cobb–Douglas parameters are free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CdMode {
    /// Fit (A, α, β).
    Free,
    /// Fit (A, α) with β = 1 − α.
    Crs,
    /// Fit A only; β = (b₃ − α·b₁)/b₂ from the panel's exponential rates.
    AlphaPinned(f64),
    /// Fit A only with both exponents supplied.
    Fixed { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone)]
pub struct CdFit {
    pub model: CobbDouglas,
    /// Raw-scale residual sum of squares.
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LpfFit {
    pub model: LogisticProduction,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The per-series growth fits whose capacities the surface inherited.
    pub growth: TripleFit<LogisticFit>,
}

/// Fit Y = A·L^α·K^β to the panel in the requested mode.
pub fn fit_cobb_douglas(panel: &EconPanel, mode: CdMode, opts: &NlsOptions) -> Result<CdFit> {
    match mode {
        CdMode::Fixed { alpha, beta } => scale_only_fit(panel, alpha, beta),
        CdMode::AlphaPinned(alpha) => {
            let rates = growth::fit_exponential_panel(panel)?.rates();
            let beta = beta_given_alpha(rates, alpha)?;
            scale_only_fit(panel, alpha, beta)
        }
        CdMode::Free => {
            // ln Y = ln A + α ln L + β ln K is exact on noise-free data and a
            // good start otherwise.
            let design: Vec<Vec<f64>> = panel
                .labor
                .iter()
                .zip(&panel.capital)
                .map(|(&l, &k)| vec![1.0, l.ln(), k.ln()])
                .collect();
            let logs: Vec<f64> = panel.production.iter().map(|y| y.ln()).collect();
            let coef = lsq::least_squares(&design, &logs).ok_or(Error::DegenerateDesign)?;
            let start = [coef[0].exp(), coef[1], coef[2]];

            let residual = |p: &[f64]| -> Vec<f64> { cd_residuals(panel, p[0], p[1], p[2]) };
            let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
                panel
                    .labor
                    .iter()
                    .zip(&panel.capital)
                    .map(|(&l, &k)| {
                        let basis = l.powf(p[1]) * k.powf(p[2]);
                        vec![-basis, -p[0] * basis * l.ln(), -p[0] * basis * k.ln()]
                    })
                    .collect()
            };
            let res = lsq::nls_fit(&residual, Some(&jacobian), &start, opts)?;
            Ok(CdFit {
                model: CobbDouglas {
                    scale: res.parameters[0],
                    alpha: res.parameters[1],
                    beta: res.parameters[2],
                },
                rss: res.rss,
                converged: res.converged,
                iterations: res.iterations,
            })
        }
        CdMode::Crs => {
            // ln(Y/K) = ln A + α ln(L/K) linearizes the constrained surface.
            let ratios: Vec<f64> = panel
                .labor
                .iter()
                .zip(&panel.capital)
                .map(|(&l, &k)| (l / k).ln())
                .collect();
            let outputs: Vec<f64> = panel
                .production
                .iter()
                .zip(&panel.capital)
                .map(|(&y, &k)| (y / k).ln())
                .collect();
            let line = lsq::linear_fit(&ratios, &outputs)?;
            let start = [line.intercept.exp(), line.slope];

            let residual =
                |p: &[f64]| -> Vec<f64> { cd_residuals(panel, p[0], p[1], 1.0 - p[1]) };
            let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
                panel
                    .labor
                    .iter()
                    .zip(&panel.capital)
                    .map(|(&l, &k)| {
                        let basis = l.powf(p[1]) * k.powf(1.0 - p[1]);
                        vec![-basis, -p[0] * basis * (l / k).ln()]
                    })
                    .collect()
            };
            let res = lsq::nls_fit(&residual, Some(&jacobian), &start, opts)?;
            Ok(CdFit {
                model: CobbDouglas {
                    scale: res.parameters[0],
                    alpha: res.parameters[1],
                    beta: 1.0 - res.parameters[1],
                },
                rss: res.rss,
                converged: res.converged,
                iterations: res.iterations,
            })
        }
    }
}

/// With both exponents fixed the least-squares scale is closed form:
/// A = Σ Y·g / Σ g² over the basis g = L^α·K^β.
fn scale_only_fit(panel: &EconPanel, alpha: f64, beta: f64) -> Result<CdFit> {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..panel.len() {
        let g = panel.labor[i].powf(alpha) * panel.capital[i].powf(beta);
        num += panel.production[i] * g;
        den += g * g;
    }
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateDesign);
    }
    let scale = num / den;
    let rss = cd_residuals(panel, scale, alpha, beta)
        .iter()
        .map(|r| r * r)
        .sum();
    Ok(CdFit {
        model: CobbDouglas { scale, alpha, beta },
        rss,
        converged: true,
        iterations: 0,
    })
}

fn cd_residuals(panel: &EconPanel, scale: f64, alpha: f64, beta: f64) -> Vec<f64> {
    (0..panel.len())
        .map(|i| {
            panel.production[i] - scale * (panel.labor[i].powf(alpha) * panel.capital[i].powf(beta))
        })
        .collect()
}

/// Fit the bounded logistic surface: per-series logistic growth fixes the
/// three capacities, then (α, β, ln C) are refined against raw production.
pub fn fit_logistic_production(panel: &EconPanel, opts: &NlsOptions) -> Result<LpfFit> {
    let growth = growth::fit_logistic_panel(panel, opts)?;
    let (n_l, n_k, n_y) = (growth.labor.n, growth.capital.n, growth.production.n);

    // Linearization for the start: ln((N_Y−Y)/Y) = ln C + α·ln((N_L−L)/L)
    // + β·ln((N_K−K)/K), usable on rows strictly inside all capacities.
    let mut design = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..panel.len() {
        let (l, k, y) = (panel.labor[i], panel.capital[i], panel.production[i]);
        if l < n_l && k < n_k && y < n_y {
            design.push(vec![1.0, ((n_l - l) / l).ln(), ((n_k - k) / k).ln()]);
            rhs.push(((n_y - y) / y).ln());
        }
    }
    let start = if design.len() >= 3 {
        match lsq::least_squares(&design, &rhs) {
            Some(coef) => [coef[1], coef[2], coef[0]],
            None => [0.5, 0.25, 0.0],
        }
    } else {
        [0.5, 0.25, 0.0]
    };

    let surface = |p: &[f64]| LogisticProduction {
        n_l,
        n_k,
        n_y,
        c: p[2].exp(),
        alpha: p[0],
        beta: p[1],
    };
    let residual = |p: &[f64]| -> Vec<f64> {
        let lp = surface(p);
        (0..panel.len())
            .map(|i| panel.production[i] - eval_logistic_production(&lp, panel.labor[i], panel.capital[i]))
            .collect()
    };
    let res = lsq::nls_fit(&residual, None, &start, opts)?;
    let model = surface(&res.parameters);
    Ok(LpfFit {
        model,
        rss: res.rss,
        converged: res.converged,
        iterations: res.iterations,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::eval_logistic;
    use crate::invariants::eval_cobb_douglas;
    use approx::assert_relative_eq;

    /// Panel whose production sits exactly on a known Cobb–Douglas surface
    /// over exponentially growing inputs.
    fn cd_panel(scale: f64, alpha: f64, beta: f64) -> EconPanel {
        let cd = CobbDouglas { scale, alpha, beta };
        let years: Vec<i32> = (1899..1923).collect();
        let labor: Vec<f64> = (0..24).map(|i| 100.0 * (0.0255 * i as f64).exp()).collect();
        let capital: Vec<f64> = (0..24).map(|i| 100.0 * (0.0647 * i as f64).exp()).collect();
        let production: Vec<f64> = labor
            .iter()
            .zip(&capital)
            .map(|(&l, &k)| eval_cobb_douglas(&cd, l, k).unwrap())
            .collect();
        EconPanel::new(years, labor, capital, production, None).unwrap()
    }

    /// Like [`cd_panel`], but the inputs wobble independently around their
    /// trends. On pure exponential flows ln L and ln K are collinear in time
    /// and the unconstrained fit is not identified; off-flow variation is
    /// what pins all three parameters.
    fn cd_panel_off_flow(scale: f64, alpha: f64, beta: f64) -> EconPanel {
        let cd = CobbDouglas { scale, alpha, beta };
        let years: Vec<i32> = (1899..1923).collect();
        let labor: Vec<f64> = (0..24)
            .map(|i| {
                let t = i as f64;
                100.0 * (0.0255 * t).exp() * (1.0 + 0.25 * (0.9 * t).sin())
            })
            .collect();
        let capital: Vec<f64> = (0..24)
            .map(|i| {
                let t = i as f64;
                100.0 * (0.0647 * t).exp() * (1.0 + 0.2 * (1.7 * t).cos())
            })
            .collect();
        let production: Vec<f64> = labor
            .iter()
            .zip(&capital)
            .map(|(&l, &k)| eval_cobb_douglas(&cd, l, k).unwrap())
            .collect();
        EconPanel::new(years, labor, capital, production, None).unwrap()
    }

    #[test]
    fn free_fit_recovers_a_known_surface() {
        let panel = cd_panel_off_flow(0.95, 0.72, 0.31);
        let fit = fit_cobb_douglas(&panel, CdMode::Free, &NlsOptions::default()).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.model.scale, 0.95, max_relative = 1e-6);
        assert_relative_eq!(fit.model.alpha, 0.72, max_relative = 1e-6);
        assert_relative_eq!(fit.model.beta, 0.31, max_relative = 1e-6);
        assert!(fit.rss < 1e-10);
    }

    #[test]
    fn crs_fit_recovers_a_constrained_surface() {
        let panel = cd_panel(1.01, 0.7341175376, 1.0 - 0.7341175376);
        let fit = fit_cobb_douglas(&panel, CdMode::Crs, &NlsOptions::default()).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.model.alpha, 0.7341175376, max_relative = 1e-8);
        assert_relative_eq!(fit.model.alpha + fit.model.beta, 1.0, epsilon = 1e-12);
        assert!(fit.rss < 1e-12);
    }

    #[test]
    fn fixed_exponent_scale_is_the_least_squares_minimum() {
        let panel = cd_panel(0.47, 1.0, 0.1611);
        let fit = fit_cobb_douglas(
            &panel,
            CdMode::Fixed { alpha: 1.0, beta: 0.1611 },
            &NlsOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(fit.model.scale, 0.47, max_relative = 1e-10);
        // Nudging A in either direction must not lower the RSS.
        for bump in [0.999, 1.001] {
            let rss_bumped: f64 = cd_residuals(&panel, fit.model.scale * bump, 1.0, 0.1611)
                .iter()
                .map(|r| r * r)
                .sum();
            assert!(rss_bumped >= fit.rss);
        }
    }

    #[test]
    fn alpha_pinned_derives_beta_from_the_rates() {
        // Inputs grow at known exponential rates; production on a CD surface
        // then grows at α·b₁ + β·b₂, so pinning α must reproduce β.
        let (alpha, beta) = (1.0, 0.16);
        let panel = cd_panel(0.5, alpha, beta);
        let fit = fit_cobb_douglas(&panel, CdMode::AlphaPinned(alpha), &NlsOptions::default())
            .unwrap();
        assert_relative_eq!(fit.model.beta, beta, max_relative = 1e-6);
        assert_relative_eq!(fit.model.scale, 0.5, max_relative = 1e-4);
    }

    #[test]
    fn logistic_surface_fit_lands_on_the_orthogonality_line() {
        // Three exactly-logistic series: every surface through the
        // trajectory satisfies α·b₁ + β·b₂ = b₃, so wherever in that flat
        // valley the fit stops, the residuals must vanish and the exponents
        // must satisfy the line constraint.
        let (b, x0, n) = ([0.078, 0.0779, 0.046], [2.09, 1.58, 11.31], [176.0, 230.0, 211.0]);
        let years: Vec<i32> = (1947..2017).collect();
        let mk = |j: usize| -> Vec<f64> {
            (0..70).map(|i| eval_logistic(b[j], x0[j], n[j], i as f64)).collect()
        };
        let panel = EconPanel::new(years, mk(0), mk(1), mk(2), None).unwrap();
        let fit = fit_logistic_production(&panel, &NlsOptions::default()).unwrap();
        assert!(fit.rss < 1e-6, "rss = {}", fit.rss);
        let m = &fit.model;
        assert_relative_eq!(m.alpha * b[0] + m.beta * b[1], b[2], max_relative = 1e-3);
        // Capacities inherited from the growth fits, which see exact data.
        assert_relative_eq!(m.n_l, n[0], max_relative = 1e-5);
        assert_relative_eq!(m.n_y, n[2], max_relative = 1e-5);
        assert!(m.c > 0.0);
    }
}
