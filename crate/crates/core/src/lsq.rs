//! Linear and nonlinear least squares.
//!
//! Two fitters cover everything the growth and production-surface code needs:
//!
//! * [`linear_fit`] — closed-form straight line through `(t, y)` pairs, done in
//!   centered form (`t - mean(t)`) so the normal equations stay well
//!   conditioned even for year-like abscissae.
//! * [`nls_fit`] — a small Levenberg–Marquardt loop: multiplicative damping
//!   (×10 on a rejected trial, ÷10 on an accepted one), Marquardt scaling of
//!   the damping term by `diag(JᵀJ)`, and a Cholesky solve of the damped
//!   normal equations. Jacobians come from the caller or from
//!   [`numeric_jacobian`] central differences.
//!
//! The residual sum of squares never increases across accepted steps; a trial
//! that evaluates to NaN/inf is treated as a rejection and damped away rather
//! than aborting the whole fit.

use crate::error::{Error, Result};

/// Damping is considered "maximal" here; pushing past it means the problem is
/// numerically hopeless (singular) or the model keeps producing non-finite
/// values no matter how small the step.
const MAX_DAMPING: f64 = 1e16;
const MIN_DAMPING: f64 = 1e-15;

/// Central-difference step used when no analytic Jacobian is supplied.
pub const DEFAULT_JACOBIAN_STEP: f64 = 1e-6;

/// Slope/intercept of a least-squares line plus its residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rss: f64,
}

/// Knobs for [`nls_fit`]. `Default` matches what the CLI uses.
#[derive(Debug, Clone, Copy)]
pub struct NlsOptions {
    /// Total trial budget; every attempted step (accepted or rejected) counts.
    pub max_iterations: usize,
    /// Stop when the max-norm of the gradient `Jᵀr` falls below this.
    pub gradient_tolerance: f64,
    /// Stop when the step is this small relative to the parameter vector.
    pub step_tolerance: f64,
    /// Starting damping factor λ.
    pub initial_damping: f64,
}

impl Default for NlsOptions {
    fn default() -> Self {
        NlsOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient max-norm under `gradient_tolerance`: a stationary point.
    GradientSmall,
    /// Step shrank below `step_tolerance` (or damping maxed out with no
    /// descent left): no meaningful progress possible.
    StepSmall,
    /// Budget exhausted without meeting either tolerance.
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct NlsResult {
    pub parameters: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

/// Least-squares line through `(ts, ys)`.
///
/// Centered formulation: slope = Σ(t−t̄)(y−ȳ) / Σ(t−t̄)², intercept = ȳ − slope·t̄.
/// Errors with [`Error::DegenerateDesign`] when the abscissae carry no
/// variance (that includes fewer than two points).
pub fn linear_fit(ts: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if ts.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: ts.len(),
            right: ys.len(),
        });
    }
    let n = ts.len();
    if n < 2 {
        return Err(Error::DegenerateDesign);
    }
    let nf = n as f64;
    let t_bar = ts.iter().sum::<f64>() / nf;
    let y_bar = ys.iter().sum::<f64>() / nf;
    let mut s_tt = 0.0;
    let mut s_ty = 0.0;
    for i in 0..n {
        let dt = ts[i] - t_bar;
        s_tt += dt * dt;
        s_ty += dt * (ys[i] - y_bar);
    }
    if s_tt == 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let slope = s_ty / s_tt;
    let intercept = y_bar - slope * t_bar;
    let rss = ts
        .iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let r = y - (intercept + slope * t);
            r * r
        })
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        rss,
    })
}

/// Central-difference Jacobian of `f` at `at`.
///
/// Row `i`, column `j` holds ∂f_i/∂p_j. The step for coordinate `j` is
/// `h * max(1, |at[j]|)`, so tiny and huge parameters are both treated sanely.
pub fn numeric_jacobian(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    at: &[f64],
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = at.len();
    let m = f(at).len();
    let mut jac = vec![vec![0.0; n]; m];
    let mut p = at.to_vec();
    for j in 0..n {
        let step = h * at[j].abs().max(1.0);
        p[j] = at[j] + step;
        let fp = f(&p);
        p[j] = at[j] - step;
        let fm = f(&p);
        p[j] = at[j];
        if fp.len() != m || fm.len() != m {
            return Err(Error::LengthMismatch {
                left: fp.len(),
                right: m,
            });
        }
        for i in 0..m {
            let d = (fp[i] - fm[i]) / (2.0 * step);
            if !d.is_finite() {
                return Err(Error::NonFiniteValue {
                    what: format!("jacobian entry ({i}, {j})"),
                });
            }
            jac[i][j] = d;
        }
    }
    Ok(jac)
}

/// Levenberg–Marquardt minimization of `Σ residual(p)_i²`.
///
/// `jacobian`, when given, must return the m×n matrix ∂r_i/∂p_j at a point;
/// otherwise central differences are used. Iterations count *trials*: a
/// rejected step (including one whose residuals come back non-finite) burns an
/// iteration and multiplies λ by 10, an accepted one divides it by 10.
///
/// Errors:
/// * [`Error::NonFiniteResidual`] — NaN/inf at the starting point, or trial
///   points stay non-finite until damping maxes out.
/// * [`Error::SingularNormalMatrix`] — the damped normal matrix could not be
///   factored even at maximal damping.
pub fn nls_fit(
    residual: &dyn Fn(&[f64]) -> Vec<f64>,
    jacobian: Option<&dyn Fn(&[f64]) -> Vec<Vec<f64>>>,
    init: &[f64],
    opts: &NlsOptions,
) -> Result<NlsResult> {
    let jac_at = |p: &[f64]| -> Result<Vec<Vec<f64>>> {
        match jacobian {
            Some(j) => Ok(j(p)),
            None => numeric_jacobian(residual, p, DEFAULT_JACOBIAN_STEP),
        }
    };

    let mut p = init.to_vec();
    let mut r = residual(&p);
    if !all_finite(&r) {
        return Err(Error::NonFiniteResidual {
            context: "model is non-finite at the starting point".into(),
        });
    }
    let mut rss = sum_sq(&r);
    let mut jac = jac_at(&p)?;
    let mut g = grad(&jac, &r);
    let mut lambda = opts.initial_damping;

    let mut iterations = 0usize;
    while iterations < opts.max_iterations {
        if inf_norm(&g) <= opts.gradient_tolerance {
            return Ok(NlsResult {
                parameters: p,
                rss,
                iterations,
                converged: true,
                termination: Termination::GradientSmall,
            });
        }
        iterations += 1;

        let a = normal_matrix(&jac);
        let step = solve_damped(&a, &g, lambda);
        let Some(step) = step else {
            // Factorization failed; crank up damping and retry.
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                return Err(Error::SingularNormalMatrix);
            }
            continue;
        };

        let trial: Vec<f64> = p.iter().zip(&step).map(|(pi, si)| pi + si).collect();
        let tr = residual(&trial);
        if !all_finite(&tr) {
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                return Err(Error::NonFiniteResidual {
                    context: "trial points stayed non-finite at maximal damping".into(),
                });
            }
            continue;
        }
        let trss = sum_sq(&tr);
        if trss < rss {
            let step_norm = norm(&step);
            let p_norm = norm(&p);
            p = trial;
            r = tr;
            rss = trss;
            jac = jac_at(&p)?;
            g = grad(&jac, &r);
            lambda = (lambda * 0.1).max(MIN_DAMPING);
            if step_norm <= opts.step_tolerance * (p_norm + opts.step_tolerance) {
                return Ok(NlsResult {
                    parameters: p,
                    rss,
                    iterations,
                    converged: true,
                    termination: Termination::StepSmall,
                });
            }
        } else {
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                // No descent direction left at any damping: we are at a
                // numerical minimum, so report it as a vanished step.
                return Ok(NlsResult {
                    parameters: p,
                    rss,
                    iterations,
                    converged: true,
                    termination: Termination::StepSmall,
                });
            }
        }
    }

    Ok(NlsResult {
        parameters: p,
        rss,
        iterations,
        converged: false,
        termination: Termination::MaxIterations,
    })
}

/// Ordinary least squares for a small dense design matrix (rows of
/// regressors), solved through the same normal-equations Cholesky as the LM
/// loop. `None` when the design is rank deficient. Used for fit initializers.
pub(crate) fn least_squares(design: &[Vec<f64>], ys: &[f64]) -> Option<Vec<f64>> {
    let a = normal_matrix(design);
    let mut g = grad(design, ys);
    for v in &mut g {
        *v = -*v;
    }
    solve_damped(&a, &g, 0.0)
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn norm(v: &[f64]) -> f64 {
    sum_sq(v).sqrt()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// g = Jᵀ r.
fn grad(jac: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    let n = jac.first().map_or(0, Vec::len);
    let mut g = vec![0.0; n];
    for (row, ri) in jac.iter().zip(r) {
        for (gj, jij) in g.iter_mut().zip(row) {
            *gj += jij * ri;
        }
    }
    g
}

/// A = JᵀJ (symmetric n×n).
fn normal_matrix(jac: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = jac.first().map_or(0, Vec::len);
    let mut a = vec![vec![0.0; n]; n];
    for row in jac {
        for j in 0..n {
            for k in j..n {
                a[j][k] += row[j] * row[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            a[j][k] = a[k][j];
        }
    }
    a
}

/// Solve (A + λ·diag(A)) δ = −g by Cholesky; `None` when the factorization
/// breaks down. Zero diagonal entries get a unit floor so directions the
/// residual ignores cannot poison the factorization.
fn solve_damped(a: &[Vec<f64>], g: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let n = g.len();
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in 0..n {
            m[j][k] = a[j][k];
        }
        let d = if a[j][j] > 0.0 { a[j][j] } else { 1.0 };
        m[j][j] += lambda * d;
    }
    // In-place Cholesky, lower triangle.
    for j in 0..n {
        for k in 0..=j {
            let mut s = m[j][k];
            for i in 0..k {
                s -= m[j][i] * m[k][i];
            }
            if j == k {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                m[j][j] = s.sqrt();
            } else {
                m[j][k] = s / m[k][k];
            }
        }
    }
    // Forward/back substitution for L Lᵀ δ = −g.
    let mut x = vec![0.0; n];
    for j in 0..n {
        let mut s = -g[j];
        for i in 0..j {
            s -= m[j][i] * x[i];
        }
        x[j] = s / m[j][j];
    }
    for j in (0..n).rev() {
        let mut s = x[j];
        for i in j + 1..n {
            s -= m[i][j] * x[i];
        }
        x[j] = s / m[j][j];
    }
    if all_finite(&x) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_through_hat_points() {
        // Hand-solved normal equations: t=(0,1,2), y=(0,1,0)
        // slope 0, intercept 1/3, rss 2/3.
        let fit = linear_fit(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(fit.slope, 0.0, epsilon = 1e-15);
        assert_relative_eq!(fit.intercept, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(fit.rss, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_line_has_zero_rss() {
        let ts: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * t - 7.0).collect();
        let fit = linear_fit(&ts, &ys).unwrap();
        assert_relative_eq!(fit.slope, 2.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, -7.0, epsilon = 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn constant_abscissae_are_degenerate() {
        let err = linear_fit(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert_eq!(err, Error::DegenerateDesign);
    }

    #[test]
    fn jacobian_of_simple_quadratics() {
        // f(p) = (p0², p0·p1) at (2, 3) → rows (4, 0) and (3, 2).
        let f = |p: &[f64]| vec![p[0] * p[0], p[0] * p[1]];
        let jac = numeric_jacobian(&f, &[2.0, 3.0], 1e-6).unwrap();
        assert_relative_eq!(jac[0][0], 4.0, epsilon = 1e-6);
        assert_relative_eq!(jac[0][1], 0.0, epsilon = 1e-6);
        assert_relative_eq!(jac[1][0], 3.0, epsilon = 1e-6);
        assert_relative_eq!(jac[1][1], 2.0, epsilon = 1e-6);
    }

    #[test]
    fn trivial_linear_residuals() {
        let f = |p: &[f64]| vec![p[0] - 3.0, p[1] + 1.0];
        let res = nls_fit(&f, None, &[0.0, 0.0], &NlsOptions::default()).unwrap();
        assert!(res.converged);
        assert_relative_eq!(res.parameters[0], 3.0, epsilon = 1e-8);
        assert_relative_eq!(res.parameters[1], -1.0, epsilon = 1e-8);
        assert!(res.rss < 1e-16);
    }

    #[test]
    fn rosenbrock_valley() {
        // Classic curved valley: residuals (1−p0, 10(p1−p0²)) from (−1.2, 1).
        let f = |p: &[f64]| vec![1.0 - p[0], 10.0 * (p[1] - p[0] * p[0])];
        let jac = |p: &[f64]| vec![vec![-1.0, 0.0], vec![-20.0 * p[0], 10.0]];
        let res = nls_fit(&f, Some(&jac), &[-1.2, 1.0], &NlsOptions::default()).unwrap();
        assert!(res.converged, "termination {:?}", res.termination);
        assert_relative_eq!(res.parameters[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(res.parameters[1], 1.0, epsilon = 1e-6);
        assert!(res.iterations <= 200);
    }

    #[test]
    fn linear_problem_matches_closed_form_in_two_iterations() {
        // Same problem posed both ways; with no meaningful damping the first
        // trial is the Gauss–Newton step, which is exact for a line.
        let ts: Vec<f64> = (0..24).map(f64::from).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 0.3 * t + 11.0).collect();
        let closed = linear_fit(&ts, &ys).unwrap();
        let f = {
            let ts = ts.clone();
            let ys = ys.clone();
            move |p: &[f64]| -> Vec<f64> {
                ts.iter()
                    .zip(&ys)
                    .map(|(&t, &y)| y - (p[0] + p[1] * t))
                    .collect()
            }
        };
        let opts = NlsOptions {
            initial_damping: 1e-12,
            ..NlsOptions::default()
        };
        let res = nls_fit(&f, None, &[0.0, 0.0], &opts).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 2, "took {} iterations", res.iterations);
        assert_relative_eq!(res.parameters[0], closed.intercept, epsilon = 1e-10);
        assert_relative_eq!(res.parameters[1], closed.slope, epsilon = 1e-10);
    }

    #[test]
    fn numeric_and_analytic_jacobians_agree_on_exponential_fit() {
        let ts: Vec<f64> = (0..24).map(f64::from).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 106.7 * (0.0255 * t).exp()).collect();
        let resid = {
            let ts = ts.clone();
            let ys = ys.clone();
            move |p: &[f64]| -> Vec<f64> {
                ts.iter()
                    .zip(&ys)
                    .map(|(&t, &y)| y - p[1] * (p[0] * t).exp())
                    .collect()
            }
        };
        let jac = {
            let ts = ts.clone();
            move |p: &[f64]| -> Vec<Vec<f64>> {
                ts.iter()
                    .map(|&t| {
                        let e = (p[0] * t).exp();
                        vec![-p[1] * t * e, -e]
                    })
                    .collect()
            }
        };
        let init = [0.01, 80.0];
        let with_analytic = nls_fit(&resid, Some(&jac), &init, &NlsOptions::default()).unwrap();
        let with_numeric = nls_fit(&resid, None, &init, &NlsOptions::default()).unwrap();
        assert!(with_analytic.converged && with_numeric.converged);
        for (a, b) in with_analytic.parameters.iter().zip(&with_numeric.parameters) {
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
        // And both recover the generator to high accuracy.
        assert_relative_eq!(with_analytic.parameters[0], 0.0255, max_relative = 1e-8);
        assert_relative_eq!(with_analytic.parameters[1], 106.7, max_relative = 1e-8);
    }

    #[test]
    fn non_finite_start_is_reported() {
        let f = |p: &[f64]| vec![p[0].ln()];
        let err = nls_fit(&f, None, &[-1.0], &NlsOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteResidual { .. }));
    }

    #[test]
    fn infinite_jacobian_is_singular_after_maximal_damping() {
        let f = |p: &[f64]| vec![p[0]];
        let jac = |_: &[f64]| vec![vec![f64::INFINITY]];
        let err = nls_fit(&f, Some(&jac), &[1.0], &NlsOptions::default()).unwrap_err();
        assert_eq!(err, Error::SingularNormalMatrix);
    }

    #[test]
    fn rss_never_increases_across_accepted_steps() {
        // Instrument the residual to record every accepted state by probing
        // the solver's monotonicity through rss at convergence.
        let ts: Vec<f64> = (0..30).map(f64::from).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|t| 5.0 * (0.1 * t).exp() + if *t as i64 % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        let resid = move |p: &[f64]| -> Vec<f64> {
            ts.iter()
                .zip(&ys)
                .map(|(&t, &y)| y - p[1] * (p[0] * t).exp())
                .collect()
        };
        let start_rss: f64 = resid(&[0.05, 3.0]).iter().map(|r| r * r).sum();
        let res = nls_fit(&resid, None, &[0.05, 3.0], &NlsOptions::default()).unwrap();
        assert!(res.rss <= start_rss);
        assert!(res.converged);
    }
}
