//! Factor shares and their behavior along fitted flows.
//!
//! The wage share s_L = (∂Y/∂L)·L/Y and capital share s_K = (∂Y/∂K)·K/Y are
//! computed by three independent routes that must agree wherever they are all
//! defined:
//!
//! 1. analytically, from a closed-form surface (Cobb–Douglas shares are just
//!    the exponents; the bounded logistic surface has its own formula);
//! 2. from the fundamental invariants of the prolonged scaling generator on
//!    the jet space (K, L, Y, Y_K, Y_L);
//! 3. by central-difference differentiation of any production surface.
//!
//! Along exponential flows with a Cobb–Douglas surface the share is constant
//! — that constancy *is* the empirical regularity about stable wage shares —
//! while along logistic flows the trajectory formula below makes the share
//! drift, which is the quantitative way this toolkit refutes that constancy
//! for saturating growth.

use crate::error::{Error, Result};
use crate::growth::{LogisticFit, TripleFit};
use crate::invariants::LogisticProduction;

/// Default relative step for the numeric share route.
pub const DEFAULT_SHARE_STEP: f64 = 1e-6;

/// Scaling generator a·K∂_K + b·L∂_L + c·Y∂_Y acting on the surface space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// A point of the first-order jet space: inputs, output, and the two
/// first partials. All of K, L, Y must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint {
    pub k: f64,
    pub l: f64,
    pub y: f64,
    pub y_k: f64,
    pub y_l: f64,
}

impl JetPoint {
    pub fn new(k: f64, l: f64, y: f64, y_k: f64, y_l: f64) -> Result<Self> {
        for (what, v) in [("K", k), ("L", l), ("Y", y)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositiveInput { what, value: v });
            }
        }
        Ok(JetPoint { k, l, y, y_k, y_l })
    }
}

/// Which route produced a share value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareMethod {
    Analytic,
    Invariants,
    NumericDerivative,
}

impl ShareMethod {
    pub fn name(self) -> &'static str {
        match self {
            ShareMethod::Analytic => "analytic",
            ShareMethod::Invariants => "invariants",
            ShareMethod::NumericDerivative => "numeric-derivative",
        }
    }
}

/// Wage and capital share at a point, tagged with how they were computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareReport {
    pub s_l: f64,
    pub s_k: f64,
    pub method: ShareMethod,
}

/// Constancy statistics of a share sampled along a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstancySummary {
    pub mean: f64,
    pub max_abs_deviation: f64,
    /// (max − min) / |mean|.
    pub relative_range: f64,
}

/// First prolongation of the generator to the jet coordinates:
/// (a·K, b·L, c·Y, (c−a)·Y_K, (c−b)·Y_L).
///
/// The derivative coefficients follow from how a first partial transforms
/// under independent scalings of input and output.
pub fn prolonged_coefficients(g: &Generator, p: &JetPoint) -> [f64; 5] {
    [
        g.a * p.k,
        g.b * p.l,
        g.c * p.y,
        (g.c - g.a) * p.y_k,
        (g.c - g.b) * p.y_l,
    ]
}

/// Fundamental invariants of the prolonged generator, K-normalized:
///
/// ```text
/// I₁ = L·K^(−b/a)   I₂ = Y·K^(−c/a)   I₃ = Y_K·K^((a−c)/a)   I₄ = Y_L·K^((b−c)/a)
/// ```
///
/// Every jet function annihilated by the prolonged generator is a function of
/// these four. Requires a ≠ 0 (K must actually scale to normalize by it).
pub fn fundamental_invariants(g: &Generator, p: &JetPoint) -> Result<[f64; 4]> {
    if g.a == 0.0 {
        return Err(Error::ZeroScaleCoefficient);
    }
    let (a, b, c) = (g.a, g.b, g.c);
    Ok([
        p.l * p.k.powf(-b / a),
        p.y * p.k.powf(-c / a),
        p.y_k * p.k.powf((a - c) / a),
        p.y_l * p.k.powf((b - c) / a),
    ])
}

/// Shares written purely in the invariants: s_L = I₁·I₄/I₂, s_K = I₃/I₂.
/// Both collapse to the usual (∂Y/∂·)·(·/Y) when expanded.
pub fn shares_from_invariants(inv: &[f64; 4]) -> Result<ShareReport> {
    if inv[1] == 0.0 {
        return Err(Error::ZeroDenominator { what: "I2" });
    }
    Ok(ShareReport {
        s_l: inv[0] * inv[3] / inv[1],
        s_k: inv[2] / inv[1],
        method: ShareMethod::Invariants,
    })
}

/// Shares of an arbitrary surface `f(L, K)` by central differences with a
/// relative step `h` (see [`DEFAULT_SHARE_STEP`]).
pub fn numeric_wage_share(
    f: &dyn Fn(f64, f64) -> f64,
    l: f64,
    k: f64,
    h: f64,
) -> Result<ShareReport> {
    for (what, v) in [("L", l), ("K", k)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositiveInput { what, value: v });
        }
    }
    let y = f(l, k);
    if !y.is_finite() || y == 0.0 {
        return Err(Error::NonFiniteValue {
            what: format!("f({l}, {k}) = {y}"),
        });
    }
    let dl = h * l;
    let dk = h * k;
    let y_l = (f(l + dl, k) - f(l - dl, k)) / (2.0 * dl);
    let y_k = (f(l, k + dk) - f(l, k - dk)) / (2.0 * dk);
    if !(y_l.is_finite() && y_k.is_finite()) {
        return Err(Error::NonFiniteValue {
            what: "central-difference derivative".into(),
        });
    }
    Ok(ShareReport {
        s_l: y_l * l / y,
        s_k: y_k * k / y,
        method: ShareMethod::NumericDerivative,
    })
}

/// Closed-form wage share of the bounded logistic surface:
///
/// ```text
/// s_L = α · N_L/(N_L − L) · C·W / (C·W + L^α·K^β),   W = |N_L−L|^α·|N_K−K|^β
/// ```
///
/// Undefined exactly at capacity L = N_L.
pub fn analytic_logistic_share(lp: &LogisticProduction, l: f64, k: f64) -> Result<f64> {
    if l == lp.n_l {
        return Err(Error::AtCapacity { value: l });
    }
    let w = (lp.n_l - l).abs().powf(lp.alpha) * (lp.n_k - k).abs().powf(lp.beta);
    let g = l.powf(lp.alpha) * k.powf(lp.beta);
    Ok(lp.alpha * (lp.n_l / (lp.n_l - l)) * (lp.c * w) / (lp.c * w + g))
}

/// Wage share along fitted logistic flows, as an explicit function of t:
///
/// ```text
/// s_L(t) = (b₃/b₁) · (N_Y−Y₀)·e^{(b₁−b₃)t}/(N_L−L₀)
///                  · (L₀+(N_L−L₀)e^{−b₁t}) / (Y₀+(N_Y−Y₀)e^{−b₃t})
/// ```
///
/// where (b₁, L₀, N_L) is the labor fit and (b₃, Y₀, N_Y) the production
/// fit. This is [`analytic_logistic_share`] composed with the flows for the
/// surface of [`trajectory_surface`]; as all capacities grow without bound it
/// flattens to the constant b₃/b₁ — the exponential regime's constant share.
///
/// Requires converged member fits with 0 < x⁰ < N and b₁ ≠ 0.
pub fn logistic_share_trajectory(fits: &TripleFit<LogisticFit>, ts: &[f64]) -> Result<Vec<f64>> {
    let (lab, prod) = trajectory_members(fits)?;
    let (b1, l0, n_l) = (lab.b, lab.x0, lab.n);
    let (b3, y0, n_y) = (prod.b, prod.x0, prod.n);
    Ok(ts
        .iter()
        .map(|&t| {
            (b3 / b1) * ((n_y - y0) * ((b1 - b3) * t).exp() / (n_l - l0))
                * ((l0 + (n_l - l0) * (-b1 * t).exp()) / (y0 + (n_y - y0) * (-b3 * t).exp()))
        })
        .collect())
}

/// The member of the invariant family whose surface share along the fitted
/// flows reproduces [`logistic_share_trajectory`] exactly: exponents
/// a = (b₃/b₁, 0, −1), which is orthogonal to (b₁, b₂, b₃) identically, with
/// the level constant C = (N_Y−Y₀)/Y₀ · (L₀/(N_L−L₀))^(b₃/b₁).
///
/// Other members of the orthogonality line pass through the same trajectory
/// but tilt the surface, so their partial-derivative shares differ from the
/// along-trajectory share; this one is the canonical comparison surface.
pub fn trajectory_surface(fits: &TripleFit<LogisticFit>) -> Result<LogisticProduction> {
    let (lab, prod) = trajectory_members(fits)?;
    let alpha = prod.b / lab.b;
    Ok(LogisticProduction {
        n_l: lab.n,
        n_k: fits.capital.n,
        n_y: prod.n,
        c: (prod.n - prod.x0) / prod.x0 * (lab.x0 / (lab.n - lab.x0)).powf(alpha),
        alpha,
        beta: 0.0,
    })
}

fn trajectory_members(fits: &TripleFit<LogisticFit>) -> Result<(LogisticFit, LogisticFit)> {
    for (name, f) in [("labor", &fits.labor), ("production", &fits.production)] {
        if !f.converged {
            return Err(Error::DegenerateFit {
                reason: format!("{name} fit did not converge"),
            });
        }
        if !(f.x0 > 0.0 && f.x0 < f.n) {
            return Err(Error::DegenerateFit {
                reason: format!("{name} fit violates 0 < x0 < N (x0 = {}, N = {})", f.x0, f.n),
            });
        }
    }
    if fits.labor.b == 0.0 {
        return Err(Error::DegenerateFit {
            reason: "labor growth rate is zero".into(),
        });
    }
    Ok((fits.labor, fits.production))
}

/// Sample the numeric wage share of `f` along flows L(t), K(t) and summarize
/// how constant it is.
pub fn share_constancy_report(
    f: &dyn Fn(f64, f64) -> f64,
    flow_l: &dyn Fn(f64) -> f64,
    flow_k: &dyn Fn(f64) -> f64,
    ts: &[f64],
    h: f64,
) -> Result<ConstancySummary> {
    if ts.is_empty() {
        return Err(Error::EmptySeries {
            what: "time grid".into(),
        });
    }
    let mut shares = Vec::with_capacity(ts.len());
    for &t in ts {
        let report = numeric_wage_share(f, flow_l(t), flow_k(t), h)?;
        shares.push(report.s_l);
    }
    summarize(&shares)
}

/// Mean / max deviation / relative range of an already-computed share series.
pub fn summarize(shares: &[f64]) -> Result<ConstancySummary> {
    if shares.is_empty() {
        return Err(Error::EmptySeries {
            what: "share series".into(),
        });
    }
    let mean = shares.iter().sum::<f64>() / shares.len() as f64;
    if mean == 0.0 {
        return Err(Error::ZeroDenominator { what: "mean share" });
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut dev = 0.0f64;
    for &s in shares {
        min = min.min(s);
        max = max.max(s);
        dev = dev.max((s - mean).abs());
    }
    Ok(ConstancySummary {
        mean,
        max_abs_deviation: dev,
        relative_range: (max - min) / mean.abs(),
    })
}
