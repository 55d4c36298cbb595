//! Flow invariants and the production functions they induce.
//!
//! A one-parameter exponential flow x_i(t) = x_i⁰·e^{b_i·t} leaves the product
//! Π x_i^{a_i} invariant exactly when the exponent vector is orthogonal to
//! the rate vector, a·b = 0. Reading the invariant level as a production
//! surface and normalizing the output exponent to −1 recovers the
//! Cobb–Douglas form Y = A·L^α·K^β; the logistic flow admits the analogous
//! invariant built from x_i(N_i − x_i⁰) / (x_i⁰(N_i − x_i)), whose level sets
//! are the bounded production surface
//!
//! ```text
//! Y = N_Y·L^α·K^β / (C·|N_L − L|^α·|N_K − K|^β + L^α·K^β)
//! ```
//!
//! Under constant returns to scale (α + β = 1) the output elasticities are
//! pinned by the growth rates alone: α = (b₃ − b₂)/(b₁ − b₂). Whether that α
//! lands in (0, 1) depends only on whether b₃ sits between b₁ and b₂, which
//! is what [`classify_returns`] reports.

use crate::error::{Error, Result};

/// Exponent vector a = (a₁, …, a_n) of a candidate invariant Π x_i^{a_i}.
pub type ExponentVector = Vec<f64>;

/// Where the production-rate triple sits relative to the input rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnsClassification {
    /// b₃ strictly between b₁ and b₂: constant returns to scale is attainable
    /// with both elasticities positive.
    CrsAttainable,
    /// b₃ above both input rates: only increasing returns fit the data.
    IncreasingOnly,
    /// b₃ below both input rates: only decreasing returns fit the data.
    DecreasingOnly,
    /// Ties among the rates (within 1e-12 relative): the elasticity system
    /// is singular or sits exactly on a boundary.
    Degenerate,
}

impl ReturnsClassification {
    pub fn name(self) -> &'static str {
        match self {
            ReturnsClassification::CrsAttainable => "crs-attainable",
            ReturnsClassification::IncreasingOnly => "increasing-only",
            ReturnsClassification::DecreasingOnly => "decreasing-only",
            ReturnsClassification::Degenerate => "degenerate",
        }
    }
}

/// CRS elasticities derived from a rate triple, with their classification.
/// Outside the CRS-attainable regime the formulas still evaluate (the pair
/// is then not both positive); in the degenerate case they are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticitySolution {
    pub alpha: f64,
    pub beta: f64,
    pub classification: ReturnsClassification,
}

/// Y = scale·L^α·K^β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobbDouglas {
    pub scale: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Bounded production surface induced by the logistic flow; `c` is the
/// invariant-level constant in the denominator, not a capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticProduction {
    pub n_l: f64,
    pub n_k: f64,
    pub n_y: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// S-shaped single-output form Y = a·K^p·L^(1−p) / (1 + b·K^p·L^(−p));
/// at b = 0 it *is* Cobb–Douglas with exponent p on capital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SShaped {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

/// Relative tolerance for rate ties in classification.
const TIE_TOLERANCE: f64 = 1e-12;

/// a·b, the quantity whose vanishing makes Π x_i^{a_i} a flow invariant.
pub fn orthogonality_residual(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(ai, bi)| ai * bi).sum())
}

fn classify(b: [f64; 3]) -> ReturnsClassification {
    let [b1, b2, b3] = b;
    let scale = b1.abs().max(b2.abs()).max(b3.abs());
    let tol = TIE_TOLERANCE * scale;
    if (b1 - b2).abs() <= tol {
        return ReturnsClassification::Degenerate;
    }
    let lo = b1.min(b2);
    let hi = b1.max(b2);
    if b3 > lo + tol && b3 < hi - tol {
        ReturnsClassification::CrsAttainable
    } else if b3 > hi + tol {
        ReturnsClassification::IncreasingOnly
    } else if b3 < lo - tol {
        ReturnsClassification::DecreasingOnly
    } else {
        // b₃ ties one of the input rates.
        ReturnsClassification::Degenerate
    }
}

/// Solve α·b₁ + β·b₂ = b₃ together with α + β = 1:
/// α = (b₃ − b₂)/(b₁ − b₂), β = (b₃ − b₁)/(b₂ − b₁).
pub fn crs_elasticities(b: [f64; 3]) -> ElasticitySolution {
    let classification = classify(b);
    let [b1, b2, b3] = b;
    let (alpha, beta) = if classification == ReturnsClassification::Degenerate {
        (f64::NAN, f64::NAN)
    } else {
        ((b3 - b2) / (b1 - b2), (b3 - b1) / (b2 - b1))
    };
    ElasticitySolution {
        alpha,
        beta,
        classification,
    }
}

/// β required by the rate orthogonality once α is pinned:
/// β = (b₃ − α·b₁)/b₂.
pub fn beta_given_alpha(b: [f64; 3], alpha: f64) -> Result<f64> {
    if b[1] == 0.0 {
        return Err(Error::ZeroDivisor { what: "b2" });
    }
    Ok((b[2] - alpha * b[0]) / b[1])
}

/// Classify the rate triple; rates must be strictly positive and finite.
pub fn classify_returns(b: [f64; 3]) -> Result<ReturnsClassification> {
    for &bi in &b {
        if !(bi.is_finite() && bi > 0.0) {
            return Err(Error::NonPositiveRate { value: bi });
        }
    }
    Ok(classify(b))
}

/// Y = scale·L^α·K^β. Inputs must be strictly positive.
pub fn eval_cobb_douglas(cd: &CobbDouglas, l: f64, k: f64) -> Result<f64> {
    check_positive("L", l)?;
    check_positive("K", k)?;
    Ok(cd.scale * (l.powf(cd.alpha) * k.powf(cd.beta)))
}

/// Invariant of the exponential flow in the form Π (x_i⁰)^{a_i} · Π x_i^{a_i}.
///
/// Along x_i(t) = x_i⁰·e^{b_i·t} with a·b = 0 this stays at Π (x_i⁰)^{2a_i};
/// the factor of two relative to the naive product is part of the definition,
/// not a bug.
pub fn general_invariant_value(x0: &[f64], a: &[f64], x: &[f64]) -> Result<f64> {
    if x0.len() != a.len() {
        return Err(Error::LengthMismatch {
            left: x0.len(),
            right: a.len(),
        });
    }
    if x.len() != a.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: a.len(),
        });
    }
    let mut value = 1.0;
    for i in 0..a.len() {
        check_positive("x0", x0[i])?;
        check_positive("x", x[i])?;
        value *= x0[i].powf(a[i]) * x[i].powf(a[i]);
    }
    Ok(value)
}

/// Solve Π (x_i⁰)^{a_i} · x₁^{a₁}·x₂^{a₂}·x₃^{a₃} = c for the third variable:
///
/// x₃ = (c / Π (x_i⁰)^{a_i})^{1/a₃} · x₁^{−a₁/a₃} · x₂^{−a₂/a₃}
///
/// With a normalized to (α, β, −1) this *is* the Cobb–Douglas surface through
/// the flow's starting point.
pub fn solve_production_from_invariant(
    x0: &[f64; 3],
    a: &[f64; 3],
    c: f64,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    if a[2] == 0.0 {
        return Err(Error::ZeroExponent);
    }
    check_positive("invariant level", c)?;
    check_positive("x1", x1)?;
    check_positive("x2", x2)?;
    let mut base = c;
    for i in 0..3 {
        check_positive("x0", x0[i])?;
        base /= x0[i].powf(a[i]);
    }
    Ok(base.powf(1.0 / a[2]) * x1.powf(-a[0] / a[2]) * x2.powf(-a[1] / a[2]))
}

/// Invariant of the logistic flow:
/// Π [ x_i·(N_i − x_i⁰) / (x_i⁰·(N_i − x_i)) ]^{a_i}.
///
/// Along the flow each bracket equals e^{b_i·t}, so the product is constant
/// exactly when a·b = 0 (and equals 1 at t = 0). States must sit strictly
/// below their capacities.
pub fn logistic_invariant_value(x0: &[f64], n: &[f64], a: &[f64], x: &[f64]) -> Result<f64> {
    let len = a.len();
    for other in [x0.len(), n.len(), x.len()] {
        if other != len {
            return Err(Error::LengthMismatch {
                left: other,
                right: len,
            });
        }
    }
    let mut value = 1.0;
    for i in 0..len {
        check_positive("x0", x0[i])?;
        check_positive("x", x[i])?;
        if x0[i] >= n[i] {
            return Err(Error::OutOfRange {
                what: "x0",
                value: x0[i],
            });
        }
        if x[i] >= n[i] {
            return Err(Error::OutOfRange {
                what: "x",
                value: x[i],
            });
        }
        value *= (x[i] * (n[i] - x0[i]) / (x0[i] * (n[i] - x[i]))).powf(a[i]);
    }
    Ok(value)
}

/// The bounded surface Y = N_Y·L^α·K^β / (C·|N_L−L|^α·|N_K−K|^β + L^α·K^β).
///
/// Absolute values extend the formula beyond the capacities, so there is no
/// domain error here; with positive parameters the output stays in (0, N_Y].
pub fn eval_logistic_production(lp: &LogisticProduction, l: f64, k: f64) -> f64 {
    let g = l.powf(lp.alpha) * k.powf(lp.beta);
    let w = (lp.n_l - l).abs().powf(lp.alpha) * (lp.n_k - k).abs().powf(lp.beta);
    lp.n_y * g / (lp.c * w + g)
}

/// Rectifying map x̃_i = N_i·x_i / (N_i + x_i), which carries the exponential
/// flow onto the logistic one.
pub fn psi_forward(n: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if n.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: n.len(),
            right: x.len(),
        });
    }
    Ok(n.iter().zip(x).map(|(&ni, &xi)| ni * xi / (ni + xi)).collect())
}

/// Inverse of [`psi_forward`]: x_i = N_i·x̃_i / (N_i − x̃_i). The image of the
/// forward map lies strictly below the capacities, so x̃_i ≥ N_i is rejected.
pub fn psi_inverse(n: &[f64], xt: &[f64]) -> Result<Vec<f64>> {
    if n.len() != xt.len() {
        return Err(Error::LengthMismatch {
            left: n.len(),
            right: xt.len(),
        });
    }
    xt.iter()
        .zip(n)
        .map(|(&xti, &ni)| {
            if xti >= ni {
                Err(Error::OutOfRange {
                    what: "x~",
                    value: xti,
                })
            } else {
                Ok(ni * xti / (ni - xti))
            }
        })
        .collect()
}

/// Diagonal of the Jacobian of [`psi_forward`]: N_i² / (N_i + x_i)².
pub fn psi_jacobian_diag(n: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if n.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: n.len(),
            right: x.len(),
        });
    }
    Ok(n.iter()
        .zip(x)
        .map(|(&ni, &xi)| {
            let s = ni + xi;
            ni * ni / (s * s)
        })
        .collect())
}

/// Pushforward of the exponential field v_i = b_i·x_i through the rectifying
/// map, evaluated at x̃: computed via the Jacobian chain at x = ψ⁻¹(x̃) and
/// cross-checked against the closed form b_i·x̃_i·(1 − x̃_i/N_i) — the two are
/// the same vector field, which is exactly why ψ turns exponential flows into
/// logistic ones.
pub fn pushforward_field(b: &[f64], n: &[f64], xt: &[f64]) -> Result<Vec<f64>> {
    if b.len() != xt.len() {
        return Err(Error::LengthMismatch {
            left: b.len(),
            right: xt.len(),
        });
    }
    let x = psi_inverse(n, xt)?;
    let jac = psi_jacobian_diag(n, &x)?;
    let chained: Vec<f64> = (0..b.len()).map(|i| jac[i] * b[i] * x[i]).collect();
    for i in 0..b.len() {
        let closed = b[i] * xt[i] * (1.0 - xt[i] / n[i]);
        debug_assert!(
            (chained[i] - closed).abs() <= 1e-9 * closed.abs().max(1.0),
            "chain rule and closed form disagree: {} vs {closed}",
            chained[i]
        );
    }
    Ok(chained)
}

/// Y = a·K^p·L^(1−p) / (1 + b·K^p·L^(−p)); positive inputs required.
pub fn eval_s_shaped(s: &SShaped, k: f64, l: f64) -> Result<f64> {
    check_positive("K", k)?;
    check_positive("L", l)?;
    let numerator = s.a * (k.powf(s.p) * l.powf(1.0 - s.p));
    let denominator = 1.0 + s.b * (k.powf(s.p) * l.powf(-s.p));
    Ok(numerator / denominator)
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { what, value })
    }
}
