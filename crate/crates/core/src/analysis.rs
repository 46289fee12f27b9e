//! Diagnostics tied to the convergence theory: the continuum rate bound,
//! least-squares decay and complexity fits, an energy monotonicity audit and
//! the homogenization gap.

use std::ops::Range;

use thiserror::Error;

use crate::grid::{GridError, ScalarField};
use crate::solvers::SolveTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid input `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn invalid(name: &'static str, reason: impl Into<String>) -> AnalysisError {
    AnalysisError::Invalid {
        name,
        reason: reason.into(),
    }
}

/// Constants entering the exponential rate bound for a strongly convex
/// energy: damping `a`, ellipticity `θ` (with `θ I <= ∇²_pΦ <= θ⁻¹ I`),
/// zero-order curvature bound `μ` and Poincaré constant `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBoundInputs {
    pub a: f64,
    pub theta: f64,
    pub mu: f64,
    pub lambda: f64,
}

/// Rate `β` in `‖u - u*‖²_{H¹} <= C exp(-β t)`:
///
/// `β = (a sqrt(c² + 4λθ) - a c) / (2 sqrt(λθ) + a)` with
/// `c = a + μ/a + (2λ/a)(θ⁻¹ - θ)`.
pub fn rate_bound(inp: RateBoundInputs) -> Result<f64, AnalysisError> {
    let RateBoundInputs {
        a,
        theta,
        mu,
        lambda,
    } = inp;
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be positive, got {a}")));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid("theta", format!("must lie in (0, 1], got {theta}")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("must be nonnegative, got {mu}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    let lt = lambda * theta;
    let c = a + mu / a + (2.0 * lambda / a) * (1.0 / theta - theta);
    // a(sqrt(c²+4λθ) - c) rewritten to avoid cancellation for large c
    let diff = 4.0 * lt / ((c * c + 4.0 * lt).sqrt() + c);
    Ok(a * diff / (2.0 * lt.sqrt() + a))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    // Σ(x - x̄) = 0, so any offset works for y; the first sample keeps
    // constant data exactly flat
    let y0 = ys[0];
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - y0)).sum();
    Some(sxy / sxx)
}

/// Negated least-squares slope of `ln(error)` against time over `window`.
pub fn decay_rate_fit(
    times: &[f64],
    errors: &[f64],
    window: Range<usize>,
) -> Result<f64, AnalysisError> {
    if times.len() != errors.len() {
        return Err(invalid("errors", "times and errors differ in length"));
    }
    if window.end > times.len() || window.len() < 5 {
        return Err(invalid(
            "window",
            format!("need at least 5 samples inside the data, got {window:?}"),
        ));
    }
    let ts = &times[window.clone()];
    let es = &errors[window];
    if let Some(e) = es.iter().find(|e| !(**e > 0.0)) {
        return Err(invalid(
            "errors",
            format!("must be positive in the window, found {e}"),
        ));
    }
    let logs: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let slope =
        least_squares_slope(ts, &logs).ok_or_else(|| invalid("times", "all times are equal"))?;
    Ok(if slope == 0.0 { 0.0 } else { -slope })
}

/// Middle 60% of `len` samples: the window the decay fit uses by default.
pub fn default_decay_window(len: usize) -> Range<usize> {
    let lo = len / 5;
    let hi = len - len / 5;
    lo..hi
}

/// Exponent `p` of the least-squares fit `quantity ≈ C N^p` in log-log space.
pub fn complexity_fit(sizes: &[f64], quantities: &[f64]) -> Result<f64, AnalysisError> {
    if sizes.len() != quantities.len() || sizes.len() < 3 {
        return Err(invalid(
            "sizes",
            "need at least 3 size/quantity pairs of equal length",
        ));
    }
    if sizes.iter().chain(quantities).any(|v| !(*v > 0.0)) {
        return Err(invalid(
            "quantities",
            "sizes and quantities must be positive",
        ));
    }
    let lx: Vec<f64> = sizes.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = quantities.iter().map(|v| v.ln()).collect();
    let p = least_squares_slope(&lx, &ly).ok_or_else(|| invalid("sizes", "all sizes are equal"))?;
    Ok(if p == 0.0 { 0.0 } else { p })
}

/// Largest increase of `K + E` between consecutive entries, and the first
/// index `n` at which `(K+E)ⁿ - (K+E)ⁿ⁻¹` exceeds `tolerance`.
pub fn monotonicity_audit(
    kinetic: &[f64],
    potential: &[f64],
    tolerance: f64,
) -> (f64, Option<usize>) {
    let total: Vec<f64> = kinetic.iter().zip(potential).map(|(k, e)| k + e).collect();
    let mut worst = 0.0f64;
    let mut first = None;
    for n in 1..total.len() {
        let rise = total[n] - total[n - 1];
        worst = worst.max(rise);
        if first.is_none() && rise > tolerance {
            first = Some(n);
        }
    }
    (worst, first)
}

/// [`monotonicity_audit`] on a trace, with a tolerance relative to the
/// initial total energy.
pub fn audit_trace(trace: &SolveTrace, relative_tolerance: f64) -> (f64, Option<usize>) {
    let e0 = trace
        .kinetic_history
        .first()
        .zip(trace.potential_history.first())
        .map_or(0.0, |(k, e)| (k + e).abs());
    monotonicity_audit(
        &trace.kinetic_history,
        &trace.potential_history,
        relative_tolerance * e0,
    )
}

/// `‖u_eps - u_hom‖∞`.
pub fn homogenization_gap(u_eps: &ScalarField, u_hom: &ScalarField) -> Result<f64, AnalysisError> {
    u_eps.check_same_grid(u_hom)?;
    Ok(u_eps
        .values()
        .iter()
        .zip(u_hom.values())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}
