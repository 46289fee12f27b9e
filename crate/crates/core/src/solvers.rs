//! Iterative solvers: PDE acceleration (damped wave flow with obstacle
//! projection), the primal-dual method with a bisection dual solve, and
//! explicit gradient descent.
//!
//! All three share the stopping rules and the [`SolveTrace`] record. Every
//! solve is single threaded and bit-reproducible for a given configuration.

use std::f64::consts::PI;
use std::time::Instant;

use thiserror::Error;

use crate::grid::{forward_gradient_into, linf_norm, ScalarField, VectorField};
use crate::models::{
    energy_gradient_into, energy_unchecked, EnergyModel, GradientWorkspace, ModelError, ProblemSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid solver setting `{name}`: {reason}")]
    Config { name: &'static str, reason: String },
    #[error("time step {dt} violates the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("primal-dual steps violate r1*r2 <= dx²/6: {product} > {limit}")]
    PrimalDualSteps { product: f64, limit: f64 },
    #[error("undamped modes, method does not converge (lambda1 + c must be positive)")]
    UndampedModes,
}

/// Which explicit flow a time step is chosen for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    /// Damped wave equation with wave speed `b`.
    Wave,
    /// Damped minimal surface flow; same limit as the wave with `b = 1`.
    MinimalSurface,
    /// Heat equation / gradient descent.
    Heat,
}

/// Largest stable explicit step, scaled by `safety`:
/// `safety·dx/sqrt(2b)` for wave-type flows and `safety·dx²/(4b)` for heat.
pub fn cfl_dt(kind: FlowKind, dx: f64, b: f64, safety: f64) -> f64 {
    match kind {
        FlowKind::Wave | FlowKind::MinimalSurface => safety * dx / (2.0 * b).sqrt(),
        FlowKind::Heat => safety * dx * dx / (4.0 * b),
    }
}

/// Damping `2 sqrt(b (λ₁ + c))` that critically damps the slowest mode of a
/// linear problem.
pub fn optimal_damping(lambda1: f64, c: f64, b: f64) -> Result<f64, SolverError> {
    if !(lambda1 >= 0.0 && c >= 0.0 && b > 0.0) {
        return Err(SolverError::Config {
            name: "optimal_damping",
            reason: format!("need lambda1 >= 0, c >= 0, b > 0; got {lambda1}, {c}, {b}"),
        });
    }
    if lambda1 + c == 0.0 {
        return Err(SolverError::UndampedModes);
    }
    Ok(2.0 * (b * (lambda1 + c)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// `|residual| <= factor · dx · max(‖φ‖∞, ‖ψ‖∞)` at every node, or
    /// `factor · dx²` when there is no nonzero obstacle.
    Residual { factor: f64 },
    /// `‖uⁿ⁺¹ - uⁿ‖∞ <= c · dx²`.
    IterateDiff { c: f64 },
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule::Residual { factor: 1.0 }
    }
}

impl StoppingRule {
    /// Absolute threshold the rule compares against on this problem.
    pub fn threshold(&self, problem: &ProblemSpec) -> f64 {
        let dx = problem.grid().dx();
        match *self {
            StoppingRule::Residual { factor } => {
                let scale = problem.obstacle_scale();
                if scale > 0.0 {
                    factor * dx * scale
                } else {
                    factor * dx * dx
                }
            }
            StoppingRule::IterateDiff { c } => c * dx * dx,
        }
    }
}

/// Starting field for a solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    /// Transfinite extension of the boundary data, clamped into `[φ, ψ]`.
    #[default]
    Extension,
    /// The boundary field sampled everywhere, clamped into `[φ, ψ]`.
    BoundaryField,
    /// An explicit field; boundary nodes are overwritten with the data.
    Field(ScalarField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Damping `a` of the wave flow.
    pub damping: f64,
    /// Wave speed bound used for the CFL step; `None` takes it from the model.
    pub wave_speed: Option<f64>,
    /// Explicit time step; `None` derives it from `cfl_safety`.
    pub dt: Option<f64>,
    pub cfl_safety: f64,
    /// Finite penalty `μ`: handle the obstacle implicitly instead of by projection.
    pub penalty: Option<f64>,
    pub stopping: StoppingRule,
    pub max_iters: usize,
    /// Primal-dual dual step; default `2π dx/√6`.
    pub r1: Option<f64>,
    /// Primal-dual primal step; default `dx/(2π√6)`.
    pub r2: Option<f64>,
    /// Bisection steps per dual update; default `ceil(log2(1/(tol·dx²)))`.
    pub bisection_iters: Option<usize>,
    /// Relax boundary values toward the data with `u_t = g - u` instead of
    /// pinning them (accelerated solver only).
    pub relax_boundary: bool,
    pub initial: InitialGuess,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 2.0 * PI,
            wave_speed: None,
            dt: None,
            cfl_safety: 0.8,
            penalty: None,
            stopping: StoppingRule::default(),
            max_iters: 200_000,
            r1: None,
            r2: None,
            bisection_iters: None,
            relax_boundary: false,
            initial: InitialGuess::Extension,
            seed: 0,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<(), SolverError> {
        let bad = |name, reason: String| Err(SolverError::Config { name, reason });
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return bad("damping", format!("must be positive, got {}", self.damping));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(
                "cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            );
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt", format!("must be positive, got {dt}"));
            }
        }
        if let Some(b) = self.wave_speed {
            if !(b > 0.0) {
                return bad("wave_speed", format!("must be positive, got {b}"));
            }
        }
        if let Some(mu) = self.penalty {
            if !(mu > 0.0) {
                return bad("penalty", format!("must be positive, got {mu}"));
            }
        }
        for (name, r) in [("r1", self.r1), ("r2", self.r2)] {
            if let Some(r) = r {
                if !(r > 0.0) {
                    return bad(name, format!("must be positive, got {r}"));
                }
            }
        }
        if self.bisection_iters == Some(0) {
            return bad("bisection_iters", "must be at least 1".into());
        }
        match self.stopping {
            StoppingRule::Residual { factor: t } | StoppingRule::IterateDiff { c: t }
                if !(t > 0.0) =>
            {
                bad(
                    "stopping",
                    format!("tolerance constant must be positive, got {t}"),
                )
            }
            _ => Ok(()),
        }
    }

    fn wave_speed_for(&self, model: &EnergyModel) -> f64 {
        self.wave_speed.unwrap_or_else(|| model.stiffness())
    }

    /// Time step of the accelerated flow, checked against `dx/sqrt(2b)`.
    pub fn accel_dt(&self, problem: &ProblemSpec) -> Result<f64, SolverError> {
        self.check()?;
        let dx = problem.grid().dx();
        let b = self.wave_speed_for(&problem.model);
        let limit = cfl_dt(FlowKind::Wave, dx, b, 1.0);
        let dt = self
            .dt
            .unwrap_or_else(|| cfl_dt(FlowKind::Wave, dx, b, self.cfl_safety));
        if dt > limit * (1.0 + 1e-12) {
            return Err(SolverError::Cfl { dt, limit });
        }
        Ok(dt)
    }

    /// Time step of gradient descent, checked against `dx²/(4b)`.
    pub fn heat_dt(&self, problem: &ProblemSpec) -> Result<f64, SolverError> {
        self.check()?;
        let dx = problem.grid().dx();
        let b = self.wave_speed_for(&problem.model);
        let limit = cfl_dt(FlowKind::Heat, dx, b, 1.0);
        let dt = self
            .dt
            .unwrap_or_else(|| cfl_dt(FlowKind::Heat, dx, b, self.cfl_safety));
        if dt > limit * (1.0 + 1e-12) {
            return Err(SolverError::Cfl { dt, limit });
        }
        Ok(dt)
    }

    /// `(r1, r2)` for the primal-dual method, checked against `r1 r2 <= dx²/6`.
    pub fn primal_dual_steps(&self, dx: f64) -> Result<(f64, f64), SolverError> {
        self.check()?;
        let s6 = 6f64.sqrt();
        let r1 = self.r1.unwrap_or(2.0 * PI * dx / s6);
        let r2 = self.r2.unwrap_or(dx / (2.0 * PI * s6));
        let limit = dx * dx / 6.0;
        if r1 * r2 > limit * (1.0 + 1e-12) {
            return Err(SolverError::PrimalDualSteps {
                product: r1 * r2,
                limit,
            });
        }
        Ok((r1, r2))
    }

    pub fn with_stopping(mut self, stopping: StoppingRule) -> Self {
        self.stopping = stopping;
        self
    }

    pub fn with_damping(mut self, a: f64) -> Self {
        self.damping = a;
        self
    }
}

/// Per-iteration record of a solve. Histories hold the initial state
/// followed by one entry per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub iterations: usize,
    pub converged: bool,
    /// `max |residual|` (or the iterate difference under `IterateDiff`).
    pub residual_history: Vec<f64>,
    /// `K[uⁿ] = ½ dx² Σ ((uⁿ - uⁿ⁻¹)/dt)²`.
    pub kinetic_history: Vec<f64>,
    /// `E[uⁿ]`.
    pub potential_history: Vec<f64>,
    pub wall_time: f64,
    /// Time step (or pseudo time step) used for the kinetic energy.
    pub dt: f64,
    pub final_field: ScalarField,
}

impl SolveTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    pub fn total_energy(&self) -> Vec<f64> {
        self.kinetic_history
            .iter()
            .zip(&self.potential_history)
            .map(|(k, e)| k + e)
            .collect()
    }
}

/// Residual of the obstacle problem at one node, given `-∇E` there.
///
/// Lower obstacle only: `max{-∇E, φ-u}`. Upper only: `min{-∇E, ψ-u}`. Both:
/// `max{-∇E, φ-u}` on the lower contact set, `min{-∇E, ψ-u}` on the upper
/// contact set and `-∇E` in between.
#[inline]
fn node_residual(problem: &ProblemSpec, k: usize, u: f64, neg_grad: f64) -> f64 {
    match (&problem.lower, &problem.upper) {
        (None, None) => neg_grad,
        (Some(phi), None) => neg_grad.max(phi.values()[k] - u),
        (None, Some(psi)) => neg_grad.min(psi.values()[k] - u),
        (Some(phi), Some(psi)) => {
            let (lo, hi) = (phi.values()[k], psi.values()[k]);
            if u <= lo {
                neg_grad.max(lo - u)
            } else if u >= hi {
                neg_grad.min(hi - u)
            } else {
                neg_grad
            }
        }
    }
}

/// Pointwise residual field; boundary nodes are 0.
pub fn residual_field(problem: &ProblemSpec, u: &ScalarField) -> Result<ScalarField, SolverError> {
    problem
        .grid()
        .check_same_grid(u)
        .map_err(ModelError::from)?;
    let mut ws = GradientWorkspace::new(u);
    let mut grad = u.zeros_like();
    energy_gradient_into(&problem.model, u, &mut ws, &mut grad);
    let mut out = u.zeros_like();
    for (i, j) in u.interior() {
        let k = u.index(i, j);
        out.values_mut()[k] = node_residual(problem, k, u.values()[k], -grad.values()[k]);
    }
    Ok(out)
}

fn max_residual(problem: &ProblemSpec, u: &ScalarField, grad: &ScalarField) -> f64 {
    let (nx, ny) = u.shape();
    let (uv, gv) = (u.values(), grad.values());
    let mut m = 0.0f64;
    for i in 1..ny - 1 {
        for j in 1..nx - 1 {
            let k = i * nx + j;
            m = m.max(node_residual(problem, k, uv[k], -gv[k]).abs());
        }
    }
    m
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Applies `rule` to `u`. `previous` is the prior iterate, used only by
/// [`StoppingRule::IterateDiff`].
pub fn is_converged(
    problem: &ProblemSpec,
    u: &ScalarField,
    previous: &ScalarField,
    rule: StoppingRule,
) -> Result<bool, SolverError> {
    let measure = match rule {
        StoppingRule::Residual { .. } => linf_norm(&residual_field(problem, u)?),
        StoppingRule::IterateDiff { .. } => {
            u.check_same_grid(previous).map_err(ModelError::from)?;
            max_diff(u, previous)
        }
    };
    Ok(measure <= rule.threshold(problem))
}

/// One explicit Euler step of `u_t = g - u` on boundary nodes.
pub fn relax_boundary(u: &ScalarField, g: &ScalarField, dt: f64) -> ScalarField {
    let mut out = u.clone();
    relax_boundary_in_place(&mut out, g, dt);
    out
}

fn relax_boundary_in_place(u: &mut ScalarField, g: &ScalarField, dt: f64) {
    let (nx, ny) = u.shape();
    for i in 0..ny {
        for j in 0..nx {
            if u.is_boundary(i, j) {
                let k = i * nx + j;
                let v = u.values()[k];
                u.values_mut()[k] = v + dt * (g.values()[k] - v);
            }
        }
    }
}

fn kinetic(u: &ScalarField, prev: &ScalarField, dt: f64) -> f64 {
    let dx = u.dx();
    let s: f64 = u
        .values()
        .iter()
        .zip(prev.values())
        .map(|(a, b)| {
            let v = (a - b) / dt;
            v * v
        })
        .sum();
    0.5 * dx * dx * s
}

/// Starting field `u⁰` a solve uses for `initial`.
pub fn initial_field(
    problem: &ProblemSpec,
    initial: &InitialGuess,
) -> Result<ScalarField, SolverError> {
    let g = problem.grid();
    let mut u = match initial {
        InitialGuess::Extension => return Ok(problem.initial_guess()),
        InitialGuess::BoundaryField => g.clone(),
        InitialGuess::Field(f) => {
            g.check_same_grid(f).map_err(ModelError::from)?;
            f.clone()
        }
    };
    for k in 0..u.len() {
        let v = u.values()[k];
        u.values_mut()[k] = problem.project_node(k, v);
    }
    u.copy_boundary_from(g);
    Ok(u)
}

/// Bookkeeping shared by the three solvers.
struct Recorder<'a> {
    problem: &'a ProblemSpec,
    rule: StoppingRule,
    threshold: f64,
    trace_dt: f64,
    residuals: Vec<f64>,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(problem: &'a ProblemSpec, rule: StoppingRule, trace_dt: f64) -> Self {
        Self {
            problem,
            rule,
            threshold: rule.threshold(problem),
            trace_dt,
            residuals: Vec::new(),
            kinetic: Vec::new(),
            potential: Vec::new(),
        }
    }

    /// Records the state and reports whether the stopping rule holds.
    fn record(
        &mut self,
        u: &ScalarField,
        prev: &ScalarField,
        grad: &ScalarField,
        initial: bool,
    ) -> bool {
        let res = max_residual(self.problem, u, grad);
        let measure = match self.rule {
            StoppingRule::Residual { .. } => res,
            StoppingRule::IterateDiff { .. } => max_diff(u, prev),
        };
        self.residuals.push(res);
        self.kinetic.push(kinetic(u, prev, self.trace_dt));
        self.potential
            .push(energy_unchecked(&self.problem.model, u));
        match self.rule {
            // the iterate difference is meaningless before the first step
            StoppingRule::IterateDiff { .. } if initial => res == 0.0,
            _ => measure <= self.threshold,
        }
    }

    fn finish(
        self,
        iterations: usize,
        converged: bool,
        start: Instant,
        u: ScalarField,
    ) -> SolveTrace {
        SolveTrace {
            iterations,
            converged,
            residual_history: self.residuals,
            kinetic_history: self.kinetic,
            potential_history: self.potential,
            wall_time: start.elapsed().as_secs_f64(),
            dt: self.trace_dt,
            final_field: u,
        }
    }
}

/// One step of the accelerated scheme from `(uⁿ, uⁿ⁻¹)` given `∇E[uⁿ]`.
///
/// Interior nodes: `v = ((2 + a dt) uⁿ - uⁿ⁻¹ - dt² ∇E[uⁿ]) / (1 + a dt)`,
/// then `uⁿ⁺¹ = max{min{v, ψ}, φ}`. With a finite penalty `μ` the obstacle
/// term is treated implicitly instead, replacing `v` by
/// `(numerator + μ dt² φ) / (1 + a dt + μ dt²)` wherever `v < φ` (and
/// symmetrically above `ψ`). Boundary nodes are copied from `uⁿ`.
#[allow(clippy::too_many_arguments)]
fn accel_update(
    problem: &ProblemSpec,
    u: &ScalarField,
    prev: &ScalarField,
    grad: &ScalarField,
    a: f64,
    dt: f64,
    penalty: Option<f64>,
    out: &mut ScalarField,
) {
    let (nx, ny) = u.shape();
    let (uv, pv, gv) = (u.values(), prev.values(), grad.values());
    let c1 = 2.0 + a * dt;
    let denom = 1.0 + a * dt;
    let dt2 = dt * dt;
    let o = out.values_mut();
    o.copy_from_slice(uv);
    for i in 1..ny - 1 {
        for j in 1..nx - 1 {
            let k = i * nx + j;
            let num = c1 * uv[k] - pv[k] - dt2 * gv[k];
            let v = num / denom;
            o[k] = match penalty {
                None => problem.project_node(k, v),
                Some(mu) => {
                    let md = mu * dt2;
                    let mut w = v;
                    if let Some(phi) = &problem.lower {
                        let p = phi.values()[k];
                        if v < p {
                            w = (num + md * p) / (denom + md);
                        }
                    }
                    if let Some(psi) = &problem.upper {
                        let q = psi.values()[k];
                        if v > q {
                            w = (num + md * q) / (denom + md);
                        }
                    }
                    w
                }
            };
        }
    }
}

/// A single accelerated step with boundary nodes re-pinned to the data.
pub fn pde_accel_step(
    u_n: &ScalarField,
    u_nm1: &ScalarField,
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<ScalarField, SolverError> {
    let g = problem.grid();
    g.check_same_grid(u_n).map_err(ModelError::from)?;
    g.check_same_grid(u_nm1).map_err(ModelError::from)?;
    let dt = cfg.accel_dt(problem)?;
    let mut ws = GradientWorkspace::new(g);
    let mut grad = g.zeros_like();
    energy_gradient_into(&problem.model, u_n, &mut ws, &mut grad);
    let mut out = g.zeros_like();
    accel_update(
        problem,
        u_n,
        u_nm1,
        &grad,
        cfg.damping,
        dt,
        cfg.penalty,
        &mut out,
    );
    out.copy_boundary_from(g);
    Ok(out)
}

/// PDE acceleration: iterate the damped wave scheme until the stopping rule
/// holds or `max_iters` is reached. Starts at rest (`u⁻¹ = u⁰`).
pub fn pde_accel_solve(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    problem.validate()?;
    let dt = cfg.accel_dt(problem)?;
    let start = Instant::now();
    let g = problem.grid();
    let mut u = initial_field(problem, &cfg.initial)?;
    if cfg.relax_boundary {
        if let InitialGuess::Field(f) = &cfg.initial {
            u.copy_boundary_from(f);
        }
    }
    let mut prev = u.clone();
    let mut next = u.zeros_like();
    let mut ws = GradientWorkspace::new(g);
    let mut grad = u.zeros_like();
    energy_gradient_into(&problem.model, &u, &mut ws, &mut grad);

    let mut rec = Recorder::new(problem, cfg.stopping, dt);
    if rec.record(&u, &prev, &grad, true) && !cfg.relax_boundary {
        return Ok(rec.finish(0, true, start, u));
    }
    for n in 1..=cfg.max_iters {
        accel_update(
            problem,
            &u,
            &prev,
            &grad,
            cfg.damping,
            dt,
            cfg.penalty,
            &mut next,
        );
        if cfg.relax_boundary {
            relax_boundary_in_place(&mut next, g, dt);
        } else {
            next.copy_boundary_from(g);
        }
        std::mem::swap(&mut prev, &mut u);
        std::mem::swap(&mut u, &mut next);
        energy_gradient_into(&problem.model, &u, &mut ws, &mut grad);
        let done = rec.record(&u, &prev, &grad, false);
        let boundary_ok = !cfg.relax_boundary || boundary_gap(&u, g) <= rec.threshold;
        if done && boundary_ok {
            return Ok(rec.finish(n, true, start, u));
        }
    }
    Ok(rec.finish(cfg.max_iters, false, start, u))
}

fn boundary_gap(u: &ScalarField, g: &ScalarField) -> f64 {
    let mut m = 0.0f64;
    for i in 0..u.ny() {
        for j in 0..u.nx() {
            if u.is_boundary(i, j) {
                m = m.max((u.get(i, j) - g.get(i, j)).abs());
            }
        }
    }
    m
}

/// Explicit gradient descent `uⁿ⁺¹ = uⁿ - dt ∇E[uⁿ]`, projected onto
/// `[φ, ψ]` when obstacles are present.
pub fn gradient_descent_solve(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    problem.validate()?;
    let dt = cfg.heat_dt(problem)?;
    let start = Instant::now();
    let g = problem.grid();
    let mut u = initial_field(problem, &cfg.initial)?;
    let mut prev = u.clone();
    let mut ws = GradientWorkspace::new(g);
    let mut grad = u.zeros_like();
    energy_gradient_into(&problem.model, &u, &mut ws, &mut grad);
    let mut rec = Recorder::new(problem, cfg.stopping, dt);
    if rec.record(&u, &prev, &grad, true) {
        return Ok(rec.finish(0, true, start, u));
    }
    let (nx, ny) = u.shape();
    for n in 1..=cfg.max_iters {
        prev.values_mut().copy_from_slice(u.values());
        {
            let gv = grad.values();
            let uv = u.values_mut();
            for i in 1..ny - 1 {
                for j in 1..nx - 1 {
                    let k = i * nx + j;
                    uv[k] = problem.project_node(k, uv[k] - dt * gv[k]);
                }
            }
        }
        energy_gradient_into(&problem.model, &u, &mut ws, &mut grad);
        if rec.record(&u, &prev, &grad, false) {
            return Ok(rec.finish(n, true, start, u));
        }
    }
    Ok(rec.finish(cfg.max_iters, false, start, u))
}

/// Root `α ∈ [0, min{1, N}]` of `α + r1 α / sqrt(1 - α²) = N` by `k`
/// bisection steps on the square-root free `r1² α² - (1 - α²)(α - N)²`,
/// which has the same sign on the bracket. Returns the midpoint of the
/// final bracket, so the error is at most `min{1, N} / 2^{k+1}`.
pub fn bisect_dual_magnitude(n: f64, r1: f64, k: usize) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = n.min(1.0);
    let r1sq = r1 * r1;
    for _ in 0..k {
        let mid = 0.5 * (lo + hi);
        let d = mid - n;
        let g = r1sq * mid * mid - (1.0 - mid * mid) * d * d;
        if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pointwise dual update of the primal-dual method for the area integrand:
/// the minimizer over `|p| <= 1` of
/// `-∇ū·p - sqrt(1 - |p|²) + |p - pⁿ|²/(2 r1)`.
///
/// The minimizer is `α q` with `q` the unit vector along `pⁿ + r1 ∇ū` (zero
/// when that vanishes) and `α` found by [`bisect_dual_magnitude`].
pub fn dual_bisection(p_n: [f64; 2], grad_ubar: [f64; 2], r1: f64, k: usize) -> [f64; 2] {
    let s = [p_n[0] + r1 * grad_ubar[0], p_n[1] + r1 * grad_ubar[1]];
    let n = s[0].hypot(s[1]);
    if n == 0.0 {
        return [0.0, 0.0];
    }
    let alpha = bisect_dual_magnitude(n, r1, k);
    [alpha * s[0] / n, alpha * s[1] / n]
}

const LANES: usize = 8;

/// [`dual_bisection`] applied at every node, overwriting `p`. Nodes are
/// processed in fixed-size batches with branch-free bracket updates so the
/// independent bisections overlap; results equal the scalar routine bit for
/// bit.
pub fn dual_bisection_field(p: &mut VectorField, grad_ubar: &VectorField, r1: f64, k: usize) {
    let VectorField { px, py } = p;
    let (px, py) = (px.values_mut(), py.values_mut());
    let (gx, gy) = (grad_ubar.px.values(), grad_ubar.py.values());
    let len = px.len();
    let r1sq = r1 * r1;
    let mut start = 0;
    while start < len {
        let m = LANES.min(len - start);
        let mut sx = [0.0; LANES];
        let mut sy = [0.0; LANES];
        let mut n = [0.0; LANES];
        let mut lo = [0.0; LANES];
        let mut hi = [0.0; LANES];
        for l in 0..m {
            let idx = start + l;
            sx[l] = px[idx] + r1 * gx[idx];
            sy[l] = py[idx] + r1 * gy[idx];
            n[l] = sx[l].hypot(sy[l]);
            hi[l] = n[l].min(1.0);
        }
        for _ in 0..k {
            for l in 0..LANES {
                let mid = 0.5 * (lo[l] + hi[l]);
                let d = mid - n[l];
                let g = r1sq * mid * mid - (1.0 - mid * mid) * d * d;
                let up = g > 0.0;
                hi[l] = if up { mid } else { hi[l] };
                lo[l] = if up { lo[l] } else { mid };
            }
        }
        for l in 0..m {
            let idx = start + l;
            if n[l] > 0.0 {
                let alpha = 0.5 * (lo[l] + hi[l]);
                px[idx] = alpha * sx[l] / n[l];
                py[idx] = alpha * sy[l] / n[l];
            } else {
                px[idx] = 0.0;
                py[idx] = 0.0;
            }
        }
        start += m;
    }
}

/// Default bisection count: `ceil(log2(1/(tol · dx²)))`, at least 1.
pub fn default_bisection_iters(tol: f64, dx: f64) -> usize {
    let k = (1.0 / (tol * dx * dx)).log2().ceil();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

/// Primal-dual method with over-relaxation:
///
/// ```text
/// pⁿ⁺¹ = argmin_p  -∇ūⁿ·p + Φ*(p) + |p - pⁿ|²/(2 r1)     (pointwise)
/// uⁿ⁺¹ = clamp(uⁿ + r2 (div pⁿ⁺¹ + f), φ, ψ)
/// ūⁿ⁺¹ = 2uⁿ⁺¹ - uⁿ
/// ```
///
/// For the area integrand the dual step is solved by bisection and keeps
/// `|p| < 1`; for quadratic integrands it has a closed form. Boundary nodes
/// of `u` are pinned to the data every step. The dual starts at
/// `p⁰ = ∇_pΦ(D⁺u⁰)`.
pub fn primal_dual_solve(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    problem.validate()?;
    let g = problem.grid();
    let dx = g.dx();
    let (r1, r2) = cfg.primal_dual_steps(dx)?;
    let threshold = cfg.stopping.threshold(problem);
    let k_bis = cfg
        .bisection_iters
        .unwrap_or_else(|| default_bisection_iters(threshold, dx));
    let start = Instant::now();
    let model = &problem.model;
    let kappa = model.reaction();

    let mut u = initial_field(problem, &cfg.initial)?;
    let mut prev = u.clone();
    let mut ubar = u.clone();
    let mut grad_bar = VectorField::zeros_like(&u);
    let mut p = VectorField::zeros_like(&u);
    forward_gradient_into(&u, &mut grad_bar);
    for k in 0..u.len() {
        let (gx, gy) = (grad_bar.px.values()[k], grad_bar.py.values()[k]);
        let (fx, fy) = match model.quadratic_weight(k) {
            Some(w) => (w * gx, w * gy),
            None => {
                let s = 1.0 / (1.0 + gx * gx + gy * gy).sqrt();
                (gx * s, gy * s)
            }
        };
        p.px.values_mut()[k] = fx;
        p.py.values_mut()[k] = fy;
    }
    let mut div = u.zeros_like();
    let mut ws = GradientWorkspace::new(g);
    let mut grad = u.zeros_like();
    energy_gradient_into(model, &u, &mut ws, &mut grad);

    let mut rec = Recorder::new(problem, cfg.stopping, r2);
    if rec.record(&u, &prev, &grad, true) {
        return Ok(rec.finish(0, true, start, u));
    }
    let (nx, ny) = u.shape();
    for n in 1..=cfg.max_iters {
        forward_gradient_into(&ubar, &mut grad_bar);
        if model.quadratic_weight(0).is_some() {
            let VectorField { px, py } = &mut p;
            let (px, py) = (px.values_mut(), py.values_mut());
            let (gx, gy) = (grad_bar.px.values(), grad_bar.py.values());
            for k in 0..px.len() {
                // argmin of -g·p + |p|²/(2w) + |p - pⁿ|²/(2 r1)
                let w = model.quadratic_weight(k).unwrap_or(1.0);
                let s = 1.0 / (1.0 + r1 / w);
                px[k] = (px[k] + r1 * gx[k]) * s;
                py[k] = (py[k] + r1 * gy[k]) * s;
            }
        } else {
            dual_bisection_field(&mut p, &grad_bar, r1, k_bis);
        }
        crate::grid::backward_divergence_into(&p, &mut div);
        prev.values_mut().copy_from_slice(u.values());
        {
            let dv = div.values();
            let f = model.forcing().map(|f| f.values());
            let uv = u.values_mut();
            let bv = ubar.values_mut();
            for i in 1..ny - 1 {
                for j in 1..nx - 1 {
                    let k = i * nx + j;
                    let src = dv[k] + f.map_or(0.0, |f| f[k]);
                    let v = (uv[k] + r2 * src) / (1.0 + r2 * kappa);
                    let new = problem.project_node(k, v);
                    bv[k] = 2.0 * new - uv[k];
                    uv[k] = new;
                }
            }
        }
        energy_gradient_into(model, &u, &mut ws, &mut grad);
        if rec.record(&u, &prev, &grad, false) {
            return Ok(rec.finish(n, true, start, u));
        }
    }
    Ok(rec.finish(cfg.max_iters, false, start, u))
}
