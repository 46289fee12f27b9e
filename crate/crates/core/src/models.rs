//! Discrete energies and their gradients, plus the obstacle and forcing
//! catalog used by the experiments.
//!
//! Energies are cell sums: `dx² Σ` over the `(nx-1)(ny-1)` nodes that own a
//! full forward stencil. With that convention the flat unit square has area
//! exactly 1, and `energy_gradient` is exactly `dx⁻²` times the partial
//! derivative of `energy` with respect to each interior node value.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{backward_divergence_into, GridError, ScalarField, VectorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("coefficient field must be positive, found {value} at node ({i},{j})")]
    NonPositiveCoefficient { i: usize, j: usize, value: f64 },
    #[error("lower obstacle exceeds upper obstacle at node ({i},{j})")]
    ObstacleOrder { i: usize, j: usize },
    #[error("boundary data violates the obstacle at boundary node ({i},{j})")]
    BoundaryIncompatible { i: usize, j: usize },
    #[error("{nodes} nodes per side is not a multiple of {cells} checkerboard cells")]
    CellsDoNotDivide { nodes: usize, cells: usize },
}

/// The integrand of the discrete energy.
///
/// Every variant may carry a volumetric forcing `f`, entering as `-f u`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyModel {
    /// `(b/2)|∇u|²`
    DirichletQuadratic {
        b: f64,
        forcing: Option<ScalarField>,
    },
    /// `(b/2)|∇u|² + (b c/2) u²`
    LinearReaction {
        b: f64,
        c: f64,
        forcing: Option<ScalarField>,
    },
    /// `sqrt(1 + |∇u|²)`
    NonlinearMinimalSurface { forcing: Option<ScalarField> },
    /// `(1/2)|∇u|²`, the small-slope expansion of the area integrand.
    LinearizedMinimalSurface { forcing: Option<ScalarField> },
    /// `(1/2) A² |∇u|²` with a positive scalar coefficient field `A`.
    HeterogeneousQuadratic {
        coefficient: ScalarField,
        forcing: Option<ScalarField>,
    },
}

impl EnergyModel {
    pub fn dirichlet() -> Self {
        EnergyModel::DirichletQuadratic {
            b: 1.0,
            forcing: None,
        }
    }

    pub fn minimal_surface() -> Self {
        EnergyModel::NonlinearMinimalSurface { forcing: None }
    }

    pub fn linearized_minimal_surface() -> Self {
        EnergyModel::LinearizedMinimalSurface { forcing: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergyModel::DirichletQuadratic { .. } => "dirichlet_quadratic",
            EnergyModel::LinearReaction { .. } => "linear_reaction",
            EnergyModel::NonlinearMinimalSurface { .. } => "nonlinear_minimal_surface",
            EnergyModel::LinearizedMinimalSurface { .. } => "linearized_minimal_surface",
            EnergyModel::HeterogeneousQuadratic { .. } => "heterogeneous_quadratic",
        }
    }

    pub fn forcing(&self) -> Option<&ScalarField> {
        match self {
            EnergyModel::DirichletQuadratic { forcing, .. }
            | EnergyModel::LinearReaction { forcing, .. }
            | EnergyModel::NonlinearMinimalSurface { forcing }
            | EnergyModel::LinearizedMinimalSurface { forcing }
            | EnergyModel::HeterogeneousQuadratic { forcing, .. } => forcing.as_ref(),
        }
    }

    /// Upper bound on the wave speed `b` of the flow's principal part; the
    /// explicit step must satisfy `dt <= dx / sqrt(2 b)` with this value.
    pub fn stiffness(&self) -> f64 {
        match self {
            EnergyModel::DirichletQuadratic { b, .. } | EnergyModel::LinearReaction { b, .. } => *b,
            EnergyModel::NonlinearMinimalSurface { .. }
            | EnergyModel::LinearizedMinimalSurface { .. } => 1.0,
            EnergyModel::HeterogeneousQuadratic { coefficient, .. } => coefficient
                .values()
                .iter()
                .fold(0.0f64, |m, a| m.max(a * a)),
        }
    }

    /// Pointwise weight `w` such that the gradient part of the integrand is
    /// `(w/2)|p|²`, for models whose dual update has a closed form.
    /// `None` for the nonlinear minimal surface integrand.
    pub fn quadratic_weight(&self, k: usize) -> Option<f64> {
        match self {
            EnergyModel::DirichletQuadratic { b, .. } | EnergyModel::LinearReaction { b, .. } => {
                Some(*b)
            }
            EnergyModel::LinearizedMinimalSurface { .. } => Some(1.0),
            EnergyModel::HeterogeneousQuadratic { coefficient, .. } => {
                let a = coefficient.values()[k];
                Some(a * a)
            }
            EnergyModel::NonlinearMinimalSurface { .. } => None,
        }
    }

    /// Coefficient `κ` of the zero-order term `(κ/2)u²` (nonzero only for
    /// the reaction model).
    pub fn reaction(&self) -> f64 {
        match self {
            EnergyModel::LinearReaction { b, c, .. } => b * c,
            _ => 0.0,
        }
    }

    /// Checks coefficient constraints and that attached fields live on `grid`.
    pub fn validate(&self, grid: &ScalarField) -> Result<(), ModelError> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                })
            }
        };
        match self {
            EnergyModel::DirichletQuadratic { b, .. } => positive("b", *b)?,
            EnergyModel::LinearReaction { b, c, .. } => {
                positive("b", *b)?;
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(ModelError::InvalidParameter {
                        name: "c",
                        reason: format!("must be nonnegative, got {c}"),
                    });
                }
            }
            EnergyModel::HeterogeneousQuadratic { coefficient, .. } => {
                grid.check_same_grid(coefficient)?;
                for i in 0..coefficient.ny() {
                    for j in 0..coefficient.nx() {
                        let a = coefficient.get(i, j);
                        if !(a > 0.0) {
                            return Err(ModelError::NonPositiveCoefficient { i, j, value: a });
                        }
                    }
                }
            }
            _ => {}
        }
        if let Some(f) = self.forcing() {
            grid.check_same_grid(f)?;
        }
        Ok(())
    }

    /// Integrand of the gradient part at a node, given `p = D⁺u` there.
    #[inline]
    fn density(&self, k: usize, px: f64, py: f64) -> f64 {
        let q = px * px + py * py;
        match self {
            EnergyModel::DirichletQuadratic { b, .. } | EnergyModel::LinearReaction { b, .. } => {
                0.5 * b * q
            }
            EnergyModel::NonlinearMinimalSurface { .. } => (1.0 + q).sqrt(),
            EnergyModel::LinearizedMinimalSurface { .. } => 0.5 * q,
            EnergyModel::HeterogeneousQuadratic { coefficient, .. } => {
                let a = coefficient.values()[k];
                0.5 * a * a * q
            }
        }
    }

    /// Flux `∇_p Φ` at a node.
    #[inline]
    fn flux(&self, k: usize, px: f64, py: f64) -> (f64, f64) {
        match self {
            EnergyModel::DirichletQuadratic { b, .. } | EnergyModel::LinearReaction { b, .. } => {
                (b * px, b * py)
            }
            EnergyModel::NonlinearMinimalSurface { .. } => {
                let s = 1.0 / (1.0 + px * px + py * py).sqrt();
                (px * s, py * s)
            }
            EnergyModel::LinearizedMinimalSurface { .. } => (px, py),
            EnergyModel::HeterogeneousQuadratic { coefficient, .. } => {
                let a = coefficient.values()[k];
                let a2 = a * a;
                (a2 * px, a2 * py)
            }
        }
    }

    /// Zero-order part of the integrand at a node.
    #[inline]
    fn zero_order(&self, k: usize, u: f64) -> f64 {
        let reaction = match self {
            EnergyModel::LinearReaction { b, c, .. } => 0.5 * b * c * u * u,
            _ => 0.0,
        };
        let forcing = self.forcing().map_or(0.0, |f| f.values()[k] * u);
        reaction - forcing
    }

    /// `Ψ_z(u)` at a node.
    #[inline]
    fn zero_order_derivative(&self, k: usize, u: f64) -> f64 {
        let reaction = match self {
            EnergyModel::LinearReaction { b, c, .. } => b * c * u,
            _ => 0.0,
        };
        let forcing = self.forcing().map_or(0.0, |f| f.values()[k]);
        reaction - forcing
    }
}

/// Discrete energy `dx² Σ_cells [Φ(D⁺u) + Ψ(u)]`.
pub fn energy(model: &EnergyModel, u: &ScalarField) -> Result<f64, ModelError> {
    model.validate(u)?;
    Ok(energy_unchecked(model, u))
}

pub(crate) fn energy_unchecked(model: &EnergyModel, u: &ScalarField) -> f64 {
    let (nx, ny) = u.shape();
    let dx = u.dx();
    let inv = 1.0 / dx;
    let v = u.values();
    let mut sum = 0.0;
    for i in 0..ny - 1 {
        let row = i * nx;
        for j in 0..nx - 1 {
            let k = row + j;
            let px = (v[k + 1] - v[k]) * inv;
            let py = (v[k + nx] - v[k]) * inv;
            sum += model.density(k, px, py) + model.zero_order(k, v[k]);
        }
    }
    sum * dx * dx
}

/// `∇E[u] = -D⁻·(∇_pΦ(D⁺u)) + Ψ_z(u)` on interior nodes, zero on the boundary.
pub fn energy_gradient(model: &EnergyModel, u: &ScalarField) -> Result<ScalarField, ModelError> {
    model.validate(u)?;
    let mut ws = GradientWorkspace::new(u);
    let mut out = u.zeros_like();
    energy_gradient_into(model, u, &mut ws, &mut out);
    Ok(out)
}

/// Scratch buffers for repeated gradient evaluation on one grid.
#[derive(Debug, Clone)]
pub struct GradientWorkspace {
    flux: VectorField,
}

impl GradientWorkspace {
    pub fn new(grid: &ScalarField) -> Self {
        Self {
            flux: VectorField::zeros_like(grid),
        }
    }
}

/// Allocation-free gradient evaluation. Shapes are not checked.
pub fn energy_gradient_into(
    model: &EnergyModel,
    u: &ScalarField,
    ws: &mut GradientWorkspace,
    out: &mut ScalarField,
) {
    let (nx, ny) = u.shape();
    let inv = 1.0 / u.dx();
    let v = u.values();
    {
        let VectorField { px: fx, py: fy } = &mut ws.flux;
        let (fx, fy) = (fx.values_mut(), fy.values_mut());
        for i in 0..ny {
            let row = i * nx;
            for j in 0..nx {
                let k = row + j;
                let px = if j + 1 < nx {
                    (v[k + 1] - v[k]) * inv
                } else {
                    0.0
                };
                let py = if i + 1 < ny {
                    (v[k + nx] - v[k]) * inv
                } else {
                    0.0
                };
                let (a, b) = model.flux(k, px, py);
                fx[k] = a;
                fy[k] = b;
            }
        }
    }
    backward_divergence_into(&ws.flux, out);
    let o = out.values_mut();
    for i in 0..ny {
        for j in 0..nx {
            let k = i * nx + j;
            o[k] = if i == 0 || j == 0 || i + 1 == ny || j + 1 == nx {
                0.0
            } else {
                -o[k] + model.zero_order_derivative(k, v[k])
            };
        }
    }
}

/// Discrete area `dx² Σ_cells sqrt(1 + |D⁺u|²)` of the graph of `u`.
pub fn surface_area(u: &ScalarField) -> f64 {
    energy_unchecked(&EnergyModel::NonlinearMinimalSurface { forcing: None }, u)
}

/// A fully specified obstacle/boundary value problem on `[0,1]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub model: EnergyModel,
    /// Dirichlet data; only boundary nodes are read.
    pub boundary: ScalarField,
    pub lower: Option<ScalarField>,
    pub upper: Option<ScalarField>,
}

impl ProblemSpec {
    pub fn new(
        model: EnergyModel,
        boundary: ScalarField,
        lower: Option<ScalarField>,
        upper: Option<ScalarField>,
    ) -> Result<Self, ModelError> {
        let spec = Self {
            model,
            boundary,
            lower,
            upper,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid(&self) -> &ScalarField {
        &self.boundary
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let g = &self.boundary;
        self.model.validate(g)?;
        if let Some(phi) = &self.lower {
            g.check_same_grid(phi)?;
        }
        if let Some(psi) = &self.upper {
            g.check_same_grid(psi)?;
        }
        for i in 0..g.ny() {
            for j in 0..g.nx() {
                let lo = self.lower.as_ref().map(|f| f.get(i, j));
                let hi = self.upper.as_ref().map(|f| f.get(i, j));
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    if lo > hi {
                        return Err(ModelError::ObstacleOrder { i, j });
                    }
                }
                if g.is_boundary(i, j) {
                    let b = g.get(i, j);
                    if lo.is_some_and(|lo| lo > b) || hi.is_some_and(|hi| b > hi) {
                        return Err(ModelError::BoundaryIncompatible { i, j });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn has_obstacle(&self) -> bool {
        self.lower.is_some() || self.upper.is_some()
    }

    /// Largest obstacle magnitude, `max(‖φ‖∞, ‖ψ‖∞)`; zero without obstacles.
    pub fn obstacle_scale(&self) -> f64 {
        let l = self.lower.as_ref().map_or(0.0, crate::grid::linf_norm);
        let u = self.upper.as_ref().map_or(0.0, crate::grid::linf_norm);
        l.max(u)
    }

    /// Clamps `v` into `[φ, ψ]` at node `k`.
    #[inline]
    pub fn project_node(&self, k: usize, v: f64) -> f64 {
        let mut w = v;
        if let Some(psi) = &self.upper {
            w = w.min(psi.values()[k]);
        }
        if let Some(phi) = &self.lower {
            w = w.max(phi.values()[k]);
        }
        w
    }

    /// Feasible starting field: the bilinear extension of the boundary data,
    /// clamped into the obstacle band, with the boundary data pinned.
    pub fn initial_guess(&self) -> ScalarField {
        let g = &self.boundary;
        let (nx, ny) = g.shape();
        let mut u = g.zeros_like();
        let (sx, sy) = ((nx - 1) as f64, (ny - 1) as f64);
        for i in 0..ny {
            let t = i as f64 / sy;
            for j in 0..nx {
                let s = j as f64 / sx;
                // transfinite (Coons) interpolation of the four edges
                let edges = (1.0 - s) * g.get(i, 0)
                    + s * g.get(i, nx - 1)
                    + (1.0 - t) * g.get(0, j)
                    + t * g.get(ny - 1, j);
                let corners = (1.0 - s) * (1.0 - t) * g.get(0, 0)
                    + s * (1.0 - t) * g.get(0, nx - 1)
                    + (1.0 - s) * t * g.get(ny - 1, 0)
                    + s * t * g.get(ny - 1, nx - 1);
                u.set(i, j, edges - corners);
            }
        }
        for k in 0..u.len() {
            let v = u.values()[k];
            u.values_mut()[k] = self.project_node(k, v);
        }
        u.copy_boundary_from(g);
        u
    }
}

/// Square, disc and line-segment obstacle, divided by `scale`.
///
/// Values are 5 on the diamond `|x1-0.6| + |x2-0.6| < 0.04`, 4.5 on the disc
/// of radius `sqrt(0.001)` about `(0.6, 0.25)`, 4.5 on the segment
/// `x2 = 0.57, 0.075 < x1 < 0.13` and 0 elsewhere. The segment has no area,
/// so it is drawn on the node row closest to `x2 = 0.57`.
pub fn obstacle_phi1(scale: f64, n: usize) -> Result<ScalarField, ModelError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(ModelError::InvalidParameter {
            name: "scale",
            reason: format!("must be positive, got {scale}"),
        });
    }
    let mut phi = ScalarField::unit_square(n)?;
    let dx = phi.dx();
    let segment_row = (0.57 / dx).round() as usize;
    for i in 0..n {
        for j in 0..n {
            let (x1, x2) = phi.coords(i, j);
            let disk = (x1 - 0.6).powi(2) + (x2 - 0.25).powi(2) < 0.001;
            let segment = i == segment_row && x1 > 0.075 && x1 < 0.13;
            let v = if (x1 - 0.6).abs() + (x2 - 0.6).abs() < 0.04 {
                5.0
            } else if disk || segment {
                4.5
            } else {
                0.0
            };
            phi.set(i, j, v / scale);
        }
    }
    Ok(phi)
}

/// Two half-ellipsoid bumps centered at `P = (0.55, 0.5)` (radius 0.3) and
/// `Q = (0.1, 0.5)` (radius 0.05).
pub fn obstacle_phi2(n: usize) -> Result<ScalarField, ModelError> {
    let mut phi = ScalarField::unit_square(n)?;
    let dx = phi.dx();
    let mid = (n - 1) as f64 / 2.0;
    for i in 0..n {
        // offset from x2 = 1/2 taken from the index so rows i and n-1-i agree exactly
        let d2 = ((i as f64 - mid) * dx).powi(2);
        for j in 0..n {
            let x1 = j as f64 * dx;
            let dp = (x1 - 0.55).powi(2) + d2;
            let dq = (x1 - 0.1).powi(2) + d2;
            let v = (1.0 - dp / 0.09).max(0.0).sqrt() + (1.0 - dq / 0.0025).max(0.0).sqrt();
            phi.set(i, j, v);
        }
    }
    Ok(phi)
}

/// Sawtooth profile in `x1` used by the torsion forcing: rises with slope 6 on
/// `[0, 1/6]`, falls back on `(1/6, 1/3]`, and repeats three times.
pub fn torsion_sawtooth(x1: f64) -> f64 {
    const THIRD: f64 = 1.0 / 3.0;
    if x1 <= 1.0 / 6.0 {
        6.0 * x1
    } else if x1 <= THIRD {
        2.0 * (1.0 - 3.0 * x1)
    } else if x1 <= 0.5 {
        6.0 * (x1 - THIRD)
    } else if x1 <= 2.0 * THIRD {
        2.0 * (1.0 - 3.0 * (x1 - THIRD))
    } else if x1 <= 5.0 / 6.0 {
        6.0 * (x1 - 2.0 * THIRD)
    } else {
        2.0 * (1.0 - 3.0 * (x1 - 2.0 * THIRD))
    }
}

/// Unscaled torsion forcing at a point.
pub fn torsion_force(x1: f64, x2: f64) -> f64 {
    if (x1 - x2).abs() <= 0.1 && x1 <= 0.3 {
        300.0
    } else if x1 <= 1.0 - x2 {
        -70.0 * x2.exp() * torsion_sawtooth(x1)
    } else {
        15.0 * x2.exp() * torsion_sawtooth(x1)
    }
}

/// Elasto-plastic torsion data `(φ, ψ, v)`, all scaled by 1/10:
/// `φ = -dist(x, ∂Ω)/10`, `ψ = 0.02`, and the piecewise forcing `v/10`.
pub fn torsion_problem(n: usize) -> Result<(ScalarField, ScalarField, ScalarField), ModelError> {
    let dx = ScalarField::unit_square(n)?.dx();
    let phi = ScalarField::from_fn(n, n, dx, |x1, x2| {
        -x1.min(1.0 - x1).min(x2).min(1.0 - x2) / 10.0
    })?;
    let psi = ScalarField::constant(n, n, dx, 0.02)?;
    let v = ScalarField::from_fn(n, n, dx, |x1, x2| torsion_force(x1, x2) / 10.0)?;
    Ok((phi, psi, v))
}

/// Random checkerboard with i.i.d. cell values in `{1, 9}`, each with
/// probability 1/2.
///
/// Draws come from ChaCha8 seeded with `seed` via `seed_from_u64`: one
/// `next_u64` per cell in row-major cell order, and the top bit selects 9.
/// Node `(i, j)` belongs to cell `(i / m, j / m)` where `m = n / cells`.
pub fn checkerboard(cells_per_side: usize, seed: u64, n: usize) -> Result<ScalarField, ModelError> {
    if cells_per_side == 0 {
        return Err(ModelError::InvalidParameter {
            name: "cells_per_side",
            reason: "must be at least 1".into(),
        });
    }
    let mut field = ScalarField::unit_square(n)?;
    if !n.is_multiple_of(cells_per_side) {
        return Err(ModelError::CellsDoNotDivide {
            nodes: n,
            cells: cells_per_side,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<f64> = (0..cells_per_side * cells_per_side)
        .map(|_| if rng.next_u64() >> 63 == 1 { 9.0 } else { 1.0 })
        .collect();
    let m = n / cells_per_side;
    for i in 0..n {
        for j in 0..n {
            field.set(i, j, cells[(i / m) * cells_per_side + j / m]);
        }
    }
    Ok(field)
}
