//! Turns a config into problems, runs them and collects a summary.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use pdeaccel_core::analysis::{complexity_fit, homogenization_gap, AnalysisError};
use pdeaccel_core::models::{
    checkerboard, energy, obstacle_phi1, obstacle_phi2, surface_area, torsion_problem,
};
use pdeaccel_core::solvers::{
    gradient_descent_solve, pde_accel_solve, primal_dual_solve, InitialGuess,
};
use pdeaccel_core::{
    EnergyModel, ModelError, ProblemSpec, ScalarField, SolveTrace, SolverConfig, SolverError,
    StoppingRule,
};
use thiserror::Error;

use crate::config::{
    CoefficientReading, Experiment, ExperimentConfig, ModelKind, ObstacleKind, SolverKind,
    StoppingKind,
};
use crate::output::{self, OutputError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// One solve of the run matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub experiment: Experiment,
    pub solver: SolverKind,
    pub model: ModelKind,
    pub mesh: usize,
    pub seed: u64,
    pub damping: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
    pub energy: f64,
    /// Area of the graph, for the minimal surface type experiments.
    pub surface_area: Option<f64>,
    pub residual: f64,
    /// `‖u - u_hom‖∞` against the effective constant-coefficient problem.
    pub gap: Option<f64>,
}

/// Least-squares exponent of iterations and wall time against `N = mesh²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub damping: f64,
    pub seed: u64,
    pub iterations: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub rows: Vec<RunRow>,
    pub complexity: Vec<ComplexityRow>,
}

impl Summary {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

pub struct RunOutput {
    pub row: RunRow,
    pub problem: ProblemSpec,
    pub trace: SolveTrace,
}

fn dirichlet_data(n: usize) -> Result<ScalarField, ModelError> {
    let dx = ScalarField::unit_square(n)?.dx();
    Ok(ScalarField::from_fn(n, n, dx, |x1, x2| {
        (2.0 * PI * x1 * x1).sin() + (2.0 * PI * x2 * x2).sin()
    })?)
}

fn obstacle(kind: ObstacleKind, scale: f64, n: usize) -> Result<Option<ScalarField>, ModelError> {
    Ok(match kind {
        ObstacleKind::None => None,
        ObstacleKind::Phi1 => Some(obstacle_phi1(scale, n)?),
        ObstacleKind::Phi2 => Some(obstacle_phi2(n)?.map(|v| v / scale)),
    })
}

fn surface_model(kind: ModelKind, forcing: Option<ScalarField>) -> EnergyModel {
    match kind {
        ModelKind::Nonlinear => EnergyModel::NonlinearMinimalSurface { forcing },
        ModelKind::Linearized => EnergyModel::LinearizedMinimalSurface { forcing },
    }
}

/// Coefficient field `A` of the heterogeneous energy for one checkerboard draw.
pub fn checkerboard_coefficient(
    cfg: &ExperimentConfig,
    n: usize,
    seed: u64,
) -> Result<ScalarField, ModelError> {
    let cb = checkerboard(cfg.cells_for(n), seed, n)?;
    Ok(match cfg.coefficient {
        CoefficientReading::Conductivity => cb.map(f64::sqrt),
        CoefficientReading::Literal => cb,
    })
}

/// Constant `A` of the homogenized problem: the geometric mean of the two
/// conductivities, taken under the config's coefficient reading.
pub fn effective_coefficient(reading: CoefficientReading) -> f64 {
    match reading {
        CoefficientReading::Conductivity => 3f64.sqrt(),
        CoefficientReading::Literal => 3.0,
    }
}

/// The problem solved for mesh `n` (and checkerboard `seed`).
pub fn build_problem(
    cfg: &ExperimentConfig,
    n: usize,
    seed: u64,
) -> Result<ProblemSpec, ModelError> {
    let zero = ScalarField::unit_square(n)?;
    match cfg.experiment {
        Experiment::Dirichlet => {
            ProblemSpec::new(EnergyModel::dirichlet(), dirichlet_data(n)?, None, None)
        }
        Experiment::MinimalSurface => {
            let phi = obstacle(cfg.obstacle, cfg.scale, n)?;
            ProblemSpec::new(surface_model(cfg.model, None), zero, phi, None)
        }
        Experiment::DoubleObstacle => {
            let (phi, psi, v) = torsion_problem(n)?;
            ProblemSpec::new(
                surface_model(cfg.model, Some(v)),
                zero,
                Some(phi),
                Some(psi),
            )
        }
        Experiment::Homogenization => {
            let model = EnergyModel::HeterogeneousQuadratic {
                coefficient: checkerboard_coefficient(cfg, n, seed)?,
                forcing: Some(zero.map(|_| 1.0)),
            };
            let phi = obstacle(cfg.obstacle, cfg.scale, n)?;
            ProblemSpec::new(model, zero, phi, None)
        }
    }
}

/// Effective constant-coefficient counterpart of a homogenization problem.
pub fn build_homogenized_problem(
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<ProblemSpec, ModelError> {
    let zero = ScalarField::unit_square(n)?;
    let a = effective_coefficient(cfg.coefficient);
    let model = EnergyModel::HeterogeneousQuadratic {
        coefficient: zero.map(|_| a),
        forcing: Some(zero.map(|_| 1.0)),
    };
    let phi = obstacle(cfg.obstacle, cfg.scale, n)?;
    ProblemSpec::new(model, zero, phi, None)
}

pub fn solver_config(cfg: &ExperimentConfig, damping: f64, seed: u64) -> SolverConfig {
    let stopping = match cfg.stopping {
        StoppingKind::Residual => StoppingRule::Residual {
            factor: cfg.tolerance,
        },
        StoppingKind::IterateDiff => StoppingRule::IterateDiff { c: cfg.tolerance },
    };
    let initial = match cfg.experiment {
        Experiment::Dirichlet => InitialGuess::BoundaryField,
        _ => InitialGuess::Extension,
    };
    SolverConfig {
        damping,
        cfl_safety: cfg.cfl_safety,
        stopping,
        max_iters: cfg.max_iters,
        initial,
        seed,
        ..Default::default()
    }
}

pub fn solve(
    kind: SolverKind,
    problem: &ProblemSpec,
    scfg: &SolverConfig,
) -> Result<SolveTrace, SolverError> {
    match kind {
        SolverKind::Accel => pde_accel_solve(problem, scfg),
        SolverKind::PrimalDual => primal_dual_solve(problem, scfg),
        SolverKind::GradientDescent => gradient_descent_solve(problem, scfg),
    }
}

/// Seeds that give distinct runs: only the checkerboard is random.
pub fn effective_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    match cfg.experiment {
        Experiment::Homogenization => cfg.seeds.clone(),
        _ => cfg.seeds.iter().take(1).copied().collect(),
    }
}

/// Runs one entry of the matrix without writing anything.
pub fn run_single(
    cfg: &ExperimentConfig,
    mesh: usize,
    seed: u64,
    damping: f64,
) -> Result<RunOutput, RunError> {
    let problem = build_problem(cfg, mesh, seed)?;
    let scfg = solver_config(cfg, damping, seed);
    let trace = solve(cfg.solver, &problem, &scfg)?;
    let u = &trace.final_field;
    let gap = if cfg.experiment == Experiment::Homogenization {
        let hom = build_homogenized_problem(cfg, mesh)?;
        let t = solve(cfg.solver, &hom, &scfg)?;
        Some(homogenization_gap(u, &t.final_field)?)
    } else {
        None
    };
    let surface = matches!(
        cfg.experiment,
        Experiment::MinimalSurface | Experiment::DoubleObstacle
    );
    let row = RunRow {
        experiment: cfg.experiment,
        solver: cfg.solver,
        model: cfg.model,
        mesh,
        seed,
        damping,
        iterations: trace.iterations,
        converged: trace.converged,
        wall_seconds: trace.wall_time,
        energy: energy(&problem.model, u)?,
        surface_area: surface.then(|| surface_area(u)),
        residual: trace.final_residual(),
        gap,
    };
    Ok(RunOutput {
        row,
        problem,
        trace,
    })
}

fn damping_label(a: f64) -> String {
    let m = a / PI;
    if (m - m.round()).abs() < 1e-12 {
        format!("{}pi", m.round())
    } else {
        format!("{a}")
    }
}

/// File stem of a run's dumps.
pub fn run_stem(row: &RunRow) -> String {
    format!(
        "{}_{}_n{}_s{}_a{}",
        row.experiment.as_str(),
        row.solver.as_str(),
        row.mesh,
        row.seed,
        damping_label(row.damping)
    )
}

/// Field, preview, trace and (with obstacles) contact dumps of one run.
pub fn write_run(dir: &Path, out: &RunOutput) -> Result<(), OutputError> {
    let stem = run_stem(&out.row);
    let u = &out.trace.final_field;
    output::write_field_csv(u, &dir.join(format!("{stem}_u.csv")))?;
    output::write_pgm(u, &dir.join(format!("{stem}_u.pgm")))?;
    output::write_trace_csv(&out.trace, &dir.join(format!("{stem}_trace.csv")))?;
    if out.problem.has_obstacle() {
        let c =
            output::contact_indicator(u, out.problem.lower.as_ref(), out.problem.upper.as_ref());
        output::write_field_csv(&c, &dir.join(format!("{stem}_contact.csv")))?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub const SUMMARY_HEADER: &str =
    "experiment,solver,model,mesh,seed,damping,iterations,converged,wall_seconds,energy,surface_area,residual,gap";

pub fn summary_csv(summary: &Summary) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in &summary.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.16e},{},{},{:.6},{:.16e},{},{:.16e},{}",
            r.experiment.as_str(),
            r.solver.as_str(),
            r.model.as_str(),
            r.mesh,
            r.seed,
            r.damping,
            r.iterations,
            r.converged,
            r.wall_seconds,
            r.energy,
            opt(r.surface_area),
            r.residual,
            opt(r.gap)
        );
    }
    s
}

pub fn complexity_csv(summary: &Summary) -> String {
    let mut s = String::from("damping,seed,iterations_exponent,wall_seconds_exponent\n");
    for c in &summary.complexity {
        let _ = writeln!(
            s,
            "{:.16e},{},{:.6},{:.6}",
            c.damping, c.seed, c.iterations, c.wall_seconds
        );
    }
    s
}

fn complexity_rows(rows: &[RunRow]) -> Result<Vec<ComplexityRow>, AnalysisError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let (a, seed) = (rows[i].damping, rows[i].seed);
        let group: Vec<&RunRow> = rows[i..]
            .iter()
            .take_while(|r| r.damping == a && r.seed == seed)
            .collect();
        i += group.len();
        if group.len() < 3 {
            continue;
        }
        let sizes: Vec<f64> = group.iter().map(|r| (r.mesh * r.mesh) as f64).collect();
        let iters: Vec<f64> = group.iter().map(|r| r.iterations.max(1) as f64).collect();
        let times: Vec<f64> = group.iter().map(|r| r.wall_seconds.max(1e-9)).collect();
        out.push(ComplexityRow {
            damping: a,
            seed,
            iterations: complexity_fit(&sizes, &iters)?,
            wall_seconds: complexity_fit(&sizes, &times)?,
        });
    }
    Ok(out)
}

/// Runs every `(damping, mesh, seed)` combination. Rows are sorted by
/// damping, then seed, then mesh; with an output directory set, dumps and
/// `summary.csv` / `complexity.csv` are written there after all runs finish.
/// Non-convergence is reported in the rows, not as an error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, RunError> {
    let mut runs = Vec::new();
    for &a in &cfg.damping {
        for &n in &cfg.mesh {
            for seed in effective_seeds(cfg) {
                runs.push(run_single(cfg, n, seed, a)?);
            }
        }
    }
    runs.sort_by(|x, y| {
        let (p, q) = (&x.row, &y.row);
        p.damping
            .total_cmp(&q.damping)
            .then(p.seed.cmp(&q.seed))
            .then(p.mesh.cmp(&q.mesh))
    });
    let rows: Vec<RunRow> = runs.iter().map(|r| r.row.clone()).collect();
    let mut distinct = rows.iter().map(|r| r.mesh).collect::<Vec<_>>();
    distinct.sort_unstable();
    distinct.dedup();
    let complexity = if distinct.len() >= 3 {
        complexity_rows(&rows)?
    } else {
        Vec::new()
    };
    let summary = Summary { rows, complexity };

    if let Some(dir) = &cfg.output {
        if cfg.write_fields {
            for r in &runs {
                write_run(dir, r)?;
            }
        }
        write_summary(dir, &summary)?;
    }
    Ok(summary)
}

/// `summary.csv`, plus `complexity.csv` when there is a fit.
pub fn write_summary(dir: &Path, summary: &Summary) -> Result<(), OutputError> {
    output::write_bytes(&dir.join("summary.csv"), summary_csv(summary).as_bytes())?;
    if !summary.complexity.is_empty() {
        output::write_bytes(
            &dir.join("complexity.csv"),
            complexity_csv(summary).as_bytes(),
        )?;
    }
    Ok(())
}

/// Fixed-width text rendering of a summary for the terminal.
pub fn format_table(summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:<17} {:>6} {:>6} {:>8} {:>9} {:>5} {:>10} {:>14} {:>10} {:>11}",
        "experiment",
        "solver",
        "mesh",
        "seed",
        "damping",
        "iters",
        "conv",
        "time_s",
        "energy",
        "area",
        "residual"
    );
    for r in &summary.rows {
        let area = r
            .surface_area
            .map(|a| format!("{a:.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<16} {:<17} {:>6} {:>6} {:>8} {:>9} {:>5} {:>10.3} {:>14.6e} {:>10} {:>11.3e}",
            r.experiment.as_str(),
            r.solver.as_str(),
            format!("{}²", r.mesh),
            r.seed,
            damping_label(r.damping),
            r.iterations,
            if r.converged { "yes" } else { "NO" },
            r.wall_seconds,
            r.energy,
            area,
            r.residual
        );
    }
    for c in &summary.complexity {
        let _ = writeln!(
            s,
            "complexity (damping {}, seed {}): iterations ~ N^{:.3}, time ~ N^{:.3}",
            damping_label(c.damping),
            c.seed,
            c.iterations,
            c.wall_seconds
        );
    }
    s
}
