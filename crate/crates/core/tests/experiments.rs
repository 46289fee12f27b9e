//! Full solves on the catalog problems.

use std::f64::consts::PI;

use pdeaccel_core::analysis::{audit_trace, homogenization_gap};
use pdeaccel_core::grid::linf_norm;
use pdeaccel_core::models::{checkerboard, obstacle_phi1, obstacle_phi2, torsion_problem};
use pdeaccel_core::solvers::{
    gradient_descent_solve, pde_accel_solve, primal_dual_solve, InitialGuess,
};
use pdeaccel_core::{EnergyModel, ProblemSpec, ScalarField, SolverConfig, StoppingRule};

fn dirichlet_problem(n: usize) -> ProblemSpec {
    let dx = 1.0 / (n - 1) as f64;
    let g = ScalarField::from_fn(n, n, dx, |x1, x2| {
        (2.0 * PI * x1 * x1).sin() + (2.0 * PI * x2 * x2).sin()
    })
    .unwrap();
    ProblemSpec::new(EnergyModel::dirichlet(), g, None, None).unwrap()
}

fn dirichlet_config() -> SolverConfig {
    SolverConfig {
        cfl_safety: 1.0,
        initial: InitialGuess::BoundaryField,
        ..Default::default()
    }
}

fn phi1_problem(n: usize) -> ProblemSpec {
    let z = ScalarField::unit_square(n).unwrap();
    ProblemSpec::new(
        EnergyModel::minimal_surface(),
        z,
        Some(obstacle_phi1(50.0, n).unwrap()),
        None,
    )
    .unwrap()
}

fn torsion(n: usize) -> ProblemSpec {
    let (phi, psi, v) = torsion_problem(n).unwrap();
    let model = EnergyModel::NonlinearMinimalSurface { forcing: Some(v) };
    ProblemSpec::new(
        model,
        ScalarField::unit_square(n).unwrap(),
        Some(phi),
        Some(psi),
    )
    .unwrap()
}

fn gap(a: &ScalarField, b: &ScalarField) -> f64 {
    homogenization_gap(a, b).unwrap()
}

#[test]
fn dirichlet_total_energy_decreases() {
    let t = pde_accel_solve(&dirichlet_problem(64), &dirichlet_config()).unwrap();
    assert!(t.converged);
    let (worst, first) = audit_trace(&t, 1e-8);
    assert!(first.is_none(), "increase {worst:e} at step {first:?}");
    let total = t.total_energy();
    assert!(total.last().unwrap() < &total[0]);
}

#[test]
fn obstacle_runs_do_not_gain_energy() {
    for p in [phi1_problem(64), torsion(64)] {
        let t = pde_accel_solve(&p, &SolverConfig::default()).unwrap();
        assert!(audit_trace(&t, 1e-8).1.is_none());
    }
}

#[test]
fn stiff_penalty_reproduces_projection() {
    for p in [phi1_problem(64), torsion(64)] {
        let proj = SolverConfig::default();
        let pen = SolverConfig {
            penalty: Some(1e10),
            ..proj.clone()
        };
        let a = pde_accel_solve(&p, &proj).unwrap();
        let b = pde_accel_solve(&p, &pen).unwrap();
        let scale = linf_norm(&a.final_field);
        assert!(gap(&a.final_field, &b.final_field) <= 1e-6 * scale);
        assert!(
            a.iterations.abs_diff(b.iterations) <= 1,
            "{} vs {}",
            a.iterations,
            b.iterations
        );
    }
}

#[test]
fn solvers_stop_at_a_converged_start() {
    let p = phi1_problem(32);
    let tight = SolverConfig::default().with_stopping(StoppingRule::Residual { factor: 0.1 });
    let u = pde_accel_solve(&p, &tight).unwrap().final_field;
    let cfg = SolverConfig {
        initial: InitialGuess::Field(u),
        ..Default::default()
    };
    for t in [
        pde_accel_solve(&p, &cfg).unwrap(),
        primal_dual_solve(&p, &cfg).unwrap(),
        gradient_descent_solve(&p, &cfg).unwrap(),
    ] {
        assert!(t.converged);
        assert_eq!(t.iterations, 0);
    }
}

#[test]
fn linearized_phi2_solution_is_mirror_symmetric() {
    let n = 48;
    let z = ScalarField::unit_square(n).unwrap();
    let p = ProblemSpec::new(
        EnergyModel::linearized_minimal_surface(),
        z,
        Some(obstacle_phi2(n).unwrap()),
        None,
    )
    .unwrap();
    let u = pde_accel_solve(&p, &SolverConfig::default())
        .unwrap()
        .final_field;
    for i in 0..n {
        for j in 0..n {
            assert!((u.get(i, j) - u.get(n - 1 - i, j)).abs() <= 1e-8);
        }
    }
}

#[test]
fn acceleration_beats_gradient_descent() {
    let p = dirichlet_problem(64);
    let accel = pde_accel_solve(&p, &dirichlet_config()).unwrap();
    let gd = gradient_descent_solve(&p, &dirichlet_config()).unwrap();
    assert!(accel.converged && gd.converged);
    assert!(
        gd.iterations > 10 * accel.iterations,
        "{} vs {}",
        gd.iterations,
        accel.iterations
    );
}

fn homogenized(n: usize, model: EnergyModel) -> ScalarField {
    let z = ScalarField::unit_square(n).unwrap();
    let p = ProblemSpec::new(model, z, None, None).unwrap();
    let cfg = SolverConfig::default().with_stopping(StoppingRule::Residual { factor: 1e-9 });
    let t = pde_accel_solve(&p, &cfg).unwrap();
    assert!(t.converged);
    t.final_field
}

#[test]
fn constant_coefficient_matches_scaled_dirichlet() {
    let n = 32;
    let one = ScalarField::unit_square(n).unwrap().map(|_| 1.0);
    let a = homogenized(
        n,
        EnergyModel::HeterogeneousQuadratic {
            coefficient: one.map(|_| 3.0),
            forcing: Some(one.clone()),
        },
    );
    let b = homogenized(
        n,
        EnergyModel::DirichletQuadratic {
            b: 9.0,
            forcing: Some(one),
        },
    );
    assert!(gap(&a, &b) <= 1e-8, "{}", gap(&a, &b));
}

/// Mean gap to the effective problem over five draws shrinks as the
/// checkerboard is refined.
#[test]
fn homogenization_gap_shrinks_with_cell_count() {
    let n = 256;
    let z = ScalarField::unit_square(n).unwrap();
    let one = z.map(|_| 1.0);
    let phi = obstacle_phi1(50.0, n).unwrap();
    let cfg = SolverConfig::default().with_damping(6.0 * PI);
    let solve = |coefficient: ScalarField| {
        let model = EnergyModel::HeterogeneousQuadratic {
            coefficient,
            forcing: Some(one.clone()),
        };
        let p = ProblemSpec::new(model, z.clone(), Some(phi.clone()), None).unwrap();
        let t = pde_accel_solve(&p, &cfg).unwrap();
        assert!(t.converged);
        t.final_field
    };
    let u_hom = solve(z.map(|_| 3f64.sqrt()));
    let means: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&cells| {
            let total: f64 = (0..5)
                .map(|seed| {
                    gap(
                        &solve(checkerboard(cells, seed, n).unwrap().map(f64::sqrt)),
                        &u_hom,
                    )
                })
                .sum();
            total / 5.0
        })
        .collect();
    assert!(means[0] >= means[1] && means[1] >= means[2], "{means:?}");
}
