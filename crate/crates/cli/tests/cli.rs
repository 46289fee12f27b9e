use std::f64::consts::PI;
use std::fs;
use std::process::Command;

use pdeaccel_cli::config::{Experiment, ExperimentConfig, SolverKind};
use pdeaccel_cli::{output, parse_config, run_experiment, run_single};
use pdeaccel_core::ScalarField;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdeaccel"))
}

#[test]
fn zero_field_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    output::write_field_csv(&ScalarField::zeros(3, 3, 0.5).unwrap(), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("3,3,0.5"));
    let values: Vec<f64> = lines
        .flat_map(|l| l.split(','))
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(values, vec![0.0; 9]);
}

#[test]
fn dirichlet_row_and_trace_length() {
    let cfg = parse_config("experiment = dirichlet\nsolver = accel\nmesh = 64").unwrap();
    let out = run_single(&cfg, 64, 0, cfg.damping[0]).unwrap();
    assert!(out.row.converged);
    assert!(
        (out.row.iterations as f64 - 399.0).abs() <= 0.1 * 399.0,
        "{}",
        out.row.iterations
    );
    let csv = output::trace_csv(&out.trace);
    assert_eq!(
        csv.lines().next(),
        Some("iter,residual,kinetic,potential,total")
    );
    assert_eq!(csv.lines().count() - 1, out.row.iterations + 1);
}

#[test]
fn homogenization_with_strong_damping() {
    let cfg = parse_config(
        "experiment = homogenization\nsolver = accel\nmesh = 64\ncells = 16\ndamping = 6pi",
    )
    .unwrap();
    let s = run_experiment(&cfg).unwrap();
    let r = &s.rows[0];
    assert!((458..=686).contains(&r.iterations), "{}", r.iterations);
    assert!(r.gap.unwrap() > 0.0);
    assert!(r.surface_area.is_none());
}

#[test]
fn double_obstacle_row() {
    let cfg = ExperimentConfig::new(Experiment::DoubleObstacle, SolverKind::Accel, vec![64]);
    let r = run_single(&cfg, 64, 0, 2.0 * PI).unwrap().row;
    assert!(r.converged);
    assert!(
        (r.iterations as f64 - 382.0).abs() <= 0.15 * 382.0,
        "{}",
        r.iterations
    );
    assert!(r.surface_area.unwrap() > 1.0);
}

#[test]
fn bench_writes_artifacts_and_complexity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "experiment = minimal_surface\nsolver = accel\nmesh = 16, 24, 32\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["bench", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(out.join("complexity.csv").exists());
    for n in [16, 24, 32] {
        for suffix in ["u.csv", "u.pgm", "trace.csv", "contact.csv"] {
            let f = out.join(format!("minimal_surface_accel_n{n}_s0_a2pi_{suffix}"));
            assert!(f.exists(), "{}", f.display());
        }
    }
    assert!(String::from_utf8_lossy(&status.stdout).contains("complexity"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("h.cfg");
    fs::write(
        &cfg_path,
        "experiment = homogenization\nsolver = accel\nmesh = 16\nseeds = 1, 2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["bench", "--seed", "9", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let seeds: Vec<&str> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap())
        .collect();
    assert_eq!(seeds, ["9"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(
        &bad,
        "experiment = dirichlet\nsolver = accel\nmesh = 64\ndamping = -1\n",
    )
    .unwrap();
    let o = bin()
        .args(["solve", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("damping") && err.contains("line 4"), "{err}");

    let short = dir.path().join("short.cfg");
    fs::write(
        &short,
        "experiment = dirichlet\nsolver = accel\nmesh = 32\nmax_iters = 5\n",
    )
    .unwrap();
    let o = bin()
        .args(["solve", "--config"])
        .arg(&short)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = bin().args(["table", "--list"]).output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("homogenization"));
    assert_eq!(
        bin()
            .args(["table", "nope"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn field_files_round_trip(nx in 3usize..10, ny in 3usize..10, seed in any::<u64>(), exp in -200i32..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0) * 10f64.powi(exp)).collect();
        let f = ScalarField::from_vec(nx, ny, 1.0 / 7.0, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        output::write_field_csv(&f, &path).unwrap();
        prop_assert_eq!(output::read_field_csv(&path).unwrap(), f);
    }
}
