//! Line-oriented experiment configs.
//!
//! ```text
//! # comments run to end of line
//! experiment = homogenization
//! solver     = accel
//! mesh       = 64, 128
//! damping    = 2pi, 6pi, 9pi
//! seeds      = 0, 1, 2
//! ```
//!
//! Every key may appear once. Reals accept a trailing `pi` (or `π`)
//! multiplier, so `6pi`, `6*pi` and `18.849555921538759` are the same value.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: malformed value for `{key}`: {reason}")]
    Malformed {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("line {line}: invalid `{key}`: {reason}")]
    Invalid {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("missing required key `{key}`")]
    Missing { key: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Dirichlet,
    MinimalSurface,
    DoubleObstacle,
    Homogenization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Accel,
    PrimalDual,
    GradientDescent,
}

/// Integrand used by the minimal surface and double obstacle experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    #[default]
    Nonlinear,
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    None,
    Phi1,
    Phi2,
}

/// How the checkerboard values `{1, 9}` enter the heterogeneous energy
/// `½ A² |∇u|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientReading {
    /// The values are the conductivity `A²`; effective coefficient 3.
    #[default]
    Conductivity,
    /// The values are `A` itself, so `A² ∈ {1, 81}`; effective coefficient 9.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingKind {
    Residual,
    IterateDiff,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($name:literal => $val:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($val),)+
                    _ => Err(format!(
                        concat!("unknown ", $what, " `{}`, expected one of: {}"),
                        s,
                        [$($name),+].join(", ")
                    )),
                }
            }
        }

        impl $ty {
            pub fn as_str(&self) -> &'static str {
                $(if *self == $val { return $name; })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(Experiment, "experiment", {
    "dirichlet" => Experiment::Dirichlet,
    "minimal_surface" => Experiment::MinimalSurface,
    "double_obstacle" => Experiment::DoubleObstacle,
    "homogenization" => Experiment::Homogenization,
});

keyword_enum!(SolverKind, "solver", {
    "accel" => SolverKind::Accel,
    "primal_dual" => SolverKind::PrimalDual,
    "gradient_descent" => SolverKind::GradientDescent,
});

keyword_enum!(ModelKind, "model", {
    "nonlinear" => ModelKind::Nonlinear,
    "linearized" => ModelKind::Linearized,
});

keyword_enum!(ObstacleKind, "obstacle", {
    "none" => ObstacleKind::None,
    "phi1" => ObstacleKind::Phi1,
    "phi2" => ObstacleKind::Phi2,
});

keyword_enum!(CoefficientReading, "coefficient reading", {
    "conductivity" => CoefficientReading::Conductivity,
    "literal" => CoefficientReading::Literal,
});

keyword_enum!(StoppingKind, "stopping rule", {
    "residual" => StoppingKind::Residual,
    "iterate_diff" => StoppingKind::IterateDiff,
});

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub solver: SolverKind,
    pub model: ModelKind,
    pub mesh: Vec<usize>,
    pub obstacle: ObstacleKind,
    /// Obstacle divisor: the run uses `φ / scale`.
    pub scale: f64,
    /// One run per damping value.
    pub damping: Vec<f64>,
    pub cfl_safety: f64,
    pub stopping: StoppingKind,
    /// Residual factor or iterate-difference constant `C`.
    pub tolerance: f64,
    pub max_iters: usize,
    pub seeds: Vec<u64>,
    /// Checkerboard cells per side; `None` uses `mesh / 4`.
    pub cells: Option<usize>,
    pub coefficient: CoefficientReading,
    pub output: Option<PathBuf>,
    /// Write field, trace and image dumps next to the summary.
    pub write_fields: bool,
}

impl ExperimentConfig {
    /// Defaults for everything but the experiment, solver and mesh list.
    pub fn new(experiment: Experiment, solver: SolverKind, mesh: Vec<usize>) -> Self {
        let (obstacle, scale) = match experiment {
            Experiment::MinimalSurface | Experiment::Homogenization => (ObstacleKind::Phi1, 50.0),
            Experiment::Dirichlet | Experiment::DoubleObstacle => (ObstacleKind::None, 1.0),
        };
        Self {
            experiment,
            solver,
            model: ModelKind::default(),
            mesh,
            obstacle,
            scale,
            damping: vec![2.0 * PI],
            cfl_safety: default_safety(experiment),
            stopping: StoppingKind::Residual,
            tolerance: 1.0,
            max_iters: 200_000,
            seeds: vec![0],
            cells: None,
            coefficient: CoefficientReading::default(),
            output: None,
            write_fields: true,
        }
    }

    /// Checkerboard cells per side at mesh `n`.
    pub fn cells_for(&self, n: usize) -> usize {
        self.cells.unwrap_or(n / 4)
    }
}

/// The Dirichlet runs use the saturated wave/heat step; everything else
/// keeps the 0.8 margin.
fn default_safety(experiment: Experiment) -> f64 {
    match experiment {
        Experiment::Dirichlet => 1.0,
        _ => 0.8,
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "solver",
    "model",
    "mesh",
    "obstacle",
    "scale",
    "damping",
    "cfl_safety",
    "stopping",
    "tolerance",
    "max_iters",
    "seeds",
    "cells",
    "coefficient",
    "output",
    "write_fields",
];

/// Parses a real with an optional `pi` factor: `2`, `2pi`, `2*pi`, `π`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, factor) = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(rest) => (rest.trim().trim_end_matches('*').trim(), PI),
        None => (t, 1.0),
    };
    let base = if num.is_empty() && factor != 1.0 {
        1.0
    } else {
        num.parse::<f64>().map_err(|e| format!("`{t}`: {e}"))?
    };
    let v = base * factor;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{t}` is not finite"))
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .map(|t| {
            if t.is_empty() {
                Err("empty list entry".to_string())
            } else {
                item(t)
            }
        })
        .collect()
}

fn parse_uint(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: body.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if entries.iter().any(|(_, k, _)| *k == key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        entries.push((line, key, value));
    }

    let find = |key: &str| {
        entries
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|&(l, _, v)| (l, v))
    };
    fn get<T>(
        found: Option<(usize, &str)>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<(usize, T)>, ConfigError> {
        match found {
            None => Ok(None),
            Some((line, v)) => {
                parse(v)
                    .map(|t| Some((line, t)))
                    .map_err(|reason| ConfigError::Malformed {
                        line,
                        key: key.to_string(),
                        reason,
                    })
            }
        }
    }
    let required = |key: &'static str| find(key).ok_or(ConfigError::Missing { key });

    let (_, experiment) = get(
        Some(required("experiment")?),
        "experiment",
        Experiment::from_str,
    )?
    .unwrap();
    let (_, solver) = get(Some(required("solver")?), "solver", SolverKind::from_str)?.unwrap();
    let (mesh_line, mesh) = get(Some(required("mesh")?), "mesh", |s| {
        parse_list(s, parse_uint)
    })?
    .unwrap();
    let mut cfg = ExperimentConfig::new(experiment, solver, mesh);

    let invalid = |line: usize, key: &str, reason: String| ConfigError::Invalid {
        line,
        key: key.to_string(),
        reason,
    };
    if let Some(n) = cfg.mesh.iter().find(|&&n| n < 8) {
        return Err(invalid(
            mesh_line,
            "mesh",
            format!("entries must be at least 8, got {n}"),
        ));
    }
    if let Some((_, m)) = get(find("model"), "model", ModelKind::from_str)? {
        cfg.model = m;
    }
    if let Some((line, o)) = get(find("obstacle"), "obstacle", ObstacleKind::from_str)? {
        let allowed = match experiment {
            Experiment::Dirichlet | Experiment::DoubleObstacle => o == ObstacleKind::None,
            Experiment::MinimalSurface => o != ObstacleKind::None,
            Experiment::Homogenization => true,
        };
        if !allowed {
            let reason = format!(
                "`{}` is not available for the {} experiment",
                o.as_str(),
                experiment.as_str()
            );
            return Err(invalid(line, "obstacle", reason));
        }
        if o == ObstacleKind::Phi2 && find("scale").is_none() {
            cfg.scale = 1.0;
        }
        cfg.obstacle = o;
    }
    if let Some((line, s)) = get(find("scale"), "scale", parse_real)? {
        if !(s > 0.0) {
            return Err(invalid(line, "scale", format!("must be positive, got {s}")));
        }
        cfg.scale = s;
    }
    if let Some((line, d)) = get(find("damping"), "damping", |s| parse_list(s, parse_real))? {
        if let Some(a) = d.iter().find(|a| !(**a > 0.0)) {
            return Err(invalid(
                line,
                "damping",
                format!("must be positive, got {a}"),
            ));
        }
        cfg.damping = d;
    }
    if let Some((line, s)) = get(find("cfl_safety"), "cfl_safety", parse_real)? {
        if !(s > 0.0 && s <= 1.0) {
            return Err(invalid(
                line,
                "cfl_safety",
                format!("must lie in (0, 1], got {s}"),
            ));
        }
        cfg.cfl_safety = s;
    }
    if let Some((_, s)) = get(find("stopping"), "stopping", StoppingKind::from_str)? {
        cfg.stopping = s;
        if s == StoppingKind::IterateDiff {
            cfg.tolerance = 0.01;
        }
    }
    if let Some((line, t)) = get(find("tolerance"), "tolerance", parse_real)? {
        if !(t > 0.0) {
            return Err(invalid(
                line,
                "tolerance",
                format!("must be positive, got {t}"),
            ));
        }
        cfg.tolerance = t;
    }
    if let Some((line, m)) = get(find("max_iters"), "max_iters", parse_uint)? {
        if m == 0 {
            return Err(invalid(line, "max_iters", "must be at least 1".into()));
        }
        cfg.max_iters = m;
    }
    if let Some((_, s)) = get(find("seeds"), "seeds", |s| {
        parse_list(s, |t| t.parse::<u64>().map_err(|e| format!("`{t}`: {e}")))
    })? {
        cfg.seeds = s;
    }
    if let Some((line, c)) = get(find("cells"), "cells", parse_uint)? {
        if c == 0 {
            return Err(invalid(line, "cells", "must be at least 1".into()));
        }
        if let Some(n) = cfg.mesh.iter().find(|&&n| n % c != 0) {
            return Err(invalid(
                line,
                "cells",
                format!("mesh {n} is not a multiple of {c}"),
            ));
        }
        cfg.cells = Some(c);
    } else if experiment == Experiment::Homogenization {
        if let Some(n) = cfg.mesh.iter().find(|&&n| n % 4 != 0) {
            return Err(invalid(
                mesh_line,
                "mesh",
                format!("default cells = mesh/4 needs a multiple of 4, got {n}"),
            ));
        }
    }
    if let Some((_, c)) = get(
        find("coefficient"),
        "coefficient",
        CoefficientReading::from_str,
    )? {
        cfg.coefficient = c;
    }
    if let Some((_, o)) = get(find("output"), "output", |s| Ok(PathBuf::from(s)))? {
        cfg.output = Some(o);
    }
    if let Some((_, w)) = get(find("write_fields"), "write_fields", parse_bool)? {
        cfg.write_fields = w;
    }
    Ok(cfg)
}

/// Built-in configs for the `table` subcommand.
pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "dirichlet" => "experiment = dirichlet\nsolver = accel\nmesh = 64, 128, 256\n",
        "minimal-surface-phi1" => {
            "experiment = minimal_surface\nsolver = accel\nmesh = 64, 128, 256\nobstacle = phi1\nscale = 50\n"
        }
        "minimal-surface-phi2" => {
            "experiment = minimal_surface\nsolver = accel\nmesh = 64, 128, 256\nobstacle = phi2\n"
        }
        "double-obstacle" => "experiment = double_obstacle\nsolver = accel\nmesh = 64, 128, 256\n",
        "homogenization" => {
            "experiment = homogenization\nsolver = accel\nmesh = 64, 128, 256\ndamping = 2pi, 6pi, 9pi\n"
        }
        _ => return None,
    })
}

pub const PRESETS: &[&str] = &[
    "dirichlet",
    "minimal-surface-phi1",
    "minimal-surface-phi2",
    "double-obstacle",
    "homogenization",
];
