//! Field, trace and image dumps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pdeaccel_core::{GridError, ScalarField, SolveTrace};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: GridError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}

/// Writes `field` in the `nx,ny,dx` + rows CSV layout.
pub fn write_field_csv(field: &ScalarField, path: &Path) -> Result<(), OutputError> {
    write_bytes(path, field.to_csv().as_bytes())
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField, OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    ScalarField::from_csv(&text).map_err(|source| OutputError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// 8-bit grayscale `P5` image bytes, min-max normalized (a constant field
/// maps to 0). The top image row is the largest `x2`.
pub fn pgm_bytes(field: &ScalarField) -> Vec<u8> {
    let (nx, ny) = field.shape();
    let (lo, hi) = (field.min_value(), field.max_value());
    let span = hi - lo;
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(nx * ny);
    for i in (0..ny).rev() {
        for j in 0..nx {
            let v = field.get(i, j);
            let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
            out.push((t * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn write_pgm(field: &ScalarField, path: &Path) -> Result<(), OutputError> {
    write_bytes(path, &pgm_bytes(field))
}

/// `iter,residual,kinetic,potential,total`, one row for the initial state and
/// one per iteration.
pub fn trace_csv(trace: &SolveTrace) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("iter,residual,kinetic,potential,total\n");
    let rows = trace
        .residual_history
        .iter()
        .zip(&trace.kinetic_history)
        .zip(&trace.potential_history);
    for (n, ((r, k), e)) in rows.enumerate() {
        let _ = writeln!(out, "{n},{r:.16e},{k:.16e},{e:.16e},{:.16e}", k + e);
    }
    out
}

pub fn write_trace_csv(trace: &SolveTrace, path: &Path) -> Result<(), OutputError> {
    write_bytes(path, trace_csv(trace).as_bytes())
}

/// Contact indicator: 1 where `u - φ <= 1e-8`, -1 where `ψ - u <= 1e-8`,
/// 0 elsewhere.
pub fn contact_indicator(
    u: &ScalarField,
    lower: Option<&ScalarField>,
    upper: Option<&ScalarField>,
) -> ScalarField {
    let mut out = u.zeros_like();
    for k in 0..u.len() {
        let v = u.values()[k];
        out.values_mut()[k] = if lower.is_some_and(|p| v - p.values()[k] <= 1e-8) {
            1.0
        } else if upper.is_some_and(|p| p.values()[k] - v <= 1e-8) {
            -1.0
        } else {
            0.0
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_pgm_is_black() {
        let f = ScalarField::constant(4, 3, 0.5, 7.0).unwrap();
        let bytes = pgm_bytes(&f);
        let header = b"P5\n4 3\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0u8; 12]);
    }

    #[test]
    fn pgm_normalizes_and_flips() {
        let f = ScalarField::from_fn(3, 3, 0.5, |_, y| y).unwrap();
        let bytes = pgm_bytes(&f);
        let px = &bytes[bytes.len() - 9..];
        assert_eq!(px, &[255, 255, 255, 128, 128, 128, 0, 0, 0]);
    }

    #[test]
    fn contact_marks() {
        let u = ScalarField::from_vec(3, 3, 0.5, vec![0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0])
            .unwrap();
        let lo = u.map(|_| 0.0);
        let hi = u.map(|_| 2.0);
        let c = contact_indicator(&u, Some(&lo), Some(&hi));
        assert_eq!(c.values()[..3], [1.0, 0.0, -1.0]);
        let c = contact_indicator(&u, None, None);
        assert!(c.values().iter().all(|v| *v == 0.0));
    }
}
