//! Field coupling matrix sources: a plain-text file format and a seeded
//! synthetic generator.
//!
//! File layout: a header line `M <int>`, then `M` rows, each row holding `M`
//! `re,im` pairs separated by `;`. Values are written with the shortest
//! representation that parses back to the identical float.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::em_array::ArrayConfig;
use crate::error::{Error, Result};
use crate::linalg::{cplx, general_condition, CMatrix};
use crate::scalar::Real;

/// Default ceiling on the condition number of an accepted coupling matrix.
pub const DEFAULT_CONDITION_CEILING: f64 = 1e12;

pub fn format_coupling_matrix<T: Real>(c: &CMatrix<T>) -> String {
    let m = c.nrows();
    let mut out = format!("M {m}\n");
    for i in 0..m {
        for j in 0..c.ncols() {
            if j > 0 {
                out.push(';');
            }
            let _ = write!(out, "{},{}", c[(i, j)].re, c[(i, j)].im);
        }
        out.push('\n');
    }
    out
}

pub fn save_coupling_matrix<T: Real>(c: &CMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch {
            context: "coupling matrix must be square",
            expected: c.nrows(),
            actual: c.ncols(),
        });
    }
    fs::write(path, format_coupling_matrix(c))?;
    Ok(())
}

fn parse_scalar<T: Real>(s: &str, line: usize) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {:?}", s.trim()),
    })
}

pub fn parse_coupling_matrix<T: Real>(text: &str) -> Result<CMatrix<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let m: usize = header
        .strip_prefix('M')
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::Parse {
            line: hline,
            message: format!("expected header `M <int>`, found {header:?}"),
        })?;

    let mut c = CMatrix::zeros(m, m);
    let mut rows = 0;
    for (lineno, line) in lines {
        if rows == m {
            return Err(Error::DimensionMismatch {
                context: "coupling file row count",
                expected: m,
                actual: rows + 1,
            });
        }
        let cells: Vec<&str> = line.split(';').collect();
        if cells.len() != m {
            return Err(Error::DimensionMismatch {
                context: "coupling file column count",
                expected: m,
                actual: cells.len(),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let (re, im) = cell.split_once(',').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected `re,im`, found {cell:?}"),
            })?;
            c[(rows, j)] = cplx(parse_scalar(re, lineno)?, parse_scalar(im, lineno)?);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::DimensionMismatch {
            context: "coupling file row count",
            expected: m,
            actual: rows,
        });
    }
    Ok(c)
}

/// Loads and validates a coupling matrix. `expected_dim` is checked against
/// the header when given; matrices whose condition number exceeds
/// `condition_ceiling` are rejected.
pub fn load_coupling_matrix<T: Real>(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
    condition_ceiling: f64,
) -> Result<CMatrix<T>> {
    let text = fs::read_to_string(path)?;
    let c: CMatrix<T> = parse_coupling_matrix(&text)?;
    if let Some(m) = expected_dim {
        if c.nrows() != m {
            return Err(Error::DimensionMismatch {
                context: "coupling matrix vs array size",
                expected: m,
                actual: c.nrows(),
            });
        }
    }
    check_invertible(&c, condition_ceiling)?;
    Ok(c)
}

fn check_invertible<T: Real>(c: &CMatrix<T>, ceiling: f64) -> Result<f64> {
    let cond = general_condition(c).as_f64();
    if !(cond <= ceiling) {
        log::warn!("coupling matrix condition number {cond:.3e} exceeds {ceiling:.1e}");
        return Err(Error::Singular {
            context: "field coupling matrix is near-singular".into(),
            condition: cond,
        });
    }
    Ok(cond)
}

/// Non-physical stand-in for a full-wave coupling matrix, meant for exercising
/// the estimators.
///
/// `C = I + strength * P`, with `P[m][n] ~ CN(0, 1) / (1 + |m - n|)` drawn from
/// a ChaCha8 stream seeded with `seed`.
pub fn synth_coupling_matrix<T: Real>(
    cfg: &ArrayConfig<T>,
    strength: T,
    seed: u64,
) -> Result<CMatrix<T>> {
    if strength < T::zero() || !strength.is_finite() {
        return Err(Error::invalid(format!(
            "coupling strength must be non-negative, got {strength}"
        )));
    }
    let m = cfg.num_antennas();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = T::lit(0.5).sqrt();
    let mut c = CMatrix::identity(m, m);
    // row-major draw order keeps the output independent of storage layout
    for i in 0..m {
        for j in 0..m {
            let g = cplx(T::std_normal(&mut rng), T::std_normal(&mut rng)) * half;
            let decay = T::one() / (T::one() + T::from_count(i.abs_diff(j)));
            c[(i, j)] += g * (decay * strength);
        }
    }
    check_invertible(&c, DEFAULT_CONDITION_CEILING).map_err(|e| match e {
        Error::Singular { condition, .. } => Error::Singular {
            context: format!(
                "synthetic coupling matrix with strength {strength} is singular; use a smaller strength"
            ),
            condition,
        },
        other => other,
    })?;
    Ok(c)
}
