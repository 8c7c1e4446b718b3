use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::Real;

use super::config::InterferenceMode;

/// `sum_u log2(1 + |h_u^T a_u|^2 / (I_u + noise))`.
pub fn spectral_efficiency<T: Real>(
    h: &CMatrix<T>,
    weights: &[CVector<T>],
    noise: T,
    mode: InterferenceMode,
) -> Result<T> {
    let users = h.ncols();
    if weights.len() != users {
        return Err(Error::DimensionMismatch {
            context: "precoders vs users",
            expected: users,
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| w.len() != h.nrows()) {
        return Err(Error::DimensionMismatch {
            context: "weight length vs antennas",
            expected: h.nrows(),
            actual: weights.iter().map(|w| w.len()).find(|&l| l != h.nrows()).unwrap_or(0),
        });
    }
    // g[(i, j)] = h_i^T a_j
    let g: CMatrix<T> = CMatrix::from_fn(users, users, |i, j| h.column(i).dot(&weights[j]));
    let mut total = T::zero();
    for u in 0..users {
        let signal = g[(u, u)].norm_sqr();
        let mut interference = T::zero();
        for j in (0..users).filter(|&j| j != u) {
            interference += match mode {
                InterferenceMode::Physical => g[(u, j)].norm_sqr(),
                InterferenceMode::Literal => g[(j, j)].norm_sqr(),
            };
        }
        total += (T::one() + signal / (interference + noise)).log2();
    }
    Ok(total)
}

/// Noise variance for a downlink SNR of `U / noise`.
pub fn downlink_snr_to_noise(snr_db: f64, users: usize) -> Result<f64> {
    if users == 0 {
        return Err(Error::invalid("at least one user is required"));
    }
    Ok(users as f64 / 10f64.powf(snr_db / 10.0))
}

/// Sample mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Two-pass summary accumulated in slice order.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            stderr: f64::NAN,
            count: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        mean,
        stderr,
        count: n,
    }
}
