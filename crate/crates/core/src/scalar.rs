//! Scalar abstraction shared by every numerical module.
//!
//! All array, channel and precoding code is written against [`Real`], which is
//! implemented for `f32` and `f64`. Complex quantities are `Complex<T>`.

use std::fmt;
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point field usable by the simulation core.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Default
    + fmt::Display
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    /// Machine epsilon.
    fn eps() -> Self;

    /// Draws one sample of N(0, 1).
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draws one sample of U[0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Relative threshold below which a spectral quantity is treated as zero.
    ///
    /// `1e-10` in double precision, widened to a few hundred ulps otherwise.
    fn rank_tolerance() -> Self {
        let floor = Self::eps() * Self::lit(1e3);
        let tol = Self::lit(1e-10);
        if tol > floor {
            tol
        } else {
            floor
        }
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_tolerance_tracks_precision() {
        assert_eq!(<f64 as Real>::rank_tolerance(), 1e-10);
        assert!(<f32 as Real>::rank_tolerance() > 1e-5);
    }

    #[test]
    fn literal_round_trip() {
        assert_eq!(<f64 as Real>::lit(0.25).as_f64(), 0.25);
        assert_eq!(<f32 as Real>::lit(0.5).as_f64(), 0.5);
    }
}
