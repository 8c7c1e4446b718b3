#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Superdirective antenna array simulation: array electromagnetics,
//! multipath channels, coupling-aware channel estimation, superdirective
//! multi-user precoding and wideband operation.
//!
//! Numerical modules are generic over [`Real`] (`f32` or `f64`); the
//! experiment harness in [`sim`] runs in `f64`.

pub mod channel;
pub mod coupling;
pub mod em_array;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod precoding;
pub mod scalar;
pub mod sim;
pub mod wideband;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, RMatrix};
pub use scalar::Real;

pub use nalgebra::Complex;

/// Double-precision aliases.
pub type ArrayConfig = em_array::ArrayConfig<f64>;
pub type SteeringVector = em_array::SteeringVector<f64>;
pub type CouplingModel = em_array::CouplingModel<f64>;
pub type MultipathSpec = channel::MultipathSpec<f64>;
pub type ChannelRealization = channel::ChannelRealization<f64>;
pub type PilotBook = estimation::PilotBook<f64>;
pub type LinearEstimator = estimation::LinearEstimator<f64>;
pub type Precoder = precoding::Precoder<f64>;
pub type NullSpaceBasis = precoding::NullSpaceBasis<f64>;
pub type SubcarrierGrid = wideband::SubcarrierGrid<f64>;
pub type WidebandPlan = wideband::WidebandPlan<f64>;
pub type CVec = CVector<f64>;
pub type CMat = CMatrix<f64>;
pub type RMat = RMatrix<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type ArrayConfig = crate::em_array::ArrayConfig<f32>;
    pub type SteeringVector = crate::em_array::SteeringVector<f32>;
    pub type MultipathSpec = crate::channel::MultipathSpec<f32>;
    pub type Precoder = crate::precoding::Precoder<f32>;
    pub type CVec = crate::linalg::CVector<f32>;
    pub type CMat = crate::linalg::CMatrix<f32>;
    pub type RMat = crate::linalg::RMatrix<f32>;
}
