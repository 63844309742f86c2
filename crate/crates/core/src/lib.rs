//! Trace-ratio and ratio-trace optimization under the Einstein product.
//!
//! The crate is organized around a dense N-way tensor type and the Einstein
//! product algebra on grouped indices ([`tensor`]), a spectral layer for
//! symmetric square even tensors ([`spectral`]), the trace-ratio Newton
//! solver and its ratio-trace surrogate ([`trace_ratio`]), multilinear
//! discriminant analysis built on scatter tensors ([`mda`]), dataset I/O and
//! synthetic data ([`data_io`]), and a 1-NN evaluation / benchmark harness
//! ([`eval`]).
//!
//! Core math is generic over the scalar type through the [`Real`] trait
//! (`f32` or `f64`); the concrete aliases below pin `f64`, which is what the
//! file formats and the benchmark harness use. All values are immutable and
//! `Send + Sync`; solvers are deterministic functions of their inputs and
//! seeds.

pub mod data_io;
pub mod error;
pub mod eval;
pub mod mda;
pub mod scalar;
pub mod spectral;
pub mod subspace;
pub mod tensor;
pub mod trace_ratio;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` dense tensor, the working type of the I/O and benchmark layers.
pub type Tensor64 = tensor::DenseTensor<f64>;
/// `f32` dense tensor.
pub type Tensor32 = tensor::DenseTensor<f32>;
/// `f64` square even tensor (operator over grouped indices).
pub type SquareEven64 = tensor::SquareEvenTensor<f64>;
/// `f64` projection tensor (order M+1, `d` frontal slices).
pub type Projection64 = trace_ratio::ProjectionTensor<f64>;
