//! Spectral solver and verification suite for convex variational problems
//! `min_u ∫ L(x, u, ∇u) − f u` with Dirichlet conditions on `[0,1]^d`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barron;
pub mod cli;
pub mod error;
pub mod lagrangian;
pub mod network;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SineFunctionF64 = spectral::SineFunction<f64>;
pub type SineFunctionF32 = spectral::SineFunction<f32>;
pub type TrigPolynomialF64 = spectral::TrigPolynomial<f64>;
pub type GridFunctionF64 = spectral::GridFunction<f64>;
pub type BarronCertificateF64 = barron::BarronCertificate<f64>;
