//! State-vector simulation of quantum adjoint convolution.
//!
//! The crate loads image windows and convolution kernels into quantum
//! amplitude encodings, estimates their inner product with Hadamard-test,
//! swap-test and adjoint circuits, and lifts the Hadamard-test circuit into
//! a full convolutional layer through phase estimation. A classical
//! Frobenius-inner-product implementation provides the reference that every
//! quantum result is checked against.

pub mod convolution;
pub mod core_sim;
pub mod encoding;
pub mod error;
pub mod grid;
pub mod harness;
pub mod overlap;
pub mod qacl;

pub use error::{Error, Result};
pub use grid::Grid;
