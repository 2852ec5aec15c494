//! Time-frequency quantization on the finite phase space Z_N × Z_N.
//!
//! The crate provides the τ-quantization family `Op_τ`, short-time Fourier
//! and Gabor tools, weighted modulation and Sjöstrand-type norms, and
//! channel-matrix diagnostics for almost diagonalization.

pub mod array;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod generators;
pub mod io;
pub mod normbank;
pub mod phasespace;
pub mod quantize;
pub mod random;
pub mod transforms;

pub use array::{ComplexGrid, OperatorMatrix, Signal, TfMatrix};
pub use error::{Result, TfqError};
pub use phasespace::{Grid, Lattice, LinearMap, PhasePoint, RealPhasePoint, Weight};
pub use quantize::{Symbol, SpreadingFunction};
