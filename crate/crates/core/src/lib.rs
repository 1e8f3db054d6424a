//! Structured sparse dictionary learning.
//!
//! Learns a dictionary `V` (p×r) and coefficients `U` (n×r) minimizing
//!
//! ```text
//! 1/(2np) ‖X − UVᵀ‖²_F + λ Σ_k Ω^α(V^k)   s.t.  Ω_u(U^k) ≤ 1
//! ```
//!
//! where `Ω^α` is an `ℓα/ℓ2` quasi-norm over overlapping groups of
//! variables. With half-space groups on a pixel grid the nonzero pattern of
//! each dictionary element is pushed towards a rectangle (or, with diagonal
//! half-planes, a convex polygon).
//!
//! The crate is organized as:
//!
//! * [`groups`]: group families (singletons, lattice half-spaces) and the
//!   groups text format.
//! * [`regularizer`]: `Ω^α`, the closed-form auxiliary-variable updates and
//!   the shared-support variant.
//! * [`solver`]: the alternating block coordinate descent and encoding on a
//!   fixed dictionary.
//! * [`pipeline`]: planted synthetic data, k-NN scoring, cross-validation
//!   and dictionary post-processing.
//! * [`io`]: CSV matrices, model files and PGM rendering.
//!
//! Runnable walkthroughs live in `examples/` (`cargo run --release --example
//! planted_recovery`), and the `sspca` binary exposes the same operations on
//! files.

pub mod error;
pub mod groups;
pub mod io;
pub mod pipeline;
pub mod regularizer;
pub mod solver;

pub use error::{Error, Result};
pub use groups::{GridSpec, Group, GroupStructure, Orientation};
pub use regularizer::{EtaState, Partition, RegularizerParams, Smoothing};
pub use solver::{CoeffNorm, FactorModel, FitResult, SolverConfig, Trace, TraceRow};
