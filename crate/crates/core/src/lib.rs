//! Numerical toolkit for short-range spin-glass order parameters.
//!
//! The crate computes replicated Edwards-Anderson free energies and overlap
//! statistics by exact enumeration (and row transfer matrices in two
//! dimensions), samples the coupled two-replica system by Metropolis and
//! parallel tempering, evaluates the closed-form thermodynamics of the random
//! energy model, and turns the Griffiths-type inequalities between the
//! broadening, Edwards-Anderson, jump and literal-RSB order parameters into
//! machine-checkable finite-size tests.
//!
//! The crate is `no_std` and only needs `alloc`. All transcendental functions
//! go through [`libm`] so results are bit-identical across platforms and
//! between test and release builds. IO, parallel execution and the CLI live in
//! the `glassorder` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod disorder;
pub mod error;
pub mod exact;
pub mod exec;
pub mod hamiltonian;
pub mod lattice;
pub mod math;
pub mod mc;
pub mod order;
pub mod rem;
pub mod rng;
pub mod spins;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use disorder::{DisorderRealization, DisorderSpec, Distribution};
pub use hamiltonian::Model;
pub use lattice::Lattice;
pub use stats::ObservableEstimate;
pub use spins::{BoundaryConfig, Overlap, ReplicaCoupling, SpinConfig};

/// Version string written into reports and checkpoint headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
