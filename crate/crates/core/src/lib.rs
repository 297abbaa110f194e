// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! Excitation transport through a chain of dissipative two-level systems
//! coupled to an irreversible sink, with time-dependent (possibly negative)
//! local dephasing rates.
//!
//! The dynamics is solved on the single-excitation block (`N` sites plus the
//! sink); the [`oracle`] module integrates the unreduced `2^(N+1)` density
//! matrix and is used to certify the reduction.

pub mod cli;
pub mod config;
pub mod error;
pub mod integrator;
pub mod liouvillian;
pub mod model;
pub mod oracle;
pub mod sweep;

pub use error::{Result, TransportError};
pub use integrator::{efficiency, integrate, Efficiency, IntegratorConfig, Trajectory};
pub use liouvillian::{apply_rhs, build_block_operators, BlockLiouvillian, BlockOperators};
pub use model::{BlockState, ChainModel, DephasingSchedule};

/// Complex matrix type used for every density matrix and operator.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
