//! Redaction-based privacy mechanisms for finite time-homogeneous Markov
//! chains.
//!
//! Given a chain `X_0 -> X_1 -> ... -> X_N` whose initial state must stay
//! private, the library provides two mechanisms that erase a random prefix
//! of the trajectory and release the rest unchanged:
//!
//! - [`sst`]: stop at an optimal strong stationary time built from
//!   separation values; private when the separation values do not depend on
//!   the start state (transitively invariant chains in particular).
//! - [`smr`]: release each sample with the exact probability that keeps the
//!   posterior of the start state flat; private for every finite chain, and
//!   equivalent to erasing a random window whose law comes from the overlap
//!   table `alpha_t`.
//!
//! [`audit`] verifies privacy by exact enumeration of the output channel,
//! and [`distortion`] carries the exact expected-erasure formulas, their
//! Monte-Carlo confirmation, and the spectral bound showing the erasure
//! count stays bounded in the horizon.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the command
//! line live in the companion `redact-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod audit;
pub mod chain;
pub mod distortion;
pub mod error;
mod linalg;
pub mod rng;
pub mod smr;
pub mod sst;
pub mod trajectory;

pub use audit::{
    AuditReport, McMiEstimate, Mechanism, MechanismSampler, OutputChannel, StopPairAudit,
    audit_privacy, audit_stop_pair, exact_output_channel, mc_mi_estimate,
};
pub use chain::{
    ChainDiagnostics, PowerCache, ProbabilityVector, StateSpace, StationarySolve, TransitionMatrix,
    total_variation,
};
pub use distortion::{
    DistortionReport, Estimate, McConfig, SpectralBound, distortion_sweep, empirical_distortion,
    spectral_bound, termwise_decay_margins,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rng::RngStream;
pub use smr::{
    AlphaTable, ConditionalKernelSequence, OutputSymbol, RedactedTrajectory, StopTimeLaw,
    alpha_table, conditional_kernels, hazard_ratio, run_smr, smr_distortion, window_distribution,
};
pub use sst::{
    SeparationTable, SstApplicability, SstRedaction, check_sst_applicability, sample_sst_redaction,
    separation_table, sst_distortion, sst_stop_law,
};
pub use trajectory::{Start, Trajectory, sample_trajectory};
