//! Simulation and verification toolkit for the fluctuations of optimal
//! alignment scores between random sequences.
//!
//! The crate bundles, behind one consistent API:
//!
//! - general-scheme optimal alignment scoring with an exhaustive small-`n`
//!   oracle and a word-parallel LCS fast path ([`align`]);
//! - the i.i.d. and 3-multinomial block sequence models with their driving
//!   statistics `(U, V)`, closed-form pmfs, fibers, and typical-set windows
//!   ([`models`]);
//! - the letter-swap and block random transformations with exact outcome and
//!   preimage enumerations ([`transform`]);
//! - exact small-instance machinery: conditional laws, transformation
//!   push-forwards, total-variation distances, exact moments ([`oracle`]);
//! - reproducible Monte Carlo verifiers for the variance lower-bound
//!   conditions: `Var/n` scans, the A1/A2 transformation checks,
//!   conditional-mean monotonicity, conditional-variance growth, coverage,
//!   and the point-mass floor ([`estimators`]).
//!
//! Everything randomized takes an explicit splittable [`rng::RandomStream`];
//! reports are bit-identical for a fixed seed regardless of worker count.
//!
//! Start with the runnable examples (`cargo run --release --example ...`):
//! each one exercises a major capability end to end. A thin `seqfluct`
//! binary exposes the same operations as subcommands.

pub mod align;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod models;
mod num;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod scoring;
pub mod seq;
pub mod transform;

pub use align::{brute_force_score, lcs_length, optimal_score, pair_score, AlignmentScore};
pub use error::{Error, Result};
pub use models::{BlockModelParams, BlockStats, Model, TypicalSets, UvKey, VKey};
pub use rng::RandomStream;
pub use scoring::{check_mimi, ScoringScheme};
pub use seq::{Alphabet, Sequence, SequencePair, SymbolDist};
pub use transform::{OutcomeSet, Transform};
