//! Exact moment engine and verifier for inequalities on squared Wiener-chaos
//! variables.
//!
//! The crate is layered bottom-up:
//!
//! * [`hermite`]: probabilists' Hermite polynomials, linearization, χ² moments.
//! * [`moments`]: exact Gaussian moments (diagram sums, Isserlis pairings,
//!   complex Wick permanents).
//! * [`chaos`]: Hermite-basis expansions and the Ornstein-Uhlenbeck calculus.
//! * [`ou`]: the semigroup, Mehler Monte Carlo and the monotone functional φ.
//! * [`lab`]: inequality verifiers producing [`report::VerificationReport`]s.
//! * [`polarization`]: bound formulas, multilinear forms, sphere optimizer.
//! * [`hadamard`]: the Hermite-moment series for `det(S)^{-1/2}`.
//! * [`cli`]: the command-line front end used by the `sqchaos` binary.

pub mod chaos;
pub mod cli;
pub mod error;
pub mod hadamard;
pub mod hermite;
pub mod lab;
pub mod moments;
pub mod ou;
pub mod polarization;
pub mod random;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::ExactScalar;
