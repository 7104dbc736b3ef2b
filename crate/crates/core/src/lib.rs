//! Desk-scale laboratory for noncommutative probability in classical
//! settings.
//!
//! * [`wick`]: exact vacuum moments under Bose (all pairings) or quantum
//!   Boltzmann (non-crossing pairings) contraction rules.
//! * [`fock`]: truncated full-Fock and bosonic matrix representations,
//!   commutators and a consistency harness against [`wick`].
//! * [`limit`]: van Hove rescaled two-point functions converging to white
//!   noise, and regularized resonance weights.
//! * [`wigner`]: replicas of symmetric Gaussian matrices and their
//!   normalized-trace moments versus free predictions.
//! * [`quench`]: the quenching maps, quenched correlators and the replica
//!   partition sum.
//! * [`bell`]: CHSH functionals on free versus classical Gaussian
//!   observables, with a coefficient search.
//! * [`cli`]: the `nclab` command-line surface.

pub mod bell;
pub mod cli;
pub mod error;
pub mod fock;
pub mod limit;
pub mod quench;
pub mod report;
pub mod wick;
pub mod wigner;

pub use error::{Error, Result};
