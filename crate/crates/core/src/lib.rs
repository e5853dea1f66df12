//! Anomaly indices of finite group actions on one-dimensional quantum spin chains.
//!
//! Symmetries are presented as quantum cellular automata built from
//! translation-invariant gate layers and register shifts. The crate computes
//! their GNVW index, neutralizes nonzero indices by stacking with a
//! counter-translating copy, restricts the action to the right half-chain and
//! extracts the H³(G, U(1)) 3-cocycle measuring the failure of the restriction
//! to be a homomorphism. The class of that cocycle is identified exactly with
//! integer Smith normal forms.
//!
//! A finite-size exact-diagonalization toolkit ([`spectra`]) builds the
//! ℤ/2-symmetric cluster-type chains whose anomaly forbids a unique gapped
//! symmetric ground state and measures their gaps and symmetry charges.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command line
//! live in the companion `qca-anomaly-cli` crate.
//!
//! # Conventions
//!
//! * Tensor ordering: on a window `[lo, hi]` the leftmost site is the most
//!   significant tensor factor; within a site, register 0 is most significant.
//! * Phases are elements of ℚ/ℤ: the value `p/q` stands for `exp(2πi·p/q)`.
//! * `apply(compose(e1, e2), A) = apply(e1, apply(e2, A))`.
//! * A right shift of a register of dimension `m` has GNVW index `+log m`.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod anomaly;
pub mod error;
pub mod grpcoh;
pub mod opwin;
pub mod qca;
pub mod spectra;

mod linalg;

pub use error::{Error, ErrorKind, Result};
pub use linalg::{CMatrix, C64};

/// Tolerance for exact algebraic identities on small windows.
pub const TOL_ALGEBRA: f64 = 1e-12;
/// Tolerance for automorphism and unitarity checks.
pub const TOL_AUTOMORPHISM: f64 = 1e-9;
/// Tolerance for extracting scalar phases.
pub const TOL_PHASE: f64 = 1e-6;
