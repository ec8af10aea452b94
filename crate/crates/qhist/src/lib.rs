//! Finite-dimensional engine for quantum contexts, consistent histories and
//! generalized contexts.
//!
//! The crate builds three layers on a dense complex matrix kernel:
//!
//! - [`contexts`]: single-time projective decompositions, the distributive
//!   property lattice they generate, Born and conditional probabilities,
//!   and the contrary-property relation;
//! - [`consistent`]: multi-time history families with the decoherence
//!   functional and its state-dependent consistency test;
//! - [`histories`]: generalized contexts, where contexts at different times
//!   combine only when their Heisenberg-translated atoms commute — a
//!   state-independent condition — and probabilities extend the Born rule.
//!
//! [`inference`] runs both multi-time formalisms against each other on
//! contrary properties: consistent histories admit families that retrodict
//! two contrary properties with certainty (the three-box fixture ships as
//! [`inference::three_box_scenario`]), while the commutation requirements
//! of generalized contexts exclude the construction.
//!
//! [`scenario`] and [`run`] provide the JSON interchange surface used by
//! the `qhist` command-line tool.

pub mod consistent;
pub mod contexts;
pub mod error;
pub mod histories;
pub mod inference;
pub mod linalg;
pub mod run;
pub mod sampling;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::DEFAULT_TOLERANCE;

pub use consistent::DEFAULT_CONSISTENCY_TOLERANCE;
