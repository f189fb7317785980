//! Simulation and verification toolkit for one-way communication protocols.
//!
//! The crate converts quantum one-way protocols into classical ones along two
//! constructive routes and numerically certifies the resulting error and
//! message-length bounds on desk-scale instances:
//!
//! - a pretty-good-measurement route for product input distributions
//!   ([`convert::theorem1_convert`]), and
//! - a classical-shadow route for general (non-product) distributions
//!   ([`convert::theorem2_convert`]).
//!
//! Supporting layers: dense complex linear algebra and quantum-state
//! primitives ([`qcore`]), tasks and protocols ([`comm`]), pretty good
//! measurements ([`pgm`]), few-qubit classical shadows ([`shadows`]), and
//! one-shot information measures plus shared-randomness message compression
//! ([`oneshot`]). The [`cli`] module drives experiments from config files.

pub mod cli;
pub mod comm;
pub mod convert;
pub mod numeric;
pub mod oneshot;
pub mod pgm;
pub mod qcore;
pub mod rngutil;
pub mod shadows;
pub mod tol;
