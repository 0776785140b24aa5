//! Rational Speech Act model of metaphor understanding.
//!
//! * [`lexicon`]: typicality tables, metaphor items, human interpretation
//!   data and their CSV formats.
//! * [`rsa`]: literal listener, goal-projected speaker, relevance-weighted
//!   pragmatic listener and the stretched-typicality fast path.
//! * [`learn`]: conjugate-gradient fitting of the rationality parameter.
//! * [`metrics`] and [`evaluation`]: agreement, correlation and divergence
//!   against human data, reports, ablations and feature-correlation
//!   matrices.

pub mod dist;
pub mod error;
pub mod evaluation;
pub mod learn;
pub mod lexicon;
pub mod metrics;
pub mod rsa;

pub use dist::Distribution;
pub use error::{Error, Result};
