//! Construction and analysis of multi-dimensional spatially-coupled (MD-SC)
//! circulant LDPC codes.
//!
//! The crate covers the full pipeline:
//!
//! * [`block`] — circulant block matrices, binary expansion, text/alist I/O;
//! * [`sc`] — cutting a block matrix into components and coupling `l`
//!   replicas into a spatially-coupled chain;
//! * [`cycles`] — exact short-cycle enumeration on the lifted Tanner graph,
//!   via closed non-backtracking block walks and the alternating power-sum
//!   condition;
//! * [`md`] — relocating circulants into two extra coupling matrices to form
//!   a three-chain multi-dimensional code, the majority-voting relocation
//!   search, and circulant-power post-optimization;
//! * [`ber`] — normalized min-sum decoding and a deterministic Monte-Carlo
//!   AWGN bit-error-rate simulator;
//! * [`fixtures`] — the bundled reference code designs used by the test
//!   suite and the `reproduce` CLI command.
//!
//! Soft-decision decoding is generic over the LLR scalar (any
//! [`num_traits::Float`]); [`DefaultScalar`] is the concrete type used by the
//! non-generic convenience entry points.

pub mod ber;
pub mod block;
pub mod cycles;
pub mod error;
pub mod fixtures;
pub mod md;
pub mod sc;

pub use error::{Error, Result};

/// Default LLR scalar for the non-generic simulation entry points.
pub type DefaultScalar = f64;
