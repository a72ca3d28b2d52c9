//! Generator and verifier for an infinite family of finite non-bicolorable
//! ray configurations in `(C²)^{⊗(N−1)}`, `N = 4n`.
//!
//! The pipeline is: choose a point set and deformation parameters
//! ([`indexset`], [`params`]), build the rays and their coefficient tables
//! ([`rays`]), compute the orthogonality graph and check it against the parity
//! relation ([`graph`]), then certify non-bicolorability by graph search and by
//! a GF(2) parity argument ([`colorability`]).

pub mod colorability;
pub mod error;
pub mod graph;
pub mod indexset;
pub mod params;
pub mod rays;
pub mod report;

pub use error::{Error, Result};
