//! Exact-arithmetic computational topology.
//!
//! Simplicial and Dowker homology of relations extracted from straight-line
//! code, non-regular path homology of digraphs, activation sheaves and local
//! homology on wireless networks, and 1D topological mixture estimation.

pub mod complex;
pub mod dowker;
pub mod error;
pub mod homology;
pub mod io;
pub mod linalg;
pub mod path;
pub mod tme;
pub mod wireless;

pub use complex::{Simplex, SimplicialComplex};
pub use error::{Error, Result};
pub use homology::{BettiProfile, ChainComplex, Field};
