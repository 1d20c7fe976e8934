//! Exact multicriteria integer linear programming in fixed dimension.
//!
//! Finite lattice-point sets are encoded as short rational generating
//! functions ([`genfunc::Srf`]). On top of that encoding the crate counts
//! Pareto optima and Pareto strategies, enumerates them in any term order
//! with bounded work between outputs, and selects optima nearest to a
//! reference point under polyhedral norms (exactly) or pseudo-norms (up to a
//! factor `1 + eps`).

// index loops read closer to the matrix algebra they implement
#![allow(clippy::needless_range_loop)]

pub mod enumerate;
pub mod error;
pub mod genfunc;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod pareto;
pub mod polyhedra;
pub mod polynomial;
pub mod problem;
pub mod select;
pub mod setops;

pub use error::{Error, Result};
pub use enumerate::{EnumerationStream, TermOrder};
pub use genfunc::{GFTerm, Srf};
pub use pareto::ParetoHandles;
pub use polyhedra::{IntBox, Polyhedron, Rational};
pub use polynomial::Polynomial;
pub use problem::Problem;
pub use select::{NormSpec, PolyhedralNorm, PseudoNorm};
