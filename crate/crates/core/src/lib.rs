//! Rational preperiodic points of quadratic maps `z^2 + c` over the rationals.
//!
//! [`search::compute_preper`] returns the exact graph of rational
//! preperiodic points by enumerating the finite candidate set forced by the
//! real and p-adic filled Julia set bounds. [`families`] builds the six
//! infinite parameter families on top of it, and [`benedetto`] checks the
//! local bounds that cap the number of points.

pub mod arith;
pub mod benedetto;
pub mod census;
pub mod dynamics;
pub mod families;
pub mod graph;
pub mod padic;
pub mod primes;
pub mod search;

pub use arith::{rat, Place, Rational, Valuation};
pub use dynamics::{orbit_detect, Orbit, OrbitInfo, OrbitType, QuadMap};
pub use graph::{GraphLabel, PrePerGraph};
pub use search::{candidate_profile, compute_preper, CandidateProfile};
