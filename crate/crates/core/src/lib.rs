//! Zeta functions of the geodesic flow on compact odd-dimensional real
//! hyperbolic manifolds.
//!
//! The crate works from two kinds of data:
//!
//! * a truncated **length spectrum** (primitive closed geodesics with their
//!   holonomy and twist data), from which the Selberg, Ruelle, symmetrized and
//!   super zeta functions are evaluated as Euler products in their half-planes
//!   of absolute convergence ([`euler`], [`fried`]);
//! * **operator spectra** (eigenvalues with signed multiplicities), from which
//!   the zero/pole divisors of the meromorphic continuations are built
//!   ([`divisor`]) and turned into Weierstrass canonical products and a
//!   representation `f(s) = s^m0 · e^{g(s)} · W1(s) / W2(s)` ([`hadamard`]).
//!
//! [`spectra`] holds the input types, their file formats and seeded synthetic
//! generators; [`cli`] wires everything into the `geozeta` binary.

pub mod cli;
pub mod divisor;
pub mod error;
pub mod euler;
pub mod fried;
pub mod hadamard;
pub mod numeric;
pub mod spectra;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;
