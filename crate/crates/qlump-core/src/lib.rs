//! Constrained-bisimulation reduction of quantum circuits.
//!
//! A circuit over `n` qubits induces the discrete-time system
//! `w_{k+1} = U w_k` on `C^(2^n)`. This crate computes orthonormal lumping
//! bases `v_0 .. v_{d-1}` spanning the smallest `U`-invariant subspace that
//! contains a user-chosen constraint subspace, together with the reduced
//! unitary `U_hat = L U L†` (`L` has rows `v_i†`). Simulating the `d x d`
//! reduced system and mapping back with `L†` reproduces the full dynamics
//! on the constraint subspace exactly, which is often exponentially
//! cheaper than simulating the circuit directly.
//!
//! The crate provides:
//!
//! * two interchangeable state backends — dense statevectors and canonical
//!   vector decision diagrams ([`dd`]);
//! * circuit construction, an OpenQASM 2.0 subset parser, and generators
//!   for search, optimization, order-finding and common benchmark
//!   families ([`circuit`]);
//! * the reduction procedures themselves plus independent verification
//!   (residual-projection and Krylov/Gram-Schmidt lumping, forward/backward
//!   invariance checks, a brute-force rank oracle) in [`lumping`];
//! * multi-step reduced simulation, measurement, and benchmark regimes in
//!   [`sim`].
//!
//! All numeric code is generic over the real scalar via [`scalar::Real`];
//! `f64` aliases are exported at the crate root.

pub mod circuit;
pub mod dd;
pub mod dense;
pub mod error;
pub mod lumping;
pub mod scalar;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
pub use scalar::{Real, TolerancePolicy, C};

/// Complex amplitude.
pub type Amplitude<T> = C<T>;

// Concrete aliases for the default double-precision instantiation.
pub type Amplitude64 = C<f64>;
pub type Amplitude32 = C<f32>;
pub type DenseState64 = dense::DenseState<f64>;
pub type DenseMatrix64 = dense::DenseMatrix<f64>;
pub type TolerancePolicy64 = TolerancePolicy<f64>;
pub type Circuit64 = circuit::Circuit<f64>;
pub type DdManager64 = dd::DdManager<f64>;
pub type DdState64 = dd::DdState<f64>;
