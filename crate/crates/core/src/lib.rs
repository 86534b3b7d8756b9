//! Markov chains on the divisibility poset `(ℕ, |)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`] sieves smallest prime factors and answers Λ, Ω, ω, v_p and
//!   divisor queries.
//! * [`kernels`] evaluates ζ, η and −ζ′/ζ on the real axis, plus certified
//!   tails of truncated von Mangoldt sums.
//! * [`weights`] evaluates the weights ν₀, ν_Mertens, ν_Λ and ν_p.
//! * [`chains`] builds downward transition laws, sub-invariance margins and
//!   adjoint upward chains.
//! * [`hitting`] runs the exact hitting-mass recursions on truncated state
//!   spaces and the derived bounds.
//! * [`primitive`] validates, generates and layers primitive sets.
//! * [`stochastic`] samples chains and the zeta process with reproducible
//!   counter-based streams.
//! * [`certify`] holds outward-rounded interval arithmetic, bisection
//!   certificates and floating-point grid checks.

pub mod arith;
pub mod certify;
pub mod chains;
mod error;
pub mod hitting;
pub mod kernels;
pub mod primitive;
pub mod quadrature;
pub mod stochastic;
pub mod weights;

pub use arith::FactorTable;
pub use chains::{ChainId, PrimeSet, Target, Transition, TransitionList};
pub use error::{Error, Result};
pub use kernels::KernelConfig;
pub use hitting::MassVector;
pub use primitive::PrimitiveSet;
pub use weights::WeightId;

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
