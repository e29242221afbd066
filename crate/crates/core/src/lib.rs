//! Behavioral models and analysis tools for PUF-seeded TDMA slot assignment
//! in distributed wireless implants.
//!
//! The pipeline mirrors the randomizer hardware: two ring oscillators whose
//! per-die frequencies vary with manufacturing, an RO₂ count captured after a
//! fixed number of RO₁ cycles used as an LFSR seed, a PRBS signature derived
//! from that seed, and a communication slot built by padding the signature
//! into the timer word.
//!
//! Modules:
//!
//! - [`prbs`]: bit-exact Fibonacci LFSR engine and the PRBS5–PRBS17 registry.
//! - [`collision`]: exact, rational and Monte Carlo slot-collision probability.
//! - [`dispersion`]: seed sweeps and moving-window standard deviations.
//! - [`hardware`]: ring-oscillator process variation, seed extraction, the
//!   multi-RO baseline PUF and the linear cost model.
//! - [`sim`]: discrete-event simulation of the timer/randomizer FSM.
//! - [`config`]: flat `key=value` simulation config files.
//!
//! Numeric code is generic over the scalar type through [`Scalar`] and
//! [`Real`]; the aliases below pin the common instantiations.

pub mod collision;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod hardware;
pub mod num;
pub mod prbs;
pub mod sim;

pub use error::{Error, Result};
pub use num::{Real, Scalar};

/// Arbitrary-precision rational used by the exact collision oracle.
pub type Rational = num_rational::BigRational;

pub type CollisionEstimate64 = collision::CollisionEstimate<f64>;
pub type CollisionEstimateRational = collision::CollisionEstimate<Rational>;
pub type WindowStats64 = dispersion::WindowStats<f64>;
pub type CostEstimate64 = hardware::CostEstimate<f64>;
pub type CostEstimateRational = hardware::CostEstimate<Rational>;
pub type RoSpec64 = hardware::RoSpec<f64>;
pub type DieSample64 = hardware::DieSample<f64>;
pub type OrderRow64 = dispersion::OrderRow<f64>;
