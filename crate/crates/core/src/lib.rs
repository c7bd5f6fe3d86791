//! Simulation and analysis of quantum key distribution in which the secret
//! key is taken from the measurement bases instead of the outcomes, with
//! BB84 as the baseline.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: symbolic BB84 states, measurement, noise, USD rates
//! * [`devices`]: photon sources and Bob's two-detector unit
//! * [`protocol`]: Alice/Bob rounds, announcements, sifting, sessions
//! * [`adversary`]: intercept-resend, efficiency control, PNS, USD filtering
//! * [`postproc`]: estimation, Cascade, Toeplitz hashing, key length, randomness tests
//! * [`harness`]: exact enumeration, Monte Carlo runner, scenarios, reports, CLI
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod adversary;
pub mod bits;
pub mod devices;
pub mod error;
pub mod harness;
pub mod postproc;
pub mod protocol;
pub mod qcore;
pub mod report;
pub mod stream;

pub use error::{QkdError, Result};
