//! Stochastic floating-point verification: Monte Carlo Arithmetic and CESTAC
//! backends, a small kernel language to run them on, and the statistics and
//! harness around it.

pub mod backend;
pub mod carrier;
pub mod cestac;
pub mod corpus;
pub mod double_word;
pub mod dsl;
pub mod error;
pub mod harness;
pub mod mca;
pub mod rng;
pub mod stats;

pub use backend::{Arithmetic, BackendConfig, BackendKind, Exceptions, IeeeArithmetic, OutputValue, Relation};
pub use carrier::{Carrier, CarrierFormat};
pub use error::{Error, Result};
