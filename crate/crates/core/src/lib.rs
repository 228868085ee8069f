//! Simulation toolkit for comparing measurement-based surface-code error
//! correction with measurement-free schemes.

pub mod error;
pub mod experiments;
pub mod bitflip;
pub mod config;
pub mod decoder;
pub mod frame_sim;
pub mod matching;
pub mod mfec;
pub mod noise;
pub mod pauli;
pub mod rng;
pub mod stats;
pub mod surface_code;

pub use error::{Error, Result};

pub type Hardware = noise::HardwareParams<f64>;
pub type Rates = noise::DerivedRates<f64>;
pub type StateVec = bitflip::StateVector<f64>;
