//! Outage analysis of two-way fixed-gain amplify-and-forward relaying with
//! transmit/receive beamforming, correlated antennas at the sources and
//! co-channel interference at the relay.
//!
//! The usual entry point is a [`model::Scenario`], which is resolved into a
//! [`model::Network`] holding the eigen-expansions of both hops and the relay
//! gain constant. Closed forms live in [`outage`], the Monte Carlo oracle in
//! [`simulate`].

pub mod error;
pub mod model;
pub mod outage;
pub mod quad;
pub mod real;
pub mod simulate;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{db_to_linear, linear_to_db, ChannelPowers, Interference, Network, Scenario};
pub use outage::{Method, OutageResult, User};
pub use spectral::CorrelationModel;
