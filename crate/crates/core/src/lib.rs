//! Cellular urban-air-mobility (UAM) command-and-control network toolkit.
//!
//! The crate models a downlink cellular network serving UAM vehicles in a 3D
//! urban environment: Poisson-sampled base stations, vehicles, and buildings
//! with Rayleigh-distributed heights. It provides
//!
//! * geometric blockage tests (vertical + horizontal conditions) and an
//!   independent segment-vs-box oracle,
//! * numerical evaluation of the blockage/coverage/rate expressions
//!   (Laplace-transform based coverage probability, reliability, capacity),
//! * 3GPP-style sector antennas with elevation-tilt optimization, narrow
//!   multi-beam sectors, and frequency-reuse coloring,
//! * a Monte Carlo system-level simulator with 3D vehicle mobility and the
//!   master-UAM assistive transmission protocol.

pub mod analytics;
pub mod antenna;
pub mod blockage;
pub mod config;
pub mod geometry;
pub mod link;
pub mod master;
pub mod mobility;
pub mod quad;
pub mod rng;
pub mod sim;

pub use config::ScenarioConfig;
pub use geometry::{UrbanEnvironment, Vec3};
