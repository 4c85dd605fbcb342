//! Inversion of Arctic dual-duct sound speed profiles from the modal
//! dispersion of broadband impulsive signals received on a single hydrophone.
//!
//! The pipeline: represent the profile with two duct parameters `(I, W)`
//! ([`profile`]), solve the depth eigenproblem for modal group velocities
//! ([`modes`]), synthesize broadband arrivals and spectrograms, extract
//! crossing-type dispersion curves by segmented warping plus peak picking,
//! and recover `(I, W)` — optionally with source range and range-dependent
//! segments — by grid search over precomputed group-velocity tables.

pub mod error;
pub mod grid;
pub mod modes;
pub mod par;
pub mod profile;

pub use error::{Error, Result};
pub use grid::{CostSurface, ParamGrid};
pub use profile::{DepthProfile, DualChannelParams};
