//! Spectrum pooling with successive water-filling.
//!
//! A primary user water-fills N Rayleigh-faded sub-bands; cognitive users
//! arrive one after another and water-fill only the bands left idle by
//! those before them. The crate simulates this protocol for finite N and
//! evaluates the wideband closed forms it converges to.

pub mod analytics;
pub mod channel;
pub mod error;
pub mod experiments;
mod expint;
pub mod montecarlo;
pub mod params;
pub mod pooling;
pub mod sensing;
pub mod waterfill;

pub use error::{Error, Result};
