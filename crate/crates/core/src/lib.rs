//! Monte Carlo and numerical laboratory for planar Brownian loop soups.
//!
//! - [`exponents`]: closed-form disconnection exponents and dimensions.
//! - [`sampler`]: loop soups, annulus crossings and excursions.
//! - [`raster`] and [`clusters`]: occupancy grids, loop clusters, frontiers.
//! - [`connectivity`]: disconnection decisions on annulus scenes.
//! - [`extremal`]: discrete extremal distance.
//! - [`estimators`]: Monte Carlo campaigns and exponent fits.

pub mod clusters;
pub mod connectivity;
pub mod error;
pub mod estimators;
pub mod exponents;
pub mod extremal;
pub mod geom;
pub mod raster;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
