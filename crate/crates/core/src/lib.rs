//! Random-variate generation through the inverse of the density, vertical
//! densities, transformed rejection and the generalized ratio of uniforms,
//! together with the region and boundedness checks that tie them together.

pub mod catalog;
pub mod density;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod numeric;
pub mod regions;
pub mod rng;
pub mod samplers;
pub mod transforms;

pub use density::{Direction, Interval, MonotonePiece, PiecewiseMonotoneDensity, Support, UnnormalizedDensity};
pub use error::{Error, Result};
pub use regions::{BoundingRect, Region2D, RegionKind};
pub use samplers::{AcceptanceStats, SampleBatch};
pub use rng::{RngStream, SeedRecord};

pub use transforms::{BoundednessReport, GrouConfig, MonotoneTransform, ProbeLadder};
