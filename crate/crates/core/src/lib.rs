//! Numerical laboratory for the exactly solvable side of the KPZ class.
//!
//! * [`asep`]: exclusion-process simulation, height functions, rescalings
//! * [`exact`]: generators, uniformization, Bethe roots, contour-integral
//!   transition probabilities
//! * [`rmt`]: GUE sampling, spectra, semicircle and Stieltjes machinery,
//!   Coulomb gas, trace moments
//! * [`tracy_widom`]: Airy, Hastings–McLeod and the F₂ distribution
//! * [`toprec`]: topological recursion on the curve `y² + zy + 1 = 0`
//! * [`experiment`]: named reproducible experiments and their artifacts

pub mod asep;
pub mod exact;
mod error;
pub mod experiment;
pub mod rmt;
pub mod rng;
pub mod toprec;
pub mod stats;
pub mod tracy_widom;

pub use error::{Context, Error, Result};

/// `git describe` of the source tree this library was built from.
pub const BUILD: &str = env!("KPZLAB_GIT_DESCRIBE");
