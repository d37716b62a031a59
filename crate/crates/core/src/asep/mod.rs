//! Continuous-time ASEP on a ring or on a finite window of the infinite
//! lattice, together with the height function and its rescalings.
//!
//! Rate orientation throughout the crate: `p` is the left-jump probability
//! and `q = 1 - p` the right-jump probability of a particle whose clock rings.
//!
//! Particles live on the half-integers. A particle stored at integer site
//! `k` sits at `k + 1/2`; the height function is indexed by the integers.

mod config;
mod height;
mod scaling;
mod simulate;

pub use config::{build_initial, InitialCondition, LatticeKind, OccupationField, ParticleConfig};
pub use height::{height, height_of_config, HeightField};
pub use scaling::{
    burgers_field, kpz_arguments, one_point_ensemble, one_point_rescaled, rescale_kpz,
    rescale_kpz_trajectory, step_window, BurgersScaling,
};
pub use simulate::{simulate, simulate_substream, Direction, JumpEvent, TrajectorySample};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Jump probabilities per clock ring: `p` to the left, `q` to the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    p: f64,
    q: f64,
}

impl Rates {
    /// Rates with left probability `p`; `q` is set to `1 - p` exactly.
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "left-jump probability p = {p} not in [0, 1]"
            )));
        }
        Ok(Self { p, q: 1.0 - p })
    }

    /// Totally asymmetric: every jump goes right.
    pub fn tasep() -> Self {
        Self { p: 0.0, q: 1.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Mirror image: left and right exchanged.
    pub fn reflected(&self) -> Self {
        Self { p: self.q, q: self.p }
    }
}
