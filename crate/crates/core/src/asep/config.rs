use std::ops::Range;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Where the particles live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeKind {
    /// Ring of `len` sites, `0..len`.
    Ring { len: usize },
    /// Finite window of the infinite lattice. Allowed particle sites are the
    /// integers `lo..hi`, i.e. half-integer positions strictly inside `(lo, hi)`.
    InfiniteWindow { lo: i64, hi: i64 },
}

impl LatticeKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LatticeKind::Ring { len } if len == 0 => {
                Err(Error::InvalidParameter("ring length must be positive".into()))
            }
            LatticeKind::InfiniteWindow { lo, hi } if lo >= hi => Err(Error::WindowTooSmall {
                lo,
                hi,
                reason: "need lo < hi".into(),
            }),
            _ => Ok(()),
        }
    }

    /// Number of sites.
    pub fn sites(&self) -> usize {
        match *self {
            LatticeKind::Ring { len } => len,
            LatticeKind::InfiniteWindow { lo, hi } => (hi - lo) as usize,
        }
    }
}

/// Initial condition recipe for [`build_initial`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Every half-integer site left of the origin occupied. On a window the
    /// occupied region continues past the left edge (see [`ParticleConfig::filled_left`]).
    Step,
    /// Independent Bernoulli(`b`) occupation of every site.
    Bernoulli { b: f64, seed: u64 },
    Explicit { positions: Vec<i64> },
}

/// Ordered particle positions. On a ring the positions are the lift to the
/// integers: `x_1 < ... < x_N < x_1 + L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfig {
    positions: Vec<i64>,
    lattice: LatticeKind,
    /// Every site left of an `InfiniteWindow` is occupied. The dynamics inside
    /// the window are then those of the infinite system as long as the
    /// leftmost window site stays occupied.
    filled_left: bool,
}

impl ParticleConfig {
    pub fn new(lattice: LatticeKind, positions: Vec<i64>) -> Result<Self> {
        Self::with_fill(lattice, positions, false)
    }

    pub(crate) fn with_fill(
        lattice: LatticeKind,
        positions: Vec<i64>,
        filled_left: bool,
    ) -> Result<Self> {
        lattice.validate()?;
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidOrdering(format!(
                "positions not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        match lattice {
            LatticeKind::Ring { len } => {
                if positions.len() >= len {
                    return Err(Error::InvalidOrdering(format!(
                        "{} particles on a ring of {len} sites (need N < L)",
                        positions.len()
                    )));
                }
                if let (Some(first), Some(last)) = (positions.first(), positions.last()) {
                    if *last >= first + len as i64 {
                        return Err(Error::InvalidOrdering(format!(
                            "x_N = {last} >= x_1 + L = {}",
                            first + len as i64
                        )));
                    }
                }
                if filled_left {
                    return Err(Error::InvalidParameter(
                        "filled left edge only applies to windows".into(),
                    ));
                }
            }
            LatticeKind::InfiniteWindow { lo, hi } => {
                if let Some(x) = positions.iter().find(|&&x| x < lo || x >= hi) {
                    return Err(Error::InvalidOrdering(format!(
                        "site {x} outside window sites {lo}..{hi}"
                    )));
                }
                if filled_left && positions.first() != Some(&lo) {
                    return Err(Error::InvalidOrdering(
                        "filled left edge requires the first window site occupied".into(),
                    ));
                }
            }
        }
        Ok(Self {
            positions,
            lattice,
            filled_left,
        })
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn lattice(&self) -> LatticeKind {
        self.lattice
    }

    pub fn filled_left(&self) -> bool {
        self.filled_left
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Half-integer positions as they appear on the lattice.
    pub fn display_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|&x| x as f64 + 0.5).collect()
    }

    /// Ring positions reduced to `0..L`, sorted. Identity on windows.
    pub fn reduced_positions(&self) -> Vec<i64> {
        match self.lattice {
            LatticeKind::Ring { len } => {
                let mut v: Vec<i64> = self
                    .positions
                    .iter()
                    .map(|x| x.rem_euclid(len as i64))
                    .collect();
                v.sort_unstable();
                v
            }
            LatticeKind::InfiniteWindow { .. } => self.positions.clone(),
        }
    }

    pub(crate) fn positions_mut(&mut self) -> &mut Vec<i64> {
        &mut self.positions
    }

    /// Occupation indicators over the site range `window`.
    pub fn occupation(&self, window: Range<i64>) -> Result<OccupationField> {
        if window.start > window.end {
            return Err(Error::InvalidParameter("empty occupation window".into()));
        }
        let mut values = vec![0u8; (window.end - window.start) as usize];
        match self.lattice {
            LatticeKind::Ring { len } => {
                if window.start < 0 || window.end > len as i64 {
                    return Err(Error::InvalidParameter(format!(
                        "window {window:?} not within ring 0..{len}"
                    )));
                }
                for x in self.reduced_positions() {
                    if window.contains(&x) {
                        values[(x - window.start) as usize] = 1;
                    }
                }
            }
            LatticeKind::InfiniteWindow { lo, hi } => {
                if window.start < lo || window.end > hi {
                    return Err(Error::InvalidParameter(format!(
                        "window {window:?} not within lattice window {lo}..{hi}"
                    )));
                }
                for &x in &self.positions {
                    if window.contains(&x) {
                        values[(x - window.start) as usize] = 1;
                    }
                }
            }
        }
        Ok(OccupationField {
            start: window.start,
            values,
        })
    }
}

/// η over a contiguous range of sites, starting at site `start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationField {
    pub start: i64,
    pub values: Vec<u8>,
}

impl OccupationField {
    pub fn get(&self, site: i64) -> Option<u8> {
        let i = site.checked_sub(self.start)?;
        usize::try_from(i).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn total(&self) -> usize {
        self.values.iter().map(|&v| v as usize).sum()
    }
}

pub fn build_initial(lattice: LatticeKind, ic: &InitialCondition) -> Result<ParticleConfig> {
    lattice.validate()?;
    match ic {
        InitialCondition::Explicit { positions } => {
            ParticleConfig::new(lattice, positions.clone())
        }
        InitialCondition::Step => match lattice {
            LatticeKind::InfiniteWindow { lo, hi } => {
                if lo >= 0 || hi <= 0 {
                    return Err(Error::WindowTooSmall {
                        lo,
                        hi,
                        reason: "step initial condition needs the origin inside the window".into(),
                    });
                }
                ParticleConfig::with_fill(lattice, (lo..0).collect(), true)
            }
            LatticeKind::Ring { len } => {
                // Left half of the ring filled.
                let n = len / 2;
                ParticleConfig::new(lattice, (0..n as i64).collect())
            }
        },
        InitialCondition::Bernoulli { b, seed } => {
            if !(0.0..=1.0).contains(b) {
                return Err(Error::InvalidParameter(format!("density b = {b} not in [0, 1]")));
            }
            let mut rng = rng::root(*seed);
            let (lo, hi) = match lattice {
                LatticeKind::Ring { len } => (0, len as i64),
                LatticeKind::InfiniteWindow { lo, hi } => (lo, hi),
            };
            let positions = (lo..hi).filter(|_| rng.random::<f64>() < *b).collect();
            ParticleConfig::new(lattice, positions)
        }
    }
}
