use serde::{Deserialize, Serialize};

use super::{Direction, LatticeKind, ParticleConfig, TrajectorySample};
use crate::Result;

/// Integer height profile `h(t, x)` on consecutive integers `x_start..`.
///
/// `h(t, 0)` is twice the number of particles right of the origin and
/// `h(t, x + 1) - h(t, x) = 1 - 2 η_t(x + 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub time: f64,
    pub x_start: i64,
    pub values: Vec<i64>,
}

impl HeightField {
    pub fn at(&self, x: i64) -> Option<i64> {
        let i = usize::try_from(x.checked_sub(self.x_start)?).ok()?;
        self.values.get(i).copied()
    }

    pub fn x_end(&self) -> i64 {
        self.x_start + self.values.len() as i64 - 1
    }

    pub fn anchor(&self) -> Option<i64> {
        self.at(0)
    }

    pub fn increments(&self) -> Vec<i64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Piecewise-linear interpolation between integer points.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let x0 = x.floor();
        let h0 = self.at(x0 as i64)? as f64;
        if x == x0 {
            return Some(h0);
        }
        let h1 = self.at(x0 as i64 + 1)? as f64;
        Some(h0 + (x - x0) * (h1 - h0))
    }
}

/// Height field of a configuration, evaluated by direct summation.
///
/// On a window the field spans `lo..=hi`; on a ring it spans `0..=L` and
/// `h(t, 0)` counts the lifted positions, so net winding shows up as growth.
pub fn height_of_config(cfg: &ParticleConfig, time: f64) -> HeightField {
    let anchor = direct_anchor(cfg);
    build_field(cfg, anchor, time)
}

fn direct_anchor(cfg: &ParticleConfig) -> i64 {
    match cfg.lattice() {
        LatticeKind::InfiniteWindow { .. } => {
            2 * cfg.positions().iter().filter(|&&x| x >= 0).count() as i64
        }
        LatticeKind::Ring { len } => {
            let l = len as i64;
            2 * cfg
                .positions()
                .iter()
                .map(|&x| x.div_euclid(l) + 1)
                .sum::<i64>()
        }
    }
}

fn build_field(cfg: &ParticleConfig, anchor: i64, time: f64) -> HeightField {
    match cfg.lattice() {
        LatticeKind::InfiniteWindow { lo, hi } => {
            let mut occupied = vec![false; (hi - lo) as usize];
            for &x in cfg.positions() {
                occupied[(x - lo) as usize] = true;
            }
            let eta = |k: i64| -> i64 {
                if k < lo {
                    i64::from(cfg.filled_left())
                } else if k >= hi {
                    0
                } else {
                    i64::from(occupied[(k - lo) as usize])
                }
            };
            // Walk from the origin to the left edge.
            let mut h_lo = anchor;
            if lo <= 0 {
                for k in lo..0 {
                    h_lo -= 1 - 2 * eta(k);
                }
            } else {
                for k in 0..lo {
                    h_lo += 1 - 2 * eta(k);
                }
            }
            let mut values = Vec::with_capacity((hi - lo + 1) as usize);
            let mut h = h_lo;
            values.push(h);
            for k in lo..hi {
                h += 1 - 2 * eta(k);
                values.push(h);
            }
            HeightField {
                time,
                x_start: lo,
                values,
            }
        }
        LatticeKind::Ring { len } => {
            let occ = cfg.occupation(0..len as i64).expect("ring window");
            let mut values = Vec::with_capacity(len + 1);
            let mut h = anchor;
            values.push(h);
            for &e in &occ.values {
                h += 1 - 2 * i64::from(e);
                values.push(h);
            }
            HeightField {
                time,
                x_start: 0,
                values,
            }
        }
    }
}

/// Height field at time `t` of a trajectory. The anchor `h(t, 0)` is carried
/// through the replay: +2 whenever a particle crosses the origin bond to the
/// right, -2 when it crosses to the left.
pub fn height(traj: &TrajectorySample, t: f64) -> Result<HeightField> {
    traj.check_time(t)?;
    let mut cfg = traj.initial.clone();
    let mut anchor = direct_anchor(&cfg);
    let wrap = match cfg.lattice() {
        LatticeKind::Ring { len } => Some(len as i64),
        LatticeKind::InfiniteWindow { .. } => None,
    };
    for ev in traj.events.iter().take_while(|ev| ev.time <= t) {
        let x = &mut cfg.positions_mut()[ev.particle as usize];
        let site = wrap.map_or(*x, |l| x.rem_euclid(l));
        let last = wrap.map_or(-1, |l| l - 1);
        match ev.direction {
            Direction::Right => {
                if site == last {
                    anchor += 2;
                }
                *x += 1;
            }
            Direction::Left => {
                if site == 0 {
                    anchor -= 2;
                }
                *x -= 1;
            }
        }
    }
    Ok(build_field(&cfg, anchor, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asep::{build_initial, simulate, InitialCondition, Rates};

    #[test]
    fn single_particle_direct_evaluation() {
        let cfg = ParticleConfig::new(LatticeKind::InfiniteWindow { lo: 0, hi: 2 }, vec![0]).unwrap();
        let h = height_of_config(&cfg, 0.0);
        assert_eq!(h.at(0), Some(2));
        assert_eq!(h.at(1), Some(1));
        assert_eq!(h.at(2), Some(2));
    }

    #[test]
    fn step_initial_height_is_wedge() {
        let cfg = build_initial(
            LatticeKind::InfiniteWindow { lo: -15, hi: 12 },
            &InitialCondition::Step,
        )
        .unwrap();
        let h = height_of_config(&cfg, 0.0);
        for x in -15..=12 {
            assert_eq!(h.at(x), Some(x.abs()), "x = {x}");
        }
    }

    #[test]
    fn incremental_anchor_matches_direct_count() {
        let cfg = build_initial(
            LatticeKind::InfiniteWindow { lo: -60, hi: 60 },
            &InitialCondition::Step,
        )
        .unwrap();
        let traj = simulate(&cfg, Rates::new(0.3).unwrap(), 15.0, 11).unwrap();
        for &t in &[0.0, 3.0, 7.5, 15.0] {
            let tracked = height(&traj, t).unwrap();
            let direct = height_of_config(&traj.config_at(t).unwrap(), t);
            assert_eq!(tracked, direct);
        }
    }

    #[test]
    fn ring_anchor_tracks_winding() {
        let cfg = ParticleConfig::new(LatticeKind::Ring { len: 6 }, vec![0, 3]).unwrap();
        let traj = simulate(&cfg, Rates::tasep(), 25.0, 3).unwrap();
        let tracked = height(&traj, 25.0).unwrap();
        let direct = height_of_config(&traj.final_config, 25.0);
        assert_eq!(tracked, direct);
        assert!(tracked.anchor().unwrap() > 4);
    }

    #[test]
    fn time_out_of_range() {
        let cfg = ParticleConfig::new(LatticeKind::Ring { len: 6 }, vec![0, 3]).unwrap();
        let traj = simulate(&cfg, Rates::tasep(), 1.0, 3).unwrap();
        assert!(height(&traj, 1.5).is_err());
    }
}
