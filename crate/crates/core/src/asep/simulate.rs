use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{LatticeKind, ParticleConfig, Rates};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    fn step(self) -> i64 {
        match self {
            Direction::Left => -1,
            Direction::Right => 1,
        }
    }
}

/// An executed jump. Suppressed jump attempts are not logged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub particle: u32,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub initial: ParticleConfig,
    pub events: Vec<JumpEvent>,
    pub final_config: ParticleConfig,
    pub t_end: f64,
    pub rates: Rates,
    pub seed: u64,
    pub substream: Option<u64>,
}

impl TrajectorySample {
    /// Configuration at time `t`, obtained by replaying the event log.
    pub fn config_at(&self, t: f64) -> Result<ParticleConfig> {
        self.check_time(t)?;
        let mut cfg = self.initial.clone();
        for ev in self.events.iter().take_while(|ev| ev.time <= t) {
            cfg.positions_mut()[ev.particle as usize] += ev.direction.step();
        }
        Ok(cfg)
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(Error::OutOfRange {
                what: "t",
                value: t,
                lo: 0.0,
                hi: self.t_end,
            });
        }
        Ok(())
    }
}

/// Occupancy lookup shared by ring and window lattices.
struct Occupancy {
    cells: Vec<bool>,
    lattice: LatticeKind,
}

impl Occupancy {
    fn new(cfg: &ParticleConfig) -> Self {
        let lattice = cfg.lattice();
        let mut occ = Self {
            cells: vec![false; lattice.sites()],
            lattice,
        };
        for &x in cfg.positions() {
            let i = occ.index(x).expect("validated configuration");
            occ.cells[i] = true;
        }
        occ
    }

    /// Cell index of site `x`, or `None` when it lies outside a window.
    fn index(&self, x: i64) -> Option<usize> {
        match self.lattice {
            LatticeKind::Ring { len } => Some(x.rem_euclid(len as i64) as usize),
            LatticeKind::InfiniteWindow { lo, hi } => {
                (lo..hi).contains(&x).then(|| (x - lo) as usize)
            }
        }
    }
}

/// Event-driven realization of the exclusion dynamics up to `t_end`.
///
/// A single exponential clock of rate N drives the system; at each ring a
/// uniformly chosen particle attempts a jump left with probability `p` or
/// right with probability `q`, executed only if the target site is empty.
pub fn simulate(cfg: &ParticleConfig, rates: Rates, t_end: f64, seed: u64) -> Result<TrajectorySample> {
    run(cfg, rates, t_end, seed, None)
}

/// As [`simulate`], on substream `index` of `seed`.
pub fn simulate_substream(
    cfg: &ParticleConfig,
    rates: Rates,
    t_end: f64,
    seed: u64,
    index: u64,
) -> Result<TrajectorySample> {
    run(cfg, rates, t_end, seed, Some(index))
}

fn run(
    cfg: &ParticleConfig,
    rates: Rates,
    t_end: f64,
    seed: u64,
    stream: Option<u64>,
) -> Result<TrajectorySample> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must be finite and >= 0")));
    }
    let mut rng = match stream {
        Some(i) => rng::substream(seed, i),
        None => rng::root(seed),
    };
    let mut occ = Occupancy::new(cfg);
    let mut state = cfg.clone();
    let mut events = Vec::new();
    let n = state.len();
    let filled_left = state.filled_left();
    let window_lo = match state.lattice() {
        LatticeKind::InfiniteWindow { lo, .. } => lo,
        LatticeKind::Ring { .. } => i64::MIN,
    };
    let total_rate = n as f64;
    let mut t = 0.0;
    if n > 0 {
        loop {
            let dt: f64 = Exp1.sample(&mut rng);
            t += dt / total_rate;
            if t > t_end {
                break;
            }
            let i = rng.random_range(0..n);
            let direction = if rng.random::<f64>() < rates.p() {
                Direction::Left
            } else {
                Direction::Right
            };
            let from = state.positions()[i];
            let to = from + direction.step();
            let target = match occ.index(to) {
                Some(c) => c,
                None if filled_left && to < window_lo => continue,
                None => return Err(Error::WindowEscape { particle: i, time: t }),
            };
            if occ.cells[target] {
                continue;
            }
            if filled_left && from == window_lo {
                // The site a particle from outside could now enter is empty.
                return Err(Error::WindowEscape { particle: i, time: t });
            }
            let source = occ.index(from).expect("particle inside lattice");
            occ.cells[source] = false;
            occ.cells[target] = true;
            state.positions_mut()[i] = to;
            events.push(JumpEvent {
                time: t,
                particle: i as u32,
                direction,
            });
        }
    }
    Ok(TrajectorySample {
        initial: cfg.clone(),
        events,
        final_config: state,
        t_end,
        rates,
        seed,
        substream: stream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asep::{build_initial, InitialCondition};

    fn ring_cfg() -> ParticleConfig {
        ParticleConfig::new(LatticeKind::Ring { len: 7 }, vec![0, 1, 2, 5]).unwrap()
    }

    #[test]
    fn zero_time_is_empty() {
        let traj = simulate(&ring_cfg(), Rates::new(0.3).unwrap(), 0.0, 1).unwrap();
        assert!(traj.events.is_empty());
        assert_eq!(traj.final_config, traj.initial);
    }

    #[test]
    fn replay_reproduces_final_and_is_deterministic() {
        let rates = Rates::new(0.3).unwrap();
        let a = simulate(&ring_cfg(), rates, 20.0, 9).unwrap();
        let b = simulate(&ring_cfg(), rates, 20.0, 9).unwrap();
        assert_eq!(a, b);
        assert!(!a.events.is_empty());
        assert_eq!(a.config_at(20.0).unwrap(), a.final_config);
        assert!(a.events.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn exclusion_holds_at_every_event() {
        let rates = Rates::new(0.45).unwrap();
        let traj = simulate(&ring_cfg(), rates, 30.0, 4).unwrap();
        let mut cfg = traj.initial.clone();
        for ev in &traj.events {
            cfg.positions_mut()[ev.particle as usize] += ev.direction.step();
            ParticleConfig::new(cfg.lattice(), cfg.positions().to_vec()).unwrap();
        }
    }

    #[test]
    fn window_escape_is_an_error() {
        let cfg = ParticleConfig::new(LatticeKind::InfiniteWindow { lo: 0, hi: 3 }, vec![1]).unwrap();
        let err = simulate(&cfg, Rates::tasep(), 100.0, 2).unwrap_err();
        assert!(matches!(err, Error::WindowEscape { .. }));
    }

    #[test]
    fn step_tail_stays_frozen_for_tasep() {
        let cfg = build_initial(
            LatticeKind::InfiniteWindow { lo: -40, hi: 40 },
            &InitialCondition::Step,
        )
        .unwrap();
        let traj = simulate(&cfg, Rates::tasep(), 10.0, 5).unwrap();
        assert_eq!(traj.final_config.len(), 40);
        assert_eq!(traj.final_config.positions()[0], -40);
    }

    #[test]
    fn invalid_time_rejected() {
        assert!(simulate(&ring_cfg(), Rates::tasep(), f64::INFINITY, 1).is_err());
        assert!(simulate(&ring_cfg(), Rates::tasep(), -1.0, 1).is_err());
    }
}
