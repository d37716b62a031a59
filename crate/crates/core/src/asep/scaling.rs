use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simulate::simulate_substream;
use super::{
    build_initial, height, height_of_config, InitialCondition, LatticeKind, Rates,
    TrajectorySample,
};
use crate::{Error, Result};

/// Weakly asymmetric scaling: `p - q = λ ε^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersScaling {
    epsilon: f64,
    lambda: f64,
}

impl BurgersScaling {
    pub fn new(epsilon: f64, lambda: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} not in (0, 1]")));
        }
        let asym = lambda * epsilon.sqrt();
        if asym.abs() > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|λ ε^1/2| = {} exceeds 1",
                asym.abs()
            )));
        }
        Ok(Self { epsilon, lambda })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The rates satisfying the scaling constraint.
    pub fn rates(&self) -> Rates {
        Rates::new(0.5 * (1.0 + self.lambda * self.epsilon.sqrt())).expect("|asymmetry| <= 1")
    }

    pub fn is_consistent_with(&self, rates: Rates) -> bool {
        (rates.p() - rates.q() - self.lambda * self.epsilon.sqrt()).abs() < 1e-12
    }
}

/// Microscopic `(time, site)` probed by the 1:2:3 rescaling at macroscopic `(t, x)`:
/// `(ε^{-3/2} t, round(ε^{-1} x))`.
pub fn kpz_arguments(epsilon: f64, t: f64, x: f64) -> (f64, i64) {
    (epsilon.powf(-1.5) * t, (x / epsilon).round() as i64)
}

/// `ε^{1/2} h(ε^{-3/2} t, ε^{-1} x) - C_ε t` for an arbitrary height family
/// `field(time, site)`.
pub fn rescale_kpz<F>(field: F, epsilon: f64, c_eps: f64, t: f64, x: f64) -> Result<f64>
where
    F: Fn(f64, i64) -> Result<f64>,
{
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    let (time, site) = kpz_arguments(epsilon, t, x);
    Ok(epsilon.sqrt() * field(time, site)? - c_eps * t)
}

/// [`rescale_kpz`] applied to the height field of a simulated trajectory.
pub fn rescale_kpz_trajectory(
    traj: &TrajectorySample,
    epsilon: f64,
    c_eps: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    rescale_kpz(
        |time, site| {
            let h = height(traj, time)?;
            h.at(site).map(|v| v as f64).ok_or(Error::OutOfRange {
                what: "site",
                value: site as f64,
                lo: h.x_start as f64,
                hi: h.x_end() as f64,
            })
        },
        epsilon,
        c_eps,
        t,
        x,
    )
}

/// Rescaled one-point statistic `(J - t/4) / (2^{-4/3} t^{1/3})` where
/// `J = h(t/(q-p), 0) / 2` is the number of particles that crossed the origin
/// from a step initial condition.
pub fn one_point_rescaled(traj: &TrajectorySample, t: f64) -> Result<f64> {
    let gap = traj.rates.q() - traj.rates.p();
    if gap <= 0.0 {
        return Err(Error::InvalidParameter(format!("need q > p, got q - p = {gap}")));
    }
    let time = t / gap;
    let h0 = if (time - traj.t_end).abs() <= 1e-12 * time.max(1.0) {
        height_of_config(&traj.final_config, time).anchor()
    } else {
        height(traj, time)?.anchor()
    }
    .ok_or_else(|| Error::GridCoverage("origin outside the height window".into()))?;
    let crossed = h0 as f64 / 2.0;
    Ok((crossed - t / 4.0) / (2f64.powf(-4.0 / 3.0) * t.cbrt()))
}

/// Window large enough that a step initial condition run for `time` never
/// touches its edges (speed at most 1, with an eight-sigma margin).
pub fn step_window(time: f64) -> LatticeKind {
    let half = (time + 8.0 * time.sqrt() + 20.0).ceil() as i64;
    LatticeKind::InfiniteWindow { lo: -half, hi: half }
}

/// One rescaled one-point sample per trajectory, trajectory `i` on substream `i`.
pub fn one_point_ensemble(rates: Rates, t: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let gap = rates.q() - rates.p();
    if gap <= 0.0 {
        return Err(Error::InvalidParameter(format!("need q > p, got q - p = {gap}")));
    }
    let time = t / gap;
    let cfg = build_initial(step_window(time), &InitialCondition::Step)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let traj = simulate_substream(&cfg, rates, time, seed, i)?;
            one_point_rescaled(&traj, t)
        })
        .collect()
}

/// Rescaled slope field `ε^{-1/2} (1 - 2 η_{ε^{-2} T}(⌊ε^{-1} X⌋))`.
pub fn burgers_field(traj: &TrajectorySample, scaling: &BurgersScaling, t: f64, x: f64) -> Result<f64> {
    if !scaling.is_consistent_with(traj.rates) {
        return Err(Error::InvalidParameter(format!(
            "rates p = {}, q = {} violate p - q = λ ε^1/2",
            traj.rates.p(),
            traj.rates.q()
        )));
    }
    let eps = scaling.epsilon();
    let time = t / (eps * eps);
    let site = (x / eps).floor() as i64;
    let cfg = traj.config_at(time)?;
    let window = match cfg.lattice() {
        LatticeKind::Ring { len } => 0..len as i64,
        LatticeKind::InfiniteWindow { lo, hi } => lo..hi,
    };
    if !window.contains(&site) {
        return Err(Error::OutOfRange {
            what: "site",
            value: site as f64,
            lo: window.start as f64,
            hi: (window.end - 1) as f64,
        });
    }
    let eta = cfg.occupation(site..site + 1)?.values[0];
    Ok((1.0 - 2.0 * f64::from(eta)) / eps.sqrt())
}
