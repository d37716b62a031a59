//! The Tracy–Widom GUE law F₂ through the Hastings–McLeod solution of
//! Painlevé II, `q'' = s q + 2 q³` with `q(s) ~ Ai(s)` as `s → ∞`.

mod airy;
mod distribution;
mod ode;
mod painleve;

pub use airy::{airy, AiryEval, AIRY_RANGE};
pub use distribution::{f2_cdf, f2_moments, write_table, TWDistribution, TW_MEAN, TW_STD, TW_VAR};
pub use ode::{dormand_prince, OdeOptions};
pub use painleve::{hastings_mcleod, hastings_mcleod_scaled, PainleveGrid, PainleveSolution};
