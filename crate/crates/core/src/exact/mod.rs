//! Exact solvers for the exclusion process: generator matrices, the
//! uniformization oracle for the master equation, Bethe roots and
//! eigenvectors, and the contour-integral transition probability on ℤ.

mod amplitude;
mod bethe;
mod contour;
mod generator;
mod uniformization;

pub use amplitude::{amplitude, for_each_permutation, inversions, permutations};
pub use bethe::{
    bethe_eigenpair, bethe_refine, bethe_residual, bethe_solve, bethe_solve_all,
    spectrum_coverage, BetheRoots, BetheSweep, Coverage,
};
pub use contour::{
    transition_probability, transition_probability_detailed, transition_table, ContourSpec,
    ContourValue, TransitionTable,
};
pub use generator::{generator, generator_segment, GeneratorMatrix, StateSpace};
pub use uniformization::{delta, master_evolve, master_evolve_capped, uniform, TERM_CAP};
