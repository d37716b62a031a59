//! Gaussian Unitary Ensemble: sampling, Hermitian eigenvalues, the
//! semicircle law and its Stieltjes transform, the largest-eigenvalue edge,
//! the Coulomb-gas eigenvalue density and trace moments.

mod coulomb;
mod eigen;
mod gue;
mod moments;
mod semicircle;

pub use coulomb::{coulomb_log_density, metropolis_sample, MetropolisConfig, MetropolisRun};
pub use eigen::{eigenvalues, eigenvector, hermitian_eigenvalues, tridiagonal_eigenvalues};
pub use gue::{
    edge_ensemble, edge_rescale, esd, sample_gue, sample_gue_substream, EmpiricalMeasure, GueMatrix, SpectralSample,
};
pub use moments::{
    genus_counts, pairings, trace_moment, wick_trace_moment, MomentEstimate, MAX_MOMENT,
    MAX_MOMENT_N,
};
pub use semicircle::{
    catalan, invert_stieltjes, semicircle, semicircle_cdf, semicircle_moment,
    semicircle_stieltjes, semicircle_stieltjes_series, stieltjes,
};
