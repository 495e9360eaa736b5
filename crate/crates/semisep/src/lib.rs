//! Semi-blind separation and estimation of stationary sources from noisy
//! linear mixtures, given the sources' power spectra.
//!
//! The model is `X = A*S + V`: `M` independent zero-mean stationary sources
//! with known spectra, an unknown `L x M` mixing matrix `A`, and independent
//! white Gaussian noise with unknown per-sensor variances.  The crate
//! provides
//!
//! - a frequency-domain Gaussian (quasi-)likelihood with analytic scores
//!   ([`likelihood`]),
//! - the Fisher information matrix, the Cramer-Rao bound and a safeguarded
//!   Fisher-scoring solver for the maximum-likelihood estimates of `A` and
//!   the noise variances ([`fisher`]),
//! - Wiener/MMSE source estimation with exact per-source error predictions
//!   and a pseudo-inverse demixer ([`mmse`]),
//! - Monte-Carlo experiment harnesses and a small CLI around them
//!   ([`experiments`], [`cli`]).
//!
//! See the crate examples for end-to-end usage; `cargo run --example
//! simulate_estimate` is a good starting point.

pub mod cli;
pub mod dft;
pub mod error;
pub mod experiments;
pub mod fisher;
pub mod likelihood;
pub mod mmse;
pub mod signal;

pub use dft::{dft_forward, dft_inverse, FrequencyObservations};
pub use error::{Error, Result};
pub use fisher::{
    crlb, fim, fisher_scoring, initialize, resolve_sign, Crlb, ScoringConfig, ScoringTrace,
    StopReason,
};
pub use likelihood::{
    log_likelihood, likelihood_equations_residual, model_covariances, score, woodbury_inverse,
    BinCovariances,
};
pub use mmse::{
    estimate_sources, lmmse_filter_bins, maximally_separating_demix, mse_prediction,
    MsePrediction, SourceEstimate,
};
pub use signal::{
    ar1_spectrum, generate_ar1, generate_telegraph, mix_and_observe, telegraph_spectrum,
    trial_rng, Dimensions, ModelParams, SpectralProfile,
};

/// Power ratio in decibels, `10*log10(x)`.
pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inverse of [`db`].
pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}
