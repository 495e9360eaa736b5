//! Wiener/MMSE source estimation in the frequency domain.
//!
//! For jointly Gaussian sources and mixtures the conditional-mean estimate of
//! the sources is a linear filter; stationarity makes it block-diagonal over
//! DFT bins, so each bin only needs the `M x L` gain
//! `W_k = diag(p_k) A' C_k^{-1}`.  Plugging estimated parameters into the same
//! filter gives the plug-in estimate used after maximum-likelihood
//! identification; with the true parameters it is the oracle (L)MMSE
//! estimate, whose per-source error is the attainable lower bound.

use nalgebra::{DMatrix, DVector};

use crate::dft::{alpha_weight, dft_inverse, FrequencyObservations};
use crate::error::{Error, Result};
use crate::likelihood::{model_covariances, woodbury_inverse};
use crate::signal::{ModelParams, SpectralProfile};

/// Estimated sources in both domains, plus the parameters that built the
/// filter.
#[derive(Debug, Clone)]
pub struct SourceEstimate {
    /// Time-domain estimates, `M x T`.
    pub time: DMatrix<f64>,
    /// Real parts of the retained frequency-domain estimates, `M x (T/2+1)`.
    pub bins_re: DMatrix<f64>,
    /// Imaginary parts of the retained frequency-domain estimates.
    pub bins_im: DMatrix<f64>,
    /// Parameters (true or estimated) the filter was built from.
    pub params_used: ModelParams,
}

/// Predicted per-source mean square error of a bin-wise linear filter.
#[derive(Debug, Clone)]
pub struct MsePrediction {
    /// Per-source MSE per time sample, length `M`.
    pub per_source: DVector<f64>,
    /// Per-bin decomposition, `M x (T/2+1)`; `per_source` is its
    /// alpha-weighted conjugate-extended average.
    pub per_bin: DMatrix<f64>,
}

/// Per-bin Wiener gains `W_k = diag(p_k) A' C_k^{-1}` for all retained bins.
///
/// A source with zero assumed power at a bin gets a zero filter row there.
pub fn lmmse_filter_bins(
    params: &ModelParams,
    spectra: &[SpectralProfile],
) -> Result<Vec<DMatrix<f64>>> {
    if spectra.len() != params.n_sources() {
        return Err(Error::Dimension(format!(
            "model has {} sources but {} spectra were given",
            params.n_sources(),
            spectra.len()
        )));
    }
    let t_len = spectra[0].len();
    if spectra.iter().any(|p| p.len() != t_len) {
        return Err(Error::Dimension("spectra have differing lengths".into()));
    }
    let n_bins = t_len / 2 + 1;
    let m_dim = params.n_sources();
    let mut filters = Vec::with_capacity(n_bins);
    for k in 0..n_bins {
        let powers = DVector::from_iterator(m_dim, spectra.iter().map(|p| p.value(k)));
        let inv = woodbury_inverse(params, &powers)
            .map_err(|e| Error::Numerical(format!("bin {k}: {e}")))?;
        let mut w = params.mixing.transpose() * inv;
        for m in 0..m_dim {
            let p = powers[m];
            for l in 0..params.n_sensors() {
                w[(m, l)] *= p;
            }
        }
        filters.push(w);
    }
    Ok(filters)
}

/// Applies the bin-wise Wiener filter built from `params` to the observed
/// bins and returns time- and frequency-domain source estimates.
pub fn estimate_sources(
    params: &ModelParams,
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
) -> Result<SourceEstimate> {
    if obs.n_channels() != params.n_sensors() {
        return Err(Error::Dimension(format!(
            "observations have {} channels but model has {} sensors",
            obs.n_channels(),
            params.n_sensors()
        )));
    }
    if obs.t_len() != spectra.first().map_or(0, |p| p.len()) {
        return Err(Error::Dimension(format!(
            "observations cover T={} samples but spectra cover T={}",
            obs.t_len(),
            spectra.first().map_or(0, |p| p.len())
        )));
    }
    let filters = lmmse_filter_bins(params, spectra)?;
    let m_dim = params.n_sources();
    let n_bins = obs.n_bins();
    let mut bins_re = DMatrix::zeros(m_dim, n_bins);
    let mut bins_im = DMatrix::zeros(m_dim, n_bins);
    for (k, w) in filters.iter().enumerate() {
        bins_re.set_column(k, &(w * obs.re_col(k)));
        bins_im.set_column(k, &(w * obs.im_col(k)));
    }
    let freq = FrequencyObservations::from_parts(bins_re.clone(), bins_im.clone(), obs.t_len())?;
    let time = dft_inverse(&freq)?;
    Ok(SourceEstimate {
        time,
        bins_re,
        bins_im,
        params_used: params.clone(),
    })
}

/// Exact per-source MSE of the bin-wise filter built from `params_assumed`
/// when the data actually follow `params_true`.
///
/// With `params_assumed == params_true` this is the oracle (L)MMSE bound
/// `p_m[k] - p_m[k]^2 (A' C_k^{-1} A)_{mm}` per bin.  Mismatched parameters
/// expand the quadratic `E || W x - s ||^2` exactly.
pub fn mse_prediction(
    params_assumed: &ModelParams,
    params_true: &ModelParams,
    spectra: &[SpectralProfile],
) -> Result<MsePrediction> {
    if params_assumed.n_sensors() != params_true.n_sensors()
        || params_assumed.n_sources() != params_true.n_sources()
    {
        return Err(Error::Dimension(
            "assumed and true parameters have different shapes".into(),
        ));
    }
    let filters = lmmse_filter_bins(params_assumed, spectra)?;
    let true_cov = model_covariances(params_true, spectra)?;
    let m_dim = params_true.n_sources();
    let t_len = spectra[0].len();
    let n_bins = t_len / 2 + 1;
    let mut per_bin = DMatrix::zeros(m_dim, n_bins);
    for k in 0..n_bins {
        let w = &filters[k];
        let c_true = true_cov.cov(k);
        for m in 0..m_dim {
            let p_true = spectra[m].value(k);
            let w_row = w.row(m).transpose();
            let quad = (c_true * &w_row).dot(&w_row);
            let cross = w_row.dot(&params_true.mixing.column(m));
            let mse = quad - 2.0 * p_true * cross + p_true;
            // Guard against the tiny negative residues of exact cancellation.
            per_bin[(m, k)] = mse.max(0.0);
        }
    }
    let mut per_source = DVector::zeros(m_dim);
    for m in 0..m_dim {
        let mut total = 0.0;
        for k in 0..n_bins {
            total += 2.0 * alpha_weight(k, n_bins) * per_bin[(m, k)];
        }
        per_source[m] = total / t_len as f64;
    }
    Ok(MsePrediction { per_source, per_bin })
}

/// Maximally separating memoryless demixer: applies the pseudo-inverse of the
/// estimated mixing matrix to the mixtures.
pub fn maximally_separating_demix(
    a_hat: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if a_hat.nrows() != x.nrows() {
        return Err(Error::Dimension(format!(
            "mixing estimate has {} rows but data has {} channels",
            a_hat.nrows(),
            x.nrows()
        )));
    }
    let m_dim = a_hat.ncols();
    let svd = a_hat.clone().svd(true, true);
    let s_max = svd.singular_values.iter().fold(0.0f64, |m, &v| m.max(v));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&v| v > s_max * 1e-12)
        .count();
    if rank < m_dim {
        return Err(Error::Numerical(format!(
            "mixing estimate is rank deficient: rank {rank} of {m_dim} columns; \
             the column space does not span all sources"
        )));
    }
    let pinv = svd
        .pseudo_inverse(s_max * 1e-12)
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
    Ok(pinv * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::dft_forward;
    use crate::signal::{ar1_spectrum, trial_rng};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn test_spectra(m_dim: usize, t_len: usize) -> Vec<SpectralProfile> {
        let coefs = [0.84, 0.21, -0.57];
        (0..m_dim)
            .map(|m| ar1_spectrum(coefs[m % coefs.len()], t_len).unwrap())
            .collect()
    }

    #[test]
    fn scalar_wiener_gain() {
        let params = ModelParams::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 0.5),
        )
        .unwrap();
        let spectra = vec![SpectralProfile::new(vec![2.0; 8]).unwrap()];
        let filters = lmmse_filter_bins(&params, &spectra).unwrap();
        for w in &filters {
            assert!((w[(0, 0)] - 2.0 / 2.5).abs() < 1e-14);
        }
        // Predicted MSE per bin is the scalar Wiener residual p*s2/(p+s2).
        let pred = mse_prediction(&params, &params, &spectra).unwrap();
        for k in 0..pred.per_bin.ncols() {
            assert!((pred.per_bin[(0, k)] - 2.0 * 0.5 / 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_noise_inverts_square_mixing() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 0.8]);
        let params = ModelParams::new(a.clone(), DVector::from_element(2, 1e-12)).unwrap();
        let spectra = test_spectra(2, 16);
        let filters = lmmse_filter_bins(&params, &spectra).unwrap();
        let a_inv = a.try_inverse().unwrap();
        for w in &filters {
            assert!((w - &a_inv).amax() < 1e-9);
        }
        // The matched MSE collapses with the noise.
        let pred = mse_prediction(&params, &params, &spectra).unwrap();
        assert!(pred.per_source.amax() < 1e-10);
    }

    #[test]
    fn noiseless_estimation_recovers_sources() {
        let mut rng = trial_rng(60, 0);
        let t_len = 64;
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 0.8]);
        let s = DMatrix::from_fn(2, t_len, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &a * &s;
        let obs = dft_forward(&x).unwrap();
        let params = ModelParams::new(a, DVector::from_element(2, 1e-12)).unwrap();
        let est = estimate_sources(&params, &obs, &test_spectra(2, t_len)).unwrap();
        assert!((&est.time - &s).amax() < 1e-8);
    }

    #[test]
    fn zero_observations_give_zero_estimate() {
        let params = ModelParams::new(
            DMatrix::from_row_slice(2, 1, &[1.0, 0.5]),
            DVector::from_element(2, 0.2),
        )
        .unwrap();
        let obs = FrequencyObservations::from_parts(DMatrix::zeros(2, 9), DMatrix::zeros(2, 9), 16)
            .unwrap();
        let est = estimate_sources(&params, &obs, &test_spectra(1, 16)).unwrap();
        assert_eq!(est.time, DMatrix::zeros(1, 16));
    }

    #[test]
    fn estimate_bins_and_time_are_dft_consistent() {
        let mut rng = trial_rng(61, 0);
        let t_len = 32;
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.4, -0.3, 0.8, 0.2, 0.7]);
        let params = ModelParams::new(a, DVector::from_element(3, 0.3)).unwrap();
        let x = DMatrix::from_fn(3, t_len, |_, _| rng.sample::<f64, _>(StandardNormal));
        let obs = dft_forward(&x).unwrap();
        let est = estimate_sources(&params, &obs, &test_spectra(2, t_len)).unwrap();
        let back = dft_forward(&est.time).unwrap();
        assert!((back.re() - &est.bins_re).amax() < 1e-10);
        assert!((back.im() - &est.bins_im).amax() < 1e-10);
    }

    #[test]
    fn matched_prediction_is_bounded_by_source_variance() {
        let params = ModelParams::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 0.4, -0.3, 0.8, 0.2, 0.7]),
            DVector::from_vec(vec![0.5, 1.0, 0.25]),
        )
        .unwrap();
        let spectra = test_spectra(2, 64);
        let pred = mse_prediction(&params, &params, &spectra).unwrap();
        for m in 0..2 {
            assert!(pred.per_source[m] > 0.0);
            assert!(pred.per_source[m] <= spectra[m].variance() + 1e-12);
        }
        // per_source is the alpha-weighted average of per_bin.
        let n_bins = pred.per_bin.ncols();
        for m in 0..2 {
            let mut avg = 0.0;
            for k in 0..n_bins {
                avg += 2.0 * alpha_weight(k, n_bins) * pred.per_bin[(m, k)];
            }
            avg /= 64.0;
            assert!((avg - pred.per_source[m]).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_prediction_dominates_matched() {
        let truth = ModelParams::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 0.4, -0.3, 0.8, 0.2, 0.7]),
            DVector::from_vec(vec![0.5, 1.0, 0.25]),
        )
        .unwrap();
        let spectra = test_spectra(2, 64);
        let matched = mse_prediction(&truth, &truth, &spectra).unwrap();
        let mut rng = trial_rng(62, 0);
        for _ in 0..8 {
            let wrong = ModelParams::new(
                &truth.mixing
                    + DMatrix::from_fn(3, 2, |_, _| 0.3 * rng.sample::<f64, _>(StandardNormal)),
                DVector::from_fn(3, |l, _| truth.noise_vars[l] * (0.5 + rng.random::<f64>())),
            )
            .unwrap();
            let mism = mse_prediction(&wrong, &truth, &spectra).unwrap();
            for m in 0..2 {
                assert!(
                    mism.per_source[m] >= matched.per_source[m] - 1e-12,
                    "mismatched filter beat the bound for source {m}"
                );
            }
        }
    }

    #[test]
    fn experiment_bound_values() {
        // Deterministic per-source oracle bounds for the two AR scenarios.
        let exp1 = ModelParams::new(
            DMatrix::from_row_slice(
                4,
                3,
                &[
                    0.9202, -0.3396, 0.8531, 0.6021, -0.7977, 0.2639, -0.0648, -0.3944, -0.0117,
                    0.3877, -0.5301, -0.5394,
                ],
            ),
            DVector::from_element(4, 0.001),
        )
        .unwrap();
        let spectra = vec![
            ar1_spectrum(0.84, 1000).unwrap(),
            ar1_spectrum(0.21, 1000).unwrap(),
            ar1_spectrum(-0.57, 1000).unwrap(),
        ];
        let pred = mse_prediction(&exp1, &exp1, &spectra).unwrap();
        let db: Vec<f64> = pred.per_source.iter().map(|&v| 10.0 * v.log10()).collect();
        for (got, want) in db.iter().zip([-24.34, -25.53, -26.98]) {
            assert!((got - want).abs() < 0.1, "{got} vs {want}");
        }
    }

    #[test]
    fn demix_inverts_known_mixing() {
        let mut rng = trial_rng(63, 0);
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.4, -0.3, 0.8, 0.2, 0.7]);
        let s = DMatrix::from_fn(2, 32, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &a * &s;
        let out = maximally_separating_demix(&a, &x).unwrap();
        assert!((&out - &s).amax() < 1e-10);
    }

    #[test]
    fn demix_orthonormal_is_transpose() {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let a = DMatrix::from_row_slice(2, 2, &[inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2]);
        let x = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, -1.0, 0.5, 0.0, 2.0]);
        let out = maximally_separating_demix(&a, &x).unwrap();
        assert!((&out - a.transpose() * &x).amax() < 1e-12);
    }

    #[test]
    fn demix_rejects_rank_deficiency() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.5, 1.0, -1.0, -2.0]);
        let x = DMatrix::zeros(3, 8);
        assert!(matches!(
            maximally_separating_demix(&a, &x),
            Err(Error::Numerical(_))
        ));
    }
}
