//! Frequency-domain Gaussian (quasi-)log-likelihood and its analytic score.
//!
//! With known source spectra the retained DFT bins of the mixtures are
//! (asymptotically) independent zero-mean complex Gaussians with covariance
//! `C_k = A * diag(p_k) * A' + diag(lambda)`, where `p_k` collects the source
//! powers at bin `k`.  Up to parameter-free constants the log-likelihood is
//!
//! `L(theta) = sum_k alpha_k * (log det C_k^{-1} - x_k' C_k^{-1} x_k)`,
//!
//! and the score has closed form in terms of `C_k^{-1}`.  For non-Gaussian
//! sources with the same spectra the identical expressions act as a
//! quasi-likelihood.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::dft::{alpha_weight, FrequencyObservations};
use crate::error::{Error, Result};
use crate::signal::{ModelParams, SpectralProfile};

/// Spectrum entries at or below this level route the bin to direct inversion
/// instead of the low-rank identity, which needs `diag(p)` invertible.
const WOODBURY_POWER_FLOOR: f64 = 1e-12;

/// Largest noise-variance spread for which the low-rank identity is used.
/// Beyond this the inner system is so ill-conditioned that the subtraction
/// loses positive definiteness; the dense factorization of `C` is immune.
const WOODBURY_SPREAD_LIMIT: f64 = 1e6;

/// Model covariances `C_k`, their inverses and log-determinants for every
/// retained bin.
#[derive(Debug, Clone)]
pub struct BinCovariances {
    cov: Vec<DMatrix<f64>>,
    inv: Vec<DMatrix<f64>>,
    /// `log det C_k^{-1}` per bin.
    log_det_inv: Vec<f64>,
    t_len: usize,
}

impl BinCovariances {
    pub fn n_bins(&self) -> usize {
        self.cov.len()
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn cov(&self, k: usize) -> &DMatrix<f64> {
        &self.cov[k]
    }

    pub fn inv(&self, k: usize) -> &DMatrix<f64> {
        &self.inv[k]
    }

    pub fn log_det_inv(&self, k: usize) -> f64 {
        self.log_det_inv[k]
    }

    /// Column `l` of `C_k^{-1}` (also its row `l`, by symmetry).
    pub fn xi(&self, k: usize, l: usize) -> DVectorView<'_, f64> {
        self.inv[k].column(l)
    }
}

fn check_spectra(params: &ModelParams, spectra: &[SpectralProfile]) -> Result<usize> {
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
    Ok(t_len)
}

fn check_obs(
    params: &ModelParams,
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
) -> Result<()> {
    let t_len = check_spectra(params, spectra)?;
    if obs.t_len() != t_len {
        return Err(Error::Dimension(format!(
            "observations cover T={} samples but spectra cover T={t_len}",
            obs.t_len()
        )));
    }
    if obs.n_channels() != params.n_sensors() {
        return Err(Error::Dimension(format!(
            "observations have {} channels but model has {} sensors",
            obs.n_channels(),
            params.n_sensors()
        )));
    }
    Ok(())
}

/// Source powers at bin `k` as a length-`M` vector.
fn bin_powers(spectra: &[SpectralProfile], k: usize) -> DVector<f64> {
    DVector::from_iterator(spectra.len(), spectra.iter().map(|p| p.value(k)))
}

/// Inverse and log-determinant of `C = A diag(p) A' + diag(lambda)`.
///
/// Uses the low-rank (Woodbury) identity
/// `C^{-1} = Li - Li A (diag(p)^{-1} + A' Li A)^{-1} A' Li`, `Li = diag(1/lambda)`,
/// when `M < L` and every entry of `p` is bounded away from zero; otherwise a
/// dense symmetric factorization of `C`.
fn invert_model_cov(
    mixing: &DMatrix<f64>,
    noise_vars: &DVector<f64>,
    powers: &DVector<f64>,
) -> Result<(DMatrix<f64>, f64)> {
    let (l_dim, m_dim) = mixing.shape();
    let lam_max = noise_vars.max();
    let lam_min = noise_vars.min();
    let use_woodbury = m_dim < l_dim
        && powers.iter().all(|&p| p > WOODBURY_POWER_FLOOR)
        && lam_min > 0.0
        && lam_max / lam_min < WOODBURY_SPREAD_LIMIT;
    if use_woodbury {
        // lam_scaled = Lambda^{-1} A
        let mut lam_scaled = mixing.clone();
        for i in 0..l_dim {
            let li = 1.0 / noise_vars[i];
            for j in 0..m_dim {
                lam_scaled[(i, j)] *= li;
            }
        }
        let mut inner = mixing.transpose() * &lam_scaled;
        for j in 0..m_dim {
            inner[(j, j)] += 1.0 / powers[j];
        }
        let chol = nalgebra::Cholesky::new(inner)
            .ok_or_else(|| Error::Numerical("singular inner system in low-rank inverse".into()))?;
        let log_det_inner: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let mut inv = -(&lam_scaled * chol.inverse() * lam_scaled.transpose());
        for i in 0..l_dim {
            inv[(i, i)] += 1.0 / noise_vars[i];
        }
        // Enforce exact symmetry lost to rounding.
        for i in 0..l_dim {
            for j in 0..i {
                let s = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        let log_det_c = noise_vars.iter().map(|v| v.ln()).sum::<f64>()
            + powers.iter().map(|p| p.ln()).sum::<f64>()
            + log_det_inner;
        Ok((inv, log_det_c))
    } else {
        let mut cov = DMatrix::from_diagonal(noise_vars);
        for j in 0..m_dim {
            let p = powers[j];
            if p > 0.0 {
                let col = mixing.column(j);
                for r in 0..l_dim {
                    for c in 0..l_dim {
                        cov[(r, c)] += p * col[r] * col[c];
                    }
                }
            }
        }
        let chol = nalgebra::Cholesky::new(cov)
            .ok_or_else(|| Error::Numerical("model covariance not positive definite".into()))?;
        let log_det_c: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        Ok((chol.inverse(), log_det_c))
    }
}

/// Inverse of the bin covariance `C = A diag(p) A' + diag(lambda)` for one
/// bin's source powers `p`.
pub fn woodbury_inverse(params: &ModelParams, powers: &DVector<f64>) -> Result<DMatrix<f64>> {
    if powers.len() != params.n_sources() {
        return Err(Error::Dimension(format!(
            "got {} bin powers for {} sources",
            powers.len(),
            params.n_sources()
        )));
    }
    invert_model_cov(&params.mixing, &params.noise_vars, powers).map(|(inv, _)| inv)
}

/// Assembles `C_k`, `C_k^{-1}` and `log det C_k^{-1}` for all retained bins.
pub fn model_covariances(
    params: &ModelParams,
    spectra: &[SpectralProfile],
) -> Result<BinCovariances> {
    let t_len = check_spectra(params, spectra)?;
    let n_bins = t_len / 2 + 1;
    let l_dim = params.n_sensors();
    let mut cov = Vec::with_capacity(n_bins);
    let mut inv = Vec::with_capacity(n_bins);
    let mut log_det_inv = Vec::with_capacity(n_bins);
    for k in 0..n_bins {
        let powers = bin_powers(spectra, k);
        let mut c = DMatrix::from_diagonal(&params.noise_vars);
        for j in 0..params.n_sources() {
            let p = powers[j];
            if p > 0.0 {
                let col = params.mixing.column(j);
                for r in 0..l_dim {
                    for s in 0..l_dim {
                        c[(r, s)] += p * col[r] * col[s];
                    }
                }
            }
        }
        let (ci, log_det_c) = invert_model_cov(&params.mixing, &params.noise_vars, &powers)
            .map_err(|e| Error::Numerical(format!("bin {k}: {e}")))?;
        cov.push(c);
        inv.push(ci);
        log_det_inv.push(-log_det_c);
    }
    Ok(BinCovariances { cov, inv, log_det_inv, t_len })
}

pub(crate) fn log_likelihood_with(
    cov: &BinCovariances,
    obs: &FrequencyObservations,
) -> f64 {
    let n_bins = cov.n_bins();
    let mut ll = 0.0;
    for k in 0..n_bins {
        let g = cov.inv(k);
        let re = obs.re_col(k);
        let im = obs.im_col(k);
        let quad = (g * re).dot(&re) + (g * im).dot(&im);
        ll += alpha_weight(k, n_bins) * (cov.log_det_inv(k) - quad);
    }
    ll
}

/// Log-likelihood of the parameters given the retained bins, with
/// parameter-free constants omitted.
pub fn log_likelihood(
    params: &ModelParams,
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
) -> Result<f64> {
    check_obs(params, obs, spectra)?;
    let cov = model_covariances(params, spectra)?;
    Ok(log_likelihood_with(&cov, obs))
}

pub(crate) fn score_with(
    cov: &BinCovariances,
    params: &ModelParams,
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
) -> DVector<f64> {
    let l_dim = params.n_sensors();
    let m_dim = params.n_sources();
    let ml = l_dim * m_dim;
    let n_bins = cov.n_bins();
    let mut grad = DVector::zeros(ml + l_dim);
    for k in 0..n_bins {
        let a = alpha_weight(k, n_bins);
        let g = cov.inv(k);
        // u = C^{-1} Re(x), w = C^{-1} Im(x); quadratic forms in Re{X[k]}
        // reduce to products of their entries.
        let u = g * obs.re_col(k);
        let w = g * obs.im_col(k);
        let b = g * &params.mixing; // C^{-1} A
        let au = params.mixing.transpose() * &u;
        let aw = params.mixing.transpose() * &w;
        for j in 0..m_dim {
            let pj = spectra[j].value(k);
            if pj == 0.0 {
                continue;
            }
            let coeff = 2.0 * a * pj;
            for i in 0..l_dim {
                grad[j * l_dim + i] += coeff * (u[i] * au[j] + w[i] * aw[j] - b[(i, j)]);
            }
        }
        for l in 0..l_dim {
            grad[ml + l] += a * (u[l] * u[l] + w[l] * w[l] - g[(l, l)]);
        }
    }
    grad
}

/// Analytic gradient of [`log_likelihood`] with respect to every parameter,
/// ordered `[vec(A); lambda]`.
pub fn score(
    params: &ModelParams,
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
) -> Result<DVector<f64>> {
    check_obs(params, obs, spectra)?;
    let cov = model_covariances(params, spectra)?;
    Ok(score_with(&cov, params, obs, spectra))
}

/// Max-norm of the score; zero exactly at stationary points of the
/// likelihood equations.
pub fn likelihood_equations_residual(
    params: &ModelParams,
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
) -> Result<f64> {
    Ok(score(params, obs, spectra)?.amax())
}

/// Log-likelihood with the per-bin data outer products `Re{X[k]}` replaced by
/// explicit symmetric matrices (e.g. their population value `C_k`).
pub fn log_likelihood_given_moments(
    params: &ModelParams,
    moments: &[DMatrix<f64>],
    spectra: &[SpectralProfile],
) -> Result<f64> {
    let cov = model_covariances(params, spectra)?;
    if moments.len() != cov.n_bins() {
        return Err(Error::Dimension(format!(
            "got {} moment matrices for {} bins",
            moments.len(),
            cov.n_bins()
        )));
    }
    let n_bins = cov.n_bins();
    let mut ll = 0.0;
    for k in 0..n_bins {
        let trace = (cov.inv(k) * &moments[k]).trace();
        ll += alpha_weight(k, n_bins) * (cov.log_det_inv(k) - trace);
    }
    Ok(ll)
}

/// Score with the per-bin data outer products `Re{X[k]}` replaced by explicit
/// symmetric matrices.  With the population value `C_k(theta)` plugged in,
/// the score vanishes identically at `theta`.
pub fn score_given_moments(
    params: &ModelParams,
    moments: &[DMatrix<f64>],
    spectra: &[SpectralProfile],
) -> Result<DVector<f64>> {
    let cov = model_covariances(params, spectra)?;
    if moments.len() != cov.n_bins() {
        return Err(Error::Dimension(format!(
            "got {} moment matrices for {} bins",
            moments.len(),
            cov.n_bins()
        )));
    }
    let l_dim = params.n_sensors();
    let m_dim = params.n_sources();
    let ml = l_dim * m_dim;
    let n_bins = cov.n_bins();
    let mut grad = DVector::zeros(ml + l_dim);
    for k in 0..n_bins {
        let a = alpha_weight(k, n_bins);
        let g = cov.inv(k);
        let gxg = g * &moments[k] * g;
        let b = g * &params.mixing;
        let gxg_a = &gxg * &params.mixing;
        for j in 0..m_dim {
            let pj = spectra[j].value(k);
            if pj == 0.0 {
                continue;
            }
            let coeff = 2.0 * a * pj;
            for i in 0..l_dim {
                grad[j * l_dim + i] += coeff * (gxg_a[(i, j)] - b[(i, j)]);
            }
        }
        for l in 0..l_dim {
            grad[ml + l] += a * (gxg[(l, l)] - g[(l, l)]);
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::dft_forward;
    use crate::signal::{ar1_spectrum, trial_rng};
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn exp1_mixing() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            3,
            &[
                0.9202, -0.3396, 0.8531, 0.6021, -0.7977, 0.2639, -0.0648, -0.3944, -0.0117,
                0.3877, -0.5301, -0.5394,
            ],
        )
    }

    fn random_obs(l_dim: usize, t_len: usize, seed: u64) -> FrequencyObservations {
        let mut rng = trial_rng(seed, 0);
        let block = DMatrix::from_fn(l_dim, t_len, |_, _| rng.sample(StandardNormal));
        dft_forward(&block).unwrap()
    }

    fn random_params(l_dim: usize, m_dim: usize, seed: u64) -> ModelParams {
        let mut rng = trial_rng(seed, 1);
        let mixing = DMatrix::from_fn(l_dim, m_dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let noise_vars =
            DVector::from_fn(l_dim, |_, _| 0.2 + rng.random::<f64>());
        ModelParams::new(mixing, noise_vars).unwrap()
    }

    fn test_spectra(m_dim: usize, t_len: usize) -> Vec<SpectralProfile> {
        let coefs = [0.84, 0.21, -0.57, 0.4];
        (0..m_dim)
            .map(|m| ar1_spectrum(coefs[m % coefs.len()], t_len).unwrap())
            .collect()
    }

    #[test]
    fn covariance_flat_identity_case() {
        let params = ModelParams::new(
            DMatrix::identity(2, 2),
            DVector::from_element(2, 0.25),
        )
        .unwrap();
        let flat = SpectralProfile::new(vec![2.0; 8]).unwrap();
        let cov = model_covariances(&params, &[flat.clone(), flat]).unwrap();
        for k in 0..cov.n_bins() {
            assert!((cov.cov(k) - DMatrix::from_diagonal_element(2, 2, 2.25)).amax() < 1e-14);
            assert!((cov.inv(k) - DMatrix::from_diagonal_element(2, 2, 1.0 / 2.25)).amax() < 1e-14);
        }
    }

    #[test]
    fn covariance_rank_one_case() {
        // M=1, L=2, A=[1;1], P=2, lambda=0.5 -> C = [[2.5, 2], [2, 2.5]].
        let params = ModelParams::new(
            DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
            DVector::from_element(2, 0.5),
        )
        .unwrap();
        let flat = SpectralProfile::new(vec![2.0; 8]).unwrap();
        let cov = model_covariances(&params, &[flat]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.5, 2.0, 2.0, 2.5]);
        assert!((cov.cov(0) - &expected).amax() < 1e-14);
        assert!((cov.inv(0) * &expected - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn covariance_matches_naive_triple_product() {
        let params = ModelParams::new(exp1_mixing(), DVector::from_element(4, 0.001)).unwrap();
        let spectra = test_spectra(3, 64);
        let cov = model_covariances(&params, &spectra).unwrap();
        for k in 0..cov.n_bins() {
            let p = DMatrix::from_diagonal(&bin_powers(&spectra, k));
            let naive = &params.mixing * p * params.mixing.transpose()
                + DMatrix::from_diagonal(&params.noise_vars);
            assert!((cov.cov(k) - &naive).amax() < 1e-12);
            assert!(
                (cov.inv(k) * &naive - DMatrix::identity(4, 4)).amax() < 1e-10,
                "bin {k}"
            );
        }
    }

    #[test]
    fn woodbury_no_sources_is_noise_inverse() {
        let params = ModelParams::new(
            DMatrix::zeros(3, 1),
            DVector::from_vec(vec![0.5, 2.0, 4.0]),
        )
        .unwrap();
        let inv = woodbury_inverse(&params, &DVector::from_vec(vec![1.5])).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5, 0.25]));
        assert!((inv - expected).amax() < 1e-14);
    }

    #[test]
    fn woodbury_scalar_case() {
        let params = ModelParams::new(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 0.5),
        )
        .unwrap();
        let inv = woodbury_inverse(&params, &DVector::from_element(1, 2.0)).unwrap();
        assert!((inv[(0, 0)] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn woodbury_matches_dense_inverse() {
        let exp2 = DMatrix::from_row_slice(
            5,
            2,
            &[
                -0.7270, -2.1943, -0.0249, 0.8741, -1.2327, 0.8559, 0.5638, 0.0343, 1.0297,
                -0.7223,
            ],
        );
        let params = ModelParams::new(exp2, DVector::from_vec(vec![1.0, 0.5, 2.0, 0.8, 1.3]))
            .unwrap();
        let powers = DVector::from_vec(vec![1.7, 0.3]);
        let inv = woodbury_inverse(&params, &powers).unwrap();
        let dense = (&params.mixing * DMatrix::from_diagonal(&powers) * params.mixing.transpose()
            + DMatrix::from_diagonal(&params.noise_vars))
            .try_inverse()
            .unwrap();
        assert!((inv - dense).amax() < 1e-10);
    }

    #[test]
    fn log_likelihood_unit_covariance_is_energy() {
        // A = 0, lambda = 1 gives C_k = 1 for all bins, so the likelihood is
        // minus the alpha-weighted bin energy.
        let params =
            ModelParams::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0)).unwrap();
        let spectra = vec![SpectralProfile::new(vec![1.0; 16]).unwrap()];
        let obs = random_obs(1, 16, 5);
        let ll = log_likelihood(&params, &obs, &spectra).unwrap();
        let mut expected = 0.0;
        for k in 0..obs.n_bins() {
            expected -= obs.alpha(k) * (obs.re()[(0, k)].powi(2) + obs.im()[(0, k)].powi(2));
        }
        assert!((ll - expected).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_zero_observations_is_log_det_sum() {
        let params = random_params(3, 2, 6);
        let spectra = test_spectra(2, 16);
        let obs = FrequencyObservations::from_parts(
            DMatrix::zeros(3, 9),
            DMatrix::zeros(3, 9),
            16,
        )
        .unwrap();
        let ll = log_likelihood(&params, &obs, &spectra).unwrap();
        let cov = model_covariances(&params, &spectra).unwrap();
        let expected: f64 = (0..9).map(|k| obs.alpha(k) * cov.log_det_inv(k)).sum();
        assert!((ll - expected).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_matches_dense_gaussian_density() {
        // Differences of the implemented likelihood between two parameter
        // points must match the exact complex/real Gaussian log-densities
        // (whose parameter-free constants cancel in the difference).
        let spectra = test_spectra(2, 16);
        let obs = random_obs(3, 16, 7);
        let p1 = random_params(3, 2, 8);
        let p2 = random_params(3, 2, 9);
        let dense = |params: &ModelParams| -> f64 {
            let cov = model_covariances(params, &spectra).unwrap();
            let mut ll = 0.0;
            for k in 0..cov.n_bins() {
                let g = cov.inv(k);
                let re = obs.re_col(k);
                let im = obs.im_col(k);
                let quad = (g * re).dot(&re) + (g * im).dot(&im);
                let log_det_c = -cov.log_det_inv(k);
                if k == 0 || k == cov.n_bins() - 1 {
                    ll += -0.5 * 3.0 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det_c
                        - 0.5 * quad;
                } else {
                    ll += -3.0 * std::f64::consts::PI.ln() - log_det_c - quad;
                }
            }
            ll
        };
        let impl_delta = log_likelihood(&p1, &obs, &spectra).unwrap()
            - log_likelihood(&p2, &obs, &spectra).unwrap();
        let dense_delta = dense(&p1) - dense(&p2);
        assert!(
            (impl_delta - dense_delta).abs() < 1e-9,
            "{impl_delta} vs {dense_delta}"
        );
    }

    #[test]
    fn log_likelihood_invariant_to_bin_conjugation() {
        let spectra = test_spectra(2, 16);
        let obs = random_obs(3, 16, 10);
        let params = random_params(3, 2, 11);
        let conj = FrequencyObservations::from_parts(obs.re().clone(), -obs.im(), 16).unwrap();
        let a = log_likelihood(&params, &obs, &spectra).unwrap();
        let b = log_likelihood(&params, &conj, &spectra).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn score_vanishes_at_population_moments() {
        let params = random_params(3, 2, 12);
        let spectra = test_spectra(2, 16);
        let cov = model_covariances(&params, &spectra).unwrap();
        let moments: Vec<DMatrix<f64>> = (0..cov.n_bins()).map(|k| cov.cov(k).clone()).collect();
        let s = score_given_moments(&params, &moments, &spectra).unwrap();
        assert!(s.amax() < 1e-12, "residual {}", s.amax());
    }

    #[test]
    fn score_matches_finite_differences() {
        let spectra = test_spectra(2, 16);
        let obs = random_obs(3, 16, 13);
        for seed in [14, 15, 16] {
            let params = random_params(3, 2, seed);
            let analytic = score(&params, &obs, &spectra).unwrap();
            let theta = params.to_vector();
            let mut fd = DVector::zeros(theta.len());
            for i in 0..theta.len() {
                let h = 1e-6 * theta[i].abs().max(1.0);
                let mut tp = theta.clone();
                tp[i] += h;
                let mut tm = theta.clone();
                tm[i] -= h;
                let lp = log_likelihood(
                    &ModelParams::from_vector(&tp, 3, 2).unwrap(),
                    &obs,
                    &spectra,
                )
                .unwrap();
                let lm = log_likelihood(
                    &ModelParams::from_vector(&tm, 3, 2).unwrap(),
                    &obs,
                    &spectra,
                )
                .unwrap();
                fd[i] = (lp - lm) / (2.0 * h);
            }
            let rel = (&analytic - &fd).amax() / analytic.amax();
            assert!(rel < 1e-5, "seed {seed}: relative error {rel}");
        }
    }

    #[test]
    fn score_agrees_with_moment_form_on_data() {
        let spectra = test_spectra(2, 16);
        let obs = random_obs(3, 16, 17);
        let params = random_params(3, 2, 18);
        let fast = score(&params, &obs, &spectra).unwrap();
        let moments: Vec<DMatrix<f64>> = (0..obs.n_bins())
            .map(|k| {
                let re = DVector::from(obs.re_col(k));
                let im = DVector::from(obs.im_col(k));
                &re * re.transpose() + &im * im.transpose()
            })
            .collect();
        let slow = score_given_moments(&params, &moments, &spectra).unwrap();
        assert!((&fast - &slow).amax() < 1e-10);
    }

    #[test]
    fn residual_positive_away_from_stationary_point() {
        let params = random_params(3, 2, 19);
        let spectra = test_spectra(2, 16);
        let cov = model_covariances(&params, &spectra).unwrap();
        let moments: Vec<DMatrix<f64>> = (0..cov.n_bins()).map(|k| cov.cov(k).clone()).collect();
        // At the generating parameters the population score is zero...
        let at_truth = score_given_moments(&params, &moments, &spectra).unwrap();
        assert!(at_truth.amax() < 1e-12);
        // ...and strictly positive after a small perturbation.
        let mut theta = params.to_vector();
        theta[0] += 1e-2;
        let perturbed = ModelParams::from_vector(&theta, 3, 2).unwrap();
        let off = score_given_moments(&perturbed, &moments, &spectra).unwrap();
        assert!(off.amax() > 1e-6);
    }
}
