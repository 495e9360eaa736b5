//! Normalized DFT of real multichannel blocks and its inverse.
//!
//! Only the first `T/2 + 1` bins of a real signal are retained; the rest are
//! their complex conjugates.  Sums over the retained bins weight the two
//! real-valued bins (DC and Nyquist) by one half so they count once in the
//! conjugate-extended total.

use nalgebra::{DMatrix, DVectorView};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Frequency-domain view of a real `L x T` block: the complex bins
/// `k = 0..T/2` stored as separate real and imaginary `L x (T/2+1)` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyObservations {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    t_len: usize,
}

impl FrequencyObservations {
    /// Wraps precomputed bins, enforcing that the DC and Nyquist bins are
    /// real-valued.
    pub fn from_parts(re: DMatrix<f64>, im: DMatrix<f64>, t_len: usize) -> Result<Self> {
        if t_len < 4 || t_len % 2 != 0 {
            return Err(Error::Dimension(format!(
                "sample count T must be even and >= 4 (got {t_len})"
            )));
        }
        let n_bins = t_len / 2 + 1;
        if re.shape() != im.shape() || re.ncols() != n_bins {
            return Err(Error::Dimension(format!(
                "bin matrices must be L x {n_bins}, got {:?} and {:?}",
                re.shape(),
                im.shape()
            )));
        }
        let scale = re.amax().max(im.amax()).max(1.0);
        for l in 0..im.nrows() {
            for k in [0, n_bins - 1] {
                if im[(l, k)].abs() > 1e-9 * scale {
                    return Err(Error::Validation(format!(
                        "bin {k} must be real-valued; channel {l} has imaginary part {}",
                        im[(l, k)]
                    )));
                }
            }
        }
        let mut im = im;
        for l in 0..im.nrows() {
            im[(l, 0)] = 0.0;
            im[(l, n_bins - 1)] = 0.0;
        }
        Ok(Self { re, im, t_len })
    }

    pub fn n_channels(&self) -> usize {
        self.re.nrows()
    }

    /// Number of retained bins, `T/2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.re.ncols()
    }

    /// Length of the underlying time block.
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Weight of bin `k` in conjugate-extended sums: 1 except one half at the
    /// two real-valued bins.
    pub fn alpha(&self, k: usize) -> f64 {
        alpha_weight(k, self.n_bins())
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn re_col(&self, k: usize) -> DVectorView<'_, f64> {
        self.re.column(k)
    }

    pub fn im_col(&self, k: usize) -> DVectorView<'_, f64> {
        self.im.column(k)
    }

    /// Mean signal power per channel sample, via Parseval on the retained
    /// bins.
    pub fn mean_power(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.n_bins() {
            let a = self.alpha(k);
            for l in 0..self.n_channels() {
                total += 2.0 * a * (self.re[(l, k)].powi(2) + self.im[(l, k)].powi(2));
            }
        }
        total / (self.n_channels() * self.t_len) as f64
    }
}

/// Weight of bin `k` out of `n_bins` retained bins.
pub fn alpha_weight(k: usize, n_bins: usize) -> f64 {
    if k == 0 || k + 1 == n_bins {
        0.5
    } else {
        1.0
    }
}

/// Normalized DFT (`F[k,t] = T^{-1/2} exp(-j 2 pi k t / T)`) of each row,
/// truncated to the first `T/2 + 1` bins.
pub fn dft_forward(block: &DMatrix<f64>) -> Result<FrequencyObservations> {
    let t_len = block.ncols();
    if t_len < 4 || t_len % 2 != 0 {
        return Err(Error::Dimension(format!(
            "sample count T must be even and >= 4 (got {t_len})"
        )));
    }
    let n_rows = block.nrows();
    let n_bins = t_len / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t_len);
    let norm = 1.0 / (t_len as f64).sqrt();
    let mut re = DMatrix::zeros(n_rows, n_bins);
    let mut im = DMatrix::zeros(n_rows, n_bins);
    let mut buf = vec![Complex64::new(0.0, 0.0); t_len];
    for l in 0..n_rows {
        for t in 0..t_len {
            buf[t] = Complex64::new(block[(l, t)], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..n_bins {
            re[(l, k)] = buf[k].re * norm;
            im[(l, k)] = buf[k].im * norm;
        }
        im[(l, 0)] = 0.0;
        im[(l, n_bins - 1)] = 0.0;
    }
    Ok(FrequencyObservations { re, im, t_len })
}

/// Inverse of [`dft_forward`]: conjugate-extends the retained bins and
/// returns the real `L x T` block.
pub fn dft_inverse(obs: &FrequencyObservations) -> Result<DMatrix<f64>> {
    let t_len = obs.t_len();
    let n_bins = obs.n_bins();
    let scale = obs.re.amax().max(obs.im.amax()).max(1.0);
    for l in 0..obs.n_channels() {
        for k in [0, n_bins - 1] {
            if obs.im[(l, k)].abs() > 1e-9 * scale {
                return Err(Error::Validation(format!(
                    "bin {k} must be real-valued; channel {l} has imaginary part {}",
                    obs.im[(l, k)]
                )));
            }
        }
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(t_len);
    let norm = 1.0 / (t_len as f64).sqrt();
    let mut out = DMatrix::zeros(obs.n_channels(), t_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); t_len];
    for l in 0..obs.n_channels() {
        buf[0] = Complex64::new(obs.re[(l, 0)], 0.0);
        buf[t_len / 2] = Complex64::new(obs.re[(l, n_bins - 1)], 0.0);
        for k in 1..t_len / 2 {
            let b = Complex64::new(obs.re[(l, k)], obs.im[(l, k)]);
            buf[k] = b;
            buf[t_len - k] = b.conj();
        }
        fft.process(&mut buf);
        for t in 0..t_len {
            out[(l, t)] = buf[t].re * norm;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::trial_rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// Direct O(T^2) evaluation of the normalized DFT definition.
    fn naive_dft(row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let t_len = row.len();
        let n_bins = t_len / 2 + 1;
        let norm = 1.0 / (t_len as f64).sqrt();
        let mut re = vec![0.0; n_bins];
        let mut im = vec![0.0; n_bins];
        for k in 0..n_bins {
            for (t, &v) in row.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (k * t) as f64 / t_len as f64;
                re[k] += v * phase.cos() * norm;
                im[k] += v * phase.sin() * norm;
            }
        }
        (re, im)
    }

    fn random_block(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = trial_rng(seed, 0);
        DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn constant_row_is_dc_only() {
        let c = 1.7;
        let block = DMatrix::from_element(1, 4, c);
        let obs = dft_forward(&block).unwrap();
        assert!((obs.re[(0, 0)] - 2.0 * c).abs() < 1e-14);
        for k in 1..3 {
            assert!(obs.re[(0, k)].abs() < 1e-14);
            assert!(obs.im[(0, k)].abs() < 1e-14);
        }
        // Inverse of a pure DC spectrum is the constant row again.
        let back = dft_inverse(&obs).unwrap();
        for t in 0..4 {
            assert!((back[(0, t)] - c).abs() < 1e-14);
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut block = DMatrix::zeros(1, 4);
        block[(0, 0)] = 1.0;
        let obs = dft_forward(&block).unwrap();
        for k in 0..3 {
            assert!((obs.re[(0, k)] - 0.5).abs() < 1e-14);
            assert!(obs.im[(0, k)].abs() < 1e-14);
        }
    }

    #[test]
    fn forward_matches_naive_definition() {
        let block = random_block(1, 16, 42);
        let obs = dft_forward(&block).unwrap();
        let (re, im) = naive_dft(&block.row(0).iter().copied().collect::<Vec<_>>());
        for k in 0..obs.n_bins() {
            assert!((obs.re[(0, k)] - re[k]).abs() < 1e-12);
            assert!((obs.im[(0, k)] - im[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_recovers_input() {
        let block = random_block(3, 16, 43);
        let back = dft_inverse(&dft_forward(&block).unwrap()).unwrap();
        assert!((&back - &block).amax() < 1e-12);
    }

    #[test]
    fn zero_bins_give_zero_series() {
        let obs =
            FrequencyObservations::from_parts(DMatrix::zeros(2, 5), DMatrix::zeros(2, 5), 8)
                .unwrap();
        let block = dft_inverse(&obs).unwrap();
        assert_eq!(block, DMatrix::zeros(2, 8));
    }

    #[test]
    fn odd_length_is_rejected() {
        let block = DMatrix::zeros(1, 9);
        assert!(matches!(dft_forward(&block), Err(Error::Dimension(_))));
    }

    #[test]
    fn imaginary_real_bin_is_rejected() {
        let re = DMatrix::zeros(1, 5);
        let mut im = DMatrix::zeros(1, 5);
        im[(0, 0)] = 0.3;
        assert!(matches!(
            FrequencyObservations::from_parts(re, im, 8),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn alpha_weights_halve_real_bins() {
        let obs = dft_forward(&random_block(1, 8, 44)).unwrap();
        let weights: Vec<f64> = (0..obs.n_bins()).map(|k| obs.alpha(k)).collect();
        assert_eq!(weights, vec![0.5, 1.0, 1.0, 1.0, 0.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn prop_round_trip_identity(seed in 0u64..1000, t_exp in 2usize..7) {
            let t_len = 1 << t_exp;
            let block = random_block(2, t_len, seed);
            let back = dft_inverse(&dft_forward(&block).unwrap()).unwrap();
            prop_assert!((&back - &block).amax() < 1e-12);
        }

        #[test]
        fn prop_parseval(seed in 0u64..1000) {
            let block = random_block(2, 64, seed);
            let obs = dft_forward(&block).unwrap();
            let time_energy: f64 = block.iter().map(|v| v * v).sum();
            let mut freq_energy = 0.0;
            for k in 0..obs.n_bins() {
                let a = obs.alpha(k);
                for l in 0..2 {
                    freq_energy +=
                        2.0 * a * (obs.re[(l, k)].powi(2) + obs.im[(l, k)].powi(2));
                }
            }
            prop_assert!((time_energy - freq_energy).abs() < 1e-10 * time_energy.max(1.0));
        }
    }
}
