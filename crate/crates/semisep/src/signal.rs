//! Data model and synthetic signal generation.
//!
//! A scene has `M` mutually independent zero-mean stationary sources with
//! known power spectra, mixed by an unknown `L x M` gain matrix into `L`
//! sensors, each contaminated by temporally-white Gaussian noise with its own
//! unknown variance.  Time series are stored as row-per-channel matrices.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Problem sizes: `M` sources, `L` sensors, `T` time samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    /// Number of sources.
    pub sources: usize,
    /// Number of sensors; must satisfy `sensors >= sources`.
    pub sensors: usize,
    /// Number of time samples; must be even and at least 4.
    pub samples: usize,
}

impl Dimensions {
    pub fn new(sources: usize, sensors: usize, samples: usize) -> Result<Self> {
        if sources == 0 {
            return Err(Error::Dimension("source count must be >= 1".into()));
        }
        if sensors < sources {
            return Err(Error::Dimension(format!(
                "sensor count L must be >= source count M (got L={sensors}, M={sources})"
            )));
        }
        if samples < 4 || samples % 2 != 0 {
            return Err(Error::Dimension(format!(
                "sample count T must be even and >= 4 (got T={samples})"
            )));
        }
        Ok(Self { sources, sensors, samples })
    }

    /// Number of retained frequency bins, `T/2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.samples / 2 + 1
    }

    /// Total parameter count `M*L + L` for the mixing matrix plus the noise
    /// variances.
    pub fn n_params(&self) -> usize {
        self.sources * self.sensors + self.sensors
    }
}

/// Power spectral density of one source, sampled on the `T` DFT bin
/// frequencies `2*pi*k/T`, `k = 0..T-1`.
///
/// Entries are nonnegative and symmetric (`values[k] == values[T-k]`) so the
/// source is real-valued; the mean of the entries equals the source variance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    values: Vec<f64>,
}

impl SpectralProfile {
    /// Validates nonnegativity and conjugate symmetry of an explicit spectrum.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let t_len = values.len();
        if t_len < 4 || t_len % 2 != 0 {
            return Err(Error::Dimension(format!(
                "spectrum length must be even and >= 4 (got {t_len})"
            )));
        }
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < -1e-12 * scale {
                return Err(Error::Validation(format!(
                    "spectrum entry {k} is negative or non-finite: {v}"
                )));
            }
            let mirror = values[(t_len - k) % t_len];
            if (v - mirror).abs() > 1e-9 * scale {
                return Err(Error::Validation(format!(
                    "spectrum is not symmetric at bin {k}: {v} vs {mirror}"
                )));
            }
        }
        let values = values.into_iter().map(|v| v.max(0.0)).collect();
        Ok(Self { values })
    }

    /// Full spectrum length `T`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of nonredundant bins, `T/2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.values.len() / 2 + 1
    }

    /// Power at bin `k` (zero-based, `k = 0` is DC).
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Source variance implied by the spectrum (mean over all `T` bins).
    pub fn variance(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Spectrum of a unit-variance AR(1) process `s[t] = a*s[t-1] + e[t]`,
/// sampled at the `T` bin frequencies:
/// `P[k] = (1 - a^2) / (1 - 2a*cos(2*pi*k/T) + a^2)`.
pub fn ar1_spectrum(a: f64, t_len: usize) -> Result<SpectralProfile> {
    if !(a.abs() < 1.0) {
        return Err(Error::Invalid(format!(
            "AR(1) parameter must satisfy |a| < 1 for stability (got {a})"
        )));
    }
    if t_len < 4 || t_len % 2 != 0 {
        return Err(Error::Dimension(format!(
            "spectrum length must be even and >= 4 (got {t_len})"
        )));
    }
    let num = 1.0 - a * a;
    let values = (0..t_len)
        .map(|k| {
            let w = 2.0 * std::f64::consts::PI * k as f64 / t_len as f64;
            num / (1.0 - 2.0 * a * w.cos() + a * a)
        })
        .collect();
    Ok(SpectralProfile { values })
}

/// Spectrum of the centered unit-variance two-state telegraph process that
/// keeps its state with probability `1 - alpha_switch` per step.
///
/// The centered process has lag-`tau` autocorrelation `rho^|tau|` with
/// `rho = 1 - 2*alpha_switch`, so its spectrum coincides with the AR(1)
/// spectrum of parameter `rho`.
pub fn telegraph_spectrum(alpha_switch: f64, t_len: usize) -> Result<SpectralProfile> {
    if alpha_switch <= 0.0 || alpha_switch >= 1.0 {
        return Err(Error::Invalid(format!(
            "switch probability must lie strictly inside (0, 1) (got {alpha_switch})"
        )));
    }
    ar1_spectrum(1.0 - 2.0 * alpha_switch, t_len)
}

/// Unknown model parameters: the `L x M` mixing matrix and the `L` per-sensor
/// noise variances.
///
/// The flattened ordering used for scores, information matrices and bounds is
/// `[vec(A); lambda]` with `vec` stacking the columns of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Mixing matrix, `L x M`.
    pub mixing: DMatrix<f64>,
    /// Per-sensor noise variances, length `L`, strictly positive.
    pub noise_vars: DVector<f64>,
}

impl ModelParams {
    pub fn new(mixing: DMatrix<f64>, noise_vars: DVector<f64>) -> Result<Self> {
        if mixing.nrows() != noise_vars.len() {
            return Err(Error::Dimension(format!(
                "mixing has {} rows but {} noise variances were given",
                mixing.nrows(),
                noise_vars.len()
            )));
        }
        for (l, &v) in noise_vars.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!(
                    "noise variance {} must be positive (got {v})",
                    l + 1
                )));
            }
        }
        Ok(Self { mixing, noise_vars })
    }

    pub fn n_sensors(&self) -> usize {
        self.mixing.nrows()
    }

    pub fn n_sources(&self) -> usize {
        self.mixing.ncols()
    }

    /// Length of the flattened parameter vector, `M*L + L`.
    pub fn n_params(&self) -> usize {
        self.mixing.len() + self.noise_vars.len()
    }

    /// Flattens to `[vec(A); lambda]`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.n_params());
        v.rows_mut(0, self.mixing.len())
            .copy_from_slice(self.mixing.as_slice());
        v.rows_mut(self.mixing.len(), self.noise_vars.len())
            .copy_from(&self.noise_vars);
        v
    }

    /// Rebuilds parameters from a `[vec(A); lambda]` vector.
    pub fn from_vector(theta: &DVector<f64>, sensors: usize, sources: usize) -> Result<Self> {
        let ml = sensors * sources;
        if theta.len() != ml + sensors {
            return Err(Error::Dimension(format!(
                "parameter vector has length {} but L={sensors}, M={sources} needs {}",
                theta.len(),
                ml + sensors
            )));
        }
        let mixing = DMatrix::from_column_slice(sensors, sources, &theta.as_slice()[..ml]);
        let noise_vars = DVector::from_column_slice(&theta.as_slice()[ml..]);
        Ok(Self { mixing, noise_vars })
    }

    /// Human-readable names for the flattened parameters, 1-based:
    /// `A[i,j]` column by column, then `lambda[l]`.
    pub fn param_names(sensors: usize, sources: usize) -> Vec<String> {
        let mut names = Vec::with_capacity(sensors * sources + sensors);
        for j in 1..=sources {
            for i in 1..=sensors {
                names.push(format!("A[{i},{j}]"));
            }
        }
        for l in 1..=sensors {
            names.push(format!("lambda[{l}]"));
        }
        names
    }
}

/// Independent random stream for one trial, derived from a master seed and a
/// stream index so concurrent trials never share generator state.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Samples one stationary zero-mean unit-variance Gaussian AR(1) path
/// `s[t] = a*s[t-1] + e[t]` with innovation variance `1 - a^2`.
///
/// The first sample is drawn from the stationary distribution, so the path is
/// exactly stationary from `t = 0`.
pub fn generate_ar1<R: Rng + ?Sized>(a: f64, t_len: usize, rng: &mut R) -> Result<DVector<f64>> {
    if !(a.abs() < 1.0) {
        return Err(Error::Invalid(format!(
            "AR(1) parameter must satisfy |a| < 1 for stability (got {a})"
        )));
    }
    let innov_sd = (1.0 - a * a).sqrt();
    let mut s = DVector::zeros(t_len);
    let z0: f64 = rng.sample(StandardNormal);
    s[0] = z0; // stationary start: unit variance
    for t in 1..t_len {
        let z: f64 = rng.sample(StandardNormal);
        s[t] = a * s[t - 1] + innov_sd * z;
    }
    Ok(s)
}

/// Burn-in length for the telegraph generator; geometric mixing makes the
/// initial state's influence vanish far below double precision.
const TELEGRAPH_BURN_IN: usize = 1000;

/// Samples a two-state telegraph path over `{0, 2}`: the state is kept with
/// probability `1 - alpha_switch` and flipped with probability `alpha_switch`
/// each step.  The centered path (`s - 1`) has unit variance.
pub fn generate_telegraph<R: Rng + ?Sized>(
    alpha_switch: f64,
    t_len: usize,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if alpha_switch <= 0.0 || alpha_switch >= 1.0 {
        return Err(Error::Invalid(format!(
            "switch probability must lie strictly inside (0, 1) (got {alpha_switch})"
        )));
    }
    let mut state: f64 = if rng.random_bool(0.5) { 2.0 } else { 0.0 };
    for _ in 0..TELEGRAPH_BURN_IN {
        if rng.random_bool(alpha_switch) {
            state = 2.0 - state;
        }
    }
    let mut s = DVector::zeros(t_len);
    for t in 0..t_len {
        if rng.random_bool(alpha_switch) {
            state = 2.0 - state;
        }
        s[t] = state;
    }
    Ok(s)
}

/// Forms noisy mixtures `X = A*S + V` where row `l` of `V` is i.i.d. Gaussian
/// with variance `noise_vars[l]`.  Zero variances are allowed for noiseless
/// sanity checks.
pub fn mix_and_observe<R: Rng + ?Sized>(
    mixing: &DMatrix<f64>,
    sources: &DMatrix<f64>,
    noise_vars: &DVector<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if mixing.ncols() != sources.nrows() {
        return Err(Error::Dimension(format!(
            "mixing has {} columns but sources has {} rows",
            mixing.ncols(),
            sources.nrows()
        )));
    }
    if mixing.nrows() != noise_vars.len() {
        return Err(Error::Dimension(format!(
            "mixing has {} rows but {} noise variances were given",
            mixing.nrows(),
            noise_vars.len()
        )));
    }
    for (l, &v) in noise_vars.iter().enumerate() {
        if !(v >= 0.0) {
            return Err(Error::Invalid(format!(
                "noise variance {} must be nonnegative (got {v})",
                l + 1
            )));
        }
    }
    let t_len = sources.ncols();
    let mut x = mixing * sources;
    for l in 0..mixing.nrows() {
        let sd = noise_vars[l].sqrt();
        if sd > 0.0 {
            for t in 0..t_len {
                let z: f64 = rng.sample(StandardNormal);
                x[(l, t)] += sd * z;
            }
        }
    }
    Ok(x)
}
