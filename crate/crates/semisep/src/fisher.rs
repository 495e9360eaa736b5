//! Fisher information, Cramer-Rao bound and the scoring iteration.
//!
//! The per-bin information elements have the closed form
//! `I[a,b] = sum_k alpha_k Tr(C_k^{-1} dC_k/da C_k^{-1} dC_k/db)`, which this
//! module expands analytically for mixing-matrix and noise-variance
//! derivatives.  The maximum-likelihood estimates are found by the scoring
//! update `theta <- theta + I^{-1} * score`, safeguarded by a backtracking
//! line search so the log-likelihood never decreases along accepted iterates.
//! For non-Gaussian sources the same iteration acts as a quasi-Newton method
//! on the quasi-likelihood, since `I` stays positive definite.

use nalgebra::{DMatrix, DVector};

use crate::dft::{alpha_weight, FrequencyObservations};
use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood_with, model_covariances, score_with, BinCovariances};
use crate::signal::{Dimensions, ModelParams, SpectralProfile};

/// Maximum number of step halvings in the backtracking line search.
const MAX_BACKTRACK: usize = 30;

/// Condition-number threshold beyond which the bound computation falls back
/// to a pseudo-inverse and flags the configuration as poorly identifiable.
const CONDITION_LIMIT: f64 = 1e12;

/// Stopping rules and safeguards for [`fisher_scoring`].
#[derive(Debug, Clone)]
pub struct ScoringConfig {
    /// Iteration budget.
    pub max_iters: usize,
    /// Convergence threshold on the max-norm of the score.
    pub grad_tol: f64,
    /// Convergence threshold on the relative parameter change per step.
    pub step_tol: f64,
    /// Initial step factor for the backtracking line search.
    pub damping: f64,
    /// Smallest admissible noise variance; iterates are clamped to it.
    pub lambda_floor: f64,
}

impl ScoringConfig {
    /// Scale-aware defaults: the score grows with the bin count, so the
    /// gradient tolerance is proportional to `T/2`; the variance floor is
    /// proportional to the average mixture power.
    pub fn recommended(t_len: usize, mean_power: f64) -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-8 * (t_len as f64 / 2.0),
            step_tol: 1e-10,
            damping: 1.0,
            lambda_floor: (1e-10 * mean_power).max(f64::MIN_POSITIVE),
        }
    }
}

/// Why the scoring iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Score max-norm fell below `grad_tol`.
    Gradient,
    /// Relative parameter change fell below `step_tol` (or no improving step
    /// existed along the scoring direction).
    Step,
    /// Iteration budget exhausted.
    MaxIters,
    /// The information matrix could not be factorized even with a ridge.
    NonPd,
}

/// One accepted iterate of the scoring iteration.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub theta: DVector<f64>,
    pub log_likelihood: f64,
    pub score_max_norm: f64,
}

/// Full record of a scoring run.  Log-likelihoods are non-decreasing along
/// `iterates` by construction.
#[derive(Debug, Clone)]
pub struct ScoringTrace {
    pub iterates: Vec<TraceEntry>,
    pub converged: bool,
    pub reason: StopReason,
    /// Whether any information-matrix solve needed a diagonal ridge.
    pub ridge_used: bool,
}

impl ScoringTrace {
    /// Number of accepted update steps (the initial point is not counted).
    pub fn iterations(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn final_entry(&self) -> &TraceEntry {
        self.iterates.last().expect("trace holds at least the initial point")
    }
}

/// Cramer-Rao bound together with identifiability diagnostics.
#[derive(Debug, Clone)]
pub struct Crlb {
    /// Inverse (or pseudo-inverse) of the information matrix; diagonal
    /// entries are per-parameter MSE lower bounds in `[vec(A); lambda]`
    /// ordering.
    pub matrix: DMatrix<f64>,
    /// Condition number of the information matrix (`inf` if singular).
    pub condition: f64,
    /// True when the bound had to fall back to a pseudo-inverse.
    pub pseudo_inverse: bool,
}

pub(crate) fn fim_with(
    cov: &BinCovariances,
    params: &ModelParams,
    spectra: &[SpectralProfile],
) -> DMatrix<f64> {
    let l_dim = params.n_sensors();
    let m_dim = params.n_sources();
    let ml = l_dim * m_dim;
    let n_bins = cov.n_bins();
    let mut info = DMatrix::zeros(ml + l_dim, ml + l_dim);
    for k in 0..n_bins {
        let a = alpha_weight(k, n_bins);
        let g = cov.inv(k);
        let b = g * &params.mixing; // C^{-1} A
        let h = params.mixing.transpose() * &b; // A' C^{-1} A
        let p: Vec<f64> = spectra.iter().map(|s| s.value(k)).collect();
        for j in 0..m_dim {
            for q in 0..m_dim {
                let coeff = 2.0 * a * p[j] * p[q];
                if coeff == 0.0 {
                    continue;
                }
                for i in 0..l_dim {
                    for r in 0..l_dim {
                        info[(j * l_dim + i, q * l_dim + r)] +=
                            coeff * (b[(r, j)] * b[(i, q)] + g[(i, r)] * h[(j, q)]);
                    }
                }
            }
        }
        for j in 0..m_dim {
            let coeff = 2.0 * a * p[j];
            if coeff == 0.0 {
                continue;
            }
            for i in 0..l_dim {
                for l in 0..l_dim {
                    let v = coeff * b[(l, j)] * g[(i, l)];
                    info[(j * l_dim + i, ml + l)] += v;
                    info[(ml + l, j * l_dim + i)] += v;
                }
            }
        }
        for l1 in 0..l_dim {
            for l2 in 0..l_dim {
                info[(ml + l1, ml + l2)] += a * g[(l1, l2)] * g[(l1, l2)];
            }
        }
    }
    info
}

/// Fisher information matrix of the mixing matrix and noise variances,
/// ordered like the score (`[vec(A); lambda]`).
pub fn fim(params: &ModelParams, spectra: &[SpectralProfile]) -> Result<DMatrix<f64>> {
    let cov = model_covariances(params, spectra)?;
    Ok(fim_with(&cov, params, spectra))
}

/// Cramer-Rao lower bound: the inverse of [`fim`], with a flagged
/// pseudo-inverse fallback when the information matrix is numerically
/// singular (non-identifiable configuration).
pub fn crlb(params: &ModelParams, spectra: &[SpectralProfile]) -> Result<Crlb> {
    let info = fim(params, spectra)?;
    let n = info.nrows();
    let eig = nalgebra::SymmetricEigen::new(info);
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if max_eig <= 0.0 {
        return Err(Error::Numerical(
            "information matrix has no positive eigenvalues".into(),
        ));
    }
    let condition = if min_eig > 0.0 { max_eig / min_eig } else { f64::INFINITY };
    let pseudo_inverse = condition > CONDITION_LIMIT;
    let cutoff = max_eig / CONDITION_LIMIT;
    let mut inv_eigs = DVector::zeros(n);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        inv_eigs[i] = if pseudo_inverse {
            if v > cutoff {
                1.0 / v
            } else {
                0.0
            }
        } else {
            1.0 / v
        };
    }
    let matrix = &eig.eigenvectors * DMatrix::from_diagonal(&inv_eigs) * eig.eigenvectors.transpose();
    Ok(Crlb { matrix, condition, pseudo_inverse })
}

/// Fixed starting point for the scoring iteration: `A0 = [I_M; O]` and every
/// noise variance set to the smallest eigenvalue of the sample covariance
/// `(1/T) X X'`, floored at `lambda_floor`.
pub fn initialize(x: &DMatrix<f64>, dims: &Dimensions, lambda_floor: f64) -> Result<ModelParams> {
    if x.nrows() != dims.sensors || x.ncols() != dims.samples {
        return Err(Error::Dimension(format!(
            "data is {}x{} but dimensions declare {}x{}",
            x.nrows(),
            x.ncols(),
            dims.sensors,
            dims.samples
        )));
    }
    let sample_cov = x * x.transpose() / dims.samples as f64;
    let eig = nalgebra::SymmetricEigen::new(sample_cov);
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let floor = lambda_floor.max(f64::MIN_POSITIVE);
    let lambda0 = min_eig.max(0.0).max(floor);
    let mixing0 = DMatrix::identity(dims.sensors, dims.sources);
    ModelParams::new(mixing0, DVector::from_element(dims.sensors, lambda0))
}

fn solve_information_system(
    info: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<(DVector<f64>, bool)> {
    if let Some(chol) = nalgebra::Cholesky::new(info.clone()) {
        return Ok((chol.solve(rhs), false));
    }
    // Escalate the ridge until the factorization succeeds; every ridged
    // solve is flagged in the trace.
    let n = info.nrows();
    let mut ridge = 1e-12 * info.trace() / n as f64;
    for _ in 0..4 {
        let mut ridged = info.clone();
        for i in 0..n {
            ridged[(i, i)] += ridge;
        }
        if let Some(chol) = nalgebra::Cholesky::new(ridged) {
            return Ok((chol.solve(rhs), true));
        }
        ridge *= 1e4;
    }
    Err(Error::Numerical(
        "information matrix is not positive definite even after ridging".into(),
    ))
}

fn clamp_noise(theta: &mut DVector<f64>, ml: usize, floor: f64) {
    for i in ml..theta.len() {
        if theta[i] < floor {
            theta[i] = floor;
        }
    }
}

/// Scoring direction in `(A, log lambda)` coordinates.
///
/// The variances are stepped multiplicatively (`lambda <- lambda *
/// exp(d_eta)`), which keeps them positive without clamps and gives the
/// Newton step the right geometry across the many orders of magnitude the
/// iterates traverse.  With `J = diag(I, Lambda)`, the transformed system is
/// `(J' I J) d = J' s`; its solutions vanish exactly where the original score
/// does, so the estimator is unchanged.
fn scoring_direction(
    info: &DMatrix<f64>,
    sc: &DVector<f64>,
    theta: &DVector<f64>,
    ml: usize,
) -> Result<(DVector<f64>, bool)> {
    let n = sc.len();
    let mut info_z = info.clone();
    let mut sc_z = sc.clone();
    for i in ml..n {
        sc_z[i] *= theta[i];
        for j in 0..n {
            info_z[(i, j)] *= theta[i];
        }
    }
    for j in ml..n {
        for i in 0..n {
            info_z[(i, j)] *= theta[j];
        }
    }
    solve_information_system(&info_z, &sc_z).map(|(d, ridged)| (d, ridged))
}

/// Line-search candidate: additive step on the mixing entries, multiplicative
/// step on the variances, floored at the positivity floor.
fn step_candidate(
    theta: &DVector<f64>,
    direction: &DVector<f64>,
    step: f64,
    ml: usize,
    floor: f64,
) -> DVector<f64> {
    let mut cand = theta.clone();
    for i in 0..ml {
        cand[i] += step * direction[i];
    }
    for i in ml..theta.len() {
        cand[i] = (theta[i] * (step * direction[i]).exp()).max(floor);
    }
    cand
}

/// Runs the safeguarded scoring iteration from `init` and returns the final
/// iterate with its trace.
///
/// Convergence means either the score max-norm fell below `grad_tol` or the
/// relative parameter change fell below `step_tol`.  Non-convergence

/// (budget exhausted, stalled line search, ridge failure) is reported through
/// the trace rather than as an error.
pub fn fisher_scoring(
    obs: &FrequencyObservations,
    spectra: &[SpectralProfile],
    init: &ModelParams,
    cfg: &ScoringConfig,
) -> Result<(ModelParams, ScoringTrace)> {
    let l_dim = init.n_sensors();
    let m_dim = init.n_sources();
    let ml = l_dim * m_dim;
    if obs.n_channels() != l_dim {
        return Err(Error::Dimension(format!(
            "observations have {} channels but the initial model has {} sensors",
            obs.n_channels(),
            l_dim
        )));
    }
    if spectra.len() != m_dim {
        return Err(Error::Dimension(format!(
            "{} spectra given for {} sources",
            spectra.len(),
            m_dim
        )));
    }
    let floor = cfg.lambda_floor.max(f64::MIN_POSITIVE);

    let mut theta = init.to_vector();
    clamp_noise(&mut theta, ml, floor);
    let mut params = ModelParams::from_vector(&theta, l_dim, m_dim)?;

    let mut trace = ScoringTrace {
        iterates: Vec::new(),
        converged: false,
        reason: StopReason::MaxIters,
        ridge_used: false,
    };

    let mut cov = match model_covariances(&params, spectra) {
        Ok(c) => c,
        Err(_) => {
            trace.reason = StopReason::NonPd;
            trace.iterates.push(TraceEntry {
                theta,
                log_likelihood: f64::NEG_INFINITY,
                score_max_norm: f64::INFINITY,
            });
            return Ok((params, trace));
        }
    };
    let mut ll = log_likelihood_with(&cov, obs);
    let mut sc = score_with(&cov, &params, obs, spectra);
    trace.iterates.push(TraceEntry {
        theta: theta.clone(),
        log_likelihood: ll,
        score_max_norm: sc.amax(),
    });

    for _ in 0..cfg.max_iters {
        // KKT-style gradient test: a variance held at the floor with the
        // score pushing further down counts as stationary in that coordinate.
        let mut projected = sc.clone();
        for i in ml..projected.len() {
            if theta[i] <= floor && projected[i] < 0.0 {
                projected[i] = 0.0;
            }
        }
        if projected.amax() <= cfg.grad_tol {
            trace.converged = true;
            trace.reason = StopReason::Gradient;
            return Ok((params, trace));
        }
        let info = fim_with(&cov, &params, spectra);
        let (direction, ridged) = match scoring_direction(&info, &sc, &theta, ml) {
            Ok(d) => d,
            Err(_) => {
                trace.reason = StopReason::NonPd;
                return Ok((params, trace));
            }
        };
        trace.ridge_used |= ridged;

        let slope = sc
            .iter()
            .zip(direction.iter())
            .enumerate()
            .map(|(i, (s, d))| if i < ml { s * d } else { s * theta[i] * d })
            .sum::<f64>();

        // Walk the backtracking ladder and keep the best point: far-off
        // iterates often improve on the current point at wildly overshooting
        // steps, so accepting the first improvement is not enough.
        let mut step = cfg.damping;
        let mut accepted: Option<(DVector<f64>, ModelParams, BinCovariances, f64)> = None;
        for _ in 0..=MAX_BACKTRACK {
            let cand = step_candidate(&theta, &direction, step, ml, floor);
            let cand_ll = ModelParams::from_vector(&cand, l_dim, m_dim)
                .ok()
                .and_then(|p| model_covariances(&p, spectra).ok().map(|c| (p, c)))
                .map(|(p, c)| {
                    let l = log_likelihood_with(&c, obs);
                    (cand, p, c, l)
                });
            match cand_ll {
                Some((c, p, cv, l)) if l.is_finite() && l >= ll => {
                    let improved = accepted.as_ref().is_none_or(|(_, _, _, best)| l > *best);
                    if improved {
                        accepted = Some((c, p, cv, l));
                    } else {
                        break; // past the peak along this ray
                    }
                }
                _ => {
                    if accepted.is_some() {
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some((new_theta, new_params, new_cov, new_ll)) = accepted else {
            // No improving point along the scoring direction.  When the
            // expected gain (half the Newton decrement) is below the
            // floating-point resolution of the log-likelihood, the iterate is
            // the optimum at the objective's numerical resolution; otherwise
            // the search genuinely stalled.
            let expected_gain = 0.5 * slope.abs();
            trace.converged = expected_gain <= 1e-10 * (1.0 + ll.abs());
            trace.reason = StopReason::Step;
            return Ok((params, trace));
        };
        let rel_step = (&new_theta - &theta).amax() / theta.amax().max(f64::MIN_POSITIVE);
        theta = new_theta;
        params = new_params;
        cov = new_cov;
        ll = new_ll;
        sc = score_with(&cov, &params, obs, spectra);
        trace.iterates.push(TraceEntry {
            theta: theta.clone(),
            log_likelihood: ll,
            score_max_norm: sc.amax(),
        });
        if rel_step <= cfg.step_tol {
            trace.converged = true;
            trace.reason = StopReason::Step;
            return Ok((params, trace));
        }
    }
    let mut projected = sc.clone();
    for i in ml..projected.len() {
        if theta[i] <= floor && projected[i] < 0.0 {
            projected[i] = 0.0;
        }
    }
    if projected.amax() <= cfg.grad_tol {
        trace.converged = true;
        trace.reason = StopReason::Gradient;
    } else {
        trace.reason = StopReason::MaxIters;
    }
    Ok((params, trace))
}

/// Significance threshold for picking the reference row of a column when
/// fixing sign ambiguity.
const SIGN_REFERENCE_TOL: f64 = 1e-9;

/// Resolves the inherent column sign ambiguity against a reference matrix:
/// column `m` of the estimate is flipped when its first significant entry
/// disagrees in sign with the reference at the same position.
pub fn resolve_sign(a_hat: &DMatrix<f64>, a_true: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a_hat.shape() != a_true.shape() {
        return Err(Error::Dimension(format!(
            "estimate is {:?} but reference is {:?}",
            a_hat.shape(),
            a_true.shape()
        )));
    }
    let mut out = a_hat.clone();
    for m in 0..a_hat.ncols() {
        let reference = (0..a_hat.nrows()).find(|&l| a_hat[(l, m)].abs() > SIGN_REFERENCE_TOL);
        if let Some(l) = reference {
            if a_hat[(l, m)] * a_true[(l, m)] < 0.0 {
                for r in 0..a_hat.nrows() {
                    out[(r, m)] = -out[(r, m)];
                }
            }
        }
    }
    Ok(out)
}

/// Orients every column of the estimate to be nonnegative at its first
/// significant entry, for channels known to be physically nonnegative.
pub fn orient_columns_nonnegative(a_hat: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = a_hat.clone();
    for m in 0..a_hat.ncols() {
        let col_max = a_hat.column(m).amax();
        if col_max == 0.0 {
            continue;
        }
        let reference =
            (0..a_hat.nrows()).find(|&l| a_hat[(l, m)].abs() > SIGN_REFERENCE_TOL * col_max);
        if let Some(l) = reference {
            if a_hat[(l, m)] < 0.0 {
                for r in 0..a_hat.nrows() {
                    out[(r, m)] = -out[(r, m)];
                }
            }
        }
    }
    out
}
