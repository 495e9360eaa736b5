use nalgebra::{DMatrix, DVector};
use semisep::*;
use std::time::Instant;

fn run_case(name: &str, a_true: &DMatrix<f64>, lam: &DVector<f64>, specs: &[SpectralProfile],
            gen: &dyn Fn(&mut rand_chacha::ChaCha8Rng) -> DMatrix<f64>, trials: u64, center: bool) {
    let t_len = specs[0].len();
    let dims = Dimensions::new(a_true.ncols(), a_true.nrows(), t_len).unwrap();
    let start = Instant::now();
    let mut iters_total = 0usize;
    let mut n_conv = 0usize;
    let mut max_err = 0.0f64;
    for trial in 0..trials {
        let mut rng = trial_rng(1234, trial);
        let s = gen(&mut rng);
        let mut x = mix_and_observe(a_true, &s, lam, &mut rng).unwrap();
        if center {
            for l in 0..x.nrows() {
                let mean = x.row(l).sum() / t_len as f64;
                for t in 0..t_len { x[(l, t)] -= mean; }
            }
        }
        let obs = dft_forward(&x).unwrap();
        let cfg = ScoringConfig::recommended(t_len, obs.mean_power());
        let init = initialize(&x, &dims, cfg.lambda_floor).unwrap();
        let (est, trace) = fisher_scoring(&obs, specs, &init, &cfg).unwrap();
        iters_total += trace.iterations();
        if trace.converged { n_conv += 1; }
        let fixed = resolve_sign(&est.mixing, a_true).unwrap();
        let rel = (&fixed - a_true).amax() / a_true.amax();
        max_err = max_err.max(rel);
        if trial == 0 {
            println!("  trial0: reason={:?} iters={} relerr={:.3e} ridge={}",
                     trace.reason, trace.iterations(), rel, trace.ridge_used);
        }
    }
    println!("{name}: {trials} trials in {:?} | conv {n_conv}/{trials} | mean iters {:.1} | max rel A err {:.3e}",
             start.elapsed(), iters_total as f64 / trials as f64, max_err);
}

fn main() {
    // exp1 scale
    let a1 = DMatrix::from_row_slice(4, 3, &[0.9202,-0.3396,0.8531, 0.6021,-0.7977,0.2639,
        -0.0648,-0.3944,-0.0117, 0.3877,-0.5301,-0.5394]);
    let specs1: Vec<_> = [0.84, 0.21, -0.57].iter().map(|&a| ar1_spectrum(a, 1000).unwrap()).collect();
    let ars = [0.84, 0.21, -0.57];
    run_case("exp1 (T=1000 L=4 M=3)", &a1, &DVector::from_element(4, 0.001), &specs1,
        &|rng| DMatrix::from_rows(&ars.iter().map(|&a| generate_ar1(a, 1000, rng).unwrap().transpose()).collect::<Vec<_>>()),
        20, false);

    // exp2 scale
    let a2 = DMatrix::from_row_slice(5, 2, &[-0.7270,-2.1943, -0.0249,0.8741, -1.2327,0.8559,
        0.5638,0.0343, 1.0297,-0.7223]);
    let specs2: Vec<_> = [0.21, -0.57].iter().map(|&a| ar1_spectrum(a, 250).unwrap()).collect();
    let ars2 = [0.21, -0.57];
    run_case("exp2 (T=250 L=5 M=2)", &a2, &DVector::from_element(5, 1.0), &specs2,
        &|rng| DMatrix::from_rows(&ars2.iter().map(|&a| generate_ar1(a, 250, rng).unwrap().transpose()).collect::<Vec<_>>()),
        50, false);

    // exp3 scale: telegraph OOK through 1e-6 channel, mean-subtracted
    let a3 = DMatrix::from_row_slice(4, 2, &[1.820,1.720, 1.720,1.820, 1.628,1.720, 1.720,1.628]).scale(1e-6);
    let specs3 = vec![telegraph_spectrum(0.25, 256).unwrap(), telegraph_spectrum(0.75, 256).unwrap()];
    let alphas = [0.25, 0.75];
    // received mean source power / sigma^2 = snr
    let mean_pow = (0..4).map(|l| a3.row(l).iter().map(|v| v*v).sum::<f64>()).sum::<f64>() / 4.0;
    for snr_db in [-10.0f64, 0.0, 10.0] {
        let sigma2 = mean_pow / 10f64.powf(snr_db / 10.0);
        run_case(&format!("exp3 SNR={snr_db}dB"), &a3, &DVector::from_element(4, sigma2), &specs3,
            &|rng| DMatrix::from_rows(&alphas.iter().map(|&al| generate_telegraph(al, 256, rng).unwrap().transpose()).collect::<Vec<_>>()),
            50, true);
    }
}
