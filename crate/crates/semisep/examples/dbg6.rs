use nalgebra::{DMatrix, DVector};
use semisep::*;

fn main() {
    let a1 = DMatrix::from_row_slice(4, 3, &[0.9202,-0.3396,0.8531, 0.6021,-0.7977,0.2639,
        -0.0648,-0.3944,-0.0117, 0.3877,-0.5301,-0.5394]);
    let specs: Vec<_> = [0.84, 0.21, -0.57].iter().map(|&a| ar1_spectrum(a, 1000).unwrap()).collect();
    let ars = [0.84, 0.21, -0.57];
    let truth = ModelParams::new(a1.clone(), DVector::from_element(4, 0.001)).unwrap();
    let mut lam_rel_errs: Vec<f64> = Vec::new();
    let mut a_errs: Vec<f64> = Vec::new();
    let mut n_conv = 0;
    for trial in 0..20u64 {
        let mut rng = trial_rng(1234, trial);
        let s = DMatrix::from_rows(&ars.iter().map(|&a| generate_ar1(a, 1000, &mut rng).unwrap().transpose()).collect::<Vec<_>>());
        let x = mix_and_observe(&a1, &s, &DVector::from_element(4, 0.001), &mut rng).unwrap();
        let obs = dft_forward(&x).unwrap();
        let cfg = ScoringConfig::recommended(1000, obs.mean_power());
        let (est, trace) = fisher_scoring(&obs, &specs, &truth, &cfg).unwrap();
        if trace.converged { n_conv += 1; }
        let fixed = resolve_sign(&est.mixing, &a1).unwrap();
        a_errs.push((&fixed - &a1).amax());
        let lr = est.noise_vars.iter().map(|&v| (v/0.001 - 1.0).abs()).fold(0.0f64, f64::max);
        lam_rel_errs.push(lr);
        if trial < 5 {
            println!("trial {trial}: conv={} reason={:?} iters={} maxAerr={:.3e} maxLamRel={:.3e} lam={:?}",
                trace.converged, trace.reason, trace.iterations(), a_errs.last().unwrap(), lr,
                est.noise_vars.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
        }
    }
    println!("from truth: conv {n_conv}/20, max A err {:.3e}, max lam rel {:.3e}",
        a_errs.iter().cloned().fold(0.0f64, f64::max), lam_rel_errs.iter().cloned().fold(0.0f64, f64::max));
}
