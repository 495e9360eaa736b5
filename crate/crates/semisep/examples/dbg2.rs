use nalgebra::{DMatrix, DVector};
use semisep::*;

fn main() {
    let a1 = DMatrix::from_row_slice(4, 3, &[0.9202,-0.3396,0.8531, 0.6021,-0.7977,0.2639,
        -0.0648,-0.3944,-0.0117, 0.3877,-0.5301,-0.5394]);
    let specs: Vec<_> = [0.84, 0.21, -0.57].iter().map(|&a| ar1_spectrum(a, 1000).unwrap()).collect();
    let ars = [0.84, 0.21, -0.57];
    let dims = Dimensions::new(3, 4, 1000).unwrap();
    let mut rng = trial_rng(1234, 0);
    let s = DMatrix::from_rows(&ars.iter().map(|&a| generate_ar1(a, 1000, &mut rng).unwrap().transpose()).collect::<Vec<_>>());
    let x = mix_and_observe(&a1, &s, &DVector::from_element(4, 0.001), &mut rng).unwrap();
    let obs = dft_forward(&x).unwrap();
    let cfg = ScoringConfig::recommended(1000, obs.mean_power());
    let init = initialize(&x, &dims, cfg.lambda_floor).unwrap();
    let (est, _) = fisher_scoring(&obs, &specs, &init, &cfg).unwrap();

    let sc = score(&est, &obs, &specs).unwrap();
    let info = fim(&est, &specs).unwrap();
    let dir = nalgebra::Cholesky::new(info).unwrap().solve(&sc);
    let theta = est.to_vector();
    let ll0 = log_likelihood(&est, &obs, &specs).unwrap();
    println!("ll0 = {ll0:.12e}, s.d = {:.6e}", sc.dot(&dir));
    for h in [1.0f64, 1e-2, 1e-4, 1e-6, 1e-8, 1e-9] {
        let cand = &theta + h * &dir;
        let p = ModelParams::from_vector(&cand, 4, 3).unwrap();
        let ll = log_likelihood(&p, &obs, &specs).unwrap();
        println!("h={h:.0e}: dll = {:+.6e} (predicted {:+.6e})", ll - ll0, h * sc.dot(&dir));
    }
    // finite-difference check of score at the stalled point, per-component groups
    let mut worst_a = 0.0f64; let mut worst_l = 0.0f64;
    for i in 0..theta.len() {
        let hh = 1e-7 * theta[i].abs().max(1e-3);
        let mut tp = theta.clone(); tp[i] += hh;
        let mut tm = theta.clone(); tm[i] -= hh;
        let lp = log_likelihood(&ModelParams::from_vector(&tp, 4, 3).unwrap(), &obs, &specs).unwrap();
        let lm = log_likelihood(&ModelParams::from_vector(&tm, 4, 3).unwrap(), &obs, &specs).unwrap();
        let fd = (lp - lm) / (2.0 * hh);
        let rel = (sc[i] - fd).abs() / sc.amax();
        if i < 12 { worst_a = worst_a.max(rel); } else { worst_l = worst_l.max(rel); }
    }
    println!("score-vs-FD rel err: A block {worst_a:.3e}, lambda block {worst_l:.3e}");
    println!("lambda_hat = {:?}", est.noise_vars.as_slice());
}
