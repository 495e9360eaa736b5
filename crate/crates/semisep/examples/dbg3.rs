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
    let (est, trace) = fisher_scoring(&obs, &specs, &init, &cfg).unwrap();
    println!("floor = {:.3e}, est lam4 = {:.3e}", cfg.lambda_floor, est.noise_vars[3]);
    println!("trace score norms: {:?}", trace.iterates.iter().map(|e| format!("{:.2e}", e.score_max_norm)).collect::<Vec<_>>());

    let sc = score(&est, &obs, &specs).unwrap();
    let info = fim(&est, &specs).unwrap();
    let dir = nalgebra::Cholesky::new(info.clone()).unwrap().solve(&sc);
    let theta = est.to_vector();
    let ml = 12;
    let ll0 = log_likelihood(&est, &obs, &specs).unwrap();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:+.3e}")).collect::<Vec<_>>();
    println!("score[12..16] = {:?}", fmt(&sc.as_slice()[12..16]));
    println!("dir[12..16]   = {:?}", fmt(&dir.as_slice()[12..16]));
    let mut step = cfg.damping;
    for i in 0..=8 {
        let mut cand = &theta + step * &dir;
        for j in ml..cand.len() { if cand[j] < cfg.lambda_floor { cand[j] = cfg.lambda_floor; } }
        match ModelParams::from_vector(&cand, 4, 3) {
            Ok(p) => match model_covariances(&p, &specs) {
                Ok(_) => {
                    let ll = log_likelihood(&p, &obs, &specs).unwrap();
                    println!("step {i} ({step:.2e}): ll-ll0 = {:+.6e}, lam_cand = {:?}",
                        ll - ll0, &cand.as_slice()[12..16].iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
                }
                Err(e) => println!("step {i} ({step:.2e}): model_covariances ERR {e}"),
            },
            Err(e) => println!("step {i} ({step:.2e}): from_vector ERR {e}"),
        }
        step *= 0.5;
    }
}
// appended: inspect components
