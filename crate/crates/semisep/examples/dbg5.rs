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
    let (ml, n) = (12usize, 16usize);
    let theta = init.to_vector();
    let p = ModelParams::from_vector(&theta, 4, 3).unwrap();
    let sc = score(&p, &obs, &specs).unwrap();
    let info = fim(&p, &specs).unwrap();
    let mut info_z = info.clone();
    let mut sc_z = sc.clone();
    for i in ml..n { sc_z[i] *= theta[i]; for j in 0..n { info_z[(i, j)] *= theta[i]; } }
    for j in ml..n { for i in 0..n { info_z[(i, j)] *= theta[j]; } }
    let chol = nalgebra::Cholesky::new(info_z.clone()).unwrap();
    let dir = chol.solve(&sc_z);
    println!("score amax {:.3e}; sz'd = {:.6e}", sc.amax(), sc_z.dot(&dir));
    println!("dir A block amax {:.3e}; dir eta = {:?}", 
        dir.rows(0, ml).amax(),
        dir.as_slice()[ml..].iter().map(|v| format!("{v:+.2e}")).collect::<Vec<_>>());
    let ll0 = log_likelihood(&p, &obs, &specs).unwrap();
    let mut step = 1.0f64;
    for k in 0..16 {
        let mut cand = theta.clone();
        for i in 0..ml { cand[i] += step * dir[i]; }
        for i in ml..n { cand[i] *= (step * dir[i]).exp(); }
        let msg = match ModelParams::from_vector(&cand, 4, 3) {
            Ok(cp) => match log_likelihood(&cp, &obs, &specs) {
                Ok(l) => format!("dll = {:+.6e}", l - ll0),
                Err(e) => format!("ll err: {e}"),
            },
            Err(e) => format!("params err: {e}"),
        };
        println!("k={k} step={step:.3e}: {msg}");
        step *= 0.5;
    }
    println!("ll0 = {ll0:.6e}");
}
