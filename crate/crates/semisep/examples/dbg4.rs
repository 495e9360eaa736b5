use nalgebra::{DMatrix, DVector};
use semisep::*;

fn run(line_search: bool) {
    let a1 = DMatrix::from_row_slice(4, 3, &[0.9202,-0.3396,0.8531, 0.6021,-0.7977,0.2639,
        -0.0648,-0.3944,-0.0117, 0.3877,-0.5301,-0.5394]);
    let specs: Vec<_> = [0.84, 0.21, -0.57].iter().map(|&a| ar1_spectrum(a, 1000).unwrap()).collect();
    let ars = [0.84, 0.21, -0.57];
    let dims = Dimensions::new(3, 4, 1000).unwrap();
    let (mut fails, mut max_rel_a, mut max_rel_lam, mut iters_sum) = (0, 0.0f64, 0.0f64, 0usize);
    let trials = 30u64;
    for trial in 0..trials {
        let mut rng = trial_rng(1234, trial);
        let s = DMatrix::from_rows(&ars.iter().map(|&a| generate_ar1(a, 1000, &mut rng).unwrap().transpose()).collect::<Vec<_>>());
        let x = mix_and_observe(&a1, &s, &DVector::from_element(4, 0.001), &mut rng).unwrap();
        let obs = dft_forward(&x).unwrap();
        let cfg = ScoringConfig::recommended(1000, obs.mean_power());
        let init = initialize(&x, &dims, cfg.lambda_floor).unwrap();
        let ml = 12usize; let n = 16usize;
        let mut theta = init.to_vector();
        let mut ok = false; let mut it_used = 0;
        let mut ll_cur = f64::NEG_INFINITY;
        for it in 0..200 {
            it_used = it;
            let p = ModelParams::from_vector(&theta, 4, 3).unwrap();
            let sc = match score(&p, &obs, &specs) { Ok(s) => s, Err(_) => break };
            if sc.amax() <= cfg.grad_tol { ok = true; break; }
            let info = match fim(&p, &specs) { Ok(f) => f, Err(_) => break };
            // transform to (A, log lambda): J = diag(I, lambda)
            let mut info_z = info.clone();
            let mut sc_z = sc.clone();
            for i in ml..n {
                sc_z[i] *= theta[i];
                for j in 0..n { info_z[(i, j)] *= theta[i]; }
            }
            for j in ml..n {
                for i in 0..n { info_z[(i, j)] *= theta[j]; }
            }
            let dir = match nalgebra::Cholesky::new(info_z) { Some(c) => c.solve(&sc_z), None => break };
            let apply = |th: &DVector<f64>, s: f64| -> DVector<f64> {
                let mut out = th.clone();
                for i in 0..ml { out[i] += s * dir[i]; }
                for i in ml..n { out[i] *= (s * dir[i]).exp(); }
                out
            };
            if line_search {
                if ll_cur == f64::NEG_INFINITY {
                    ll_cur = log_likelihood(&ModelParams::from_vector(&theta, 4, 3).unwrap(), &obs, &specs).unwrap();
                }
                let mut step = 1.0; let mut acc = None;
                for _ in 0..=30 {
                    let cand = apply(&theta, step);
                    if let Ok(cp) = ModelParams::from_vector(&cand, 4, 3) {
                        if let Ok(l) = log_likelihood(&cp, &obs, &specs) {
                            if l.is_finite() && l >= ll_cur { acc = Some((cand, l)); break; }
                        }
                    }
                    step *= 0.5;
                }
                match acc { Some((c, l)) => { theta = c; ll_cur = l; }, None => break }
            } else {
                theta = apply(&theta, 1.0);
            }
            if !theta.iter().all(|v| v.is_finite() && *v < 1e12) { break; }
        }
        let est = ModelParams::from_vector(&theta, 4, 3).unwrap();
        let fixed = resolve_sign(&est.mixing, &a1).unwrap();
        let rel = (&fixed - &a1).amax() / a1.amax();
        let lam_rel = est.noise_vars.iter().map(|&v| (v/0.001 - 1.0).abs()).fold(0.0f64, f64::max);
        max_rel_a = max_rel_a.max(rel); max_rel_lam = max_rel_lam.max(lam_rel);
        iters_sum += it_used;
        if !ok { fails += 1; }
    }
    println!("log-lambda scoring (line_search={line_search}): fails {fails}/{trials} | mean iters {:.1} | max relA {max_rel_a:.3e} | max relLam {max_rel_lam:.3e}",
        iters_sum as f64 / trials as f64);
}

fn main() { run(false); run(true); }
