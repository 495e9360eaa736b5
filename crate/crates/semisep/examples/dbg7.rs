use nalgebra::{DMatrix, DVector};
use semisep::*;

fn score_bias(a_mix: &DMatrix<f64>, ars: &[f64], sigma2: f64, t_len: usize, trials: u64, tag: &str) {
    let l = a_mix.nrows();
    let specs: Vec<_> = ars.iter().map(|&a| ar1_spectrum(a, t_len).unwrap()).collect();
    let truth = ModelParams::new(a_mix.clone(), DVector::from_element(l, sigma2)).unwrap();
    let n = truth.n_params();
    let mut mean = DVector::<f64>::zeros(n);
    let mut m2 = DVector::<f64>::zeros(n);
    for trial in 0..trials {
        let mut rng = trial_rng(777, trial);
        let s = DMatrix::from_rows(&ars.iter().map(|&a| generate_ar1(a, t_len, &mut rng).unwrap().transpose()).collect::<Vec<_>>());
        let x = mix_and_observe(a_mix, &s, &truth.noise_vars, &mut rng).unwrap();
        let obs = dft_forward(&x).unwrap();
        let sc = score(&truth, &obs, &specs).unwrap();
        for i in 0..n { mean[i] += sc[i]; m2[i] += sc[i] * sc[i]; }
    }
    for i in 0..n { mean[i] /= trials as f64; m2[i] /= trials as f64; }
    let crlb_m = crlb(&truth, &specs).unwrap();
    println!("--- {tag}");
    let ml = n - l;
    for i in ml..n {
        let sd = (m2[i] - mean[i] * mean[i]).sqrt();
        let stderr = sd / (trials as f64).sqrt();
        // implied estimate displacement ~ bias / I_ii (rough, diagonal approx)
        let crlb_std = crlb_m.matrix[(i, i)].sqrt();
        println!("  lambda{}: mean score {:+.4e} (stderr {:.2e}) | z={:+.1} | CRLB std {:.2e}",
            i - ml + 1, mean[i], stderr, mean[i] / stderr, crlb_std);
    }
}

fn main() {
    let a1 = DMatrix::from_row_slice(4, 3, &[0.9202,-0.3396,0.8531, 0.6021,-0.7977,0.2639,
        -0.0648,-0.3944,-0.0117, 0.3877,-0.5301,-0.5394]);
    score_bias(&a1, &[0.84, 0.21, -0.57], 0.001, 1000, 300, "exp1 spectra (a=0.84,0.21,-0.57), T=1000, s2=1e-3");
    score_bias(&a1, &[0.3, 0.0, -0.3], 0.001, 1000, 300, "mild spectra (a=0.3,0,-0.3), T=1000, s2=1e-3");
    score_bias(&a1, &[0.84, 0.21, -0.57], 0.001, 4000, 300, "exp1 spectra, T=4000, s2=1e-3");
    let a2 = DMatrix::from_row_slice(5, 2, &[-0.7270,-2.1943, -0.0249,0.8741, -1.2327,0.8559,
        0.5638,0.0343, 1.0297,-0.7223]);
    score_bias(&a2, &[0.21, -0.57], 1.0, 250, 300, "exp2 spectra, T=250, s2=1");
}
