//! Grid search for the committed default weights.
//!
//! Stage 1 screens the full grid (lambda, mu in {1e-2, 1e-1, 1, 10, 100},
//! gamma in {1e-3, 1e-2, 1e-1, 1}) with a few seeds; stage 2 re-scores the
//! shortlist with 20 seeds. A configuration is admissible only if it also
//! recovers the noiseless reference below 1e-2 NRMSE. The winners go into
//! `chordv::defaults`.
//!
//! Usage: tune <stage1|stage2|ranks|chord> [seeds]
//!
//! `ranks` re-scores configs read from stdin across prior peak counts
//! {5, 10, 20, 50}; `TUNE_SIGMA` and `TUNE_LAMBDAS` override the noise
//! level and the chord-stage lambda grid.

use chordv::{
    add_noise, chord, chord_v, nrmse, reference_5peak, synthesize_fid, ChordVConfig, Fid,
    NoiseSpec,
};

fn sigma() -> f64 {
    std::env::var("TUNE_SIGMA").ok().and_then(|s| s.parse().ok()).unwrap_or(0.04)
}

struct Score {
    lambda: f64,
    mu: f64,
    gamma: f64,
    noiseless: f64,
    mean: f64,
    mean_iters: f64,
    fails: usize,
}

fn score_chord_v(truth: &Fid, lambda: f64, mu: f64, gamma: f64, seeds: u64) -> Score {
    let mut cfg = ChordVConfig::new(5);
    cfg.lambda = lambda;
    cfg.mu = mu;
    cfg.gamma = gamma;

    let noiseless = match chord_v(truth, &cfg) {
        Ok(out) => nrmse(&out.denoised, truth).unwrap(),
        Err(_) => f64::INFINITY,
    };

    let mut total = 0.0;
    let mut iters = 0.0;
    let mut ok = 0usize;
    let mut fails = 0usize;
    for seed in 0..seeds {
        let noisy = add_noise(truth, &NoiseSpec::new(sigma(), seed).unwrap()).unwrap();
        match chord_v(&noisy, &cfg) {
            Ok(out) => {
                total += nrmse(&out.denoised, truth).unwrap();
                iters += out.iterations as f64;
                ok += 1;
            }
            Err(_) => fails += 1,
        }
    }
    let mean = if ok > 0 { total / ok as f64 } else { f64::INFINITY };
    let mean_iters = if ok > 0 { iters / ok as f64 } else { f64::NAN };
    Score { lambda, mu, gamma, noiseless, mean, mean_iters, fails }
}

fn print_scores(scores: &mut Vec<Score>) {
    scores.sort_by(|a, b| a.mean.total_cmp(&b.mean));
    println!("{:>9} {:>9} {:>9} {:>11} {:>10} {:>8} {:>5}", "lambda", "mu", "gamma", "noiseless", "mean", "iters", "fail");
    for s in scores.iter() {
        println!(
            "{:>9} {:>9} {:>9} {:>11.3e} {:>10.5} {:>8.1} {:>5}",
            s.lambda, s.mu, s.gamma, s.noiseless, s.mean, s.mean_iters, s.fails
        );
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let stage = args.get(1).map(String::as_str).unwrap_or("stage1");
    let seeds: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);

    let truth = synthesize_fid(&reference_5peak()).unwrap();
    let weights = [1e-2, 1e-1, 1.0, 10.0, 100.0];
    let gammas = [1e-3, 1e-2, 1e-1, 1.0];

    match stage {
        "stage1" => {
            let mut scores = Vec::new();
            for &lambda in &weights {
                for &mu in &weights {
                    for &gamma in &gammas {
                        let s = score_chord_v(&truth, lambda, mu, gamma, seeds);
                        eprintln!(
                            "done l={lambda} m={mu} g={gamma} mean={:.4} iters={:.0}",
                            s.mean, s.mean_iters
                        );
                        scores.push(s);
                    }
                }
            }
            print_scores(&mut scores);
        }
        "stage2" => {
            // Re-score a shortlist passed as l,m,g triples on stdin lines.
            let mut scores = Vec::new();
            for line in std::io::stdin().lines() {
                let line = line.unwrap();
                let parts: Vec<f64> =
                    line.split_whitespace().map(|t| t.parse().unwrap()).collect();
                scores.push(score_chord_v(&truth, parts[0], parts[1], parts[2], seeds));
            }
            print_scores(&mut scores);
        }
        "ranks" => {
            // Rank-robustness screen: for each l,m,g triple on stdin, the
            // per-r-hat mean NRMSE over `seeds` trials plus the max/min ratio.
            println!(
                "{:>9} {:>9} {:>9} {:>11} {:>9} {:>9} {:>9} {:>9} {:>7}",
                "lambda", "mu", "gamma", "noiseless", "r=5", "r=10", "r=20", "r=50", "ratio"
            );
            for line in std::io::stdin().lines() {
                let line = line.unwrap();
                let parts: Vec<f64> =
                    line.split_whitespace().map(|t| t.parse().unwrap()).collect();
                let (lambda, mu, gamma) = (parts[0], parts[1], parts[2]);
                let mut means = Vec::new();
                for r_hat in [5usize, 10, 20, 50] {
                    let mut cfg = ChordVConfig::new(r_hat);
                    cfg.lambda = lambda;
                    cfg.mu = mu;
                    cfg.gamma = gamma;
                    let mut total = 0.0;
                    let mut ok = 0usize;
                    for seed in 0..seeds {
                        let noisy =
                            add_noise(&truth, &NoiseSpec::new(sigma(), seed).unwrap()).unwrap();
                        if let Ok(out) = chord_v(&noisy, &cfg) {
                            total += nrmse(&out.denoised, &truth).unwrap();
                            ok += 1;
                        }
                    }
                    means.push(if ok > 0 { total / ok as f64 } else { f64::INFINITY });
                }
                let mut cfg = ChordVConfig::new(5);
                cfg.lambda = lambda;
                cfg.mu = mu;
                cfg.gamma = gamma;
                let noiseless = match chord_v(&truth, &cfg) {
                    Ok(out) => nrmse(&out.denoised, &truth).unwrap(),
                    Err(_) => f64::INFINITY,
                };
                let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = means.iter().cloned().fold(0.0f64, f64::max);
                println!(
                    "{:>9} {:>9} {:>9} {:>11.3e} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>7.3}",
                    lambda, mu, gamma, noiseless, means[0], means[1], means[2], means[3],
                    hi / lo
                );
            }
        }
        "chord" => {
            let lambdas: Vec<f64> = match std::env::var("TUNE_LAMBDAS") {
                Ok(list) => list.split(',').map(|t| t.parse().unwrap()).collect(),
                Err(_) => vec![1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4],
            };
            println!("{:>9} {:>11} {:>10} {:>8}", "lambda", "noiseless", "mean", "iters");
            for &lambda in lambdas.iter() {
                let noiseless = match chord(&truth, lambda, 1.0, 1.0, 1e-3, 200) {
                    Ok(out) => nrmse(&out.denoised, &truth).unwrap(),
                    Err(_) => f64::INFINITY,
                };
                let mut total = 0.0;
                let mut iters = 0.0;
                for seed in 0..seeds {
                    let noisy = add_noise(&truth, &NoiseSpec::new(sigma(), seed).unwrap()).unwrap();
                    let out = chord(&noisy, lambda, 1.0, 1.0, 1e-3, 200).unwrap();
                    total += nrmse(&out.denoised, &truth).unwrap();
                    iters += out.iterations as f64;
                }
                println!(
                    "{:>9} {:>11.3e} {:>10.5} {:>8.1}",
                    lambda,
                    noiseless,
                    total / seeds as f64,
                    iters / seeds as f64
                );
            }
        }
        other => {
            eprintln!("unknown stage {other}");
            std::process::exit(1);
        }
    }
}
