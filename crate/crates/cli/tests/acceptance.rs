//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use svine_cli::spec::{preset, Overrides};
use svine_core::inference::{fit_copula, ks_statistic_uniform, pseudo_observations, residuals, sample_autocorrelation};
use svine_core::linear_oracle::{
    acf_to_pacf, arfima_acf, arfima_pacf, debowski_check, dl_coefficients, gaussian_forward, gaussian_forward_inverse,
    gaussian_inverse, pacf_to_acf,
};
use svine_core::process::{
    causal_filter, convergence_experiment, invert_to_innovations, longest_run_above, simulate, simulate_sequence,
    uniform_stream,
};
use svine_core::rosenblatt::{forward, forward_inverse};
use svine_core::{CopulaSequence, Error, Family, FitReport, KpacfSpec, NegativeRule, SVineModel};

const FAMILIES: [Family; 5] = [Family::Gauss, Family::Frank, Family::Clayton, Family::Gumbel, Family::Joe];

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn criterion_1() -> Outcome {
    let alpha: Vec<f64> = (1..=50).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    let start = Instant::now();
    let rho = pacf_to_acf(&alpha).unwrap();
    let elapsed = start.elapsed();
    let err = rho.iter().map(|r| (r - 0.5).abs()).fold(0.0, f64::max);
    outcome(
        rho.len() == 50 && err < 1e-12 && within(elapsed, Duration::from_millis(1)),
        format!("max |rho_k - 0.5| = {err:.2e}, {elapsed:?}"),
    )
}

fn criterion_2() -> Outcome {
    let alpha: Vec<f64> = (1..=1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    let c = dl_coefficients(&alpha).unwrap();
    let (mut phi_err, mut psi_err) = (0.0f64, 0.0f64);
    for k in 1..=30 {
        for j in 1..=k {
            phi_err = phi_err.max((c.phi[k][j - 1] - 1.0 / (k as f64 + 1.0)).abs());
            let want = c.sigma[k - j] / (k as f64 + 2.0 - j as f64);
            psi_err = psi_err.max((c.psi[k][j] - want).abs());
        }
    }
    let s2 = c.sigma[1000].powi(2);
    outcome(
        phi_err < 1e-12 && psi_err < 1e-12 && (s2 - 0.5).abs() < 1e-3,
        format!("phi err {phi_err:.2e}, psi err {psi_err:.2e}, sigma_1000^2 = {s2:.6}"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (mut closed, mut route) = (0.0f64, 0.0f64);
    for d in [-0.3, 0.02, 0.45] {
        let pacf = arfima_pacf(&[], d, &[], 100).unwrap();
        for (i, a) in pacf.iter().enumerate() {
            let k = (i + 1) as f64;
            closed = closed.max((a - d / (k - d)).abs());
        }
        let via_acf = acf_to_pacf(&arfima_acf(&[], d, &[], 30).unwrap()).unwrap();
        for (a, b) in via_acf.iter().zip(&pacf) {
            route = route.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        closed < 1e-10 && route < 1e-4 && within(elapsed, Duration::from_secs(5)),
        format!("closed form err {closed:.2e}, acf route err {route:.2e}, {elapsed:?}"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = uniform_stream(4, 0);
    let mut next = move || rng.next().unwrap();
    let (mut f_err, mut fi_err, mut s_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let k = 1 + (next() * 20.0) as usize;
        let alpha: Vec<f64> = (0..k).map(|_| 1.8 * next() - 0.9).collect();
        let seq = CopulaSequence::gaussian(&alpha).unwrap();
        let coef = dl_coefficients(&alpha).unwrap();
        // windows are drawn from the process so that every intermediate
        // conditional value stays away from 0 and 1
        let innov: Vec<f64> = (0..=k).map(|_| next()).collect();
        let path = simulate_sequence(&seq, &innov).unwrap();
        let (u, x) = (&path[..k], path[k]);
        f_err = f_err.max((forward(&seq, u, x) - gaussian_forward(&coef, u, x)).abs());
        f_err = f_err.max((forward(&seq, u, x) - innov[k]).abs());
        let z = next();
        fi_err = fi_err.max((forward_inverse(&seq, u, z).unwrap() - gaussian_forward_inverse(&coef, u, z)).abs());
        s_err =
            s_err.max((causal_filter(&seq, &innov).unwrap() - gaussian_inverse(&coef, &innov[..k], innov[k])).abs());
    }
    let elapsed = start.elapsed();
    let worst = f_err.max(fi_err).max(s_err);
    outcome(
        worst < 1e-8 && within(elapsed, Duration::from_secs(10)),
        format!("forward {f_err:.2e}, forward inverse {fi_err:.2e}, causal filter {s_err:.2e}, {elapsed:?}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = uniform_stream(5, 0);
    let mut next = move || rng.next().unwrap();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let len = 1 + (next() * 10.0) as usize;
        let alpha: Vec<f64> = (0..len).map(|_| 1.6 * next() - 0.8).collect();
        let (lhs, rhs) = debowski_check(&alpha, 200).unwrap();
        worst = worst.max((lhs - rhs).abs() / rhs.max(1.0));
    }
    let a: f64 = 0.3;
    let mut bound_ok = true;
    for p in 1..=5 {
        let (lhs, _) = debowski_check(&vec![a; p], 200).unwrap();
        let bound = 0.5 * (((1.0 + a) / (1.0 - a)).powi(p as i32) - 1.0);
        bound_ok &= 0.5 * (lhs - 1.0) >= bound - 1e-9;
    }
    outcome(worst < 1e-6 && bound_ok, format!("max relative gap {worst:.2e}, AR(p) bound holds: {bound_ok}"))
}

fn arma11(horizon: usize) -> KpacfSpec {
    KpacfSpec::arma(&[0.95], &[-0.85], horizon).unwrap()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let z: Vec<f64> = uniform_stream(6, 0).take(300).collect();
    let mut worst = 0.0f64;
    for family in FAMILIES {
        let seq = CopulaSequence::from_spec(&arma11(5), family, NegativeRule::default(), 5).unwrap();
        let u = simulate_sequence(&seq, &z).unwrap();
        let back = invert_to_innovations(&seq, &u);
        let err = back.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && within(elapsed, Duration::from_secs(30)),
        format!("max |z - z_hat| = {worst:.2e} over 5 families, {elapsed:?}"),
    )
}

fn criterion_7() -> Outcome {
    let (n, seeds) = (201usize, 1..=10u64);
    let mut lines = Vec::new();
    let mut pass = true;
    for family in FAMILIES {
        let seq = CopulaSequence::from_spec(&arma11(n - 1), family, NegativeRule::default(), n - 1).unwrap();
        let runs: Vec<Vec<f64>> = seeds
            .clone()
            .into_par_iter()
            .map(|s| convergence_experiment(&seq, n, s).unwrap().iter().map(|r| (r.value - r.ultimate).abs()).collect())
            .collect();
        let m = runs.len() as f64;
        let mean: Vec<f64> = (0..n - 1).map(|i| runs.iter().map(|r| r[i]).sum::<f64>() / m).collect();
        let tail = mean[179..].iter().copied().fold(0.0, f64::max);
        pass &= tail < 0.02;
        lines.push(format!("{family} {tail:.1e}"));
    }
    outcome(pass, format!("max mean |S_k - S_n-1| for k >= 180: {}", lines.join(", ")))
}

fn fit_or_best(r: svine_core::Result<FitReport>) -> (FitReport, bool) {
    match r {
        Ok(r) => (r, true),
        Err(Error::NotConverged(r)) => (*r, false),
        Err(e) => panic!("fit failed: {e}"),
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let p = 30;
    let model = SVineModel::from_kpacf(arma11(p), Family::Gumbel, NegativeRule::default(), p).unwrap();
    let path = simulate(&model, 2000, 1).unwrap();
    let u = pseudo_observations(&path.u);
    let template = arma11(p).with_theta(vec![]);
    let fits: Vec<(FitReport, bool)> = [Family::Gumbel, Family::Gauss]
        .into_par_iter()
        .map(|f| fit_or_best(fit_copula(&u, &template, f, NegativeRule::default(), p)))
        .collect();
    let (gumbel, gauss) = (&fits[0].0, &fits[1].0);
    let (phi, psi) = (gumbel.theta_hat[0], gumbel.theta_hat[1]);
    let recovered = (phi - 0.95).abs() <= 0.1 && (psi + 0.85).abs() <= 0.1;
    let ordered = gumbel.aic < gauss.aic;
    let elapsed = start.elapsed();
    outcome(
        recovered && ordered && within(elapsed, Duration::from_secs(300)),
        format!(
            "phi {phi:.3}, psi {psi:.3}, AIC gumbel {:.2} vs gauss {:.2}, converged {}/{}, {elapsed:?}",
            gumbel.aic, gauss.aic, fits[0].1, fits[1].1
        ),
    )
}

fn criterion_9() -> Outcome {
    let n = 5000;
    let model = SVineModel::from_kpacf(arma11(30), Family::Gumbel, NegativeRule::default(), 30).unwrap();
    let path = simulate(&model, n, 9).unwrap();
    let (z, _) = residuals(&path.u, &model.seq);
    let d = ks_statistic_uniform(&z);
    let crit = 1.628 / (n as f64).sqrt();
    let acf = sample_autocorrelation(&z, 5);
    let bound = 3.0 / (n as f64).sqrt();
    let worst = acf.iter().map(|r| r.abs()).fold(0.0, f64::max);
    outcome(
        d < crit && worst < bound,
        format!("KS D = {d:.4} (1% critical {crit:.4}), max |acf 1..5| = {worst:.4} (bound {bound:.4})"),
    )
}

fn criterion_10() -> Outcome {
    let models = preset("clayton-excursions").unwrap().models(&Overrides::default(), 3).unwrap();
    let model = &models[0].1;
    let runs: Vec<usize> =
        (0..20u64).into_par_iter().map(|s| longest_run_above(&simulate(model, 10_000, s).unwrap().u, 0.6)).collect();
    let best = runs.iter().copied().max().unwrap();
    let hits = runs.iter().filter(|&&r| r >= 500).count();
    outcome(best >= 500, format!("longest run above 0.6: {best}; {hits}/20 seeds reach 500"))
}

fn main() {
    let criteria: [Check; 10] = [
        ("constant acf identity", criterion_1),
        ("non-causal coefficient formulas", criterion_2),
        ("ARFIMA pacf", criterion_3),
        ("Gaussian oracle equivalence", criterion_4),
        ("Debowski identity", criterion_5),
        ("simulation/inversion duality", criterion_6),
        ("filter convergence experiment", criterion_7),
        ("end-to-end recovery", criterion_8),
        ("residual iid-ness", criterion_9),
        ("Clayton excursion pathology", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| outcome(false, "panicked"));
        let status = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("{status} {:>2} {name}: {} [{:.2?}]", i + 1, result.detail, start.elapsed());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
