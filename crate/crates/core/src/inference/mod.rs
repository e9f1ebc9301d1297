//! Pseudo-maximum-likelihood fitting of kpacf-parameterized s-vine
//! processes, two-stage margin fits, residuals and diagnostics.

mod margin;
pub mod optimize;
mod transform;

pub use margin::{fit_margin, fit_skewed_student, MarginFit, MarginKind, MarginalModel};
pub use transform::{default_start, to_theta, to_unconstrained};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_oracle::{KpacfKind, KpacfSpec};
use crate::paircopula::{Family, NegativeRule};
use crate::rosenblatt::{innovations, lag_pairs, log_joint_density, CopulaSequence};
use crate::special::norm_quantile;
use optimize::{nelder_mead_restart, NelderMeadOptions};

/// `rank(x_t) / (n + 1)` with average ranks for ties.
pub fn pseudo_observations(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            out[k] = rank / (n + 1) as f64;
        }
        i = j;
    }
    out
}

fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut last: Option<T> = None;
    for v in sorted {
        if last.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        last = Some(v);
    }
    total + run * (run + 1) / 2
}

fn count_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut v[..mid], buf) + count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm). NaN when either
/// sample is constant.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "samples must have equal length");
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let ties_x = tied_pairs(pairs.iter().map(|p| p.0));
    let ties_xy = tied_pairs(pairs.iter().copied());
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = count_inversions(&mut ys, &mut Vec::with_capacity(n));
    let ties_y = tied_pairs(ys.iter().copied());
    let num = n0 as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    num / (((n0 - ties_x) as f64) * ((n0 - ties_y) as f64)).sqrt()
}

/// One-sample Kolmogorov-Smirnov distance to Uniform(0, 1).
pub fn ks_statistic_uniform(u: &[f64]) -> f64 {
    let mut s = u.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n)).fold(0.0, f64::max)
}

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn sample_autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (1..=max_lag)
        .map(|h| {
            if h >= n {
                return f64::NAN;
            }
            (0..n - h).map(|t| (x[t] - mean) * (x[t + h] - mean)).sum::<f64>() / c0
        })
        .collect()
}

/// Result of a copula or full (margin + copula) fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kpacf_kind: KpacfKind,
    pub horizon: usize,
    pub theta_hat: Vec<f64>,
    pub copula_family: Family,
    pub negative_rule: NegativeRule,
    pub truncation_lag: usize,
    pub n_obs: usize,
    /// Copula log-likelihood at `theta_hat`.
    pub copula_loglik: f64,
    /// Copula plus margin log-likelihood.
    pub loglik: f64,
    /// Free parameters counted in the AIC.
    pub n_params: usize,
    pub aic: f64,
    pub stderr: Option<Vec<f64>>,
    pub stderr_method: String,
    /// Why `stderr` is absent.
    pub stderr_flag: Option<String>,
    pub converged: bool,
    pub evaluations: usize,
    pub residuals_z: Vec<f64>,
    pub residuals_normal: Vec<f64>,
    pub margin_fit: Option<MarginFit>,
}

pub const STDERR_METHOD: &str = "observed_information";

impl FitReport {
    pub fn spec(&self) -> KpacfSpec {
        KpacfSpec { kind: self.kpacf_kind, theta: self.theta_hat.clone(), horizon: self.horizon }
    }

    /// The fitted copula sequence.
    pub fn sequence(&self) -> Result<CopulaSequence> {
        CopulaSequence::from_spec(&self.spec(), self.copula_family, self.negative_rule, self.truncation_lag)
    }
}

fn check_unit(u: &[f64]) -> Result<()> {
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two observations".into()));
    }
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
        return Err(Error::InvalidInput(format!("observation {} = {v} is not in (0, 1)", i + 1)));
    }
    Ok(())
}

/// Negative copula log-likelihood at unconstrained parameters `eta`;
/// `+inf` where the sequence cannot be built or the density fails.
pub fn negative_loglik(
    u: &[f64],
    template: &KpacfSpec,
    family: Family,
    rule: NegativeRule,
    truncation: usize,
    eta: &[f64],
) -> f64 {
    let spec = template.with_theta(to_theta(template.kind, eta));
    CopulaSequence::from_spec(&spec, family, rule, truncation)
        .and_then(|seq| log_joint_density(&seq, u))
        .map_or(f64::INFINITY, |l| -l)
}

/// Pseudo-maximum-likelihood fit of the kpacf parameters of `template`.
///
/// The search starts from `template.theta`, or from [`default_start`] when
/// it is empty. A fit that stops before meeting the simplex tolerance is
/// returned inside [`Error::NotConverged`].
pub fn fit_copula(
    u: &[f64],
    template: &KpacfSpec,
    family: Family,
    rule: NegativeRule,
    truncation: usize,
) -> Result<FitReport> {
    check_unit(u)?;
    let start =
        if template.theta.is_empty() { default_start(template.kind, template.horizon) } else { template.theta.clone() };
    let start_spec = template.with_theta(start);
    start_spec.validate()?;
    let eta0 = to_unconstrained(&start_spec)?;

    let nll = |eta: &[f64]| negative_loglik(u, template, family, rule, truncation, eta);
    let dim = eta0.len();
    let opts = NelderMeadOptions { max_evals: 500 + 1500 * dim, ..Default::default() };
    let best = nelder_mead_restart(nll, &eta0, opts);
    if !best.f.is_finite() {
        return Err(Error::Numeric("log-likelihood is not finite anywhere on the search path".into()));
    }

    let theta_hat = to_theta(template.kind, &best.x);
    let spec = template.with_theta(theta_hat.clone());
    let seq = CopulaSequence::from_spec(&spec, family, rule, truncation)?;
    let copula_loglik = log_joint_density(&seq, u)?;
    let (residuals_z, residuals_normal) = residuals(u, &seq);
    let se = observed_information_se(nll, &best.x, |e| to_theta(template.kind, e), HESSIAN_STEP);
    let (stderr, stderr_flag) = match se {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let n_params = theta_hat.len();
    let report = FitReport {
        kpacf_kind: template.kind,
        horizon: template.horizon,
        theta_hat,
        copula_family: family,
        negative_rule: rule,
        truncation_lag: truncation,
        n_obs: u.len(),
        copula_loglik,
        loglik: copula_loglik,
        n_params,
        aic: aic(n_params, copula_loglik),
        stderr,
        stderr_method: STDERR_METHOD.into(),
        stderr_flag,
        converged: best.converged,
        evaluations: best.evals,
        residuals_z,
        residuals_normal,
        margin_fit: None,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NotConverged(Box::new(report)))
    }
}

pub fn aic(n_params: usize, loglik: f64) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

/// Two-stage fit: the margin by maximum likelihood, then the copula process
/// on the probability-integral transform of `x`.
pub fn fit_full(
    x: &[f64],
    margin_kind: MarginKind,
    template: &KpacfSpec,
    family: Family,
    rule: NegativeRule,
    truncation: usize,
) -> Result<FitReport> {
    let margin = fit_margin(x, margin_kind)?;
    let u = margin.model.pit(x);
    if let Some(i) = u.iter().position(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::Numeric(format!("margin maps observation {} outside (0, 1)", i + 1)));
    }
    let attach = |mut r: FitReport| {
        r.loglik = r.copula_loglik + margin.loglik;
        r.n_params += margin.n_params;
        r.aic = aic(r.n_params, r.loglik);
        r.converged &= margin.converged;
        r.margin_fit = Some(margin.clone());
        r
    };
    match fit_copula(&u, template, family, rule, truncation) {
        Ok(r) => {
            let r = attach(r);
            if r.converged {
                Ok(r)
            } else {
                Err(Error::NotConverged(Box::new(r)))
            }
        }
        Err(Error::NotConverged(r)) => Err(Error::NotConverged(Box::new(attach(*r)))),
        Err(e) => Err(e),
    }
}

/// Innovations `z` of `u` under `seq` and their normal scores.
pub fn residuals(u: &[f64], seq: &CopulaSequence) -> (Vec<f64>, Vec<f64>) {
    let z = innovations(seq, u);
    let zn = z.iter().map(|&v| norm_quantile(v)).collect();
    (z, zn)
}

/// Empirical Kendall tau at lags `1..=max_lag` of the pairs transformed by
/// the fitted copulas at shorter lags.
pub fn semi_empirical_kpacf(u: &[f64], seq: &CopulaSequence, max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= u.len() {
        return Err(Error::InvalidInput(format!("lag {max_lag} needs more than {} observations", u.len())));
    }
    Ok(lag_pairs(seq, u, max_lag)
        .into_iter()
        .map(|pairs| {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            kendall_tau(&a, &b)
        })
        .collect())
}

pub const HESSIAN_STEP: f64 = 1e-4;

/// Standard errors from the observed information: the inverse central
/// difference Hessian of `nll` at `eta` (unconstrained scale), mapped to the
/// parameter scale by the delta method through `to_param`.
pub fn observed_information_se<F, G>(nll: F, eta: &[f64], to_param: G, step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let k = eta.len();
    if k == 0 {
        return Ok(vec![]);
    }
    let at = |shifts: &[(usize, f64)]| {
        let mut e = eta.to_vec();
        for &(i, s) in shifts {
            e[i] += s;
        }
        nll(&e)
    };
    let f0 = nll(eta);
    let h = step;
    let mut hess = DMatrix::zeros(k, k);
    for i in 0..k {
        hess[(i, i)] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)]) + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("Hessian has non-finite entries".into()));
    }
    let eig = SymmetricEigen::new(hess.clone());
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_ev = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(min_ev > 1e-8 * max_ev) {
        return Err(Error::Numeric(format!(
            "Hessian is not positive definite (eigenvalues from {min_ev:.3e} to {max_ev:.3e}); flat direction"
        )));
    }
    let cov_eta = hess.cholesky().ok_or_else(|| Error::Numeric("Hessian is not positive definite".into()))?.inverse();

    let p0 = to_param(eta);
    let jh = 1e-6;
    let mut jac = DMatrix::zeros(p0.len(), k);
    for j in 0..k {
        let mut ep = eta.to_vec();
        let mut em = eta.to_vec();
        ep[j] += jh;
        em[j] -= jh;
        let (pp, pm) = (to_param(&ep), to_param(&em));
        for i in 0..p0.len() {
            jac[(i, j)] = (pp[i] - pm[i]) / (2.0 * jh);
        }
    }
    let cov = &jac * cov_eta * jac.transpose();
    Ok((0..p0.len()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect())
}

/// Observed-information standard errors of a copula fit on its data `u`.
pub fn standard_errors(report: &FitReport, u: &[f64]) -> Result<Vec<f64>> {
    let template = report.spec();
    let eta = to_unconstrained(&template)?;
    let nll =
        |e: &[f64]| negative_loglik(u, &template, report.copula_family, report.negative_rule, report.truncation_lag, e);
    observed_information_se(nll, &eta, |e| to_theta(template.kind, e), HESSIAN_STEP)
}
