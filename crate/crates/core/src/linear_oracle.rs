//! Linear-process machinery: Durbin-Levinson transforms between
//! autocorrelations and partial autocorrelations, autocorrelations of ARMA,
//! ARFIMA and fractional Gaussian noise, prediction and moving-average
//! coefficients, and the closed-form Gaussian Rosenblatt functions.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_quantile};

/// Cutoff below which MA(infinity) weights are considered negligible.
pub const PSI_CUTOFF: f64 = 1e-14;
/// Maximum number of MA(infinity) weights.
pub const PSI_MAX_TERMS: usize = 100_000;
/// Default kpacf horizon and truncation lag for infinite-order models.
pub const DEFAULT_HORIZON: usize = 30;

fn check_pacf(alpha: &[f64]) -> Result<()> {
    for (i, &a) in alpha.iter().enumerate() {
        if !(a.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite { lag: i + 1 });
        }
    }
    Ok(())
}

/// Autocorrelations `rho_1..rho_K` from partial autocorrelations
/// `alpha_1..alpha_K` by the Durbin-Levinson recursion.
pub fn pacf_to_acf(alpha: &[f64]) -> Result<Vec<f64>> {
    pacf_to_acf_horizon(alpha, alpha.len())
}

/// As [`pacf_to_acf`] but continuing to `horizon` lags with the partial
/// autocorrelations beyond `alpha.len()` set to zero. Past the last non-zero
/// entry the predictor coefficients freeze, so each further lag costs only
/// as much as the support length.
pub fn pacf_to_acf_horizon(alpha: &[f64], horizon: usize) -> Result<Vec<f64>> {
    Ok(durbin_levinson_forward(alpha, horizon)?.0)
}

/// Autocorrelations to `horizon` together with the final predictor
/// coefficients `phi^(s)` of the support length `s`.
fn durbin_levinson_forward(alpha: &[f64], horizon: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_pacf(alpha)?;
    let support = alpha.iter().rposition(|&a| a != 0.0).map_or(0, |i| i + 1);
    let mut rho = Vec::with_capacity(horizon);
    let mut phi: Vec<f64> = Vec::with_capacity(support);
    let mut sigma2 = 1.0;
    let mut prev = Vec::with_capacity(support);
    for k in 1..=horizon.max(support) {
        let a = if k <= alpha.len() { alpha[k - 1] } else { 0.0 };
        // rho_k = sum_j phi_j^(k-1) rho_{k-j} + alpha_k sigma_{k-1}^2
        let mut r = a * sigma2;
        for (j, &p) in phi.iter().enumerate() {
            let lag = k - 1 - j;
            r += p * if lag == 0 { 1.0 } else { rho[lag - 1] };
        }
        rho.push(r);
        if k <= support {
            prev.clone_from(&phi);
            for j in 0..phi.len() {
                phi[j] = prev[j] - a * prev[k - 2 - j];
            }
            phi.push(a);
            sigma2 *= 1.0 - a * a;
        }
    }
    rho.truncate(horizon);
    Ok((rho, phi))
}

/// Partial autocorrelations from autocorrelations `rho_1..rho_K`.
///
/// Fails with [`Error::NotPositiveDefinite`] at the first lag whose
/// Toeplitz matrix is not positive definite.
pub fn acf_to_pacf(rho: &[f64]) -> Result<Vec<f64>> {
    let mut alpha = Vec::with_capacity(rho.len());
    let mut phi: Vec<f64> = Vec::with_capacity(rho.len());
    let mut prev = Vec::with_capacity(rho.len());
    let mut sigma2 = 1.0;
    for k in 1..=rho.len() {
        let mut num = rho[k - 1];
        for (j, &p) in phi.iter().enumerate() {
            let lag = k - 1 - j;
            num -= p * if lag == 0 { 1.0 } else { rho[lag - 1] };
        }
        let a = num / sigma2;
        if !(a.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite { lag: k });
        }
        alpha.push(a);
        prev.clone_from(&phi);
        for j in 0..phi.len() {
            phi[j] = prev[j] - a * prev[k - 2 - j];
        }
        phi.push(a);
        sigma2 *= 1.0 - a * a;
    }
    Ok(alpha)
}

/// Best linear predictor coefficients, innovation scales and moving-average
/// coefficients of a unit-variance Gaussian process, for every order
/// `k = 0..=K`.
#[derive(Clone, Debug)]
pub struct DlCoefficients {
    /// `phi[k][j - 1] = phi_j^(k)`, `j = 1..=k`.
    pub phi: Vec<Vec<f64>>,
    /// `sigma[k] = sqrt(prod_{j <= k} (1 - alpha_j^2))`, `sigma[0] = 1`.
    pub sigma: Vec<f64>,
    /// `psi[k][j] = psi_j^(k)`, `j = 0..=k`, with `psi[k][0] = sigma[k]`.
    pub psi: Vec<Vec<f64>>,
}

impl DlCoefficients {
    pub fn order(&self) -> usize {
        self.sigma.len() - 1
    }
}

pub fn dl_coefficients(alpha: &[f64]) -> Result<DlCoefficients> {
    check_pacf(alpha)?;
    let kmax = alpha.len();
    let mut phi: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    let mut sigma = Vec::with_capacity(kmax + 1);
    phi.push(vec![]);
    sigma.push(1.0);
    let mut sigma2 = 1.0;
    for k in 1..=kmax {
        let a = alpha[k - 1];
        let prev = &phi[k - 1];
        let mut cur: Vec<f64> = (1..k).map(|j| prev[j - 1] - a * prev[k - j - 1]).collect();
        cur.push(a);
        phi.push(cur);
        sigma2 *= 1.0 - a * a;
        sigma.push(sigma2.sqrt());
    }
    // psi_j^(k) = sum_{i=1}^{j} phi_i^(k) psi_{j-i}^(k-i), psi_0^(k) = sigma_k
    let mut psi: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut row = Vec::with_capacity(k + 1);
        row.push(sigma[k]);
        for j in 1..=k {
            let s: f64 = (1..=j).map(|i| phi[k][i - 1] * psi[k - i][j - i]).sum();
            row.push(s);
        }
        psi.push(row);
    }
    Ok(DlCoefficients { phi, sigma, psi })
}

/// Closed-form forward Rosenblatt function of the Gaussian s-vine with
/// window `u` (chronological, most recent last).
pub fn gaussian_forward(coef: &DlCoefficients, u: &[f64], x: f64) -> f64 {
    let k = u.len();
    if k == 0 {
        return x;
    }
    let mean: f64 = (1..=k).map(|j| coef.phi[k][j - 1] * norm_quantile(u[k - j])).sum();
    norm_cdf((norm_quantile(x) - mean) / coef.sigma[k])
}

/// Closed-form causal filter of the Gaussian s-vine: the value produced by
/// innovations `z` (chronological) followed by `x`.
pub fn gaussian_inverse(coef: &DlCoefficients, z: &[f64], x: f64) -> f64 {
    let k = z.len();
    if k == 0 {
        return x;
    }
    let past: f64 = (1..=k).map(|j| coef.psi[k][j] * norm_quantile(z[k - j])).sum();
    norm_cdf(coef.sigma[k] * norm_quantile(x) + past)
}

/// Closed-form inverse of [`gaussian_forward`] in its last argument.
pub fn gaussian_forward_inverse(coef: &DlCoefficients, u: &[f64], z: f64) -> f64 {
    let k = u.len();
    if k == 0 {
        return z;
    }
    let mean: f64 = (1..=k).map(|j| coef.phi[k][j - 1] * norm_quantile(u[k - j])).sum();
    norm_cdf(coef.sigma[k] * norm_quantile(z) + mean)
}

/// Both sides of `1 + 2 sum rho_k = prod (1 + alpha_k) / (1 - alpha_k)`.
///
/// The autocorrelations are summed to `horizon` lags. When the pacf is
/// supported within the horizon the remaining tail obeys the AR recursion
/// and is added in closed form, so the left side is the full infinite sum.
pub fn debowski_check(alpha: &[f64], horizon: usize) -> Result<(f64, f64)> {
    let (rho, phi) = durbin_levinson_forward(alpha, horizon.max(alpha.len()))?;
    let sum = kahan_sum(rho.iter().copied());
    let k = rho.len();
    let tail = if phi.len() <= k {
        // S = sum_{k' > K} rho_k' solves S = sum_j phi_j (S + rho_{K+1-j} + ... + rho_K)
        let head = kahan_sum(phi.iter().enumerate().flat_map(|(j, &p)| rho[k - 1 - j..].iter().map(move |r| p * r)));
        head / (1.0 - phi.iter().sum::<f64>())
    } else {
        0.0
    };
    let lhs = 1.0 + 2.0 * (sum + tail);
    let ln_rhs: f64 = alpha.iter().map(|&a| a.ln_1p() - (-a).ln_1p()).sum();
    Ok((lhs, ln_rhs.exp()))
}

/// Sum of the first `horizon` autocorrelations without the tail correction.
pub fn truncated_acf_sum(alpha: &[f64], horizon: usize) -> Result<f64> {
    Ok(kahan_sum(pacf_to_acf_horizon(alpha, horizon)?.into_iter()))
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn tau_from_alpha(alpha: f64) -> f64 {
    FRAC_2_PI * alpha.asin()
}

pub fn alpha_from_tau(tau: f64) -> f64 {
    (FRAC_PI_2 * tau).sin()
}

/// Partial autocorrelations of the AR polynomial `1 - phi_1 B - ... - phi_p B^p`
/// by the step-down recursion. The AR part is causal iff all have modulus < 1.
pub fn ar_reflection(phi: &[f64]) -> Vec<f64> {
    let p = phi.len();
    let mut a = phi.to_vec();
    let mut refl = vec![0.0; p];
    for k in (1..=p).rev() {
        let ak = a[k - 1];
        refl[k - 1] = ak;
        if ak.abs() >= 1.0 {
            refl.iter_mut().take(k - 1).for_each(|r| *r = f64::NAN);
            break;
        }
        let d = 1.0 - ak * ak;
        let prev: Vec<f64> = (1..k).map(|j| (a[j - 1] + ak * a[k - j - 1]) / d).collect();
        a = prev;
    }
    refl
}

pub fn is_causal(phi: &[f64]) -> bool {
    phi.iter().all(|p| p.is_finite()) && ar_reflection(phi).iter().all(|r| r.abs() < 1.0)
}

/// AR coefficients from partial autocorrelations (inverse of [`ar_reflection`]).
pub fn ar_from_reflection(alpha: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(alpha.len());
    for (k, &a) in alpha.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - a * prev[k - 1 - j];
        }
        phi.push(a);
    }
    phi
}

/// MA(infinity) weights of the ARMA model with AR coefficients `phi` and MA
/// polynomial `1 + psi_1 B + ... + psi_q B^q`.
pub fn arma_psi_weights(phi: &[f64], psi: &[f64]) -> Result<Vec<f64>> {
    if !is_causal(phi) {
        return Err(Error::domain(format!("AR coefficients {phi:?} are not causal")));
    }
    let (p, q) = (phi.len(), psi.len());
    let quiet_run = p.max(1);
    let mut w = vec![1.0];
    let mut quiet = 0;
    for j in 1..PSI_MAX_TERMS {
        let mut v = if j <= q { psi[j - 1] } else { 0.0 };
        for i in 1..=p.min(j) {
            v += phi[i - 1] * w[j - i];
        }
        w.push(v);
        if j >= q {
            quiet = if v.abs() < PSI_CUTOFF { quiet + 1 } else { 0 };
            if quiet >= quiet_run || p == 0 {
                break;
            }
        }
    }
    while w.len() > 1 && *w.last().unwrap() == 0.0 {
        w.pop();
    }
    Ok(w)
}

/// `g(m) = sum_j w_j w_{j+m}` for `m = 0..=max_lag`.
fn autocovariance_of_weights(w: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag).map(|m| if m < w.len() { w.iter().zip(&w[m..]).map(|(a, b)| a * b).sum() } else { 0.0 }).collect()
}

/// Autocorrelations `rho_1..rho_K` of a causal ARMA(p, q) process.
pub fn arma_acf(phi: &[f64], psi: &[f64], horizon: usize) -> Result<Vec<f64>> {
    let w = arma_psi_weights(phi, psi)?;
    let g = autocovariance_of_weights(&w, horizon);
    Ok(g[1..].iter().map(|x| x / g[0]).collect())
}

pub fn arma_pacf(phi: &[f64], psi: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if psi.is_empty() && horizon >= phi.len() {
        if !is_causal(phi) {
            return Err(Error::domain(format!("AR coefficients {phi:?} are not causal")));
        }
        let mut alpha = ar_reflection(phi);
        alpha.resize(horizon, 0.0);
        return Ok(alpha);
    }
    acf_to_pacf(&arma_acf(phi, psi, horizon)?)
}

fn check_d(d: f64) -> Result<()> {
    if d > -0.5 && d < 0.5 {
        Ok(())
    } else {
        Err(Error::domain(format!("fractional parameter d = {d} not in (-1/2, 1/2)")))
    }
}

/// Autocorrelations `rho_0..rho_max` of fractionally integrated noise.
fn fi_acf(d: f64, max_lag: usize) -> Vec<f64> {
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    for h in 1..=max_lag {
        let h = h as f64;
        let prev = rho[rho.len() - 1];
        rho.push(prev * (h - 1.0 + d) / (h - d));
    }
    rho
}

/// Autocorrelations `rho_1..rho_K` of ARFIMA(p, d, q): the autocovariance of
/// fractionally integrated noise passed through the ARMA filter.
pub fn arfima_acf(phi: &[f64], d: f64, psi: &[f64], horizon: usize) -> Result<Vec<f64>> {
    check_d(d)?;
    let w = arma_psi_weights(phi, psi)?;
    let m_max = w.len() - 1;
    let g = autocovariance_of_weights(&w, m_max);
    let gamma0 = (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
    let fi = fi_acf(d, horizon + m_max);
    let gamma = |h: usize| -> f64 {
        // gamma_X(h) = sum_{m in Z} g(|m|) gamma_Y(h + m)
        let mut s = g[0] * fi[h];
        for m in 1..=m_max {
            s += g[m] * (fi[h + m] + fi[h.abs_diff(m)]);
        }
        s * gamma0
    };
    let c0 = gamma(0);
    Ok((1..=horizon).map(|h| gamma(h) / c0).collect())
}

pub fn arfima_pacf(phi: &[f64], d: f64, psi: &[f64], horizon: usize) -> Result<Vec<f64>> {
    check_d(d)?;
    if phi.is_empty() && psi.is_empty() {
        return Ok((1..=horizon).map(|k| d / (k as f64 - d)).collect());
    }
    acf_to_pacf(&arfima_acf(phi, d, psi, horizon)?)
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("Hurst exponent {h} not in (0, 1)")))
    }
}

pub fn fgn_acf(hurst: f64, horizon: usize) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    let e = 2.0 * hurst;
    Ok((1..=horizon)
        .map(|k| {
            let k = k as f64;
            0.5 * ((k + 1.0).powf(e) + (k - 1.0).powf(e) - 2.0 * k.powf(e))
        })
        .collect())
}

pub fn fgn_pacf(hurst: f64, horizon: usize) -> Result<Vec<f64>> {
    acf_to_pacf(&fgn_acf(hurst, horizon)?)
}

/// The parametric family generating a kpacf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KpacfKind {
    Arma { p: usize, q: usize },
    Arfima { p: usize, q: usize },
    Fgn,
    Explicit,
}

impl fmt::Display for KpacfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KpacfKind::Arma { p, q } => write!(f, "arma({p},{q})"),
            KpacfKind::Arfima { p, q } => write!(f, "arfima({p},{q})"),
            KpacfKind::Fgn => f.write_str("fgn"),
            KpacfKind::Explicit => f.write_str("explicit"),
        }
    }
}

impl FromStr for KpacfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let orders = |rest: &str| -> Option<(usize, usize)> {
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            let (a, b) = inner.split_once(',')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        };
        let bad = || Error::InvalidInput(format!("unknown kpacf kind '{s}'"));
        if let Some(rest) = t.strip_prefix("arfima") {
            let (p, q) = orders(rest).ok_or_else(bad)?;
            Ok(KpacfKind::Arfima { p, q })
        } else if let Some(rest) = t.strip_prefix("arma") {
            let (p, q) = orders(rest).ok_or_else(bad)?;
            Ok(KpacfKind::Arma { p, q })
        } else if t == "fgn" {
            Ok(KpacfKind::Fgn)
        } else if t == "explicit" {
            Ok(KpacfKind::Explicit)
        } else {
            Err(bad())
        }
    }
}

impl Serialize for KpacfKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KpacfKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parametric generator of Kendall partial autocorrelations.
///
/// `theta` layout: ARMA `[phi_1..phi_p, psi_1..psi_q]`; ARFIMA
/// `[phi_1..phi_p, d, psi_1..psi_q]`; FGN `[H]`; explicit `[tau_1..tau_m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpacfSpec {
    pub kind: KpacfKind,
    pub theta: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

impl KpacfSpec {
    pub fn new(kind: KpacfKind, theta: Vec<f64>, horizon: usize) -> Result<Self> {
        let spec = KpacfSpec { kind, theta, horizon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn arma(phi: &[f64], psi: &[f64], horizon: usize) -> Result<Self> {
        let theta = phi.iter().chain(psi).copied().collect();
        Self::new(KpacfKind::Arma { p: phi.len(), q: psi.len() }, theta, horizon)
    }

    pub fn arfima(phi: &[f64], d: f64, psi: &[f64], horizon: usize) -> Result<Self> {
        let theta = phi.iter().chain([d].iter()).chain(psi).copied().collect();
        Self::new(KpacfKind::Arfima { p: phi.len(), q: psi.len() }, theta, horizon)
    }

    pub fn fgn(hurst: f64, horizon: usize) -> Result<Self> {
        Self::new(KpacfKind::Fgn, vec![hurst], horizon)
    }

    pub fn explicit(tau: Vec<f64>) -> Result<Self> {
        let horizon = tau.len();
        Self::new(KpacfKind::Explicit, tau, horizon)
    }

    /// Number of parameters `theta` must hold.
    pub fn expected_len(kind: KpacfKind, horizon: usize) -> usize {
        match kind {
            KpacfKind::Arma { p, q } => p + q,
            KpacfKind::Arfima { p, q } => p + q + 1,
            KpacfKind::Fgn => 1,
            KpacfKind::Explicit => horizon,
        }
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    /// Same kind and horizon with a new parameter vector.
    pub fn with_theta(&self, theta: Vec<f64>) -> Self {
        KpacfSpec { kind: self.kind, theta, horizon: self.horizon }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("kpacf parameters must be finite"));
        }
        let want = Self::expected_len(self.kind, self.horizon);
        if self.theta.len() != want {
            return Err(Error::domain(format!("{} expects {want} parameter(s), got {}", self.kind, self.theta.len())));
        }
        match self.kind {
            KpacfKind::Arma { .. } | KpacfKind::Arfima { .. } => {
                let (phi, d, _) = self.split();
                if !is_causal(phi) {
                    return Err(Error::domain(format!("AR coefficients {phi:?} are not causal")));
                }
                if let Some(d) = d {
                    check_d(d)?;
                }
            }
            KpacfKind::Fgn => check_hurst(self.theta[0])?,
            KpacfKind::Explicit => {
                if let Some(t) = self.theta.iter().find(|t| !(t.abs() < 1.0)) {
                    return Err(Error::domain(format!("Kendall tau {t} not in (-1, 1)")));
                }
            }
        }
        Ok(())
    }

    /// `(phi, d, psi)` views of an ARMA or ARFIMA parameter vector.
    pub fn split(&self) -> (&[f64], Option<f64>, &[f64]) {
        match self.kind {
            KpacfKind::Arma { p, .. } => (&self.theta[..p], None, &self.theta[p..]),
            KpacfKind::Arfima { p, .. } => (&self.theta[..p], Some(self.theta[p]), &self.theta[p + 1..]),
            KpacfKind::Fgn | KpacfKind::Explicit => (&[], None, &[]),
        }
    }

    /// Gaussian partial autocorrelations `alpha_1..alpha_lags`.
    pub fn pacf(&self, lags: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match self.kind {
            KpacfKind::Arma { .. } => {
                let (phi, _, psi) = self.split();
                arma_pacf(phi, psi, lags)
            }
            KpacfKind::Arfima { .. } => {
                let (phi, d, psi) = self.split();
                arfima_pacf(phi, d.unwrap_or(0.0), psi, lags)
            }
            KpacfKind::Fgn => fgn_pacf(self.theta[0], lags),
            KpacfKind::Explicit => {
                Ok((0..lags).map(|k| self.theta.get(k).map_or(0.0, |&t| alpha_from_tau(t))).collect())
            }
        }
    }

    /// Kendall partial autocorrelations `tau_1..tau_lags`.
    pub fn kpacf(&self, lags: usize) -> Result<Vec<f64>> {
        if self.kind == KpacfKind::Explicit {
            self.validate()?;
            return Ok((0..lags).map(|k| self.theta.get(k).copied().unwrap_or(0.0)).collect());
        }
        Ok(self.pacf(lags)?.into_iter().map(tau_from_alpha).collect())
    }
}
