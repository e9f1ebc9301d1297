//! Marginal distributions for the two-stage (IFM) fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::optimize::{nelder_mead_restart, NelderMeadOptions};
use crate::inference::pseudo_observations;
use crate::special::{norm_cdf, norm_ln_pdf, norm_quantile, t_cdf, t_ln_pdf, t_quantile};

/// Which marginal family to fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginKind {
    Normal,
    SkewedStudent,
    Empirical,
}

impl std::str::FromStr for MarginKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "normal" => Ok(MarginKind::Normal),
            "skewed_student" | "skew_t" => Ok(MarginKind::SkewedStudent),
            "empirical" => Ok(MarginKind::Empirical),
            _ => Err(Error::InvalidInput(format!("unknown margin kind '{s}'"))),
        }
    }
}

/// A continuous marginal distribution.
///
/// The skewed Student is the Fernandez-Steel construction: the standard t
/// density with `nu` degrees of freedom is stretched by `gamma` on the right
/// and by `1/gamma` on the left, then shifted by `mu` and scaled by `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub enum MarginalModel {
    Normal {
        mu: f64,
        sigma: f64,
    },
    SkewedStudent {
        mu: f64,
        sigma: f64,
        nu: f64,
        gamma: f64,
    },
    /// The empirical distribution of a sorted sample.
    Empirical {
        sorted: Vec<f64>,
    },
}

impl MarginalModel {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        let m = MarginalModel::Normal { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn skewed_student(mu: f64, sigma: f64, nu: f64, gamma: f64) -> Result<Self> {
        let m = MarginalModel::SkewedStudent { mu, sigma, nu, gamma };
        m.validate()?;
        Ok(m)
    }

    pub fn empirical(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() || sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("empirical margin needs a finite, non-empty sample".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(MarginalModel::Empirical { sorted })
    }

    pub fn kind(&self) -> MarginKind {
        match self {
            MarginalModel::Normal { .. } => MarginKind::Normal,
            MarginalModel::SkewedStudent { .. } => MarginKind::SkewedStudent,
            MarginalModel::Empirical { .. } => MarginKind::Empirical,
        }
    }

    /// Parameters in declaration order; the sorted sample for `Empirical`.
    pub fn params(&self) -> Vec<f64> {
        match self {
            MarginalModel::Normal { mu, sigma } => vec![*mu, *sigma],
            MarginalModel::SkewedStudent { mu, sigma, nu, gamma } => vec![*mu, *sigma, *nu, *gamma],
            MarginalModel::Empirical { sorted } => sorted.clone(),
        }
    }

    pub fn from_params(kind: MarginKind, params: &[f64]) -> Result<Self> {
        let expect = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{kind:?} margin expects {n} parameters, got {}", params.len())))
            }
        };
        match kind {
            MarginKind::Normal => {
                expect(2)?;
                Self::normal(params[0], params[1])
            }
            MarginKind::SkewedStudent => {
                expect(4)?;
                Self::skewed_student(params[0], params[1], params[2], params[3])
            }
            MarginKind::Empirical => Self::empirical(params),
        }
    }

    /// Number of estimated parameters counted in the AIC.
    pub fn n_free_params(&self) -> usize {
        match self {
            MarginalModel::Normal { .. } => 2,
            MarginalModel::SkewedStudent { .. } => 4,
            MarginalModel::Empirical { .. } => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MarginalModel::Normal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            MarginalModel::SkewedStudent { mu, sigma, nu, gamma } => {
                mu.is_finite()
                    && sigma > 0.0
                    && sigma.is_finite()
                    && nu > 2.0
                    && nu.is_finite()
                    && gamma > 0.0
                    && gamma.is_finite()
            }
            MarginalModel::Empirical { ref sorted } => !sorted.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid margin parameters {:?}", self.params())))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalModel::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            MarginalModel::SkewedStudent { mu, sigma, nu, gamma } => fs_cdf((x - mu) / sigma, nu, gamma),
            MarginalModel::Empirical { ref sorted } => {
                let below = sorted.partition_point(|&s| s <= x);
                below as f64 / (sorted.len() + 1) as f64
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            MarginalModel::Normal { mu, sigma } => mu + sigma * norm_quantile(p),
            MarginalModel::SkewedStudent { mu, sigma, nu, gamma } => mu + sigma * fs_quantile(p, nu, gamma),
            MarginalModel::Empirical { ref sorted } => {
                let n = sorted.len();
                let i = ((p * (n + 1) as f64).ceil() as usize).clamp(1, n);
                sorted[i - 1]
            }
        }
    }

    /// Log density; `Empirical` has none and returns NaN.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            MarginalModel::Normal { mu, sigma } => norm_ln_pdf((x - mu) / sigma) - sigma.ln(),
            MarginalModel::SkewedStudent { mu, sigma, nu, gamma } => {
                fs_ln_pdf((x - mu) / sigma, nu, gamma) - sigma.ln()
            }
            MarginalModel::Empirical { .. } => f64::NAN,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Log-likelihood of a sample; zero for `Empirical`.
    pub fn loglik(&self, x: &[f64]) -> f64 {
        match self {
            MarginalModel::Empirical { .. } => 0.0,
            _ => x.iter().map(|&v| self.ln_pdf(v)).sum(),
        }
    }

    /// Probability-integral transform of a sample. For `Empirical` these are
    /// the pseudo-observations of `x`.
    pub fn pit(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MarginalModel::Empirical { .. } => pseudo_observations(x),
            _ => x.iter().map(|&v| self.cdf(v)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginalRepr {
    kind: MarginKind,
    params: Vec<f64>,
}

impl Serialize for MarginalModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MarginalRepr { kind: self.kind(), params: self.params() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarginalModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MarginalRepr::deserialize(d)?;
        MarginalModel::from_params(r.kind, &r.params).map_err(serde::de::Error::custom)
    }
}

fn fs_ln_pdf(e: f64, nu: f64, gamma: f64) -> f64 {
    let arg = if e >= 0.0 { e / gamma } else { e * gamma };
    (2.0 / (gamma + 1.0 / gamma)).ln() + t_ln_pdf(arg, nu)
}

fn fs_cdf(e: f64, nu: f64, gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    if e < 0.0 {
        2.0 / (1.0 + g2) * t_cdf(e * gamma, nu)
    } else {
        1.0 - 2.0 * g2 / (1.0 + g2) * t_cdf(-e / gamma, nu)
    }
}

fn fs_quantile(p: f64, nu: f64, gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    if p < 1.0 / (1.0 + g2) {
        t_quantile(p * (1.0 + g2) / 2.0, nu) / gamma
    } else {
        -gamma * t_quantile((1.0 - p) * (1.0 + g2) / (2.0 * g2), nu)
    }
}

/// A fitted margin with its maximized log-likelihood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginFit {
    pub model: MarginalModel,
    pub loglik: f64,
    pub n_params: usize,
    pub converged: bool,
}

/// Maximum-likelihood fit of a margin. `Empirical` stores the sample.
pub fn fit_margin(x: &[f64], kind: MarginKind) -> Result<MarginFit> {
    if x.len() < 10 {
        return Err(Error::InvalidInput(format!("margin fit needs at least 10 observations, got {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("margin data must be finite".into()));
    }
    match kind {
        MarginKind::Normal => {
            let n = x.len() as f64;
            let mu = x.iter().sum::<f64>() / n;
            let sigma = (x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
            let model = MarginalModel::normal(mu, sigma)?;
            Ok(MarginFit { loglik: model.loglik(x), model, n_params: 2, converged: true })
        }
        MarginKind::SkewedStudent => fit_skewed_student(x, None),
        MarginKind::Empirical => {
            Ok(MarginFit { model: MarginalModel::empirical(x)?, loglik: 0.0, n_params: 0, converged: true })
        }
    }
}

/// Skewed Student fit; with `gamma` given it is held fixed (`Some(1.0)`
/// gives the location-scale Student t).
pub fn fit_skewed_student(x: &[f64], gamma: Option<f64>) -> Result<MarginFit> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(sd > 0.0) {
        return Err(Error::InvalidInput("margin data have zero spread".into()));
    }
    // (mu, ln sigma, ln(nu - 2), ln gamma)
    let unpack = |e: &[f64]| -> (f64, f64, f64, f64) {
        let g = gamma.unwrap_or_else(|| e.get(3).copied().unwrap_or(0.0).exp());
        (e[0], e[1].exp(), 2.0 + e[2].exp(), g)
    };
    let nll = |e: &[f64]| -> f64 {
        let (mu, sigma, nu, g) = unpack(e);
        let m = MarginalModel::SkewedStudent { mu, sigma, nu, gamma: g };
        -m.loglik(x)
    };
    let mut x0 = vec![mean, sd.ln(), 6f64.ln()];
    if gamma.is_none() {
        x0.push(0.0);
    }
    let opts = NelderMeadOptions { step: 0.3, max_evals: 6000, ..Default::default() };
    let m = nelder_mead_restart(nll, &x0, opts);
    let (mu, sigma, nu, g) = unpack(&m.x);
    let model = MarginalModel::skewed_student(mu, sigma, nu, g)?;
    let n_params = if gamma.is_some() { 3 } else { 4 };
    Ok(MarginFit { loglik: -m.f, model, n_params, converged: m.converged })
}
