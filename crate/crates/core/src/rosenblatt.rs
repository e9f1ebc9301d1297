//! The s-vine recursion: forward and backward Rosenblatt functions, their
//! inverses, joint and conditional copula densities.
//!
//! Windows are always in chronological order. For a window `w_0..w_j` the
//! interlacing recursion works with
//! `fwd[i][j] = F(w_j | w_{i+1..j-1}, w_i)` and `bwd[i][j] = F(w_i | w_{i+1..j})`;
//! both equal `w_i` on the diagonal. At lag `l = j - i` the pair copula `C_l`
//! is evaluated at `(bwd[i][j-1], fwd[i+1][j])`: its first h-function gives
//! `fwd[i][j]`, its second `bwd[i][j]` and its density contributes to the
//! joint density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_oracle::{tau_from_alpha, KpacfSpec};
use crate::paircopula::{Family, NegativeRule, PairCopula};
use crate::process::{simulate_sequence, uniform_stream};

/// Pair copulas indexed by lag `1..=p`; every lag beyond `p` is the
/// independence copula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CopulaSequence {
    copulas: Vec<PairCopula>,
}

impl CopulaSequence {
    pub fn new(copulas: Vec<PairCopula>) -> Self {
        CopulaSequence { copulas }
    }

    /// The sequence with no dependence at any lag.
    pub fn independence() -> Self {
        CopulaSequence { copulas: vec![] }
    }

    /// Copulas of `family` matching the Kendall partial autocorrelations
    /// `tau[k - 1]`, `k = 1..=tau.len()`.
    pub fn from_kpacf(tau: &[f64], family: Family, rule: NegativeRule) -> Result<Self> {
        let copulas = tau
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                PairCopula::from_tau(family, t, rule).map_err(|e| match e {
                    Error::Domain(msg) => Error::Domain(format!("lag {}: {msg}", k + 1)),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CopulaSequence { copulas })
    }

    /// The sequence generated by a kpacf specification, truncated at
    /// `truncation` lags.
    pub fn from_spec(spec: &KpacfSpec, family: Family, rule: NegativeRule, truncation: usize) -> Result<Self> {
        Self::from_kpacf(&spec.kpacf(truncation)?, family, rule)
    }

    /// Gauss copulas with partial correlations `alpha`.
    pub fn gaussian(alpha: &[f64]) -> Result<Self> {
        let copulas = alpha
            .iter()
            .map(|&a| if a == 0.0 { Ok(PairCopula::independence()) } else { PairCopula::gauss(a) })
            .collect::<Result<Vec<_>>>()?;
        Ok(CopulaSequence { copulas })
    }

    pub fn truncation_lag(&self) -> usize {
        self.copulas.len()
    }

    pub fn copulas(&self) -> &[PairCopula] {
        &self.copulas
    }

    /// The pair copula at lag `k >= 1`.
    pub fn lag(&self, k: usize) -> PairCopula {
        assert!(k >= 1, "lags start at 1");
        self.copulas.get(k - 1).copied().unwrap_or_else(PairCopula::independence)
    }

    /// The same process truncated (or padded with independence) at `p` lags.
    pub fn with_truncation(&self, p: usize) -> Self {
        let copulas = (1..=p).map(|k| self.lag(k)).collect();
        CopulaSequence { copulas }
    }

    pub fn is_exchangeable(&self) -> bool {
        self.copulas.iter().all(PairCopula::is_exchangeable)
    }

    /// Kendall's tau of each pair copula.
    pub fn kendall_taus(&self) -> Vec<f64> {
        self.copulas.iter().map(PairCopula::kendall_tau).collect()
    }

    /// Kendall's tau implied by Gaussian partial correlations, for checks.
    pub fn gaussian_kpacf(alpha: &[f64]) -> Vec<f64> {
        alpha.iter().map(|&a| tau_from_alpha(a)).collect()
    }
}

/// Streaming state of the interlacing recursion over a growing window.
///
/// After `t` values have been pushed, `prev_bwd[l] = bwd[t-1-l][t-1]` for
/// `l < min(t, p + 1)`. Pushing a value costs `O(p)` h-function calls.
#[derive(Clone, Debug)]
pub struct RosenblattWorkspace<'a> {
    seq: &'a CopulaSequence,
    prev_bwd: Vec<f64>,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
    len: usize,
}

impl<'a> RosenblattWorkspace<'a> {
    pub fn new(seq: &'a CopulaSequence) -> Self {
        let cap = seq.truncation_lag() + 1;
        RosenblattWorkspace { seq, prev_bwd: Vec::with_capacity(cap), fwd: vec![0.0; cap], bwd: vec![0.0; cap], len: 0 }
    }

    /// Number of conditioning values the next push will use.
    pub fn window(&self) -> usize {
        self.len.min(self.seq.truncation_lag())
    }

    pub fn reset(&mut self) {
        self.prev_bwd.clear();
        self.len = 0;
    }

    fn finish(&mut self, m: usize) {
        let keep = (m + 1).min(self.fwd.len());
        self.prev_bwd.clear();
        self.prev_bwd.extend_from_slice(&self.bwd[..keep]);
        self.len += 1;
    }

    /// Appends an observed value and returns its innovation
    /// `R_m(window, u)`. `visit(l, a, b)` sees every pair-copula argument.
    pub fn push_observed<F>(&mut self, u: f64, mut visit: F) -> f64
    where
        F: FnMut(usize, PairCopula, f64, f64),
    {
        let m = self.window();
        self.fwd[0] = u;
        self.bwd[0] = u;
        for l in 1..=m {
            let c = self.seq.lag(l);
            let (a, b) = (self.prev_bwd[l - 1], self.fwd[l - 1]);
            visit(l, c, a, b);
            self.fwd[l] = c.h1(a, b);
            self.bwd[l] = c.h2(a, b);
        }
        let z = self.fwd[m];
        self.finish(m);
        z
    }

    /// Appends the value whose innovation is `z`, i.e. `R_m^{-1}(window, z)`,
    /// inverting one h-function per layer.
    pub fn push_innovation(&mut self, z: f64) -> Result<f64> {
        let m = self.window();
        self.fwd[m] = z;
        for l in (1..=m).rev() {
            let c = self.seq.lag(l);
            self.fwd[l - 1] = c.h1_inverse(self.prev_bwd[l - 1], self.fwd[l])?;
        }
        let u = self.fwd[0];
        self.bwd[0] = u;
        for l in 1..=m {
            let c = self.seq.lag(l);
            self.bwd[l] = c.h2(self.prev_bwd[l - 1], self.fwd[l - 1]);
        }
        self.finish(m);
        Ok(u)
    }

    /// `bwd[t-1-l][t-1]` for the most recent push.
    pub fn backward_value(&self, l: usize) -> f64 {
        self.prev_bwd[l]
    }
}

fn tail(u: &[f64], p: usize) -> &[f64] {
    &u[u.len().saturating_sub(p)..]
}

/// Forward Rosenblatt function `R_k(u, x) = P(U_j <= x | previous k values = u)`.
pub fn forward(seq: &CopulaSequence, u: &[f64], x: f64) -> f64 {
    let mut ws = RosenblattWorkspace::new(seq);
    for &v in tail(u, seq.truncation_lag()) {
        ws.push_observed(v, |_, _, _, _| {});
    }
    ws.push_observed(x, |_, _, _, _| {})
}

/// Backward Rosenblatt function: the conditional distribution function of
/// the value immediately preceding the window `u` (chronological, `u[0]`
/// adjacent to the target).
pub fn backward(seq: &CopulaSequence, u: &[f64], x: f64) -> f64 {
    let m = u.len().min(seq.truncation_lag());
    let mut ws = RosenblattWorkspace::new(seq);
    ws.push_observed(x, |_, _, _, _| {});
    for &v in &u[..m] {
        ws.push_observed(v, |_, _, _, _| {});
    }
    ws.backward_value(m)
}

/// Solves `forward(seq, u, x) = z` for `x`.
pub fn forward_inverse(seq: &CopulaSequence, u: &[f64], z: f64) -> Result<f64> {
    let mut ws = RosenblattWorkspace::new(seq);
    for &v in tail(u, seq.truncation_lag()) {
        ws.push_observed(v, |_, _, _, _| {});
    }
    ws.push_innovation(z)
}

fn checked_sum(total: f64) -> Result<f64> {
    if total.is_nan() || total == f64::INFINITY {
        Err(Error::Numeric(format!("log density evaluated to {total}")))
    } else {
        Ok(total)
    }
}

/// Log of the joint copula density `c_(n)(u_1, ..., u_n)` in one `O(n p)`
/// pass.
pub fn log_joint_density(seq: &CopulaSequence, u: &[f64]) -> Result<f64> {
    let mut ws = RosenblattWorkspace::new(seq);
    let mut total = 0.0;
    for &v in u {
        ws.push_observed(v, |_, c, a, b| total += c.ln_density(a, b));
    }
    checked_sum(total)
}

/// Per-observation log density contributions `log f_{min(t-1,p)}`.
pub fn log_density_terms(seq: &CopulaSequence, u: &[f64]) -> Vec<f64> {
    let mut ws = RosenblattWorkspace::new(seq);
    u.iter()
        .map(|&v| {
            let mut term = 0.0;
            ws.push_observed(v, |_, c, a, b| term += c.ln_density(a, b));
            term
        })
        .collect()
}

/// Log of the conditional density `f_k(u, x)` of the next value given the
/// window `u`, as a product over lags.
pub fn log_conditional_density(seq: &CopulaSequence, u: &[f64], x: f64) -> Result<f64> {
    let mut ws = RosenblattWorkspace::new(seq);
    for &v in tail(u, seq.truncation_lag()) {
        ws.push_observed(v, |_, _, _, _| {});
    }
    let mut total = 0.0;
    ws.push_observed(x, |_, c, a, b| total += c.ln_density(a, b));
    checked_sum(total)
}

/// The innovations `z_t = R_{min(t-1,p)}(u_{t-p..t-1}, u_t)`.
pub fn innovations(seq: &CopulaSequence, u: &[f64]) -> Vec<f64> {
    let mut ws = RosenblattWorkspace::new(seq);
    u.iter().map(|&v| ws.push_observed(v, |_, _, _, _| {})).collect()
}

/// For each lag `l = 1..=max_lag`, the pairs
/// `(R^(2)_{l-1}(u_{j-l+1..j-1}, u_{j-l}), R_{l-1}(u_{j-l+1..j-1}, u_j))`
/// over `j`. Lags up to the sequence's truncation use its copulas for the
/// conditioning; beyond it the conditioning is independent.
pub fn lag_pairs(seq: &CopulaSequence, u: &[f64], max_lag: usize) -> Vec<Vec<(f64, f64)>> {
    let extended = seq.with_truncation(max_lag.max(seq.truncation_lag()));
    let mut out = vec![Vec::with_capacity(u.len()); max_lag];
    let mut ws = RosenblattWorkspace::new(&extended);
    for &v in u {
        ws.push_observed(v, |l, _, a, b| {
            if l <= max_lag {
                out[l - 1].push((a, b));
            }
        });
    }
    out
}

/// Monte Carlo estimate of the marginal copula `C^(k)(v1, v2)` of two values
/// `k` steps apart: the average of `C_k(R^(2)_{k-1}(w, v1), R_{k-1}(w, v2))`
/// over exact draws `w` of the `k - 1` intermediate values.
pub fn marginal_copula_estimate(
    seq: &CopulaSequence,
    k: usize,
    v1: f64,
    v2: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if k == 0 || n_samples == 0 {
        return Err(Error::InvalidInput("lag and sample count must be positive".into()));
    }
    let ck = seq.lag(k);
    if k == 1 {
        return Ok(ck.cdf(v1, v2));
    }
    let mut acc = 0.0;
    for s in 0..n_samples {
        let z: Vec<f64> = uniform_stream(seed, s as u64).take(k - 1).collect();
        let w = simulate_sequence(seq, &z)?;
        acc += ck.cdf(backward(seq, &w, v1), forward(seq, &w, v2));
    }
    Ok(acc / n_samples as f64)
}
