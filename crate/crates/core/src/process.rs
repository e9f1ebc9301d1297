//! S-vine processes: model specification, exact and Markov-truncated
//! simulation, the causal filter and the filter-convergence experiment.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::MarginalModel;
use crate::linear_oracle::KpacfSpec;
use crate::paircopula::{Family, NegativeRule, PairCopula, Rotation};
use crate::rosenblatt::{innovations, CopulaSequence, RosenblattWorkspace};

/// Uniform draws in the open unit interval for `(seed, stream)`.
///
/// The generator is ChaCha20 keyed by `seed` with `stream` selecting an
/// independent keystream, so draw `i` of a stream is a pure function of
/// `(seed, stream, i)`.
pub fn uniform_stream(seed: u64, stream: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    std::iter::repeat_with(move || to_open_unit(rng.next_u64()))
}

/// Draw `index` of [`uniform_stream`] without generating the earlier ones.
pub fn uniform_at(seed: u64, stream: u64, index: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    to_open_unit(rng.next_u64())
}

#[inline]
fn to_open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Maps innovations to the process: `u_1 = z_1` and
/// `u_t = R^{-1}_{min(t-1,p)}(u_{t-p..t-1}, z_t)`.
pub fn simulate_sequence(seq: &CopulaSequence, z: &[f64]) -> Result<Vec<f64>> {
    let mut ws = RosenblattWorkspace::new(seq);
    z.iter().map(|&zt| ws.push_innovation(zt)).collect()
}

/// Kpacf parameterization attached to a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpacfModel {
    pub spec: KpacfSpec,
    pub family: Family,
    pub negative_rule: NegativeRule,
}

/// A complete s-vine process: copula sequence plus an optional margin.
#[derive(Clone, Debug, PartialEq)]
pub struct SVineModel {
    pub seq: CopulaSequence,
    pub margin: Option<MarginalModel>,
    pub kpacf: Option<KpacfModel>,
}

impl SVineModel {
    pub fn new(seq: CopulaSequence) -> Self {
        SVineModel { seq, margin: None, kpacf: None }
    }

    /// The process whose pair copulas of `family` share the kpacf of `spec`,
    /// truncated at `truncation` lags.
    pub fn from_kpacf(spec: KpacfSpec, family: Family, negative_rule: NegativeRule, truncation: usize) -> Result<Self> {
        let seq = CopulaSequence::from_spec(&spec, family, negative_rule, truncation)?;
        Ok(SVineModel { seq, margin: None, kpacf: Some(KpacfModel { spec, family, negative_rule }) })
    }

    pub fn with_margin(mut self, margin: MarginalModel) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn truncation_lag(&self) -> usize {
        self.seq.truncation_lag()
    }

    /// The same model with its sequence truncated (or extended) at `p` lags.
    /// A kpacf-generated sequence is regenerated so extra lags carry the
    /// kpacf rather than independence.
    pub fn with_truncation(&self, p: usize) -> Result<Self> {
        let seq = match &self.kpacf {
            Some(k) => CopulaSequence::from_spec(&k.spec, k.family, k.negative_rule, p)?,
            None => self.seq.with_truncation(p),
        };
        Ok(SVineModel { seq, ..self.clone() })
    }
}

/// One simulated path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationPath {
    /// Copula-scale values.
    pub u: Vec<f64>,
    /// Innovations that generated `u`.
    pub z: Vec<f64>,
    /// Values on the margin scale when the model has a margin.
    pub x: Option<Vec<f64>>,
    pub seed: u64,
    pub truncation_lag: usize,
}

/// Simulates `n` values. The first `p + 1` values are an exact draw from the
/// joint copula density; later values follow the order-`p` Markov recursion.
pub fn simulate(model: &SVineModel, n: usize, seed: u64) -> Result<SimulationPath> {
    simulate_stream(model, n, seed, 0)
}

/// As [`simulate`] using innovation stream `stream`, for independent
/// replications under one seed.
pub fn simulate_stream(model: &SVineModel, n: usize, seed: u64, stream: u64) -> Result<SimulationPath> {
    if n == 0 {
        return Err(Error::InvalidInput("path length must be positive".into()));
    }
    let z: Vec<f64> = uniform_stream(seed, stream).take(n).collect();
    let u = simulate_sequence(&model.seq, &z)?;
    let x = model.margin.as_ref().map(|m| u.iter().map(|&v| m.quantile(v)).collect());
    Ok(SimulationPath { u, z, x, seed, truncation_lag: model.truncation_lag() })
}

/// The causal filter `S_k(z_1..z_k, z_{k+1})`: the value produced by feeding
/// the innovations through the process from its start.
pub fn causal_filter(seq: &CopulaSequence, z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::InvalidInput("causal filter needs at least one innovation".into()));
    }
    let mut ws = RosenblattWorkspace::new(seq);
    let mut last = 0.0;
    for &zt in z {
        last = ws.push_innovation(zt)?;
    }
    Ok(last)
}

/// Recovers the innovations of a path: `z_1 = u_1`, `z_t = R(window, u_t)`.
pub fn invert_to_innovations(seq: &CopulaSequence, u: &[f64]) -> Vec<f64> {
    innovations(seq, u)
}

/// One row of the filter-convergence experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub k: usize,
    pub value: f64,
    pub ultimate: f64,
}

/// For one draw of innovations `z_1..z_n`, evaluates
/// `S_k(z_{n-k..n-1}, z_n)` for `k = 1..n-1`, reporting each beside the
/// ultimate value `S_{n-1}`.
pub fn convergence_experiment(seq: &CopulaSequence, n: usize, seed: u64) -> Result<Vec<ExperimentRow>> {
    if n < 2 {
        return Err(Error::InvalidInput("experiment needs n >= 2".into()));
    }
    let z: Vec<f64> = uniform_stream(seed, 0).take(n).collect();
    convergence_experiment_from(seq, &z)
}

/// [`convergence_experiment`] on given innovations.
pub fn convergence_experiment_from(seq: &CopulaSequence, z: &[f64]) -> Result<Vec<ExperimentRow>> {
    let n = z.len();
    let values = (1..n).into_par_iter().map(|k| causal_filter(seq, &z[n - 1 - k..])).collect::<Result<Vec<f64>>>()?;
    let ultimate = values[n - 2];
    Ok(values.into_iter().enumerate().map(|(i, value)| ExperimentRow { k: i + 1, value, ultimate }).collect())
}

/// The three-lag Clayton sequence exhibiting long excursions: lag 1 the
/// 180-degree rotated Clayton with theta 2, lag 2 Clayton with theta 2,
/// lag 3 the 180-degree rotated Clayton with theta 4.
pub fn excursion_sequence() -> CopulaSequence {
    let c = |theta: f64| PairCopula::clayton(theta).expect("valid Clayton parameter");
    CopulaSequence::new(vec![c(2.0).rotated(Rotation::R180), c(2.0), c(4.0).rotated(Rotation::R180)])
}

/// Longest run of consecutive values strictly above `level`.
pub fn longest_run_above(u: &[f64], level: f64) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &v in u {
        cur = if v > level { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::ks_statistic_uniform;
    use crate::linear_oracle::{dl_coefficients, gaussian_inverse};
    use crate::special::norm_quantile;

    #[test]
    fn stream_is_reproducible_and_addressable() {
        let a: Vec<f64> = uniform_stream(42, 3).take(100).collect();
        let b: Vec<f64> = uniform_stream(42, 3).take(100).collect();
        assert_eq!(a, b);
        assert_eq!(uniform_at(42, 3, 57), a[57]);
        let c: Vec<f64> = uniform_stream(42, 4).take(100).collect();
        assert_ne!(a, c);
        assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn independence_path_is_innovations() {
        let m = SVineModel::new(CopulaSequence::independence().with_truncation(5));
        let p = simulate(&m, 50, 9).unwrap();
        assert_eq!(p.u, p.z);
        assert_eq!(p.truncation_lag, 5);
    }

    #[test]
    fn same_seed_same_path() {
        let m = SVineModel::new(excursion_sequence());
        assert_eq!(simulate(&m, 300, 1).unwrap(), simulate(&m, 300, 1).unwrap());
        assert_ne!(simulate(&m, 300, 1).unwrap().u, simulate(&m, 300, 2).unwrap().u);
    }

    #[test]
    fn gaussian_ar1_recursion() {
        let phi: f64 = 0.7;
        let m = SVineModel::new(CopulaSequence::gaussian(&[phi]).unwrap());
        let p = simulate(&m, 200, 3).unwrap();
        let s = (1.0 - phi * phi).sqrt();
        for t in 1..200 {
            let x = norm_quantile(p.u[t]);
            let want = phi * norm_quantile(p.u[t - 1]) + s * norm_quantile(p.z[t]);
            assert!((x - want).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn simulate_invert_duality() {
        for fam in Family::ALL_ONE_PARAMETER {
            let spec = KpacfSpec::arma(&[0.8], &[-0.3], 30).unwrap();
            let m = SVineModel::from_kpacf(spec, fam, NegativeRule::Rotate90, 5).unwrap();
            let p = simulate(&m, 300, 5).unwrap();
            let z = invert_to_innovations(&m.seq, &p.u);
            for (a, b) in z.iter().zip(&p.z) {
                assert!((a - b).abs() < 1e-9, "{fam}");
            }
        }
    }

    #[test]
    fn causal_filter_examples() {
        let s = excursion_sequence();
        let want = s.lag(1).h1_inverse(0.3, 0.8).unwrap();
        assert_eq!(causal_filter(&s, &[0.3, 0.8]).unwrap(), want);
        let ind = CopulaSequence::independence();
        assert_eq!(causal_filter(&ind, &[0.3, 0.8, 0.1]).unwrap(), 0.1);
        let alpha = [0.5, 0.2, -0.1, 0.3];
        let g = CopulaSequence::gaussian(&alpha).unwrap();
        let coef = dl_coefficients(&alpha).unwrap();
        let z = [0.2, 0.9, 0.45, 0.6, 0.33];
        for k in 0..z.len() {
            let got = causal_filter(&g, &z[..=k]).unwrap();
            assert!((got - gaussian_inverse(&coef, &z[..k], z[k])).abs() < 1e-8);
        }
    }

    #[test]
    fn experiment_shape() {
        let s = CopulaSequence::independence().with_truncation(10);
        let rows = convergence_experiment(&s, 30, 2).unwrap();
        assert_eq!(rows.len(), 29);
        let zn = uniform_at(2, 0, 29);
        assert!(rows.iter().all(|r| r.value == zn && r.ultimate == zn));
        assert!(rows.windows(2).all(|w| w[1].k == w[0].k + 1));
        assert!(convergence_experiment(&s, 1, 2).is_err());
    }

    #[test]
    fn gauss_arma_filter_converges() {
        let spec = KpacfSpec::arma(&[0.95], &[-0.85], 30).unwrap();
        let seq = CopulaSequence::from_spec(&spec, Family::Gauss, NegativeRule::Rotate90, 200).unwrap();
        let rows = convergence_experiment(&seq, 201, 1).unwrap();
        assert_eq!(rows.len(), 200);
        for r in rows.iter().filter(|r| r.k >= 150) {
            assert!((r.value - r.ultimate).abs() < 0.01, "k={}", r.k);
        }
    }

    #[test]
    fn truncation_consistency_of_paths() {
        let m = SVineModel::new(excursion_sequence());
        let wider = SVineModel::new(m.seq.with_truncation(8));
        assert_eq!(simulate(&m, 400, 11).unwrap().u, simulate(&wider, 400, 11).unwrap().u);
    }

    #[test]
    fn excursion_marginal_is_uniform() {
        // Values within one path are strongly dependent, so the KS critical
        // value applies to cross-sections of independent paths.
        let m = SVineModel::new(excursion_sequence());
        let paths: Vec<Vec<f64>> = (0..200).map(|s| simulate_stream(&m, 200, 2024, s).unwrap().u).collect();
        let crit = 1.628 / (paths.len() as f64).sqrt();
        for t in [0, 3, 50, 199] {
            let section: Vec<f64> = paths.iter().map(|p| p[t]).collect();
            let d = ks_statistic_uniform(&section);
            assert!(d < crit, "t={t} D={d}");
        }
    }

    #[test]
    fn exchangeable_model_is_reversible() {
        // P(U_t <= a, U_t+1 <= b, U_t+2 <= c) against the reversed path
        let spec = KpacfSpec::arma(&[0.6], &[], 30).unwrap();
        let m = SVineModel::from_kpacf(spec, Family::Gumbel, NegativeRule::Rotate90, 3).unwrap();
        let n = 40_000;
        let u = simulate(&m, n, 8).unwrap().u;
        let (a, b, c) = (0.3, 0.5, 0.8);
        let freq = |v: &[f64]| -> f64 {
            let hits = v.windows(3).filter(|w| w[0] <= a && w[1] <= b && w[2] <= c).count();
            hits as f64 / (v.len() - 2) as f64
        };
        let rev: Vec<f64> = u.iter().rev().copied().collect();
        let (f, r) = (freq(&u), freq(&rev));
        let se = (f * (1.0 - f) / n as f64).sqrt();
        assert!((f - r).abs() < 5.0 * se, "{f} {r}");
    }
}
