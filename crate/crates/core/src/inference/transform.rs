//! Maps between kpacf parameters and an unconstrained search space.
//!
//! AR and MA polynomials go through their partial autocorrelations
//! (`tanh` of the free coordinates), so every point is causal and
//! invertible. `d = tanh(e) / 2`, `H = logistic(e)`, explicit `tau = tanh(e)`.

use crate::error::{Error, Result};
use crate::linear_oracle::{ar_from_reflection, ar_reflection, KpacfKind, KpacfSpec};

fn atanh_checked(r: f64, what: &str) -> Result<f64> {
    if r.abs() < 1.0 {
        Ok(r.atanh())
    } else {
        Err(Error::domain(format!("{what} lies on or outside the admissible boundary")))
    }
}

fn poly_from(e: &[f64]) -> Vec<f64> {
    ar_from_reflection(&e.iter().map(|v| v.tanh()).collect::<Vec<_>>())
}

fn poly_to(coef: &[f64], what: &str) -> Result<Vec<f64>> {
    ar_reflection(coef).into_iter().map(|r| atanh_checked(r, what)).collect()
}

/// Parameter vector of `kind` at unconstrained coordinates `eta`.
pub fn to_theta(kind: KpacfKind, eta: &[f64]) -> Vec<f64> {
    match kind {
        KpacfKind::Arma { p, .. } => {
            let mut t = poly_from(&eta[..p]);
            t.extend(poly_from(&eta[p..]).into_iter().map(|v| -v));
            t
        }
        KpacfKind::Arfima { p, .. } => {
            let mut t = poly_from(&eta[..p]);
            t.push(0.5 * eta[p].tanh());
            t.extend(poly_from(&eta[p + 1..]).into_iter().map(|v| -v));
            t
        }
        KpacfKind::Fgn => vec![1.0 / (1.0 + (-eta[0]).exp())],
        KpacfKind::Explicit => eta.iter().map(|v| v.tanh()).collect(),
    }
}

/// Inverse of [`to_theta`]. Fails for non-causal AR or non-invertible MA
/// parts and for parameters on their boundary.
pub fn to_unconstrained(spec: &KpacfSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    match spec.kind {
        KpacfKind::Arma { .. } | KpacfKind::Arfima { .. } => {
            let (phi, d, psi) = spec.split();
            let mut e = poly_to(phi, "AR polynomial")?;
            if let Some(d) = d {
                e.push(atanh_checked(2.0 * d, "d")?);
            }
            let neg: Vec<f64> = psi.iter().map(|v| -v).collect();
            e.extend(poly_to(&neg, "MA polynomial (not invertible)")?);
            Ok(e)
        }
        KpacfKind::Fgn => {
            let h = spec.theta[0];
            Ok(vec![(h / (1.0 - h)).ln()])
        }
        KpacfKind::Explicit => spec.theta.iter().map(|&t| atanh_checked(t, "Kendall tau")).collect(),
    }
}

/// Starting parameters used when a fit template carries none.
pub fn default_start(kind: KpacfKind, horizon: usize) -> Vec<f64> {
    match kind {
        KpacfKind::Arma { p, q } => {
            let mut t = vec![0.0; p + q];
            if p > 0 {
                t[0] = 0.5;
            }
            t
        }
        KpacfKind::Arfima { p, q } => {
            let mut t = vec![0.0; p + q + 1];
            t[p] = 0.2;
            t
        }
        KpacfKind::Fgn => vec![0.7],
        KpacfKind::Explicit => {
            let mut t = vec![0.0; horizon];
            if let Some(first) = t.first_mut() {
                *first = 0.2;
            }
            t
        }
    }
}
