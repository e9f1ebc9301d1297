//! Kendall's tau of the base families and its inversion.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use crate::error::{Error, Result};
use crate::special::{integrate, solve_increasing_bracketed};

use super::families::Base;
use super::Family;

pub(crate) const FRANK_THETA_MAX: f64 = 50.0;
pub(crate) const JOE_THETA_MAX: f64 = 200.0;

pub(crate) fn base_tau(base: &Base) -> f64 {
    match *base {
        Base::Independence => 0.0,
        Base::Gauss { rho } | Base::StudentT { rho, .. } => FRAC_2_PI * rho.asin(),
        Base::Clayton { theta } => theta / (theta + 2.0),
        Base::Gumbel { theta } => 1.0 - 1.0 / theta,
        Base::Frank { theta } => frank_tau(theta),
        Base::Joe { theta } => joe_tau(theta),
    }
}

/// `1 - 4/theta (1 - D1(theta))` with the first Debye function `D1`.
pub(crate) fn frank_tau(theta: f64) -> f64 {
    if theta < 0.0 {
        return -frank_tau(-theta);
    }
    if theta < 1e-2 {
        let t2 = theta * theta;
        return theta * (1.0 / 9.0 - t2 / 900.0 + t2 * t2 / 52_920.0);
    }
    let debye_integral = integrate(|t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() }, 0.0, theta, 1e-15);
    1.0 - 4.0 / theta * (1.0 - debye_integral / theta)
}

/// Archimedean identity `tau = 1 + 4 int phi/phi'`, with the substitution
/// `s = 1 - t` and `w = s^theta`.
pub(crate) fn joe_tau(theta: f64) -> f64 {
    let integrand = |s: f64| {
        let w = s.powf(theta);
        let log_ratio = if w < 1e-8 { -1.0 - 0.5 * w } else { (-w).ln_1p() / w };
        s * (1.0 - w) * log_ratio
    };
    1.0 + 4.0 / theta * integrate(integrand, 0.0, 1.0, 1e-15)
}

/// Base-family parameter with Kendall's tau equal to `tau`. `tau` must be
/// reachable by the family without rotation.
pub(crate) fn base_from_tau(family: Family, tau: f64) -> Result<Base> {
    if tau == 0.0 {
        return Ok(Base::Independence);
    }
    let positive_only = |name: &str| {
        if tau < 0.0 {
            Err(Error::domain(format!("{name} cannot reach tau = {tau} without rotation")))
        } else {
            Ok(())
        }
    };
    let base = match family {
        Family::Independence => return Err(Error::domain(format!("independence copula cannot reach tau = {tau}"))),
        Family::StudentT => return Err(Error::domain("Student t copula has two parameters and is not tau-invertible")),
        Family::Gauss => Base::Gauss { rho: (FRAC_PI_2 * tau).sin() },
        Family::Clayton => {
            positive_only("Clayton")?;
            Base::Clayton { theta: 2.0 * tau / (1.0 - tau) }
        }
        Family::Gumbel => {
            positive_only("Gumbel")?;
            Base::Gumbel { theta: 1.0 / (1.0 - tau) }
        }
        Family::Frank => {
            let lim = frank_tau(FRANK_THETA_MAX);
            if tau.abs() > lim {
                return Err(Error::domain(format!(
                    "Frank tau {tau} beyond reachable range +/-{lim:.6} (|theta| <= {FRANK_THETA_MAX})"
                )));
            }
            let theta = solve_increasing_bracketed(frank_tau, tau, -FRANK_THETA_MAX, FRANK_THETA_MAX, 1e-13)?;
            if theta == 0.0 {
                Base::Independence
            } else {
                Base::Frank { theta }
            }
        }
        Family::Joe => {
            positive_only("Joe")?;
            let lim = joe_tau(JOE_THETA_MAX);
            if tau > lim {
                return Err(Error::domain(format!(
                    "Joe tau {tau} beyond reachable range {lim:.6} (theta <= {JOE_THETA_MAX})"
                )));
            }
            let theta = solve_increasing_bracketed(joe_tau, tau, 1.0, JOE_THETA_MAX, 1e-13)?;
            Base::Joe { theta }
        }
    };
    Ok(base)
}
