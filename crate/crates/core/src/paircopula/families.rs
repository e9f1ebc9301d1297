//! Unrotated family formulas. Arguments are already clamped into the open
//! unit square. Every family here is exchangeable, so the second h-function
//! and its inverse are obtained by swapping arguments.

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::special::{
    integrate, log_add_exp, norm_cdf, norm_quantile, softplus, solve_increasing, t_cdf, t_quantile, UNIT_EPS,
};

/// A copula family together with its parameter(s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Base {
    Independence,
    Gauss { rho: f64 },
    Clayton { theta: f64 },
    Gumbel { theta: f64 },
    Frank { theta: f64 },
    Joe { theta: f64 },
    StudentT { rho: f64, nu: f64 },
}

/// Residual tolerance for numerically inverted h-functions.
const H_INV_TOL: f64 = 1e-13;

impl Base {
    pub(crate) fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.min(v), u.max(v));
        match *self {
            Base::Independence => u * v,
            Base::Gauss { rho } => gauss_cdf(u, v, rho),
            Base::Clayton { theta } => (-clayton_ln_a(u, v, theta) / theta).exp(),
            Base::Gumbel { theta } => {
                let (x, y) = (-u.ln(), -v.ln());
                (-gumbel_a(x, y, theta)).exp()
            }
            Base::Frank { theta } => {
                if theta < 0.0 {
                    u - frank_cdf(u, 1.0 - v, -theta)
                } else {
                    frank_cdf(u, v, theta)
                }
            }
            Base::Joe { theta } => {
                let (a, b) = ((1.0 - u).powf(theta), (1.0 - v).powf(theta));
                1.0 - (a + b - a * b).powf(1.0 / theta)
            }
            Base::StudentT { .. } => {
                // C(u, v) = int_0^u h1(s, v) ds
                let val = integrate(|s| self.h1(s.max(UNIT_EPS), v), 0.0, u, 1e-13);
                val.clamp(0.0, u.min(v))
            }
        }
    }

    pub(crate) fn ln_density(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.min(v), u.max(v));
        match *self {
            Base::Independence => 0.0,
            Base::Gauss { rho } => {
                let (x, y) = (norm_quantile(u), norm_quantile(v));
                let s = 1.0 - rho * rho;
                -0.5 * s.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s)
            }
            Base::Clayton { theta } => {
                (1.0 + theta).ln() - (theta + 1.0) * (u.ln() + v.ln()) - (1.0 / theta + 2.0) * clayton_ln_a(u, v, theta)
            }
            Base::Gumbel { theta } => {
                let (x, y) = (-u.ln(), -v.ln());
                let a = gumbel_a(x, y, theta);
                -a + x + y + (theta - 1.0) * (x.ln() + y.ln()) + (1.0 - 2.0 * theta) * a.ln() + (a + theta - 1.0).ln()
            }
            Base::Frank { theta } => {
                if theta < 0.0 {
                    frank_ln_density(u, 1.0 - v, -theta)
                } else {
                    frank_ln_density(u, v, theta)
                }
            }
            Base::Joe { theta } => {
                let (lu, lv) = ((-u).ln_1p(), (-v).ln_1p());
                let (a, b) = ((theta * lu).exp(), (theta * lv).exp());
                let s = a + b - a * b;
                (1.0 / theta - 2.0) * s.ln() + (theta - 1.0) * (lu + lv) + (theta - 1.0 + s).ln()
            }
            Base::StudentT { rho, nu } => {
                let (x, y) = (t_quantile(u, nu), t_quantile(v, nu));
                let s = 1.0 - rho * rho;
                let q = (x * x + y * y - 2.0 * rho * x * y) / (nu * s);
                ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu)
                    - 2.0 * ln_gamma(0.5 * (nu + 1.0))
                    - 0.5 * s.ln()
                    - 0.5 * (nu + 2.0) * q.ln_1p()
                    + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
            }
        }
    }

    /// `dC/du` at `(u, v)`: the distribution function of the second
    /// argument given the first.
    pub(crate) fn h1(&self, u: f64, v: f64) -> f64 {
        let h = match *self {
            Base::Independence => v,
            Base::Gauss { rho } => norm_cdf((norm_quantile(v) - rho * norm_quantile(u)) / (1.0 - rho * rho).sqrt()),
            Base::Clayton { theta } => {
                (-(theta + 1.0) * u.ln() - (1.0 / theta + 1.0) * clayton_ln_a(u, v, theta)).exp()
            }
            Base::Gumbel { theta } => {
                let (x, y) = (-u.ln(), -v.ln());
                let a = gumbel_a(x, y, theta);
                (-a + x + (theta - 1.0) * (x.ln() - a.ln())).exp()
            }
            Base::Frank { theta } => {
                if theta < 0.0 {
                    1.0 - frank_h1(u, 1.0 - v, -theta)
                } else {
                    frank_h1(u, v, theta)
                }
            }
            Base::Joe { theta } => {
                let (lu, lv) = ((-u).ln_1p(), (-v).ln_1p());
                let (a, b) = ((theta * lu).exp(), (theta * lv).exp());
                let s = a + b - a * b;
                ((1.0 / theta - 1.0) * s.ln() + (theta - 1.0) * lu).exp() * (1.0 - b)
            }
            Base::StudentT { rho, nu } => {
                let (x, y) = (t_quantile(u, nu), t_quantile(v, nu));
                let scale = ((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
                t_cdf((y - rho * x) / scale, nu + 1.0)
            }
        };
        h.clamp(0.0, 1.0)
    }

    /// Solves `h1(u, x) = z` for `x`.
    pub(crate) fn h1_inverse(&self, u: f64, z: f64) -> Result<f64> {
        let x = match *self {
            Base::Independence => z,
            Base::Gauss { rho } => norm_cdf((1.0 - rho * rho).sqrt() * norm_quantile(z) + rho * norm_quantile(u)),
            Base::Clayton { theta } => {
                let c = -theta / (1.0 + theta) * z.ln();
                let t = -theta * u.ln() + c.exp_m1().ln();
                (-softplus(t) / theta).exp()
            }
            Base::Gumbel { theta } => gumbel_h1_inverse(u, z, theta)?,
            Base::Frank { theta } => {
                if theta < 0.0 {
                    1.0 - frank_h1_inverse(u, 1.0 - z, -theta)
                } else {
                    frank_h1_inverse(u, z, theta)
                }
            }
            Base::Joe { .. } => solve_increasing(
                |x| (self.h1(u, x), self.ln_density(u, x).exp()),
                z,
                UNIT_EPS,
                1.0 - UNIT_EPS,
                H_INV_TOL,
            )?,
            Base::StudentT { rho, nu } => {
                let x = t_quantile(u, nu);
                let scale = ((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
                t_cdf(t_quantile(z, nu + 1.0) * scale + rho * x, nu)
            }
        };
        Ok(x.clamp(0.0, 1.0))
    }
}

fn gauss_cdf(u: f64, v: f64, rho: f64) -> f64 {
    let (x, y) = (norm_quantile(u), norm_quantile(v));
    // Plackett's identity: d/dr Phi2(x, y; r) = phi2(x, y; r).
    let dens = |r: f64| {
        let s = 1.0 - r * r;
        (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s)).exp() / s.sqrt()
    };
    let extra = integrate(dens, 0.0, rho, 1e-15) / (2.0 * std::f64::consts::PI);
    (u * v + extra).clamp(0.0, u.min(v))
}

/// `ln(u^-theta + v^-theta - 1)` for the Clayton copula.
fn clayton_ln_a(u: f64, v: f64, theta: f64) -> f64 {
    let (a, b) = (-theta * u.ln(), -theta * v.ln());
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ((-hi).exp() * lo.exp_m1()).ln_1p()
}

/// `(x^theta + y^theta)^(1/theta)` for the Gumbel copula.
fn gumbel_a(x: f64, y: f64, theta: f64) -> f64 {
    (log_add_exp(theta * x.ln(), theta * y.ln()) / theta).exp()
}

fn gumbel_h1_inverse(u: f64, z: f64, theta: f64) -> Result<f64> {
    let x = -u.ln();
    // ln h1 = -A + x + (theta - 1)(ln x - ln A) is decreasing in A >= x.
    let rhs = x + (theta - 1.0) * x.ln() - z.ln();
    let a = if theta == 1.0 {
        x - z.ln()
    } else {
        let tol = 1e-15 * rhs.abs().max(1.0);
        solve_increasing(|a| (a + (theta - 1.0) * a.ln(), 1.0 + (theta - 1.0) / a), rhs, x, x - z.ln(), tol)?
    };
    // y = (A^theta - x^theta)^(1/theta)
    let ratio = theta * (x / a).ln();
    let y = a * ((-ratio.exp_m1()).ln() / theta).exp();
    Ok((-y).exp())
}

// Frank formulas below assume theta > 0; negative parameters are handled by
// the reflection C_{-theta}(u, v) = u - C_theta(u, 1 - v).

/// `e^-theta - e^-theta u - e^-theta v + e^-theta (u+v)`, which is negative.
fn frank_den(u: f64, v: f64, theta: f64) -> f64 {
    if theta <= 1.0 {
        (-theta).exp_m1() + (-theta * u).exp_m1() * (-theta * v).exp_m1()
    } else {
        (-theta).exp() - (-theta * u).exp() - (-theta * v).exp() + (-theta * (u + v)).exp()
    }
}

fn frank_cdf(u: f64, v: f64, theta: f64) -> f64 {
    let d = (-theta).exp_m1();
    if theta <= 1.0 {
        let ab = (-theta * u).exp_m1() * (-theta * v).exp_m1();
        -(ab / d).ln_1p() / theta
    } else {
        -((frank_den(u, v, theta) / d).ln()) / theta
    }
}

fn frank_ln_density(u: f64, v: f64, theta: f64) -> f64 {
    let d = (-theta).exp_m1();
    (-theta * d).ln() - theta * (u + v) - 2.0 * (-frank_den(u, v, theta)).ln()
}

fn frank_h1(u: f64, v: f64, theta: f64) -> f64 {
    (-theta * u).exp() * (-theta * v).exp_m1() / frank_den(u, v, theta)
}

fn frank_h1_inverse(u: f64, z: f64, theta: f64) -> f64 {
    if theta <= 1.0 {
        let a = (-theta * u).exp_m1();
        let d = (-theta).exp_m1();
        let b = z * d / (1.0 + a * (1.0 - z));
        -b.ln_1p() / theta
    } else {
        let (lz, l1z) = (z.ln(), (-z).ln_1p());
        let num = log_add_exp(lz - theta, l1z - theta * u);
        let den = log_add_exp(lz, l1z - theta * u);
        -(num - den) / theta
    }
}
