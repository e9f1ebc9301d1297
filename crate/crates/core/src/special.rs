//! Numerical primitives shared by the copula and process code: the standard
//! normal distribution, Student t helpers, a safeguarded monotone root finder
//! and an adaptive quadrature wrapper.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Lower clamp applied to every unit-interval argument.
pub const UNIT_EPS: f64 = 1e-12;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Clamps `u` into `[UNIT_EPS, 1 - UNIT_EPS]`.
#[inline]
pub fn clamp_unit(u: f64) -> f64 {
    u.clamp(UNIT_EPS, 1.0 - UNIT_EPS)
}

/// Standard normal distribution function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Log density of the standard normal.
#[inline]
pub fn norm_ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal quantile (Wichura, AS241 `PPND16`), relative accuracy
/// about 1e-16 over the whole open unit interval.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r + 3.930_789_580_009_271e4) * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let r0 = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r0.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den =
            ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r + 1.519_866_656_361_645_7e-2) * r
                + 1.481_039_764_274_800_7e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0;
        num / den
    } else {
        let r = r - 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den =
            ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r + 1.846_318_317_510_054_8e-5) * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Student t with `nu` degrees of freedom (unit scale).
pub(crate) fn student(nu: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, nu).expect("degrees of freedom validated by caller")
}

/// Log density of the standard Student t.
pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

pub fn t_cdf(x: f64, nu: f64) -> f64 {
    student(nu).cdf(x)
}

pub fn t_quantile(p: f64, nu: f64) -> f64 {
    student(nu).inverse_cdf(p)
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + exp(t))`.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 35.0 {
        t + (-t).exp()
    } else {
        t.exp().ln_1p()
    }
}

/// Iteration cap for [`solve_increasing`].
pub const ROOT_MAX_ITER: usize = 200;

/// Solves `f(x) = target` for a function increasing on `[lo, hi]`.
///
/// `f` returns the value and its derivative. Newton steps are taken when
/// they stay inside the current bracket and otherwise the bracket is
/// bisected. Iteration stops once `|f(x) - target| <= f_tol` or the bracket
/// cannot be split further in floating point. If the target lies outside
/// `[f(lo), f(hi)]` the nearer endpoint is returned.
pub fn solve_increasing<F>(mut f: F, target: f64, lo: f64, hi: f64, f_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let (f_lo, _) = f(lo);
    if f_lo >= target {
        return Ok(lo);
    }
    let (f_hi, _) = f(hi);
    if f_hi <= target {
        return Ok(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..ROOT_MAX_ITER {
        let (fx, dfx) = f(x);
        let resid = fx - target;
        if resid.abs() <= f_tol {
            return Ok(x);
        }
        if resid < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(x);
        }
        let newton = x - resid / dfx;
        x = if dfx > 0.0 && dfx.is_finite() && newton > lo && newton < hi { newton } else { mid };
    }
    Err(Error::NoConvergence { what: "monotone root", lo, hi })
}

/// Derivative-free variant of [`solve_increasing`]: Illinois regula falsi
/// with a bisection fallback.
pub fn solve_increasing_bracketed<F>(mut f: F, target: f64, lo: f64, hi: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a) - target;
    let mut fb = f(b) - target;
    if fa >= 0.0 {
        return Ok(a);
    }
    if fb <= 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..ROOT_MAX_ITER {
        if (b - a).abs() <= x_tol {
            return Ok(0.5 * (a + b));
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c) - target;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence { what: "bracketed root", lo: a, hi: b })
}

/// Adaptive (tanh-sinh) quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, abs_tol).integral
}
