//! Bivariate pair copulas: distribution functions, densities, h-functions and
//! their inverses, rotations, and the Kendall's tau to parameter maps.
//!
//! Conventions: `h1(u, v) = dC/du (u, v)` is the conditional distribution
//! function of the second argument given the first, `h2(u, v) = dC/dv (u, v)`
//! the conditional distribution function of the first argument given the
//! second. Every unit-interval argument is clamped into
//! `[1e-12, 1 - 1e-12]` before evaluation.

mod families;
mod tau;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::clamp_unit;

use families::Base;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Independence,
    Gauss,
    Clayton,
    Gumbel,
    Frank,
    Joe,
    StudentT,
}

impl Family {
    /// Families whose Kendall's tau covers the whole of (-1, 1).
    pub fn is_comprehensive(self) -> bool {
        matches!(self, Family::Gauss | Family::Frank | Family::StudentT)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Gauss => "gauss",
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
            Family::Joe => "joe",
            Family::StudentT => "student_t",
        }
    }

    pub const ALL_ONE_PARAMETER: [Family; 5] =
        [Family::Gauss, Family::Frank, Family::Clayton, Family::Gumbel, Family::Joe];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "independence" | "indep" => Family::Independence,
            "gauss" | "gaussian" | "normal" => Family::Gauss,
            "clayton" => Family::Clayton,
            "gumbel" => Family::Gumbel,
            "frank" => Family::Frank,
            "joe" => Family::Joe,
            "student_t" | "t" | "studentt" => Family::StudentT,
            other => return Err(Error::InvalidInput(format!("unknown copula family '{other}'"))),
        })
    }
}

/// Rotation of a copula by reflecting one or both arguments.
///
/// * 90:  `C(u, v) -> v - C(1 - u, v)` (reflects `u`)
/// * 180: `C(u, v) -> u + v - 1 + C(1 - u, 1 - v)` (survival copula)
/// * 270: `C(u, v) -> u - C(u, 1 - v)` (reflects `v`)
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(deg: u16) -> Result<Self> {
        match deg {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            d => Err(Error::InvalidInput(format!("rotation must be 0, 90, 180 or 270, got {d}"))),
        }
    }

    #[inline]
    fn flips(self) -> (bool, bool) {
        match self {
            Rotation::R0 => (false, false),
            Rotation::R90 => (true, false),
            Rotation::R180 => (true, true),
            Rotation::R270 => (false, true),
        }
    }

    fn from_flips(flip_u: bool, flip_v: bool) -> Self {
        match (flip_u, flip_v) {
            (false, false) => Rotation::R0,
            (true, false) => Rotation::R90,
            (true, true) => Rotation::R180,
            (false, true) => Rotation::R270,
        }
    }

    /// Applies `self` on top of `other`. Rotations are argument reflections,
    /// so composition is an exclusive-or of the reflected arguments.
    pub fn compose(self, other: Rotation) -> Rotation {
        let (a, b) = self.flips();
        let (c, d) = other.flips();
        Rotation::from_flips(a ^ c, b ^ d)
    }

    /// True when the rotation changes the sign of Kendall's tau.
    pub fn negates_tau(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

impl Serialize for Rotation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u16(self.degrees())
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let deg = u16::deserialize(d)?;
        Rotation::from_degrees(deg).map_err(serde::de::Error::custom)
    }
}

/// How a family that only reaches positive Kendall's tau handles a negative
/// target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeRule {
    /// Use the 90-degree rotation of the family.
    #[default]
    Rotate90,
    /// Use the 270-degree rotation of the family.
    Rotate270,
    /// Substitute a Gauss copula at that lag.
    SubstituteGauss,
    /// Substitute a Frank copula at that lag.
    SubstituteFrank,
}

impl std::str::FromStr for NegativeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rotate90" | "rotate" | "rotate_90" => NegativeRule::Rotate90,
            "rotate270" | "rotate_270" => NegativeRule::Rotate270,
            "substitute_gauss" | "gauss" => NegativeRule::SubstituteGauss,
            "substitute_frank" | "frank" => NegativeRule::SubstituteFrank,
            other => return Err(Error::InvalidInput(format!("unknown negative-tau rule '{other}'"))),
        })
    }
}

/// Which argument an h-function differentiates with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioning {
    /// `h1`: condition on the first argument.
    First,
    /// `h2`: condition on the second argument.
    Second,
}

/// One bivariate copula: a family, its parameter(s) and a rotation.
///
/// Values are immutable after construction and validated against the
/// family's admissible parameter domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCopula {
    base: Base,
    rotation: Rotation,
}

impl PairCopula {
    /// Builds a copula from a family, its parameters and a rotation.
    ///
    /// `params` holds one value for the one-parameter families, `[rho, nu]`
    /// for the Student t copula and nothing for independence.
    pub fn new(family: Family, params: &[f64], rotation: Rotation) -> Result<Self> {
        let expect = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::domain(format!("{family} copula takes {n} parameter(s), got {}", params.len())))
            }
        };
        let finite = params.iter().all(|p| p.is_finite());
        if !finite {
            return Err(Error::domain(format!("{family} parameter must be finite")));
        }
        let base = match family {
            Family::Independence => {
                expect(0)?;
                Base::Independence
            }
            Family::Gauss => {
                expect(1)?;
                let rho = params[0];
                if rho.abs() >= 1.0 {
                    return Err(Error::domain(format!("Gauss correlation {rho} not in (-1, 1)")));
                }
                Base::Gauss { rho }
            }
            Family::Clayton => {
                expect(1)?;
                let theta = params[0];
                if theta <= 0.0 {
                    return Err(Error::domain(format!("Clayton theta {theta} must be > 0")));
                }
                Base::Clayton { theta }
            }
            Family::Gumbel => {
                expect(1)?;
                let theta = params[0];
                if theta < 1.0 {
                    return Err(Error::domain(format!("Gumbel theta {theta} must be >= 1")));
                }
                Base::Gumbel { theta }
            }
            Family::Frank => {
                expect(1)?;
                let theta = params[0];
                if theta == 0.0 {
                    return Err(Error::domain("Frank theta must be non-zero"));
                }
                Base::Frank { theta }
            }
            Family::Joe => {
                expect(1)?;
                let theta = params[0];
                if theta < 1.0 {
                    return Err(Error::domain(format!("Joe theta {theta} must be >= 1")));
                }
                Base::Joe { theta }
            }
            Family::StudentT => {
                expect(2)?;
                let (rho, nu) = (params[0], params[1]);
                if rho.abs() >= 1.0 {
                    return Err(Error::domain(format!("t correlation {rho} not in (-1, 1)")));
                }
                if nu <= 2.0 {
                    return Err(Error::domain(format!("t degrees of freedom {nu} must be > 2")));
                }
                Base::StudentT { rho, nu }
            }
        };
        Ok(PairCopula { base, rotation })
    }

    pub fn independence() -> Self {
        PairCopula { base: Base::Independence, rotation: Rotation::R0 }
    }

    pub fn gauss(rho: f64) -> Result<Self> {
        Self::new(Family::Gauss, &[rho], Rotation::R0)
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Self::new(Family::Clayton, &[theta], Rotation::R0)
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::new(Family::Gumbel, &[theta], Rotation::R0)
    }

    pub fn frank(theta: f64) -> Result<Self> {
        Self::new(Family::Frank, &[theta], Rotation::R0)
    }

    pub fn joe(theta: f64) -> Result<Self> {
        Self::new(Family::Joe, &[theta], Rotation::R0)
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(Family::StudentT, &[rho, nu], Rotation::R0)
    }

    /// The same copula with `rotation` applied on top of the current one.
    pub fn rotated(self, rotation: Rotation) -> Self {
        PairCopula { rotation: rotation.compose(self.rotation), ..self }
    }

    pub fn family(&self) -> Family {
        match self.base {
            Base::Independence => Family::Independence,
            Base::Gauss { .. } => Family::Gauss,
            Base::Clayton { .. } => Family::Clayton,
            Base::Gumbel { .. } => Family::Gumbel,
            Base::Frank { .. } => Family::Frank,
            Base::Joe { .. } => Family::Joe,
            Base::StudentT { .. } => Family::StudentT,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.base {
            Base::Independence => vec![],
            Base::Gauss { rho } => vec![rho],
            Base::Clayton { theta } | Base::Gumbel { theta } | Base::Frank { theta } | Base::Joe { theta } => {
                vec![theta]
            }
            Base::StudentT { rho, nu } => vec![rho, nu],
        }
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn is_independence(&self) -> bool {
        matches!(self.base, Base::Independence)
    }

    /// Exchangeable copulas satisfy `C(u, v) = C(v, u)`. All supported base
    /// families are exchangeable; 90 and 270 degree rotations break it.
    pub fn is_exchangeable(&self) -> bool {
        self.is_independence() || matches!(self.rotation, Rotation::R0 | Rotation::R180)
    }

    #[inline]
    fn reflect(&self, u: f64, v: f64) -> (f64, f64) {
        let (fu, fv) = self.rotation.flips();
        (if fu { 1.0 - u } else { u }, if fv { 1.0 - v } else { v })
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let (ru, rv) = self.reflect(u, v);
        let c = self.base.cdf(ru, rv);
        match self.rotation {
            Rotation::R0 => c,
            Rotation::R90 => v - c,
            Rotation::R180 => u + v - 1.0 + c,
            Rotation::R270 => u - c,
        }
    }

    pub fn ln_density(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return 0.0;
        }
        let (ru, rv) = self.reflect(clamp_unit(u), clamp_unit(v));
        self.base.ln_density(ru, rv)
    }

    pub fn density(&self, u: f64, v: f64) -> f64 {
        self.ln_density(u, v).exp()
    }

    /// `dC/du`: distribution function of the second argument given the first.
    #[inline]
    pub fn h1(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return v;
        }
        let (ru, rv) = self.reflect(clamp_unit(u), clamp_unit(v));
        let r = self.base.h1(ru, rv);
        if self.rotation.flips().1 {
            1.0 - r
        } else {
            r
        }
    }

    /// `dC/dv`: distribution function of the first argument given the second.
    #[inline]
    pub fn h2(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return u;
        }
        let (ru, rv) = self.reflect(clamp_unit(u), clamp_unit(v));
        // exchangeable base: dC/dv (u, v) = dC/du (v, u)
        let r = self.base.h1(rv, ru);
        if self.rotation.flips().0 {
            1.0 - r
        } else {
            r
        }
    }

    /// Solves `h1(u, x) = z` for `x`.
    #[inline]
    pub fn h1_inverse(&self, u: f64, z: f64) -> Result<f64> {
        if self.is_independence() {
            return Ok(z);
        }
        let (fu, fv) = self.rotation.flips();
        let (u, z) = (clamp_unit(u), clamp_unit(z));
        let u = if fu { 1.0 - u } else { u };
        let z = if fv { 1.0 - z } else { z };
        let x = self.base.h1_inverse(u, z)?;
        Ok(if fv { 1.0 - x } else { x })
    }

    /// Solves `h2(x, v) = z` for `x`.
    #[inline]
    pub fn h2_inverse(&self, v: f64, z: f64) -> Result<f64> {
        if self.is_independence() {
            return Ok(z);
        }
        let (fu, fv) = self.rotation.flips();
        let (v, z) = (clamp_unit(v), clamp_unit(z));
        let v = if fv { 1.0 - v } else { v };
        let z = if fu { 1.0 - z } else { z };
        let x = self.base.h1_inverse(v, z)?;
        Ok(if fu { 1.0 - x } else { x })
    }

    pub fn h(&self, which: Conditioning, u: f64, v: f64) -> f64 {
        match which {
            Conditioning::First => self.h1(u, v),
            Conditioning::Second => self.h2(u, v),
        }
    }

    /// Inverse of the h-function selected by `which` in its free argument,
    /// holding the conditioning argument at `fixed`.
    pub fn h_inverse(&self, which: Conditioning, fixed: f64, z: f64) -> Result<f64> {
        match which {
            Conditioning::First => self.h1_inverse(fixed, z),
            Conditioning::Second => self.h2_inverse(fixed, z),
        }
    }

    pub fn kendall_tau(&self) -> f64 {
        let t = tau::base_tau(&self.base);
        if self.rotation.negates_tau() {
            -t
        } else {
            t
        }
    }

    /// The copula of `family` whose Kendall's tau equals `tau`.
    ///
    /// `tau = 0` always gives the independence copula. Negative targets for
    /// Clayton, Gumbel and Joe are handled by `rule`.
    pub fn from_tau(family: Family, tau: f64, rule: NegativeRule) -> Result<Self> {
        if !(tau > -1.0 && tau < 1.0) {
            return Err(Error::domain(format!("Kendall's tau {tau} not in (-1, 1)")));
        }
        if tau == 0.0 {
            return Ok(Self::independence());
        }
        if tau > 0.0 || family.is_comprehensive() {
            let base = tau::base_from_tau(family, tau)?;
            return Ok(PairCopula { base, rotation: Rotation::R0 });
        }
        let (family, rotation, target) = match rule {
            NegativeRule::Rotate90 => (family, Rotation::R90, -tau),
            NegativeRule::Rotate270 => (family, Rotation::R270, -tau),
            NegativeRule::SubstituteGauss => (Family::Gauss, Rotation::R0, tau),
            NegativeRule::SubstituteFrank => (Family::Frank, Rotation::R0, tau),
        };
        let base = tau::base_from_tau(family, target)?;
        Ok(PairCopula { base, rotation })
    }
}

/// JSON form `{family, param, rotation}`; `param` is a number, a
/// `[rho, nu]` pair for the t copula, or absent for independence.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairCopulaRepr {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<ParamRepr>,
    #[serde(default)]
    rotation: Rotation,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamRepr {
    One(f64),
    Many(Vec<f64>),
}

impl Serialize for PairCopula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let params = self.params();
        let param = match params.len() {
            0 => None,
            1 => Some(ParamRepr::One(params[0])),
            _ => Some(ParamRepr::Many(params)),
        };
        PairCopulaRepr { family: self.family(), param, rotation: self.rotation }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairCopula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PairCopulaRepr::deserialize(d)?;
        let params = match repr.param {
            None => vec![],
            Some(ParamRepr::One(p)) => vec![p],
            Some(ParamRepr::Many(ps)) => ps,
        };
        PairCopula::new(repr.family, &params, repr.rotation).map_err(serde::de::Error::custom)
    }
}
