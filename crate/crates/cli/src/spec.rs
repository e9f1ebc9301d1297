//! JSON model specification files.
//!
//! ```json
//! {
//!   "kpacf": { "kind": "arma(1,1)", "theta": [0.95, -0.85], "horizon": 30 },
//!   "copula": { "family": "gumbel", "negative_rule": "rotate90" },
//!   "truncation_lag": 30,
//!   "margin": { "kind": "skewed_student", "params": [0, 1, 5, 1.2] }
//! }
//! ```
//!
//! A model is given either by `kpacf` plus `copula`, or by an explicit
//! `copulas` list (one pair copula per lag). In fit templates `theta`
//! entries may be `null` and margin `params` may be omitted.

use serde::{Deserialize, Serialize};
use svine_core::inference::default_start;
use svine_core::{CopulaSequence, Family, KpacfKind, KpacfSpec, MarginKind, MarginalModel, NegativeRule, SVineModel};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kpacf: Option<KpacfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copula: Option<CopulaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copulas: Option<CopulaSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_lag: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<MarginSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpacfSection {
    pub kind: KpacfKind,
    #[serde(default)]
    pub theta: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Families {
    One(Family),
    Many(Vec<Family>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaSection {
    pub family: Families,
    #[serde(default)]
    pub negative_rule: NegativeRule,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginSection {
    pub kind: MarginKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

/// Command-line settings that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub families: Option<Vec<Family>>,
    pub negative_rule: Option<NegativeRule>,
    pub truncation: Option<usize>,
}

pub const DEFAULT_TRUNCATION: usize = 30;

impl ModelSpecFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: ModelSpecFile =
            serde_json::from_str(text).map_err(|e| CliError::input(format!("invalid model specification: {e}")))?;
        spec.check_shape()?;
        Ok(spec)
    }

    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    fn check_shape(&self) -> CliResult<()> {
        match (&self.kpacf, &self.copulas) {
            (Some(_), Some(_)) => Err(CliError::input("give either 'kpacf' or 'copulas', not both")),
            (None, None) => Err(CliError::input("one of 'kpacf' or 'copulas' is required")),
            (Some(_), None) if self.copula.is_none() => {
                Err(CliError::input("'kpacf' needs a 'copula' section naming the family"))
            }
            (None, Some(_)) if self.copula.is_some() => Err(CliError::input("'copula' applies to 'kpacf' models only")),
            _ => Ok(()),
        }
    }

    /// Families named in the file, or the override.
    pub fn families(&self, ov: &Overrides) -> Vec<Family> {
        if let Some(f) = &ov.families {
            return f.clone();
        }
        match self.copula.as_ref().map(|c| &c.family) {
            Some(Families::One(f)) => vec![*f],
            Some(Families::Many(fs)) => fs.clone(),
            None => vec![],
        }
    }

    pub fn negative_rule(&self, ov: &Overrides) -> NegativeRule {
        ov.negative_rule.or(self.copula.as_ref().map(|c| c.negative_rule)).unwrap_or_default()
    }

    pub fn truncation(&self, ov: &Overrides, default: usize) -> usize {
        ov.truncation.or(self.truncation_lag).unwrap_or(default)
    }

    /// The kpacf specification with every parameter given.
    pub fn kpacf_spec(&self) -> CliResult<Option<KpacfSpec>> {
        let Some(k) = &self.kpacf else { return Ok(None) };
        let theta: Option<Vec<f64>> = k.theta.iter().copied().collect();
        let theta =
            theta.ok_or_else(|| CliError::input("kpacf.theta has null entries; a model needs every parameter"))?;
        let horizon = k.horizon.unwrap_or(if k.kind == KpacfKind::Explicit { theta.len() } else { DEFAULT_TRUNCATION });
        Ok(Some(KpacfSpec::new(k.kind, theta, horizon)?))
    }

    /// A fit template: `null` (or absent) parameters take default starting
    /// values.
    pub fn fit_template(&self) -> CliResult<KpacfSpec> {
        let k = self.kpacf.as_ref().ok_or_else(|| CliError::input("fitting needs a 'kpacf' section"))?;
        let horizon =
            k.horizon.unwrap_or(if k.kind == KpacfKind::Explicit { k.theta.len() } else { DEFAULT_TRUNCATION });
        let defaults = default_start(k.kind, horizon);
        let theta = if k.theta.is_empty() {
            defaults
        } else {
            if k.theta.len() != defaults.len() {
                return Err(CliError::input(format!(
                    "{} expects {} parameter(s), got {}",
                    k.kind,
                    defaults.len(),
                    k.theta.len()
                )));
            }
            k.theta.iter().zip(defaults).map(|(t, d)| t.unwrap_or(d)).collect()
        };
        Ok(KpacfSpec::new(k.kind, theta, horizon)?)
    }

    /// The margin for simulation, when one is given with parameters.
    pub fn margin_model(&self) -> CliResult<Option<MarginalModel>> {
        match &self.margin {
            None => Ok(None),
            Some(MarginSection { params: None, .. }) => Err(CliError::input("margin.params are required to simulate")),
            Some(MarginSection { kind, params: Some(p) }) => Ok(Some(MarginalModel::from_params(*kind, p)?)),
        }
    }

    /// The margin family to fit; empirical when none is named.
    pub fn margin_kind(&self) -> MarginKind {
        self.margin.as_ref().map_or(MarginKind::Empirical, |m| m.kind)
    }

    /// One model per family (a single model for an explicit sequence).
    pub fn models(&self, ov: &Overrides, default_truncation: usize) -> CliResult<Vec<(Option<Family>, SVineModel)>> {
        let margin = self.margin_model()?;
        let with_margin = |m: SVineModel| match &margin {
            Some(mm) => m.with_margin(mm.clone()),
            None => m,
        };
        if let Some(seq) = &self.copulas {
            let p = self.truncation(ov, seq.truncation_lag());
            return Ok(vec![(None, with_margin(SVineModel::new(seq.with_truncation(p))))]);
        }
        let spec = self.kpacf_spec()?.expect("shape checked");
        let families = self.families(ov);
        if families.is_empty() {
            return Err(CliError::input("no copula family given"));
        }
        let rule = self.negative_rule(ov);
        let p = self.truncation(ov, default_truncation);
        families
            .into_iter()
            .map(|f| {
                let model = if f == Family::Independence {
                    SVineModel::new(CopulaSequence::independence().with_truncation(p))
                } else {
                    SVineModel::from_kpacf(spec.clone(), f, rule, p)?
                };
                Ok((Some(f), with_margin(model)))
            })
            .collect()
    }
}

/// Named specifications shipped with the tool.
pub const PRESETS: &[(&str, &str)] = &[
    ("clayton-excursions", include_str!("../../../presets/clayton-excursions.json")),
    ("clayton-excursions-rot90", include_str!("../../../presets/clayton-excursions-rot90.json")),
    ("arma11", include_str!("../../../presets/arma11.json")),
    ("arfima", include_str!("../../../presets/arfima.json")),
    ("arma51-template", include_str!("../../../presets/arma51-template.json")),
];

pub fn preset(name: &str) -> CliResult<ModelSpecFile> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::input(format!("unknown preset '{name}' (available: {})", names.join(", ")))
    })?;
    ModelSpecFile::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use svine_core::Rotation;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            preset(name).unwrap();
        }
    }

    #[test]
    fn excursion_preset_is_the_clayton_sequence() {
        let models = preset("clayton-excursions").unwrap().models(&Overrides::default(), 30).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].1.seq, svine_core::process::excursion_sequence());
        let alt = preset("clayton-excursions-rot90").unwrap().models(&Overrides::default(), 30).unwrap();
        assert_eq!(alt[0].1.seq.lag(3).rotation(), Rotation::R90);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_shapes() {
        assert!(ModelSpecFile::parse(
            r#"{"kpacf":{"kind":"fgn","theta":[0.7]},"copula":{"family":"gauss"},"extra":1}"#
        )
        .is_err());
        assert!(ModelSpecFile::parse(r#"{"kpacf":{"kind":"fgn","theta":[0.7],"foo":2},"copula":{"family":"gauss"}}"#)
            .is_err());
        assert!(ModelSpecFile::parse(r#"{"kpacf":{"kind":"fgn","theta":[0.7]}}"#).is_err());
        assert!(ModelSpecFile::parse(r#"{"truncation_lag":3}"#).is_err());
        let bad_theta =
            ModelSpecFile::parse(r#"{"kpacf":{"kind":"arma(1,0)","theta":[1.5]},"copula":{"family":"gauss"}}"#)
                .unwrap();
        assert!(bad_theta.models(&Overrides::default(), 30).is_err());
    }

    #[test]
    fn template_nulls_take_defaults() {
        let s = ModelSpecFile::parse(
            r#"{"kpacf":{"kind":"arma(2,1)","theta":[null,0.1,null]},"copula":{"family":"gumbel"}}"#,
        )
        .unwrap();
        let t = s.fit_template().unwrap();
        assert_eq!(t.theta, vec![0.5, 0.1, 0.0]);
        let empty = ModelSpecFile::parse(r#"{"kpacf":{"kind":"arma(1,1)"},"copula":{"family":"gumbel"}}"#).unwrap();
        assert_eq!(empty.fit_template().unwrap().theta, vec![0.5, 0.0]);
        assert!(s.kpacf_spec().is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let s = preset("arma11").unwrap();
        let ov = Overrides {
            families: Some(vec![Family::Joe]),
            negative_rule: Some(NegativeRule::SubstituteGauss),
            truncation: Some(7),
        };
        let models = s.models(&ov, 30).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].0, Some(Family::Joe));
        assert_eq!(models[0].1.truncation_lag(), 7);
        assert_eq!(s.families(&Overrides::default()).len(), 5);
    }
}
