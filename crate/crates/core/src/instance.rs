//! Group instances loaded from JSON configuration.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amalgam::{Amalgam, AmalgamParams};
use crate::bs23::Bs23;
use crate::error::{Error, Result};
use crate::hnn::{Hnn, HnnParams};
use crate::permgroup::GroupSpec;

/// Environment variable with `key=value` cap overrides, e.g. `ballRadius=6,pathDepth=2`.
pub const CAP_OVERRIDE_VAR: &str = "BSL_CAP_OVERRIDE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Amalgam,
    Hnn,
    Bs23,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Caps {
    pub ball_radius: usize,
    pub path_depth: usize,
    pub syllable_length: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            ball_radius: 8,
            path_depth: 3,
            syllable_length: 3,
        }
    }
}

impl Caps {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ballRadius", self.ball_radius),
            ("pathDepth", self.path_depth),
            ("syllableLength", self.syllable_length),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("cap {name} must be positive")));
            }
        }
        Ok(())
    }

    /// Applies overrides written as comma-separated `key=value` pairs.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("cap override {part:?} is not key=value")))?;
            let value = usize::from_str(value.trim())
                .map_err(|_| Error::Config(format!("cap override {part:?} is not a number")))?;
            match key.trim() {
                "ballRadius" => self.ball_radius = value,
                "pathDepth" => self.path_depth = value,
                "syllableLength" => self.syllable_length = value,
                other => return Err(Error::Config(format!("unknown cap {other:?}"))),
            }
        }
        self.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InstanceConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<GroupSpec>,
    #[serde(default, rename = "sigmaM", skip_serializing_if = "Option::is_none")]
    pub sigma_m: Option<GroupSpec>,
    #[serde(default, rename = "sigmaP", skip_serializing_if = "Option::is_none")]
    pub sigma_p: Option<GroupSpec>,
    #[serde(default)]
    pub caps: Caps,
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn amalgam(gamma0: GroupSpec, gamma1: GroupSpec) -> Self {
        InstanceConfig {
            family: Family::Amalgam,
            gamma0: Some(gamma0),
            gamma1: Some(gamma1),
            sigma_m: None,
            sigma_p: None,
            caps: Caps::default(),
        }
    }

    pub fn hnn(sigma_m: GroupSpec, sigma_p: GroupSpec) -> Self {
        InstanceConfig {
            family: Family::Hnn,
            gamma0: None,
            gamma1: None,
            sigma_m: Some(sigma_m),
            sigma_p: Some(sigma_p),
            caps: Caps::default(),
        }
    }

    pub fn bs23() -> Self {
        InstanceConfig {
            family: Family::Bs23,
            gamma0: None,
            gamma1: None,
            sigma_m: None,
            sigma_p: None,
            caps: Caps::default(),
        }
    }

    /// Caps after applying [`CAP_OVERRIDE_VAR`], if set.
    pub fn effective_caps(&self) -> Result<Caps> {
        let mut caps = self.caps;
        caps.validate()?;
        if let Ok(text) = std::env::var(CAP_OVERRIDE_VAR) {
            caps.apply_overrides(&text)?;
        }
        Ok(caps)
    }

    pub fn build(&self) -> Result<Instance> {
        let need = |spec: &Option<GroupSpec>, key: &str| match spec {
            Some(spec) => spec.build(),
            None => Err(Error::Config(format!(
                "family {:?} needs {key}",
                self.family
            ))),
        };
        let unexpected = |present: bool, keys: &str| {
            if present {
                Err(Error::Config(format!(
                    "family {:?} does not take {keys}",
                    self.family
                )))
            } else {
                Ok(())
            }
        };
        let caps = self.effective_caps()?;
        let group = match self.family {
            Family::Amalgam => {
                unexpected(
                    self.sigma_m.is_some() || self.sigma_p.is_some(),
                    "sigmaM/sigmaP",
                )?;
                let g0 = need(&self.gamma0, "gamma0")?;
                let g1 = need(&self.gamma1, "gamma1")?;
                Group::Amalgam(Amalgam::new(AmalgamParams::new(g0, g1)?))
            }
            Family::Hnn => {
                unexpected(
                    self.gamma0.is_some() || self.gamma1.is_some(),
                    "gamma0/gamma1",
                )?;
                let sm = need(&self.sigma_m, "sigmaM")?;
                let sp = need(&self.sigma_p, "sigmaP")?;
                Group::Hnn(Hnn::new(HnnParams::new(sm, sp)?))
            }
            Family::Bs23 => {
                unexpected(
                    self.gamma0.is_some()
                        || self.gamma1.is_some()
                        || self.sigma_m.is_some()
                        || self.sigma_p.is_some(),
                    "group parameters",
                )?;
                Group::Bs23(Bs23)
            }
        };
        Ok(Instance { group, caps })
    }
}

pub enum Group {
    Amalgam(Amalgam),
    Hnn(Hnn),
    Bs23(Bs23),
}

pub struct Instance {
    pub group: Group,
    pub caps: Caps,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        let text = r#"{"family":"amalgam","gamma0":{"domain":3,"generators":["(0 1)","(0 1 2)"]},
                       "gamma1":{"domain":3,"generators":["(0 1)","(0 1 2)"]}}"#;
        let config = InstanceConfig::from_json(text).unwrap();
        assert_eq!(config.caps, Caps::default());
        assert!(matches!(config.build().unwrap().group, Group::Amalgam(_)));
        let text = r#"{"family":"hnn","sigmaM":{"domain":2,"generators":["(0 1)"]},
                       "sigmaP":{"domain":2,"generators":["(0 1)"]},"caps":{"ballRadius":5}}"#;
        let config = InstanceConfig::from_json(text).unwrap();
        assert_eq!(config.caps.ball_radius, 5);
        assert_eq!(config.caps.path_depth, 3);
        assert!(matches!(config.build().unwrap().group, Group::Hnn(_)));
        let config = InstanceConfig::from_json(r#"{"family":"bs23"}"#).unwrap();
        assert!(matches!(config.build().unwrap().group, Group::Bs23(_)));
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"family":"amalgam"}"#,
            r#"{"family":"lattice"}"#,
            r#"{"family":"bs23","caps":{"ballRadius":0}}"#,
            r#"{"family":"bs23","sigmaM":{"domain":2,"generators":["(0 1)"]}}"#,
            r#"{"family":"hnn","sigmaM":{"domain":3,"generators":["(0 1)"]},"sigmaP":{"domain":2,"generators":["(0 1)"]}}"#,
        ] {
            let built = InstanceConfig::from_json(text).and_then(|c| c.build().map(|_| ()));
            assert!(matches!(built, Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn cap_overrides() {
        let mut caps = Caps::default();
        caps.apply_overrides("ballRadius=5, syllableLength=2")
            .unwrap();
        assert_eq!(
            caps,
            Caps {
                ball_radius: 5,
                path_depth: 3,
                syllable_length: 2
            }
        );
        assert!(caps.apply_overrides("depth=1").is_err());
        assert!(caps.apply_overrides("pathDepth=0").is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let config = InstanceConfig::hnn(GroupSpec::symmetric(2), GroupSpec::symmetric(3));
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(InstanceConfig::from_json(&text).unwrap(), config);
    }
}
