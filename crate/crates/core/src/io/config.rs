use std::path::Path;

use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::sim::{MotionSpec, ScenarioConfig};
use crate::target::VelocityProfile;

/// One `key=value` override. Keys are dotted paths into the config
/// document (`guidance.k_1`, `pursuer.position.2`); values are TOML
/// literals, and anything that does not parse as one is taken as a string.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: Value,
}

impl std::str::FromStr for Override {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override `{s}` is not of the form key=value")))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(Error::config(format!(
                "override `{s}` has an empty key segment"
            )));
        }
        Ok(Self {
            key: key.to_owned(),
            value: parse_value(raw.trim()),
        })
    }
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

impl Override {
    /// Writes the value into `doc`, creating missing tables on the way.
    pub fn apply(&self, doc: &mut Table) -> Result<()> {
        let segments: Vec<&str> = self.key.split('.').collect();
        let (first, rest) = segments.split_first().expect("key validated non-empty");
        if rest.is_empty() {
            doc.insert(first.to_string(), self.value.clone());
            return Ok(());
        }
        let node = doc
            .entry(first.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        self.set(node, rest)
    }

    fn set(&self, node: &mut Value, segs: &[&str]) -> Result<()> {
        let (seg, rest) = segs.split_first().expect("non-empty path");
        let slot = match node {
            Value::Table(t) if rest.is_empty() => {
                t.insert(seg.to_string(), self.value.clone());
                return Ok(());
            }
            Value::Table(t) => t
                .entry(seg.to_string())
                .or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let i = self.index(seg, a.len())?;
                &mut a[i]
            }
            _ => {
                return Err(Error::config(format!(
                    "override `{}`: cannot descend into a scalar at `{seg}`",
                    self.key
                )))
            }
        };
        if rest.is_empty() {
            *slot = self.value.clone();
            Ok(())
        } else {
            self.set(slot, rest)
        }
    }

    fn index(&self, seg: &str, len: usize) -> Result<usize> {
        seg.parse::<usize>()
            .ok()
            .filter(|&i| i < len)
            .ok_or_else(|| {
                Error::config(format!(
                    "override `{}`: `{seg}` is not an index below {len}",
                    self.key
                ))
            })
    }
}

/// Parses a config document. `origin` names it in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| Error::Parse {
        context: origin.to_owned(),
        message: e.to_string(),
    })
}

/// Applies overrides in order and re-checks the result against the schema.
pub fn apply_overrides(cfg: &ScenarioConfig, overrides: &[Override]) -> Result<ScenarioConfig> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut doc = Table::try_from(cfg).map_err(|e| Error::config(e.to_string()))?;
    for o in overrides {
        o.apply(&mut doc)?;
    }
    let keys: Vec<&str> = overrides.iter().map(|o| o.key.as_str()).collect();
    ScenarioConfig::deserialize(Value::Table(doc)).map_err(|e| Error::Parse {
        context: format!("overrides {}", keys.join(", ")),
        message: e.to_string(),
    })
}

/// Serializes a config to the same document format [`parse_config`] reads.
pub fn config_to_string(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| Error::config(e.to_string()))
}

/// Reads a config file, applies overrides, loads any custom velocity
/// profile (resolved relative to the file) and validates the result.
pub fn load_config(path: impl AsRef<Path>, overrides: &[Override]) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = parse_config(&text, &path.display().to_string())?;
    let mut cfg = apply_overrides(&cfg, overrides)?;
    resolve_profile(&mut cfg, path.parent().unwrap_or(Path::new(".")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Resolves `scenario` as a bundled name (`st`, `cvt`, `mt`) or a file path.
pub fn load_scenario(scenario: &str, overrides: &[Override]) -> Result<ScenarioConfig> {
    match ScenarioConfig::named(scenario) {
        Some(cfg) if !Path::new(scenario).exists() => {
            let mut cfg = apply_overrides(&cfg, overrides)?;
            resolve_profile(&mut cfg, Path::new("."))?;
            cfg.validate()?;
            Ok(cfg)
        }
        _ => load_config(scenario, overrides),
    }
}

/// Fills the samples of a custom target profile from its CSV file.
pub fn resolve_profile(cfg: &mut ScenarioConfig, base: &Path) -> Result<()> {
    if let MotionSpec::Custom {
        profile: Some(file),
        samples,
    } = &mut cfg.target.motion
    {
        let full = base.join(&*file);
        *samples = VelocityProfile::from_csv(&full)?.samples();
        *file = full;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_parsing() {
        let o: Override = "guidance.k_1=0.016".parse().unwrap();
        assert_eq!(o.value, Value::Float(0.016));
        let o: Override = "plant=uncertain".parse().unwrap();
        assert_eq!(o.value, Value::String("uncertain".into()));
        assert!("guidance.k_1".parse::<Override>().is_err());
        assert!("guidance..k_1=1".parse::<Override>().is_err());
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let cfg = ScenarioConfig::st();
        let o: Vec<Override> = [
            "guidance.k_1=0.016",
            "pursuer.position.2=20",
            "plant=uncertain",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
        let c = apply_overrides(&cfg, &o).unwrap();
        assert_eq!(c.guidance.k_1, 0.016);
        assert_eq!(c.pursuer.position, [0.0, 0.0, 20.0]);
        assert_eq!(c.plant, crate::sim::Plant::Uncertain);
    }

    #[test]
    fn bad_overrides_are_rejected() {
        let cfg = ScenarioConfig::st();
        for s in [
            "guidance.k_9=1",
            "pursuer.position.3=1",
            "duration.x=1",
            "plant=sideways",
        ] {
            let o: Override = s.parse().unwrap();
            assert!(apply_overrides(&cfg, &[o]).is_err(), "{s}");
        }
    }

    #[test]
    fn parse_errors_carry_line_and_key() {
        let text =
            config_to_string(&ScenarioConfig::st())
                .unwrap()
                .replacen("duration", "durration", 1);
        let msg = parse_config(&text, "x.toml").unwrap_err().to_string();
        assert!(msg.contains("durration") && msg.contains("line"), "{msg}");
    }
}
