use std::fs;
use std::path::Path;

use mtrap::formulas::HiddenChoice;
use mtrap::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s}; use text or json"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub default_a: String,
    /// Largest Pfaffian order the command line will attempt.
    pub pfaffian_cap: usize,
    /// Largest number of trapezoids counted or streamed by enumeration.
    pub count_cap: u64,
    /// Extra series order on top of what a degree bound asks for.
    pub truncation_margin: usize,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            default_a: "p0a".to_string(),
            pfaffian_cap: 24,
            count_cap: 1 << 40,
            truncation_margin: 0,
            format: Format::Text,
        }
    }
}

impl Config {
    /// Parses either a JSON object or `key=value` lines (`#` starts a comment).
    pub fn parse(text: &str) -> Result<Config> {
        let trimmed = text.trim_start();
        let cfg: Config = if trimmed.starts_with('{') {
            serde_json::from_str(trimmed).map_err(|e| Error::Config(e.to_string()))?
        } else {
            let mut cfg = Config::default();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
                cfg.set(key.trim(), value.trim())?;
            }
            cfg
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| v.parse::<u64>().map_err(|_| Error::Config(format!("{key} must be a non-negative integer")));
        match key {
            "default_a" => self.default_a = value.to_string(),
            "pfaffian_cap" => self.pfaffian_cap = int(value)? as usize,
            "count_cap" => self.count_cap = int(value)?,
            "truncation_margin" => self.truncation_margin = int(value)? as usize,
            "format" => self.format = value.parse()?,
            _ => return Err(Error::Config(format!("unknown configuration key {key}"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.pfaffian_cap == 0 || self.count_cap == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        self.default_a.parse::<HiddenChoice>()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_and_json_agree() {
        let a = Config::parse("# local\ndefault_a = q_a\ncount_cap=1000\nformat = json\n").unwrap();
        let b = Config::parse(r#"{"default_a": "q_a", "count_cap": 1000, "format": "json"}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pfaffian_cap, Config::default().pfaffian_cap);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse(r#"{"colour": "red"}"#).is_err());
        assert!(Config::parse("count_cap = 0").is_err());
        assert!(Config::parse("default_a = p9").is_err());
        assert!(Config::parse("pfaffian_cap").is_err());
    }
}
