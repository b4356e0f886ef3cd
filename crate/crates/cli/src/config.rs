//! Run configuration: a flat `key = value` file overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ptsusy_core::spectrum::ModelParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Line { path: String, line: usize, message: String },

    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("expected `csv` or `json`, got `{other}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Every setting a command can read. Unset values fall back to the
/// command's own default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub nu: Option<f64>,
    pub beta: Option<f64>,
    pub hbar: Option<f64>,
    pub length: Option<f64>,
    pub mass: Option<f64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub m_max: Option<usize>,
    pub n_max: Option<usize>,
    pub grid_points: Option<usize>,
    pub format: Option<Format>,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    /// Threshold overrides keyed by identity name.
    pub thresholds: BTreeMap<String, f64>,
}

impl Settings {
    /// Values set in `other` win.
    pub fn overlay(mut self, other: Settings) -> Settings {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            nu,
            beta,
            hbar,
            length,
            mass,
            m,
            n,
            m_max,
            n_max,
            grid_points,
            format,
            tol_abs,
            tol_rel
        );
        self.thresholds.extend(other.thresholds);
        self
    }

    /// Assign one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(value: &str, what: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("expected {what}, got `{value}`"))
        }
        fn positive(v: f64) -> Result<f64, String> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("expected a positive number, got `{v}`"))
            }
        }
        match key {
            "nu" => self.nu = Some(parse(value, "a number")?),
            "beta" => self.beta = Some(parse(value, "a number")?),
            "hbar" => self.hbar = Some(parse(value, "a number")?),
            "L" => self.length = Some(parse(value, "a number")?),
            "mass" => self.mass = Some(parse(value, "a number")?),
            "m" => self.m = Some(parse(value, "a nonnegative integer")?),
            "n" => self.n = Some(parse(value, "a nonnegative integer")?),
            "m_max" => self.m_max = Some(parse(value, "a nonnegative integer")?),
            "n_max" => self.n_max = Some(parse(value, "a nonnegative integer")?),
            "grid_points" => {
                let g: usize = parse(value, "a positive integer")?;
                if g == 0 {
                    return Err("expected a positive integer, got `0`".into());
                }
                self.grid_points = Some(g);
            }
            "format" => self.format = Some(value.parse()?),
            "tol_abs" => self.tol_abs = Some(positive(parse(value, "a number")?)?),
            "tol_rel" => self.tol_rel = Some(positive(parse(value, "a number")?)?),
            _ => match key.strip_prefix("tol.") {
                Some(identity) if !identity.is_empty() => {
                    let t = positive(parse(value, "a number")?)?;
                    self.thresholds.insert(identity.to_string(), t);
                }
                _ => return Err(format!("unknown field `{key}`")),
            },
        }
        Ok(())
    }

    pub fn parse_file(text: &str, path: &str) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Line {
                path: path.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            s.set(key, value.trim())
                .map_err(|m| err(format!("field `{key}`: {m}")))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        Self::parse_file(&text, &shown)
    }

    pub fn params(&self) -> Result<ModelParams<f64>, ConfigError> {
        ModelParams::new(
            self.nu.unwrap_or(0.5),
            self.beta.unwrap_or(1.0),
            self.hbar.unwrap_or(1.0),
            self.length.unwrap_or(1.0),
            self.mass.unwrap_or(0.5),
        )
        .map_err(|e| ConfigError::Field {
            field: match e {
                ptsusy_core::Error::InvalidParams { name, .. } => name.to_string(),
                _ => "params".to_string(),
            },
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parses_with_comments_and_overrides() {
        let text = "# gauge\nnu = 1.5\nbeta=2 # inline\n\nL = 2\ntol.ladder = 1e-6\nformat = json\n";
        let s = Settings::parse_file(text, "run.cfg").unwrap();
        assert_eq!(s.nu, Some(1.5));
        assert_eq!(s.length, Some(2.0));
        assert_eq!(s.thresholds["ladder"], 1e-6);
        let flags = Settings {
            nu: Some(0.5),
            ..Settings::default()
        };
        let merged = s.overlay(flags);
        assert_eq!(merged.nu, Some(0.5));
        assert_eq!(merged.beta, Some(2.0));
        assert_eq!(merged.format, Some(Format::Json));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = Settings::parse_file("nu = 1\nbeta = two\n", "a.cfg").unwrap_err();
        assert_eq!(e.to_string(), "a.cfg:2: field `beta`: expected a number, got `two`");
        let e = Settings::parse_file("\n\ncolour = red\n", "a.cfg").unwrap_err();
        assert_eq!(e.to_string(), "a.cfg:3: field `colour`: unknown field `colour`");
        let e = Settings::parse_file("nu 1\n", "a.cfg").unwrap_err();
        assert!(e.to_string().starts_with("a.cfg:1: expected `key = value`"));
        let e = Settings::parse_file("grid_points = 0\n", "a.cfg").unwrap_err();
        assert!(e.to_string().contains("grid_points"));
    }

    #[test]
    fn invalid_params_name_the_field() {
        let s = Settings {
            mass: Some(-1.0),
            ..Settings::default()
        };
        match s.params() {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "mass"),
            other => panic!("{other:?}"),
        }
    }
}
