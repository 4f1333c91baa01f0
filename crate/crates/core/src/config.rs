//! Session configuration: TOML file, environment default, flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ContactParams, SegmentTable};
use crate::error::{read_text, Error, Result};
use crate::kinematics::BindingTable;
use crate::motion::DEFAULT_SCALE;
use crate::pipeline::{Assets, Settings};
use crate::risk::RuleSet;
use crate::signal::FilterSpec;

/// Names the config file used when `--config` is not given.
pub const CONFIG_ENV: &str = "MOTION_RISK_CONFIG";

pub const DEFAULT_BODY_MASS_KG: f64 = 70.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    pub input: Option<PathBuf>,
    pub body_mass_kg: f64,
    /// Meters per mocap text unit.
    pub scale: f64,
    pub filter: FilterSpec,
    pub contact: ContactParams,
    /// Rule set file; the shipped rules when absent.
    pub rules: Option<PathBuf>,
    pub bindings: Option<PathBuf>,
    pub segments: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            input: None,
            body_mass_kg: DEFAULT_BODY_MASS_KG,
            scale: DEFAULT_SCALE,
            filter: FilterSpec::default(),
            contact: ContactParams::default(),
            rules: None,
            bindings: None,
            segments: None,
            out: None,
        }
    }
}

impl SessionConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&read_text(path)?).map_err(|e| e.in_file(path))?;
        if let Some(dir) = path.parent() {
            for p in [
                &mut cfg.input,
                &mut cfg.rules,
                &mut cfg.bindings,
                &mut cfg.segments,
                &mut cfg.out,
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// `explicit` if given, otherwise the file named by [`CONFIG_ENV`],
    /// otherwise defaults.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.body_mass_kg.is_finite() && self.body_mass_kg > 0.0) {
            return Err(Error::Config(format!(
                "body_mass_kg must be positive, got {}",
                self.body_mass_kg
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config(format!("scale must be positive, got {}", self.scale)));
        }
        let paths = [
            ("input", &self.input),
            ("rules", &self.rules),
            ("bindings", &self.bindings),
            ("segments", &self.segments),
            ("out", &self.out),
        ];
        for (name, p) in paths {
            if p.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
                return Err(Error::Config(format!("{name} path is empty")));
            }
        }
        if self.filter.order == 0
            || !self.filter.order.is_multiple_of(2)
            || self.filter.cutoff_hz.is_nan()
            || self.filter.cutoff_hz <= 0.0
        {
            return Err(Error::Config(format!(
                "filter needs a positive even order and positive cutoff, got order {} cutoff {}",
                self.filter.order, self.filter.cutoff_hz
            )));
        }
        Ok(())
    }

    pub fn settings(&self) -> Settings {
        Settings {
            body_mass_kg: self.body_mass_kg,
            filter: self.filter,
            contact: self.contact,
        }
    }

    /// Read the rule, binding and segment tables, falling back to the
    /// shipped defaults for any path left unset.
    pub fn load_assets(&self) -> Result<Assets> {
        let rules = match &self.rules {
            Some(p) => RuleSet::from_json(&read_text(p)?).map_err(|e| Error::from(e).in_file(p))?,
            None => RuleSet::default_rules(),
        };
        let bindings = match &self.bindings {
            Some(p) => BindingTable::from_json(&read_text(p)?).map_err(|e| Error::from(e).in_file(p))?,
            None => BindingTable::default_table(),
        };
        let segments = match &self.segments {
            Some(p) => SegmentTable::from_json(&read_text(p)?).map_err(|e| Error::from(e).in_file(p))?,
            None => SegmentTable::default_table(),
        };
        Ok(Assets {
            rules,
            bindings,
            segments,
        })
    }
}
