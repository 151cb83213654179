//! TOML run configuration with dotted-path overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emissions::EmissionFactor;
use crate::equipment::{builtin_catalog, read_catalog, ConduitProduct, STEEL_DENSITY_KG_M3};
use crate::error::{require_non_negative, require_positive, FlushError, Result};
use crate::hydraulics::{FluidProperties, LoopDimensions, MachineEfficiencies, SolverSettings};
use crate::model::FlushSystem;
use crate::scenario::{SweepDefinition, SweepSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReelOptions {
    pub material_density_kg_m3: f64,
    /// Conduit length wanted on top of the water depth.
    pub length_margin_m: f64,
    /// Replaces the built-in conduit catalog when set.
    pub catalog_path: Option<PathBuf>,
}

impl Default for ReelOptions {
    fn default() -> Self {
        Self {
            material_density_kg_m3: STEEL_DENSITY_KG_M3,
            length_margin_m: 400.0,
            catalog_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

fn default_system() -> FlushSystem {
    FlushSystem::new(1.0, 1.0, 0.01)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub fluid: FluidProperties,
    #[serde(default)]
    pub geometry: LoopDimensions,
    #[serde(default)]
    pub efficiencies: MachineEfficiencies,
    #[serde(default = "default_system")]
    pub system: FlushSystem,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub emission: EmissionFactor,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub reel: ReelOptions,
    #[serde(default)]
    pub output: OutputOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fluid: FluidProperties::default(),
            geometry: LoopDimensions::default(),
            efficiencies: MachineEfficiencies::default(),
            system: default_system(),
            sweep: SweepSettings::default(),
            emission: EmissionFactor::default(),
            solver: SolverSettings::default(),
            reel: ReelOptions::default(),
            output: OutputOptions::default(),
        }
    }
}

/// Parses a scalar override the way TOML would, falling back to a string.
fn parse_scalar(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Overlays `top` onto `base`, recursing into tables present in both.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Applies `key.path=value` to a parsed document, creating tables as needed.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| FlushError::Config(format!("override {assignment:?} is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(FlushError::Config(format!("override key {path:?} is malformed")));
    }
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut table = doc;
    for key in parents {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| FlushError::Config(format!("override {path:?}: {key} is not a table")))?;
    }
    table.insert(last.to_string(), parse_scalar(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Parses TOML text over the defaults, applies overrides in order and
    /// validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| FlushError::Config(e.to_string()))?;
        let mut doc = toml::Table::try_from(RunConfig::default())
            .map_err(|e| FlushError::Config(e.to_string()))?;
        merge(&mut doc, user);
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let config: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| FlushError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads `path`, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => fs::read_to_string(p).map_err(|e| FlushError::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FlushError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.fluid.validate()?;
        self.geometry.validate()?;
        self.efficiencies.validate()?;
        self.system.validate()?;
        self.sweep.validate()?;
        self.emission.validate()?;
        require_positive("solver.tolerance_pa", self.solver.tolerance_pa)?;
        if self.solver.max_iterations == 0 {
            return Err(FlushError::invalid("solver.max_iterations", "must be >= 1"));
        }
        require_positive("reel.material_density_kg_m3", self.reel.material_density_kg_m3)?;
        require_non_negative("reel.length_margin_m", self.reel.length_margin_m)
    }

    pub fn catalog(&self) -> Result<Vec<ConduitProduct>> {
        match &self.reel.catalog_path {
            None => Ok(builtin_catalog()),
            Some(p) => {
                let file = fs::File::open(p).map_err(|e| FlushError::io(p, e))?;
                read_catalog(file)
            }
        }
    }

    pub fn sweep_definition(&self) -> Result<SweepDefinition> {
        Ok(SweepDefinition {
            sweep: self.sweep.clone(),
            dimensions: self.geometry,
            fluid: self.fluid.clone(),
            efficiencies: self.efficiencies,
            solver: self.solver,
            system: self.system,
            emission: self.emission,
            catalog: self.catalog()?,
        })
    }
}
