//! Scenario configuration: one JSON document describing every subsystem.
//!
//! Every section is optional and falls back to the reference setup, so a
//! config file only needs to list what differs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::isolation::IsolationConfig;
use crate::quantum::{power_for_sql, BandwidthModel, QuantumConfig};
use crate::readout::{default_acoustic_peaks, AcousticPeak, IntensityNoiseConfig, ReadoutConfig};
use crate::spectra::FrequencyGrid;
use crate::suspension::SuspensionChain;
use crate::thermal::ThermalConfig;

/// Environment variable naming a directory searched for `<name>.json`.
pub const CONFIG_DIR_ENV: &str = "CAVITY_BUDGET_CONFIG_DIR";

/// Configs compiled into the binary.
pub const BUILTIN: &[(&str, &str)] = &[
    (
        "paper_default",
        include_str!("../configs/paper_default.json"),
    ),
    ("sql_design", include_str!("../configs/sql_design.json")),
    (
        "cryo_projection",
        include_str!("../configs/cryo_projection.json"),
    ),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            fmin_hz: 0.1,
            fmax_hz: 1e4,
            points: 1000,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::log(self.fmin_hz, self.fmax_hz, self.points)
    }

    /// Parses `fmin,fmax,n`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config {
            section: "grid".into(),
            message: format!("expected `fmin,fmax,n`, got `{s}`"),
        };
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, n] = parts[..] else {
            return Err(bad());
        };
        let g = Self {
            fmin_hz: a.parse().map_err(|_| bad())?,
            fmax_hz: b.parse().map_err(|_| bad())?,
            points: n.parse().map_err(|_| bad())?,
        };
        g.build()?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumSection {
    /// Explicit circulating power; otherwise taken from the cavity build-up.
    pub circulating_power_w: Option<f64>,
    /// Use the power that places κ = 1 at `target_frequency_hz`.
    pub power_from_sql_target: bool,
    pub target_frequency_hz: f64,
    pub bandwidth: BandwidthModel,
    pub free_mass_floor_hz: f64,
}

impl Default for QuantumSection {
    fn default() -> Self {
        Self {
            circulating_power_w: None,
            power_from_sql_target: false,
            target_frequency_hz: 100.0,
            bandwidth: BandwidthModel::default(),
            free_mass_floor_hz: 10.0,
        }
    }
}

impl QuantumSection {
    pub fn resolve(&self, cavity: &CavityParams) -> Result<QuantumConfig> {
        let pc = if self.power_from_sql_target {
            power_for_sql(cavity, self.bandwidth, self.target_frequency_hz)?
        } else {
            self.circulating_power_w
                .unwrap_or_else(|| cavity.circulating_power(0.0))
        };
        let q = QuantumConfig {
            cavity: cavity.clone(),
            circulating_power_w: pc,
            bandwidth: self.bandwidth,
            free_mass_floor_hz: self.free_mass_floor_hz,
        };
        q.validate()?;
        if !(self.target_frequency_hz.is_finite() && self.target_frequency_hz > 0.0) {
            return Err(Error::param(
                "target_frequency_hz",
                "must be finite and > 0",
            ));
        }
        Ok(q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcousticSection {
    pub peaks: Vec<AcousticPeak>,
}

impl Default for AcousticSection {
    fn default() -> Self {
        Self {
            peaks: default_acoustic_peaks(),
        }
    }
}

/// Which traces enter the budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub seismic: bool,
    pub suspension_thermal: bool,
    pub intensity_rp: bool,
    /// Intensity stabilisation engaged for the `intensity_rp` component.
    pub iss_enabled: bool,
    pub adc: bool,
    pub pll: bool,
    pub acoustic: bool,
    pub quantum: bool,
    pub sql: bool,
    pub laser_frequency_residual: bool,
    /// Report the beat of two identical cavities rather than one cavity.
    pub two_cavities: bool,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            seismic: true,
            suspension_thermal: true,
            intensity_rp: true,
            iss_enabled: true,
            adc: true,
            pll: true,
            acoustic: true,
            quantum: true,
            sql: true,
            laser_frequency_residual: false,
            two_cavities: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub grid: GridConfig,
    pub cavity: CavityParams,
    pub quantum: QuantumSection,
    pub chain: SuspensionChain,
    pub thermal: ThermalConfig,
    pub isolation: IsolationConfig,
    pub readout: ReadoutConfig,
    pub intensity: IntensityNoiseConfig,
    pub acoustic: AcousticSection,
    pub budget: BudgetSection,
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let section = path.split(['.', '[']).next().unwrap_or("").to_string();
            Error::Config {
                section: if section.is_empty() || section == "." {
                    "config".into()
                } else {
                    section
                },
                message: format!("{path}: {}", e.into_inner()),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            section: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        let mut cfg = Self::from_json_str(&text)?;
        if cfg.name.is_empty() {
            cfg.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        // relative data paths are resolved against the config file
        if let Some(dir) = path.parent() {
            for p in [&mut cfg.isolation.ground_csv, &mut cfg.intensity.rin_csv]
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

    pub fn builtin(name: &str) -> Option<Self> {
        BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::from_json_str(text).expect("shipped configs are valid"))
    }

    /// Resolves a `--config` argument: an existing file, then `<name>.json`
    /// in the config directory, then a built-in name.
    pub fn locate(arg: &str, config_dir: Option<&Path>) -> Result<Self> {
        let p = Path::new(arg);
        if p.is_file() {
            return Self::from_file(p);
        }
        if let Some(dir) = config_dir {
            let candidate = dir.join(format!("{arg}.json"));
            if candidate.is_file() {
                return Self::from_file(&candidate);
            }
        }
        Self::builtin(arg).ok_or_else(|| Error::Config {
            section: "config".into(),
            message: format!(
                "`{arg}` is neither a file nor a known scenario ({})",
                BUILTIN
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        })
    }

    /// Checks every section, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let tag = |section: &'static str| move |e: Error| e.in_section(section);
        self.grid.build().map_err(tag("grid"))?;
        self.cavity.validate().map_err(tag("cavity"))?;
        self.quantum.resolve(&self.cavity).map_err(tag("quantum"))?;
        self.chain.validate().map_err(tag("chain"))?;
        self.thermal.validate().map_err(tag("thermal"))?;
        self.isolation.validate().map_err(tag("isolation"))?;
        self.readout.validate().map_err(tag("readout"))?;
        self.intensity.validate().map_err(tag("intensity"))?;
        crate::readout::acoustic_peaks(&self.acoustic.peaks, &FrequencyGrid::default())
            .map_err(tag("acoustic"))?;
        Ok(())
    }
}
