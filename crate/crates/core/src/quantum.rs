//! Quantum noise of a suspended Fabry-Perot cavity: shot noise, radiation
//! pressure noise and the standard quantum limit.
//!
//! The optomechanical coupling is
//!
//! ```text
//! κ(Ω) = ω0·T1·Pc / (m·L²·Ω²·(Ω² + γ²))
//! ```
//!
//! with cavity half-bandwidth `γ`. The lossless model takes `γ = T1·c/(4L)`
//! and ignores the end-mirror transmission and excess loss.

use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::constants::{HBAR, SPEED_OF_LIGHT, TWO_PI};
use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, NoiseBudget, Spectrum, Unit};

pub const SHOT_NOISE: &str = "quantum_shot_noise";
pub const RADIATION_PRESSURE: &str = "quantum_radiation_pressure";
pub const SQL: &str = "sql";

/// How the cavity half-bandwidth in κ is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthModel {
    /// `γ = T1·c/(4L)`: input coupler is the only loss.
    #[default]
    InputCouplerOnly,
    /// `γ = π·FWHM` using the full round-trip loss.
    MeasuredLinewidth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumConfig {
    pub cavity: CavityParams,
    pub circulating_power_w: f64,
    pub bandwidth: BandwidthModel,
    /// Below this frequency the free-mass approximation is flagged.
    pub free_mass_floor_hz: f64,
}

impl QuantumConfig {
    pub fn new(cavity: CavityParams, circulating_power_w: f64) -> Self {
        Self {
            cavity,
            circulating_power_w,
            bandwidth: BandwidthModel::default(),
            free_mass_floor_hz: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        if !(self.circulating_power_w.is_finite() && self.circulating_power_w >= 0.0) {
            return Err(Error::param(
                "circulating_power_w",
                "must be finite and >= 0",
            ));
        }
        if !(self.free_mass_floor_hz.is_finite() && self.free_mass_floor_hz >= 0.0) {
            return Err(Error::param(
                "free_mass_floor_hz",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// Half-bandwidth γ in rad/s.
pub fn cavity_pole(cavity: &CavityParams, model: BandwidthModel) -> f64 {
    match model {
        BandwidthModel::InputCouplerOnly => {
            cavity.input_transmission * SPEED_OF_LIGHT / (4.0 * cavity.length_m)
        }
        BandwidthModel::MeasuredLinewidth => std::f64::consts::PI * cavity.fwhm(),
    }
}

/// SQL displacement PSD `8ħ/(m·Ω²)` at `f` Hz.
pub fn sql_psd_at(mass_kg: f64, f: f64) -> f64 {
    let w = TWO_PI * f;
    8.0 * HBAR / (mass_kg * w * w)
}

pub fn sql_psd(mass_kg: f64, grid: &FrequencyGrid) -> Result<Spectrum> {
    if !(mass_kg.is_finite() && mass_kg > 0.0) {
        return Err(Error::param("mass_kg", "must be finite and > 0"));
    }
    Spectrum::from_fn(grid, Unit::Displacement, |f| sql_psd_at(mass_kg, f).sqrt())
}

/// κ at a single frequency, per watt of circulating power.
fn kappa_per_watt(cavity: &CavityParams, model: BandwidthModel, f: f64) -> f64 {
    let w = TWO_PI * f;
    let g = cavity_pole(cavity, model);
    let l = cavity.length_m;
    cavity.omega0() * cavity.input_transmission
        / (cavity.mirror_mass_kg * l * l * w * w * (w * w + g * g))
}

pub fn kappa_at(q: &QuantumConfig, f: f64) -> f64 {
    q.circulating_power_w * kappa_per_watt(&q.cavity, q.bandwidth, f)
}

pub fn kappa(q: &QuantumConfig, grid: &FrequencyGrid) -> Vec<f64> {
    grid.iter().map(|f| kappa_at(q, f)).collect()
}

/// Circulating power that places κ = 1 at `f_target`.
pub fn power_for_sql(cavity: &CavityParams, model: BandwidthModel, f_target: f64) -> Result<f64> {
    if !(f_target.is_finite() && f_target > 0.0) {
        return Err(Error::param("f_target", "must be finite and > 0"));
    }
    cavity.validate()?;
    Ok(1.0 / kappa_per_watt(cavity, model, f_target))
}

/// Total quantum displacement PSD `S_SQL/2·(1/κ + κ)` at one frequency.
pub fn total_psd_at(q: &QuantumConfig, f: f64) -> f64 {
    let k = kappa_at(q, f);
    0.5 * sql_psd_at(q.cavity.mirror_mass_kg, f) * (1.0 / k + k)
}

#[derive(Clone, Debug)]
pub struct QuantumNoise {
    /// Shot and radiation-pressure components; SQL as a reference trace.
    pub budget: NoiseBudget,
    pub warnings: Vec<String>,
}

pub fn quantum_noise_psd(q: &QuantumConfig, grid: &FrequencyGrid) -> Result<QuantumNoise> {
    q.validate()?;
    if q.circulating_power_w == 0.0 {
        return Err(Error::param(
            "circulating_power_w",
            "shot noise diverges without circulating power",
        ));
    }
    let m = q.cavity.mirror_mass_kg;
    let k = kappa(q, grid);
    let sql: Vec<f64> = grid.iter().map(|f| sql_psd_at(m, f)).collect();
    let qsn: Vec<f64> = sql.iter().zip(&k).map(|(s, k)| s / (2.0 * k)).collect();
    let qrpn: Vec<f64> = sql.iter().zip(&k).map(|(s, k)| s * k / 2.0).collect();

    let mut warnings = Vec::new();
    let below = grid.iter().filter(|f| *f < q.free_mass_floor_hz).count();
    if below > 0 {
        warnings.push(format!(
            "{below} grid points lie below {} Hz where the free-mass approximation is not valid",
            q.free_mass_floor_hz
        ));
    }
    let budget = NoiseBudget::new(
        vec![
            (
                SHOT_NOISE.into(),
                Spectrum::from_psd(grid, &qsn, Unit::Displacement)?,
            ),
            (
                RADIATION_PRESSURE.into(),
                Spectrum::from_psd(grid, &qrpn, Unit::Displacement)?,
            ),
        ],
        vec![(
            SQL.into(),
            Spectrum::from_psd(grid, &sql, Unit::Displacement)?,
        )],
    )?;
    Ok(QuantumNoise { budget, warnings })
}
