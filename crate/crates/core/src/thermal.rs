//! Suspension thermal noise from the fluctuation-dissipation theorem,
//! `S_x(Ω) = 4·k_B·T·Re(Y(Ω))/Ω²`.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, TWO_PI};
use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Spectrum, Unit};
use crate::suspension::LinearModel;
use crate::tf::FrequencyResponse;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalConfig {
    pub temperature_k: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            temperature_k: 293.0,
        }
    }
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature_k.is_finite() && self.temperature_k > 0.0 {
            Ok(())
        } else {
            Err(Error::param("temperature_k", "must be finite and > 0"))
        }
    }
}

/// Velocity response of the mirror to a force applied to the mirror.
pub fn mirror_admittance(model: &LinearModel, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
    let node = model.mirror_index();
    let values = grid
        .iter()
        .map(|f| Ok(Complex64::new(0.0, TWO_PI * f) * model.compliance(f, node)?))
        .collect::<Result<Vec<_>>>()?;
    FrequencyResponse::new(grid.clone(), values)
}

/// Thermal displacement ASD of one mirror.
pub fn thermal_displacement(
    cfg: &ThermalConfig,
    model: &LinearModel,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    cfg.validate()?;
    let y = mirror_admittance(model, grid)?;
    let psd: Vec<f64> = grid
        .iter()
        .zip(y.values())
        .map(|(f, y)| {
            let w = TWO_PI * f;
            // passivity guarantees Re(Y) >= 0; clamp solver round-off
            4.0 * BOLTZMANN * cfg.temperature_k * y.re.max(0.0) / (w * w)
        })
        .collect();
    Spectrum::from_psd(grid, &psd, Unit::Displacement)
}

/// Cavity length noise from two mirrors with uncorrelated thermal motion.
pub fn differential_thermal_displacement(
    cfg: &ThermalConfig,
    model: &LinearModel,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    thermal_displacement(cfg, model, grid)?.scaled(std::f64::consts::SQRT_2)
}
