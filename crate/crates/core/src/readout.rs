//! Classical readout and technical noise: PLL floor, ADC quantization behind
//! a whitening filter, laser intensity noise through radiation pressure and
//! acoustic pick-up.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::constants::{SPEED_OF_LIGHT, TWO_PI};
use crate::error::{Error, Result};
use crate::spectra::{cumulative_rms, FrequencyGrid, NoiseBudget, Spectrum, Unit};
use crate::suspension::LinearModel;
use crate::tf::{roots, Zpk, ZpkConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutConfig {
    pub vco_range_hz: f64,
    pub pll_noise_floor_hz_per_rthz: f64,
    pub adc_bits: u32,
    pub adc_fullscale_vpp: f64,
    pub sample_rate_hz: f64,
    /// Analogue whitening in front of the ADC, rad/s.
    pub whitening: ZpkConfig,
    /// Beat-frequency calibration of the digitised control signal.
    pub volts_to_hz: f64,
    /// Optional flat residual laser frequency noise (off when zero).
    pub laser_frequency_residual_hz_per_rthz: f64,
}

/// Two zeros at 5 Hz and two poles at 150 Hz with unity DC gain.
pub fn default_whitening() -> Zpk {
    Zpk::new(
        vec![roots::real_hz(5.0); 2],
        vec![roots::real_hz(150.0); 2],
        (150.0f64 / 5.0).powi(2),
    )
    .expect("real roots")
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            vco_range_hz: 50e6,
            pll_noise_floor_hz_per_rthz: 0.13,
            adc_bits: 16,
            adc_fullscale_vpp: 20.0,
            sample_rate_hz: 64e3,
            whitening: ZpkConfig::from(&default_whitening()),
            volts_to_hz: 1.2e9,
            laser_frequency_residual_hz_per_rthz: 0.0,
        }
    }
}

impl ReadoutConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        pos("vco_range_hz", self.vco_range_hz)?;
        pos("adc_fullscale_vpp", self.adc_fullscale_vpp)?;
        pos("sample_rate_hz", self.sample_rate_hz)?;
        pos("volts_to_hz", self.volts_to_hz)?;
        if self.adc_bits == 0 || self.adc_bits > 64 {
            return Err(Error::param("adc_bits", "must lie in 1..=64"));
        }
        for (name, v) in [
            (
                "pll_noise_floor_hz_per_rthz",
                self.pll_noise_floor_hz_per_rthz,
            ),
            (
                "laser_frequency_residual_hz_per_rthz",
                self.laser_frequency_residual_hz_per_rthz,
            ),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, "must be finite and >= 0"));
            }
        }
        self.whitening.to_zpk()?;
        Ok(())
    }

    /// Quantization noise `LSB/√(12·f_Nyquist)` in V/√Hz.
    pub fn adc_voltage_noise(&self) -> f64 {
        let lsb = self.adc_fullscale_vpp / 2f64.powi(self.adc_bits as i32);
        lsb / (12.0 * self.sample_rate_hz / 2.0).sqrt()
    }
}

/// ADC noise of one cavity readout referred to cavity length.
pub fn adc_noise_asd(
    cfg: &ReadoutConfig,
    cavity: &CavityParams,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    cfg.validate()?;
    let w = cfg.whitening.to_zpk()?;
    let v = cfg.adc_voltage_noise();
    let hz = Spectrum::from_fn(grid, Unit::Frequency, |f| {
        v / w.eval_hz(f).norm() * cfg.volts_to_hz
    })?;
    cavity.freq_to_disp(&hz)
}

pub fn pll_noise_asd(
    cfg: &ReadoutConfig,
    cavity: &CavityParams,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    cfg.validate()?;
    cavity.freq_to_disp(&Spectrum::flat(
        grid,
        cfg.pll_noise_floor_hz_per_rthz,
        Unit::Frequency,
    )?)
}

pub fn laser_frequency_residual_asd(
    cfg: &ReadoutConfig,
    cavity: &CavityParams,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    cfg.validate()?;
    cavity.freq_to_disp(&Spectrum::flat(
        grid,
        cfg.laser_frequency_residual_hz_per_rthz,
        Unit::Frequency,
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntensityNoiseConfig {
    /// Flat relative intensity noise, 1/√Hz.
    pub rin_per_rthz: f64,
    /// Optional CSV `frequency_hz,rin_per_rthz` replacing the flat level.
    pub rin_csv: Option<PathBuf>,
    /// Low-frequency suppression of the intensity stabilisation.
    pub iss_factor: f64,
    /// Frequency above which the stabilisation gain rolls off.
    pub iss_corner_hz: f64,
    /// Overrides the circulating power derived from the cavity build-up.
    pub circulating_power_w: Option<f64>,
}

impl Default for IntensityNoiseConfig {
    fn default() -> Self {
        Self {
            rin_per_rthz: 2e-5,
            rin_csv: None,
            iss_factor: 5.0,
            iss_corner_hz: 300.0,
            circulating_power_w: None,
        }
    }
}

impl IntensityNoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rin_per_rthz.is_finite() && self.rin_per_rthz >= 0.0) {
            return Err(Error::param("rin_per_rthz", "must be finite and >= 0"));
        }
        if !(self.iss_factor.is_finite() && self.iss_factor >= 1.0) {
            return Err(Error::param("iss_factor", "must be >= 1"));
        }
        if !(self.iss_corner_hz.is_finite() && self.iss_corner_hz > 0.0) {
            return Err(Error::param("iss_corner_hz", "must be finite and > 0"));
        }
        if let Some(p) = self.circulating_power_w {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::param(
                    "circulating_power_w",
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }

    /// `|1 + (F − 1)/(1 + i·f/fc)|`, which is at least 1 for `F ≥ 1`.
    pub fn iss_suppression(&self, f: f64) -> f64 {
        let x = f / self.iss_corner_hz;
        let d = 1.0 + x * x;
        let a = self.iss_factor - 1.0;
        let re = 1.0 + a / d;
        let im = -a * x / d;
        re.hypot(im)
    }

    pub fn rin(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        match &self.rin_csv {
            Some(p) => {
                crate::csvio::read_spectrum_file(p, "rin_per_rthz", Unit::Relative)?.resample(grid)
            }
            None => Spectrum::flat(grid, self.rin_per_rthz, Unit::Relative),
        }
    }

    pub fn power(&self, cavity: &CavityParams) -> f64 {
        self.circulating_power_w
            .unwrap_or_else(|| cavity.circulating_power(0.0))
    }
}

/// Mirror displacement from radiation-pressure fluctuations
/// `2·Pc·RIN/c` acting through the mirror's mechanical compliance.
pub fn intensity_rp_displacement(
    cfg: &IntensityNoiseConfig,
    cavity: &CavityParams,
    model: &LinearModel,
    grid: &FrequencyGrid,
    iss_on: bool,
) -> Result<Spectrum> {
    cfg.validate()?;
    let rin = cfg.rin(grid)?;
    let pc = cfg.power(cavity);
    let node = model.mirror_index();
    let asd = grid
        .iter()
        .zip(rin.asd())
        .map(|(f, r)| {
            let force = 2.0 * pc * r / SPEED_OF_LIGHT;
            let x = model.compliance(f, node)?.norm() * force;
            Ok(if iss_on {
                x / cfg.iss_suppression(f)
            } else {
                x
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::computed(grid.clone(), asd, Unit::Displacement)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcousticPeak {
    pub center_hz: f64,
    pub width_hz: f64,
    pub height_m_per_rthz: f64,
}

pub fn default_acoustic_peaks() -> Vec<AcousticPeak> {
    let p = |center_hz, width_hz, height_m_per_rthz| AcousticPeak {
        center_hz,
        width_hz,
        height_m_per_rthz,
    };
    vec![
        p(230.0, 20.0, 2e-15),
        p(310.0, 30.0, 3e-15),
        p(370.0, 25.0, 1.5e-15),
    ]
}

/// Lorentzian bumps (in power) summed in quadrature.
pub fn acoustic_peaks(peaks: &[AcousticPeak], grid: &FrequencyGrid) -> Result<Spectrum> {
    for p in peaks {
        if !(p.width_hz.is_finite() && p.width_hz > 0.0) {
            return Err(Error::param("width_hz", "acoustic peak widths must be > 0"));
        }
        if !(p.height_m_per_rthz.is_finite()
            && p.height_m_per_rthz >= 0.0
            && p.center_hz.is_finite())
        {
            return Err(Error::param(
                "acoustic_peaks",
                "centres and heights must be finite",
            ));
        }
    }
    Spectrum::from_fn(grid, Unit::Displacement, |f| {
        peaks
            .iter()
            .map(|p| {
                let u = 2.0 * (f - p.center_hz) / p.width_hz;
                p.height_m_per_rthz * p.height_m_per_rthz / (1.0 + u * u)
            })
            .sum::<f64>()
            .sqrt()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationMargin {
    pub rms_m: f64,
    pub rms_hz: f64,
    /// `None` when the RMS is zero and the margin is unbounded.
    pub margin_ratio: Option<f64>,
}

impl SaturationMargin {
    pub fn saturated(&self) -> bool {
        self.margin_ratio.is_some_and(|m| m < 1.0)
    }
}

/// Ratio of the VCO range to the RMS beat-frequency excursion implied by the
/// budget total.
pub fn saturation_margin(
    budget: &NoiseBudget,
    cfg: &ReadoutConfig,
    cavity: &CavityParams,
) -> Result<SaturationMargin> {
    budget.total().ensure_unit(Unit::Displacement)?;
    if budget.grid().min() > 0.5 {
        return Err(Error::param(
            "grid",
            "saturation margin needs a grid reaching down to 0.5 Hz or below",
        ));
    }
    Ok(margin_for_rms(
        cumulative_rms(budget.total()).asd()[0],
        cfg,
        cavity,
    ))
}

pub fn margin_for_rms(rms_m: f64, cfg: &ReadoutConfig, cavity: &CavityParams) -> SaturationMargin {
    let rms_hz = cavity.frequency_for_displacement(rms_m);
    SaturationMargin {
        rms_m,
        rms_hz,
        margin_ratio: (rms_hz > 0.0).then(|| cfg.vco_range_hz / rms_hz),
    }
}

/// Free-mass radiation-pressure displacement, used as a reference check.
pub fn free_mass_rp(pc: f64, rin: f64, mass: f64, f: f64) -> f64 {
    let w = TWO_PI * f;
    2.0 * pc * rin / (SPEED_OF_LIGHT * mass * w * w)
}
