//! Scenario orchestration: evaluates the modules for one config and writes
//! CSV tables plus a JSON manifest describing them.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::csvio::write_columns;
use crate::error::{Error, Result};
use crate::isolation::{design_check, ClosedLoop, DesignReport};
use crate::quantum::{self, kappa_at, power_for_sql, quantum_noise_psd};
use crate::readout::{
    acoustic_peaks, adc_noise_asd, intensity_rp_displacement, laser_frequency_residual_asd,
    margin_for_rms, pll_noise_asd, saturation_margin, SaturationMargin,
};
use crate::spectra::{cumulative_rms, FrequencyGrid, NoiseBudget, Spectrum, Unit};
use crate::suspension::{
    build_model, seismic_to_cavity, vertical_to_cavity, write_mode_table, Axis, Mode,
};
use crate::tf::FrequencyResponse;
use crate::thermal::differential_thermal_displacement;

pub mod trace {
    pub const SEISMIC: &str = "seismic";
    pub const THERMAL: &str = "suspension_thermal";
    pub const INTENSITY: &str = "intensity_rp";
    pub const INTENSITY_ISS_OFF: &str = "intensity_rp_iss_off";
    pub const ADC: &str = "adc";
    pub const PLL: &str = "pll";
    pub const ACOUSTIC: &str = "acoustic";
    pub const QUANTUM: &str = "quantum_total";
    pub const SQL: &str = "sql";
    pub const LASER: &str = "laser_frequency_residual";
}

/// Axis description for plotting tools.
#[derive(Clone, Debug, Serialize)]
pub struct AxisSpec {
    pub label: String,
    pub unit: String,
    pub log: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileSpec {
    pub file: String,
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub traces: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<S> {
    pub scenario: String,
    pub command: &'static str,
    pub files: Vec<FileSpec>,
    pub warnings: Vec<String>,
    pub summary: S,
}

fn freq_axis() -> AxisSpec {
    AxisSpec {
        label: "frequency".into(),
        unit: "Hz".into(),
        log: true,
    }
}

fn y_axis(label: &str, unit: &str, log: bool) -> AxisSpec {
    AxisSpec {
        label: label.into(),
        unit: unit.into(),
        log,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_manifest<S: Serialize>(dir: &Path, m: &Manifest<S>) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(m)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

fn with_section<T>(section: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_section(section))
}

/// Rejects an RMS figure that overflowed while integrating.
fn finite(value: f64, s: &Spectrum) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            frequency_hz: s.grid().min(),
        })
    }
}

fn full_rms(s: &Spectrum) -> Result<f64> {
    finite(cumulative_rms(s).asd()[0], s)
}

/// Two independent, identical cavities add in quadrature.
fn cavity_pair_factor(cfg: &ScenarioConfig) -> f64 {
    if cfg.budget.two_cavities {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// Closed (or open, when disabled) horizontal isolation loop.
fn isolation_loop(cfg: &ScenarioConfig, grid: &FrequencyGrid) -> Result<ClosedLoop> {
    with_section("isolation", cfg.isolation.close(Axis::Horizontal, grid))
}

// ---------------------------------------------------------------- budget

#[derive(Clone, Debug, Serialize)]
pub struct BudgetSummary {
    pub total_at_100hz: f64,
    pub min_total_100hz_to_1khz: f64,
    pub min_total_frequency_hz: f64,
    pub total_rms_m: f64,
    pub seismic_rms_m: Option<f64>,
    pub beat_rms_hz: f64,
    /// Absent when the RMS is zero.
    pub vco_margin_ratio: Option<f64>,
    pub saturated: bool,
    /// Largest ratio of the budget total with ISS off to the total with ISS
    /// on over 30–100 Hz.
    pub iss_total_ratio_30_100hz: f64,
    pub circulating_power_w: f64,
}

#[derive(Clone, Debug)]
pub struct BudgetRun {
    pub name: String,
    pub budget: NoiseBudget,
    /// Budget total recomputed with the intensity stabilisation off.
    pub total_iss_off: Spectrum,
    pub margin: Option<SaturationMargin>,
    pub summary: BudgetSummary,
    pub warnings: Vec<String>,
}

pub fn run_budget(cfg: &ScenarioConfig) -> Result<BudgetRun> {
    cfg.validate()?;
    let grid = with_section("grid", cfg.grid.build())?;
    let pair = cavity_pair_factor(cfg);
    let b = &cfg.budget;
    let cavity = &cfg.cavity;
    let mut warnings = Vec::new();
    let mut components: Vec<(String, Spectrum)> = Vec::new();
    let mut references: Vec<(String, Spectrum)> = Vec::new();

    let model = with_section("chain", build_model(&cfg.chain, Axis::Horizontal))?;

    if b.seismic {
        let ground = with_section("isolation", cfg.isolation.ground_spectrum(&grid))?;
        let cl = isolation_loop(cfg, &grid)?;
        let s = with_section(
            "chain",
            seismic_to_cavity(&cfg.chain, &ground, &cl.suppression, &grid),
        )?;
        components.push((trace::SEISMIC.into(), s.scaled(pair)?));
    }
    if b.suspension_thermal {
        let t = with_section(
            "thermal",
            differential_thermal_displacement(&cfg.thermal, &model, &grid),
        )?;
        components.push((trace::THERMAL.into(), t.scaled(pair)?));
    }
    // Radiation pressure pushes the two mirrors of a cavity apart
    // coherently, doubling the single-mirror length change.
    let intensity = |iss_on: bool| -> Result<Spectrum> {
        let x = intensity_rp_displacement(&cfg.intensity, cavity, &model, &grid, iss_on)?;
        x.scaled(2.0 * pair)
    };
    let iss_off = if b.intensity_rp {
        let on = with_section("intensity", intensity(b.iss_enabled))?;
        let off = with_section("intensity", intensity(false))?;
        components.push((trace::INTENSITY.into(), on));
        references.push((trace::INTENSITY_ISS_OFF.into(), off.clone()));
        Some(off)
    } else {
        None
    };
    if b.adc {
        let s = with_section("readout", adc_noise_asd(&cfg.readout, cavity, &grid))?;
        components.push((trace::ADC.into(), s.scaled(pair)?));
    }
    if b.pll {
        let s = with_section("readout", pll_noise_asd(&cfg.readout, cavity, &grid))?;
        components.push((trace::PLL.into(), s.scaled(pair)?));
    }
    if b.laser_frequency_residual {
        let s = with_section(
            "readout",
            laser_frequency_residual_asd(&cfg.readout, cavity, &grid),
        )?;
        components.push((trace::LASER.into(), s.scaled(pair)?));
    }
    if b.acoustic {
        let s = with_section("acoustic", acoustic_peaks(&cfg.acoustic.peaks, &grid))?;
        components.push((trace::ACOUSTIC.into(), s));
    }
    let q = with_section("quantum", cfg.quantum.resolve(cavity))?;
    if b.quantum || b.sql {
        let qn = with_section("quantum", quantum_noise_psd(&q, &grid))?;
        if b.quantum {
            warnings.extend(qn.warnings.iter().cloned());
            components.push((trace::QUANTUM.into(), qn.budget.total().scaled(pair)?));
        }
        if b.sql {
            let sql = qn
                .budget
                .get(quantum::SQL)
                .expect("sql reference")
                .scaled(pair)?;
            components.push((trace::SQL.into(), sql));
        }
    }
    if components.is_empty() {
        return Err(Error::Config {
            section: "budget".into(),
            message: "every noise source is disabled".into(),
        });
    }

    let budget = NoiseBudget::new(components, references)?;
    let total = budget.total();

    // Same budget with the intensity term swapped for its ISS-off trace.
    let total_iss_off = match &iss_off {
        Some(off) => crate::spectra::sum_uncorrelated(budget.components().iter().map(|(n, s)| {
            if n == trace::INTENSITY {
                off
            } else {
                s
            }
        }))?,
        None => total.clone(),
    };
    let iss_ratio = grid
        .iter()
        .enumerate()
        .filter(|(_, f)| (30.0..=100.0).contains(f))
        .map(|(i, _)| total_iss_off.asd()[i] / total.asd()[i])
        .fold(f64::NAN, f64::max);

    let (min_val, min_f) = grid
        .iter()
        .zip(total.asd())
        .filter(|(f, _)| (100.0..=1000.0).contains(f))
        .map(|(f, v)| (*v, f))
        .fold((f64::NAN, f64::NAN), |acc, x| {
            if acc.0.is_nan() || x.0 < acc.0 {
                x
            } else {
                acc
            }
        });

    let margin = if grid.min() <= 0.5 {
        Some(saturation_margin(&budget, &cfg.readout, cavity)?)
    } else {
        warnings.push("grid starts above 0.5 Hz; saturation margin not evaluated".into());
        None
    };
    let total_rms = full_rms(total)?;
    let fallback = margin_for_rms(total_rms, &cfg.readout, cavity);
    let m = margin.unwrap_or(fallback);
    if m.saturated() {
        warnings.push(format!(
            "beat RMS {:.3e} Hz exceeds the VCO range of {:.3e} Hz",
            m.rms_hz, cfg.readout.vco_range_hz
        ));
    }
    let summary = BudgetSummary {
        total_at_100hz: total.at(100.0),
        min_total_100hz_to_1khz: min_val,
        min_total_frequency_hz: min_f,
        total_rms_m: total_rms,
        seismic_rms_m: budget.get(trace::SEISMIC).map(full_rms).transpose()?,
        beat_rms_hz: m.rms_hz,
        vco_margin_ratio: m.margin_ratio,
        saturated: m.saturated(),
        iss_total_ratio_30_100hz: iss_ratio,
        circulating_power_w: q.circulating_power_w,
    };
    Ok(BudgetRun {
        name: cfg.name.clone(),
        budget,
        total_iss_off,
        margin,
        summary,
        warnings,
    })
}

impl BudgetRun {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.budget.write_csv(create(dir, "budget.csv")?)?;
        self.budget
            .write_cumulative_rms_csv(create(dir, "budget_cumulative_rms.csv")?)?;
        let names: Vec<String> = self
            .budget
            .trace_names()
            .into_iter()
            .map(String::from)
            .collect();
        let unit = Unit::Displacement.symbol();
        let manifest = Manifest {
            scenario: self.name.clone(),
            command: "budget",
            files: vec![
                FileSpec {
                    file: "budget.csv".into(),
                    x: freq_axis(),
                    y: y_axis("displacement ASD", unit, true),
                    traces: names.clone(),
                },
                FileSpec {
                    file: "budget_cumulative_rms.csv".into(),
                    x: freq_axis(),
                    y: y_axis("cumulative RMS from high frequency", "m", true),
                    traces: names,
                },
            ],
            warnings: self.warnings.clone(),
            summary: &self.summary,
        };
        let m = write_manifest(dir, &manifest)?;
        Ok(vec![
            dir.join("budget.csv"),
            dir.join("budget_cumulative_rms.csv"),
            m,
        ])
    }
}

// ---------------------------------------------------- suspension transfer

#[derive(Clone, Debug, Serialize)]
pub struct ModeSummary {
    pub frequency_hz: f64,
    pub q: Option<f64>,
    pub dominant_stage: String,
}

impl From<&Mode> for ModeSummary {
    fn from(m: &Mode) -> Self {
        Self {
            frequency_hz: m.frequency_hz,
            q: m.q,
            dominant_stage: m.dominant_stage.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuspensionSummary {
    pub stiffness_mismatch: f64,
    pub horizontal_modes: Vec<ModeSummary>,
    pub vertical_modes: Vec<ModeSummary>,
    pub all_modes_below_10hz: bool,
    /// Log-log slope of the differential response from 0.1 Hz to a quarter
    /// of the first resonance.
    pub low_frequency_slope: Option<f64>,
    pub peak_magnitude: f64,
}

#[derive(Clone, Debug)]
pub struct SuspensionRun {
    pub name: String,
    pub differential: FrequencyResponse,
    pub mirror: FrequencyResponse,
    pub vertical: Option<FrequencyResponse>,
    pub horizontal_modes: Vec<Mode>,
    pub vertical_modes: Vec<Mode>,
    pub summary: SuspensionSummary,
    pub warnings: Vec<String>,
}

pub fn run_suspension_tf(cfg: &ScenarioConfig) -> Result<SuspensionRun> {
    cfg.validate()?;
    let grid = with_section("grid", cfg.grid.build())?;
    let chain = &cfg.chain;
    let model = with_section("chain", build_model(chain, Axis::Horizontal))?;
    let differential = with_section("chain", model.tf_suspoint_to_differential(&grid))?;
    let mirror = with_section("chain", model.tf_suspoint_to_mirror(&grid))?;
    let horizontal_modes = with_section("chain", model.eigenmodes())?;
    let mut warnings = Vec::new();
    let (vertical, vertical_modes) = if chain.stages.len() == 3 {
        let vm = with_section("chain", build_model(chain, Axis::Vertical))?;
        (
            Some(with_section("chain", vertical_to_cavity(chain, &grid))?),
            with_section("chain", vm.eigenmodes())?,
        )
    } else {
        warnings.push("vertical model skipped: it needs exactly three blade stages".into());
        (None, Vec::new())
    };
    if chain.stiffness_mismatch == 0.0 {
        warnings.push("stiffness mismatch is zero: the differential response vanishes".into());
    }
    let f1 = horizontal_modes[0].frequency_hz;
    let slope_hi = f1 / 4.0;
    let low_frequency_slope =
        (grid.min() <= 0.1 && slope_hi > 0.1 && chain.stiffness_mismatch > 0.0)
            .then(|| differential.log_slope(0.1, slope_hi));
    let peak_magnitude = differential.magnitude().into_iter().fold(0.0, f64::max);
    let summary = SuspensionSummary {
        stiffness_mismatch: chain.stiffness_mismatch,
        all_modes_below_10hz: horizontal_modes
            .iter()
            .chain(&vertical_modes)
            .all(|m| m.frequency_hz < 10.0),
        horizontal_modes: horizontal_modes.iter().map(ModeSummary::from).collect(),
        vertical_modes: vertical_modes.iter().map(ModeSummary::from).collect(),
        low_frequency_slope,
        peak_magnitude,
    };
    Ok(SuspensionRun {
        name: cfg.name.clone(),
        differential,
        mirror,
        vertical,
        horizontal_modes,
        vertical_modes,
        summary,
        warnings,
    })
}

impl SuspensionRun {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let peak = self.summary.peak_magnitude;
        let mag = self.differential.magnitude();
        // peak-normalised copy for shape comparison against measurements
        let normalised: Vec<f64> = mag
            .iter()
            .map(|m| if peak > 0.0 { m / peak } else { 0.0 })
            .collect();
        let mut names = vec![
            "differential_magnitude",
            "differential_phase_deg",
            "differential_normalized",
            "mirror_magnitude",
            "mirror_phase_deg",
        ];
        let dphase = self.differential.phase_deg();
        let mmag = self.mirror.magnitude();
        let mphase = self.mirror.phase_deg();
        let vmag = self.vertical.as_ref().map(FrequencyResponse::magnitude);
        let mut cols: Vec<&[f64]> = vec![&mag, &dphase, &normalised, &mmag, &mphase];
        if let Some(v) = &vmag {
            names.push("vertical_to_cavity_magnitude");
            cols.push(v);
        }
        write_columns(
            create(dir, "suspension_tf.csv")?,
            self.differential.grid().values(),
            &names,
            &cols,
        )?;
        write_mode_table(create(dir, "suspension_modes.csv")?, &self.horizontal_modes)?;
        let mut files = vec![
            dir.join("suspension_tf.csv"),
            dir.join("suspension_modes.csv"),
        ];
        if !self.vertical_modes.is_empty() {
            write_mode_table(
                create(dir, "suspension_vertical_modes.csv")?,
                &self.vertical_modes,
            )?;
            files.push(dir.join("suspension_vertical_modes.csv"));
        }
        let manifest = Manifest {
            scenario: self.name.clone(),
            command: "suspension-tf",
            files: vec![FileSpec {
                file: "suspension_tf.csv".into(),
                x: freq_axis(),
                y: y_axis("suspension point to cavity length", "m/m", true),
                traces: names.iter().map(|s| s.to_string()).collect(),
            }],
            warnings: self.warnings.clone(),
            summary: &self.summary,
        };
        files.push(write_manifest(dir, &manifest)?);
        Ok(files)
    }
}

// ------------------------------------------------------------- isolation

#[derive(Clone, Debug, Serialize)]
pub struct CrossingSummary {
    pub frequency_hz: f64,
    pub phase_margin_deg: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsolationSummary {
    pub band_hz: [f64; 2],
    pub passive_band_rms_m: f64,
    pub active_band_rms_m: f64,
    /// Passive over active band RMS.
    pub reduction_ratio: f64,
    pub unity_gain: Vec<CrossingSummary>,
    pub stable: bool,
    pub design_ok: bool,
    pub cavity_passive_rms_m: f64,
    pub cavity_active_rms_m: f64,
    pub cavity_active_vco_margin: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct IsolationRun {
    pub name: String,
    pub ground: Spectrum,
    pub passive: Spectrum,
    pub active: Spectrum,
    pub cavity_passive: Spectrum,
    pub cavity_active: Spectrum,
    pub closed_loop: ClosedLoop,
    pub design: DesignReport,
    pub summary: IsolationSummary,
    pub warnings: Vec<String>,
}

pub const ISOLATION_BAND_HZ: [f64; 2] = [0.5, 50.0];

pub fn run_isolation(cfg: &ScenarioConfig) -> Result<IsolationRun> {
    cfg.validate()?;
    let grid = with_section("grid", cfg.grid.build())?;
    let ground = with_section("isolation", cfg.isolation.ground_spectrum(&grid))?;
    let cl = isolation_loop(cfg, &grid)?;
    let passive = cl.passive.apply(&ground, Unit::Displacement)?;
    let active = cl.suppression.apply(&ground, Unit::Displacement)?;
    let pair = cavity_pair_factor(cfg);
    let cavity_passive = with_section(
        "chain",
        seismic_to_cavity(&cfg.chain, &ground, &cl.passive, &grid),
    )?
    .scaled(pair)?;
    let cavity_active = with_section(
        "chain",
        seismic_to_cavity(&cfg.chain, &ground, &cl.suppression, &grid),
    )?
    .scaled(pair)?;
    let design = design_check(&cl, 30.0);
    let mut warnings = design.violations.clone();
    let [lo, hi] = ISOLATION_BAND_HZ;
    if grid.min() > lo || grid.max() < hi {
        warnings.push(format!("grid does not cover the {lo}-{hi} Hz RMS band"));
    }
    let pb = finite(passive.band_rms(lo, hi), &passive)?;
    let ab = finite(active.band_rms(lo, hi), &active)?;
    let cav_passive_rms = full_rms(&cavity_passive)?;
    let cav_active_rms = full_rms(&cavity_active)?;
    full_rms(&ground)?;
    let summary = IsolationSummary {
        band_hz: ISOLATION_BAND_HZ,
        passive_band_rms_m: pb,
        active_band_rms_m: ab,
        reduction_ratio: pb / ab,
        unity_gain: cl
            .crossings
            .iter()
            .map(|c| CrossingSummary {
                frequency_hz: c.frequency_hz,
                phase_margin_deg: c.phase_margin_deg,
            })
            .collect(),
        stable: cl.stable,
        design_ok: design.ok(),
        cavity_passive_rms_m: cav_passive_rms,
        cavity_active_rms_m: cav_active_rms,
        cavity_active_vco_margin: margin_for_rms(cav_active_rms, &cfg.readout, &cfg.cavity)
            .margin_ratio,
    };
    Ok(IsolationRun {
        name: cfg.name.clone(),
        ground,
        passive,
        active,
        cavity_passive,
        cavity_active,
        closed_loop: cl,
        design,
        summary,
        warnings,
    })
}

impl IsolationRun {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let f = self.ground.grid().values();
        let g = &self.closed_loop.loop_gain;
        let gmag = g.magnitude();
        let gphase = g.phase_deg();
        let one_plus_g: Vec<f64> = g.values().iter().map(|v| (1.0 + v).norm()).collect();
        let names = [
            "ground",
            "payload_passive",
            "payload_active",
            "cavity_passive",
            "cavity_active",
            "loop_gain_magnitude",
            "loop_gain_phase_deg",
            "suppression",
        ];
        write_columns(
            create(dir, "isolation.csv")?,
            f,
            &names,
            &[
                self.ground.asd(),
                self.passive.asd(),
                self.active.asd(),
                self.cavity_passive.asd(),
                self.cavity_active.asd(),
                &gmag,
                &gphase,
                &one_plus_g,
            ],
        )?;
        let rms = |s: &Spectrum| cumulative_rms(s).asd().to_vec();
        let rms_names = [
            "ground",
            "payload_passive",
            "payload_active",
            "cavity_passive",
            "cavity_active",
        ];
        let cols = [
            rms(&self.ground),
            rms(&self.passive),
            rms(&self.active),
            rms(&self.cavity_passive),
            rms(&self.cavity_active),
        ];
        let col_refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        write_columns(
            create(dir, "isolation_cumulative_rms.csv")?,
            f,
            &rms_names,
            &col_refs,
        )?;
        let unit = Unit::Displacement.symbol();
        let manifest = Manifest {
            scenario: self.name.clone(),
            command: "isolation",
            files: vec![
                FileSpec {
                    file: "isolation.csv".into(),
                    x: freq_axis(),
                    y: y_axis("displacement ASD and loop response", unit, true),
                    traces: names.iter().map(|s| s.to_string()).collect(),
                },
                FileSpec {
                    file: "isolation_cumulative_rms.csv".into(),
                    x: freq_axis(),
                    y: y_axis("cumulative RMS from high frequency", "m", true),
                    traces: rms_names.iter().map(|s| s.to_string()).collect(),
                },
            ],
            warnings: self.warnings.clone(),
            summary: &self.summary,
        };
        let m = write_manifest(dir, &manifest)?;
        Ok(vec![
            dir.join("isolation.csv"),
            dir.join("isolation_cumulative_rms.csv"),
            m,
        ])
    }
}

// --------------------------------------------------------------- quantum

#[derive(Clone, Debug, Serialize)]
pub struct QuantumSummary {
    pub circulating_power_w: f64,
    pub target_frequency_hz: f64,
    pub power_for_sql_at_target_w: f64,
    /// Frequency where κ = 1 for the circulating power in use.
    pub kappa_unity_frequency_hz: f64,
    pub sql_asd_at_100hz: f64,
    pub free_mass_floor_hz: f64,
}

#[derive(Clone, Debug)]
pub struct QuantumRun {
    pub name: String,
    pub budget: NoiseBudget,
    pub kappa: Vec<f64>,
    pub summary: QuantumSummary,
    pub warnings: Vec<String>,
}

pub fn run_quantum_design(cfg: &ScenarioConfig) -> Result<QuantumRun> {
    cfg.validate()?;
    let grid = with_section("grid", cfg.grid.build())?;
    let q = with_section("quantum", cfg.quantum.resolve(&cfg.cavity))?;
    let qn = with_section("quantum", quantum_noise_psd(&q, &grid))?;
    let target = cfg.quantum.target_frequency_hz;
    let p_sql = with_section("quantum", power_for_sql(&cfg.cavity, q.bandwidth, target))?;
    // κ falls monotonically with frequency, so bisect in log-frequency
    let (mut a, mut b) = (1e-6f64.ln(), 1e9f64.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if kappa_at(&q, m.exp()) > 1.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let summary = QuantumSummary {
        circulating_power_w: q.circulating_power_w,
        target_frequency_hz: target,
        power_for_sql_at_target_w: p_sql,
        kappa_unity_frequency_hz: (0.5 * (a + b)).exp(),
        sql_asd_at_100hz: quantum::sql_psd_at(cfg.cavity.mirror_mass_kg, 100.0).sqrt(),
        free_mass_floor_hz: q.free_mass_floor_hz,
    };
    Ok(QuantumRun {
        name: cfg.name.clone(),
        kappa: quantum::kappa(&q, &grid),
        budget: qn.budget,
        summary,
        warnings: qn.warnings,
    })
}

impl QuantumRun {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let b = &self.budget;
        let names = [
            quantum::SHOT_NOISE,
            quantum::RADIATION_PRESSURE,
            "total",
            quantum::SQL,
            "kappa",
        ];
        write_columns(
            create(dir, "quantum.csv")?,
            b.grid().values(),
            &names,
            &[
                b.get(quantum::SHOT_NOISE).expect("component").asd(),
                b.get(quantum::RADIATION_PRESSURE).expect("component").asd(),
                b.total().asd(),
                b.get(quantum::SQL).expect("reference").asd(),
                &self.kappa,
            ],
        )?;
        let manifest = Manifest {
            scenario: self.name.clone(),
            command: "quantum",
            files: vec![FileSpec {
                file: "quantum.csv".into(),
                x: freq_axis(),
                y: y_axis(
                    "displacement ASD (kappa dimensionless)",
                    Unit::Displacement.symbol(),
                    true,
                ),
                traces: names.iter().map(|s| s.to_string()).collect(),
            }],
            warnings: self.warnings.clone(),
            summary: &self.summary,
        };
        let m = write_manifest(dir, &manifest)?;
        Ok(vec![dir.join("quantum.csv"), m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> ScenarioConfig {
        ScenarioConfig::builtin("paper_default").unwrap()
    }

    #[test]
    fn sql_only_budget_is_the_sql() {
        let mut cfg = paper();
        cfg.budget = crate::config::BudgetSection {
            seismic: false,
            suspension_thermal: false,
            intensity_rp: false,
            adc: false,
            pll: false,
            acoustic: false,
            quantum: false,
            ..Default::default()
        };
        let run = run_budget(&cfg).unwrap();
        assert_eq!(
            run.budget.total().asd(),
            run.budget.get(trace::SQL).unwrap().asd()
        );
    }

    #[test]
    fn nothing_enabled_is_a_config_error() {
        let mut cfg = paper();
        cfg.budget = crate::config::BudgetSection {
            seismic: false,
            suspension_thermal: false,
            intensity_rp: false,
            adc: false,
            pll: false,
            acoustic: false,
            quantum: false,
            sql: false,
            ..Default::default()
        };
        assert!(run_budget(&cfg).unwrap_err().is_config_error());
    }

    #[test]
    fn iss_toggle_raises_mid_band() {
        let on = run_budget(&paper()).unwrap();
        let mut cfg = paper();
        cfg.budget.iss_enabled = false;
        let off = run_budget(&cfg).unwrap();
        assert_eq!(off.budget.total().asd(), on.total_iss_off.asd());
        let r = off.budget.total().at(50.0) / on.budget.total().at(50.0);
        assert!(r > 2.0 && r <= 5.25, "ratio {r}");
    }

    #[test]
    fn zero_mismatch_warns() {
        let mut cfg = paper();
        cfg.chain.stiffness_mismatch = 0.0;
        let run = run_suspension_tf(&cfg).unwrap();
        assert!(run.differential.values().iter().all(|v| v.norm() == 0.0));
        assert!(!run.warnings.is_empty());
    }

    #[test]
    fn quantum_design_places_sql() {
        let run = run_quantum_design(&ScenarioConfig::builtin("sql_design").unwrap()).unwrap();
        assert!((run.summary.kappa_unity_frequency_hz / 100.0 - 1.0).abs() < 0.01);
        assert!((run.summary.sql_asd_at_100hz / 4.62e-19 - 1.0).abs() < 0.005);
        assert_eq!(run.summary.free_mass_floor_hz, 10.0);
        assert!(!run.warnings.is_empty());
    }

    #[test]
    fn disabled_servo_reproduces_passive() {
        let mut cfg = paper();
        cfg.isolation.enabled = false;
        let run = run_isolation(&cfg).unwrap();
        assert_eq!(run.active.asd(), run.passive.asd());
        assert_eq!(run.cavity_active.asd(), run.cavity_passive.asd());
    }
}
