//! Active inertial isolation of the cryostat platform.
//!
//! The loop is a single-axis scalar loop: geophone sensing of payload motion,
//! a servo filter and a voltage-driven coil actuator pushing on the platform.
//! Ground motion reaches the payload through the passive platform
//! transmissibility and is suppressed by `1/(1 + G)`.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Spectrum, Unit};
use crate::suspension::Axis;
use crate::tf::{roots, FrequencyResponse, Zpk, ZpkConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlatformParams {
    pub payload_mass_kg: f64,
    pub horizontal_resonance_hz: f64,
    pub vertical_resonance_hz: f64,
    pub q: f64,
}

impl Default for PlatformParams {
    fn default() -> Self {
        Self {
            payload_mass_kg: 140.0,
            horizontal_resonance_hz: 3.9,
            vertical_resonance_hz: 7.0,
            q: 10.0,
        }
    }
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

impl PlatformParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("payload_mass_kg", self.payload_mass_kg)?;
        require_positive("horizontal_resonance_hz", self.horizontal_resonance_hz)?;
        require_positive("vertical_resonance_hz", self.vertical_resonance_hz)?;
        require_positive("q", self.q)
    }

    pub fn resonance_hz(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.horizontal_resonance_hz,
            Axis::Vertical => self.vertical_resonance_hz,
        }
    }

    /// Ground-to-payload transmissibility `ω0²/(s² + ω0·s/Q + ω0²)`.
    pub fn passive_zpk(&self, axis: Axis) -> Zpk {
        let w0 = TWO_PI * self.resonance_hz(axis);
        Zpk::new(
            vec![],
            roots::pair_hz(self.resonance_hz(axis), self.q).to_vec(),
            w0 * w0,
        )
        .expect("conjugate pair")
    }

    /// Force-to-payload displacement `1/(M·(s² + ω0·s/Q + ω0²))`.
    pub fn force_zpk(&self, axis: Axis) -> Zpk {
        Zpk::new(
            vec![],
            roots::pair_hz(self.resonance_hz(axis), self.q).to_vec(),
            1.0 / self.payload_mass_kg,
        )
        .expect("conjugate pair")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorParams {
    pub coil_resistance_ohm: f64,
    pub coil_inductance_h: f64,
    pub force_constant_n_per_a: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self {
            coil_resistance_ohm: 41.4,
            coil_inductance_h: 17.8e-3,
            force_constant_n_per_a: 1.7,
        }
    }
}

impl ActuatorParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("coil_resistance_ohm", self.coil_resistance_ohm)?;
        require_positive("coil_inductance_h", self.coil_inductance_h)?;
        require_positive("force_constant_n_per_a", self.force_constant_n_per_a)
    }

    /// Volts to newtons, `kf/(R + s·L)`.
    pub fn zpk(&self) -> Zpk {
        let l = self.coil_inductance_h;
        Zpk::new(
            vec![],
            vec![Complex64::new(-self.coil_resistance_ohm / l, 0.0)],
            self.force_constant_n_per_a / l,
        )
        .expect("real pole")
    }

    pub fn corner_hz(&self) -> f64 {
        self.coil_resistance_ohm / (TWO_PI * self.coil_inductance_h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeophoneParams {
    pub natural_frequency_hz: f64,
    pub q: f64,
    pub generator_constant_v_per_m_per_s: f64,
}

impl Default for GeophoneParams {
    fn default() -> Self {
        Self {
            natural_frequency_hz: 1.0,
            q: std::f64::consts::FRAC_1_SQRT_2,
            generator_constant_v_per_m_per_s: 276.0,
        }
    }
}

impl GeophoneParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("natural_frequency_hz", self.natural_frequency_hz)?;
        require_positive("q", self.q)?;
        require_positive(
            "generator_constant_v_per_m_per_s",
            self.generator_constant_v_per_m_per_s,
        )
    }

    /// Velocity to volts, `G·s²/(s² + ωg·s/Q + ωg²)`.
    pub fn velocity_zpk(&self) -> Zpk {
        Zpk::new(
            vec![Complex64::new(0.0, 0.0); 2],
            roots::pair_hz(self.natural_frequency_hz, self.q).to_vec(),
            self.generator_constant_v_per_m_per_s,
        )
        .expect("conjugate pair")
    }

    /// Displacement to volts.
    pub fn displacement_zpk(&self) -> Zpk {
        self.velocity_zpk()
            .series(&Zpk::new(vec![Complex64::new(0.0, 0.0)], vec![], 1.0).expect("real zero"))
    }
}

pub fn platform_passive_tf(
    p: &PlatformParams,
    axis: Axis,
    grid: &FrequencyGrid,
) -> Result<FrequencyResponse> {
    p.validate()?;
    p.passive_zpk(axis).response(grid)
}

pub fn geophone_tf(g: &GeophoneParams, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
    g.validate()?;
    g.velocity_zpk().response(grid)
}

pub fn actuator_tf(a: &ActuatorParams, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
    a.validate()?;
    a.zpk().response(grid)
}

/// Shipped servo: cancels the geophone resonance, integrates below 0.3 Hz,
/// boosts around 3 Hz and rolls off above 150 Hz.
pub fn default_servo(geophone: &GeophoneParams) -> Zpk {
    let mut zeros = roots::pair_hz(geophone.natural_frequency_hz, geophone.q).to_vec();
    zeros.push(roots::real_hz(3.0));
    let poles = vec![
        roots::real_hz(0.003),
        roots::real_hz(0.003),
        roots::real_hz(0.3),
        roots::real_hz(150.0),
        roots::real_hz(500.0),
    ];
    Zpk::new(zeros, poles, 9e4 * (150.0 / 3.0) * (TWO_PI * 500.0)).expect("conjugate pair")
}

/// Generic quiet-site ground displacement: flat below the corner, `1/f²`
/// above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundModel {
    pub level_m_per_rthz: f64,
    pub corner_hz: f64,
}

impl Default for GroundModel {
    fn default() -> Self {
        Self {
            level_m_per_rthz: 1e-7,
            corner_hz: 1.0,
        }
    }
}

impl GroundModel {
    pub fn validate(&self) -> Result<()> {
        require_positive("level_m_per_rthz", self.level_m_per_rthz)?;
        require_positive("corner_hz", self.corner_hz)
    }

    pub fn spectrum(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        self.validate()?;
        Spectrum::from_fn(grid, Unit::Displacement, |f| {
            let r = (self.corner_hz / f).min(1.0);
            self.level_m_per_rthz * r * r
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnityCrossing {
    pub frequency_hz: f64,
    pub phase_margin_deg: f64,
}

#[derive(Clone, Debug)]
pub struct ClosedLoop {
    pub loop_zpk: Zpk,
    pub loop_gain: FrequencyResponse,
    pub passive: FrequencyResponse,
    /// Ground-to-payload response with the loop closed.
    pub suppression: FrequencyResponse,
    pub crossings: Vec<UnityCrossing>,
    pub stable: bool,
}

impl ClosedLoop {
    pub fn min_phase_margin(&self) -> Option<f64> {
        self.crossings
            .iter()
            .map(|c| c.phase_margin_deg)
            .reduce(f64::min)
    }
}

/// Closes `G = plant · actuator · servo · sensor` around the platform.
pub fn closed_loop(
    plant: &Zpk,
    sensor: &Zpk,
    actuator: &Zpk,
    servo: &Zpk,
    passive: &Zpk,
    grid: &FrequencyGrid,
) -> Result<ClosedLoop> {
    let loop_zpk = plant.series(actuator).series(servo).series(sensor);
    let g = loop_zpk.response(grid)?;
    let p = passive.response(grid)?;
    let mut sup = Vec::with_capacity(grid.len());
    for ((f, gv), pv) in grid.iter().zip(g.values()).zip(p.values()) {
        let den = 1.0 + gv;
        if den.norm() < 1e-9 {
            return Err(Error::Conditioning {
                frequency_hz: f,
                magnitude: den.norm(),
            });
        }
        sup.push(pv / den);
    }
    let suppression = FrequencyResponse::new(grid.clone(), sup)?;
    let crossings = unity_crossings(&loop_zpk, grid);
    let stable = loop_zpk.gain() == 0.0 || loop_zpk.closed_loop_stable()?;
    Ok(ClosedLoop {
        loop_zpk,
        loop_gain: g,
        passive: p,
        suppression,
        crossings,
        stable,
    })
}

/// Unity-gain crossings found on a wide scan independent of the output grid,
/// each refined by bisection in log-frequency.
fn unity_crossings(loop_zpk: &Zpk, grid: &FrequencyGrid) -> Vec<UnityCrossing> {
    let lo = grid.min().min(1e-4);
    let hi = grid.max().max(1e5);
    let n = ((hi / lo).log10() * 400.0).ceil() as usize;
    let scan = FrequencyGrid::log(lo, hi, n.max(2)).expect("valid scan range");
    let f = scan.values();
    let lm: Vec<f64> = f.iter().map(|&x| loop_zpk.eval_hz(x).norm().ln()).collect();
    let mut out = Vec::new();
    for i in 1..f.len() {
        if !(lm[i - 1].is_finite() && lm[i].is_finite()) || (lm[i - 1] > 0.0) == (lm[i] > 0.0) {
            continue;
        }
        let (mut a, mut b) = (f[i - 1].ln(), f[i].ln());
        let sa = lm[i - 1] > 0.0;
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if (loop_zpk.eval_hz(m.exp()).norm().ln() > 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        let fc = (0.5 * (a + b)).exp();
        let phase = loop_zpk.eval_hz(fc).arg().to_degrees();
        out.push(UnityCrossing {
            frequency_hz: fc,
            phase_margin_deg: 180.0 - phase.abs(),
        });
    }
    out
}

/// Full isolation loop assembled from component parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsolationConfig {
    pub platform: PlatformParams,
    pub actuator: ActuatorParams,
    pub geophone: GeophoneParams,
    /// Servo filter in rad/s; the shipped design when absent.
    pub servo: Option<ZpkConfig>,
    pub ground: GroundModel,
    /// Optional CSV `frequency_hz,asd` replacing the ground model.
    pub ground_csv: Option<std::path::PathBuf>,
    pub enabled: bool,
}

impl Default for IsolationConfig {
    fn default() -> Self {
        Self {
            platform: PlatformParams::default(),
            actuator: ActuatorParams::default(),
            geophone: GeophoneParams::default(),
            servo: None,
            ground: GroundModel::default(),
            ground_csv: None,
            enabled: true,
        }
    }
}

impl IsolationConfig {
    pub fn validate(&self) -> Result<()> {
        self.platform.validate()?;
        self.actuator.validate()?;
        self.geophone.validate()?;
        self.ground.validate()?;
        self.servo()?;
        Ok(())
    }

    pub fn servo(&self) -> Result<Zpk> {
        match &self.servo {
            Some(s) => s.to_zpk(),
            None => Ok(default_servo(&self.geophone)),
        }
    }

    pub fn ground_spectrum(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        match &self.ground_csv {
            Some(path) => {
                crate::csvio::read_spectrum_file(path, "asd", Unit::Displacement)?.resample(grid)
            }
            None => self.ground.spectrum(grid),
        }
    }

    /// Evaluates the loop on `axis`; a disabled loop uses zero servo gain.
    pub fn close(&self, axis: Axis, grid: &FrequencyGrid) -> Result<ClosedLoop> {
        self.validate()?;
        let servo = if self.enabled {
            self.servo()?
        } else {
            self.servo()?.scaled(0.0)
        };
        closed_loop(
            &self.platform.force_zpk(axis),
            &self.geophone.displacement_zpk(),
            &self.actuator.zpk(),
            &servo,
            &self.platform.passive_zpk(axis),
            grid,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignReport {
    pub stable: bool,
    pub min_phase_margin_deg: Option<f64>,
    pub violations: Vec<String>,
}

impl DesignReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks closed-loop stability and the phase margin at every unity crossing.
pub fn design_check(cl: &ClosedLoop, min_margin_deg: f64) -> DesignReport {
    let mut violations = Vec::new();
    if !cl.stable {
        violations.push("closed loop has right-half-plane poles".to_string());
    }
    for c in &cl.crossings {
        if c.phase_margin_deg < min_margin_deg {
            violations.push(format!(
                "phase margin {:.1} deg at {:.3} Hz is below {min_margin_deg} deg",
                c.phase_margin_deg, c.frequency_hz
            ));
        }
    }
    DesignReport {
        stable: cl.stable,
        min_phase_margin_deg: cl.min_phase_margin(),
        violations,
    }
}

/// Position and sensing direction of one single-axis inertial sensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorPlacement {
    pub position: [f64; 3],
    pub direction: [f64; 3],
}

/// Matrix mapping the six sensor readings to `[x, y, z, rx, ry, rz]`.
///
/// Each sensor reads `n·(t + θ × r)`, so its row of the response matrix is
/// `[n, r × n]`; the returned matrix is the inverse of that response.
pub fn diagonalize_sensors(sensors: &[SensorPlacement; 6]) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(6, 6);
    for (i, s) in sensors.iter().enumerate() {
        let n = Vector3::from(s.direction);
        let norm = n.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param(
                "direction",
                format!("sensor {i} has no sensing direction"),
            ));
        }
        let n = n / norm;
        let rxn = Vector3::from(s.position).cross(&n);
        for j in 0..3 {
            a[(i, j)] = n[j];
            a[(i, j + 3)] = rxn[j];
        }
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > 1e6 {
        return Err(Error::DegenerateGeometry { condition });
    }
    a.try_inverse()
        .ok_or(Error::DegenerateGeometry { condition })
}

/// Response matrix rows for the given placement, without inversion.
pub fn sensor_response(sensors: &[SensorPlacement; 6], dof: &[f64; 6]) -> [f64; 6] {
    let t = Vector3::new(dof[0], dof[1], dof[2]);
    let th = Vector3::new(dof[3], dof[4], dof[5]);
    let mut out = [0.0; 6];
    for (o, s) in out.iter_mut().zip(sensors) {
        let n = Vector3::from(s.direction).normalize();
        let r = Vector3::from(s.position);
        *o = n.dot(&(t + th.cross(&r)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::log(1e-3, 1e4, 2000).unwrap()
    }

    #[test]
    fn passive_platform_shape() {
        let p = PlatformParams::default();
        let g = FrequencyGrid::log(0.01, 100.0, 4001).unwrap();
        let h = platform_passive_tf(&p, Axis::Horizontal, &g).unwrap();
        let m = h.magnitude();
        let peak = m.iter().cloned().fold(0.0, f64::max);
        let fpk = g.values()[m.iter().position(|v| *v == peak).unwrap()];
        assert!((fpk / 3.9 - 1.0).abs() < 0.01, "peak at {fpk}");
        assert_relative_eq!(m[0], 1.0, max_relative = 1e-5);
        assert_relative_eq!(
            p.passive_zpk(Axis::Horizontal).eval_hz(39.0).norm(),
            0.01,
            max_relative = 0.02
        );
        let v = platform_passive_tf(&p, Axis::Vertical, &g).unwrap();
        assert!(v.at(7.0).norm() > 5.0);
    }

    #[test]
    fn geophone_shape() {
        let geo = GeophoneParams::default();
        let z = geo.velocity_zpk();
        assert_relative_eq!(z.eval_hz(1e4).norm(), 276.0, max_relative = 1e-6);
        // at the corner a Q = 1/√2 second-order high-pass has magnitude Q
        assert_relative_eq!(
            z.eval_hz(1.0).norm(),
            276.0 / 2f64.sqrt(),
            max_relative = 1e-12
        );
        let r = z.eval_hz(1e-3).norm() / z.eval_hz(1e-4).norm();
        assert_relative_eq!(r, 100.0, max_relative = 1e-5);
    }

    #[test]
    fn actuator_shape() {
        let a = ActuatorParams::default();
        let z = a.zpk();
        assert_relative_eq!(z.eval_hz(0.0).re, 1.7 / 41.4, max_relative = 1e-14);
        assert_relative_eq!(a.corner_hz(), 370.169_362_022_722_86, max_relative = 1e-13);
        let m = actuator_tf(&a, &grid()).unwrap().magnitude();
        assert!(m.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_gain_returns_passive() {
        let cfg = IsolationConfig {
            enabled: false,
            ..Default::default()
        };
        let cl = cfg.close(Axis::Horizontal, &grid()).unwrap();
        assert_eq!(cl.suppression.values(), cl.passive.values());
        assert!(cl.crossings.is_empty());
    }

    #[test]
    fn default_loop_is_stable_with_margin() {
        let cl = IsolationConfig::default()
            .close(Axis::Horizontal, &grid())
            .unwrap();
        let report = design_check(&cl, 30.0);
        assert!(report.ok(), "{report:?}");
        assert_eq!(cl.crossings.len(), 2);
        // crossings do not depend on the evaluation grid
        let narrow = IsolationConfig::default()
            .close(Axis::Horizontal, &FrequencyGrid::log(1.0, 10.0, 5).unwrap())
            .unwrap();
        assert_eq!(narrow.crossings, cl.crossings);
        let g = |f: f64| cl.loop_zpk.eval_hz(f).norm();
        for f in [1.0, 2.0, 4.0, 8.0] {
            assert!(g(f) > 10.0, "|G({f})| = {}", g(f));
        }
        assert!(g(100.0) < 1.0);
    }

    #[test]
    fn suppression_identities() {
        let cl = IsolationConfig::default()
            .close(Axis::Horizontal, &grid())
            .unwrap();
        for i in 0..grid().len() {
            let g = cl.loop_gain.values()[i];
            let r = cl.passive.values()[i].norm() / cl.suppression.values()[i].norm();
            assert_relative_eq!(r, (1.0 + g).norm(), max_relative = 1e-12);
            if g.norm() < 0.01 {
                let q = cl.suppression.values()[i].norm() / cl.passive.values()[i].norm();
                assert!((q - 1.0).abs() < 0.02);
            }
            if g.norm() > 100.0 {
                let hi = cl.passive.values()[i].norm() / g.norm();
                assert_relative_eq!(cl.suppression.values()[i].norm(), hi, max_relative = 0.02);
            }
        }
    }

    #[test]
    fn default_servo_reduces_band_rms_by_an_order_of_magnitude() {
        let g = grid();
        let cfg = IsolationConfig::default();
        let ground = cfg.ground_spectrum(&g).unwrap();
        let cl = cfg.close(Axis::Horizontal, &g).unwrap();
        let passive = cl.passive.apply(&ground, Unit::Displacement).unwrap();
        let active = cl.suppression.apply(&ground, Unit::Displacement).unwrap();
        let ratio = passive.band_rms(0.5, 50.0) / active.band_rms(0.5, 50.0);
        assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn ill_conditioned_loop_is_reported() {
        // G = -1 exactly at DC
        let g = FrequencyGrid::new(vec![1e-9, 1.0]).unwrap();
        let err = closed_loop(
            &Zpk::gain_only(-1.0),
            &Zpk::gain_only(1.0),
            &Zpk::gain_only(1.0),
            &Zpk::gain_only(1.0),
            &Zpk::gain_only(1.0),
            &g,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Conditioning { frequency_hz, .. } if frequency_hz == 1e-9));
    }

    #[test]
    fn ground_model_shape() {
        let g = FrequencyGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
        let s = GroundModel::default().spectrum(&g).unwrap();
        assert_eq!(s.asd()[0], 1e-7);
        assert_eq!(s.asd()[1], 1e-7);
        assert_relative_eq!(s.asd()[2], 1e-9, max_relative = 1e-14);
    }

    fn triad() -> [SensorPlacement; 6] {
        let p = |position: [f64; 3], direction: [f64; 3]| SensorPlacement {
            position,
            direction,
        };
        [
            p([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            p([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            p([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            p([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
            p([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
            p([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ]
    }

    #[test]
    fn unit_lever_triad_inverts_to_signed_unit_entries() {
        let d = diagonalize_sensors(&triad()).unwrap();
        // unit-lever triad: every entry is 0 or ±1
        assert!(d
            .iter()
            .all(|v| v.abs() < 1e-12 || (v.abs() - 1.0).abs() < 1e-12));
        let reading = sensor_response(&triad(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let dof = &d * nalgebra::DVector::from_column_slice(&reading);
        assert_relative_eq!(dof[0], 1.0, max_relative = 1e-12);
        for i in 1..6 {
            assert!(dof[i].abs() < 1e-12);
        }
    }

    #[test]
    fn every_single_dof_excitation_is_isolated() {
        let placements = {
            let mut t = triad();
            t[0].position = [0.3, -0.2, 0.1];
            t[3].direction = [0.1, 0.2, 1.0];
            t
        };
        let d = diagonalize_sensors(&placements).unwrap();
        for k in 0..6 {
            let mut e = [0.0; 6];
            e[k] = 1.0;
            let r = sensor_response(&placements, &e);
            let out = &d * nalgebra::DVector::from_column_slice(&r);
            for i in 0..6 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((out[i] - want).abs() < 1e-12, "dof {k} -> {i}: {}", out[i]);
            }
        }
    }

    #[test]
    fn colocated_sensors_are_degenerate() {
        let mut s = triad();
        for p in s.iter_mut() {
            p.position = [0.0; 3];
        }
        assert!(matches!(
            diagonalize_sensors(&s),
            Err(Error::DegenerateGeometry { .. })
        ));
    }
}
