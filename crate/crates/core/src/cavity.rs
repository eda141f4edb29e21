//! Static optics of a high-finesse Fabry-Perot cavity.
//!
//! All relations use the high-finesse approximation: finesse `2π/ρ` and a
//! Lorentzian resonance, where `ρ` is the total round-trip loss.

use serde::{Deserialize, Serialize};

use crate::constants::{SPEED_OF_LIGHT, TWO_PI};
use crate::error::{Error, Result};
use crate::spectra::{Spectrum, Unit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityParams {
    pub wavelength_m: f64,
    pub length_m: f64,
    pub input_transmission: f64,
    pub end_transmission: f64,
    /// Scatter and absorption per round trip.
    pub excess_loss: f64,
    pub mirror_mass_kg: f64,
    pub input_power_w: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            wavelength_m: 1550e-9,
            length_m: 0.095,
            input_transmission: 7.5e-6,
            end_transmission: 7.5e-6,
            excess_loss: 1e-6,
            mirror_mass_kg: 0.01,
            input_power_w: 1e-3,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        positive("wavelength_m", self.wavelength_m)?;
        positive("length_m", self.length_m)?;
        positive("input_transmission", self.input_transmission)?;
        non_negative("end_transmission", self.end_transmission)?;
        non_negative("excess_loss", self.excess_loss)?;
        positive("mirror_mass_kg", self.mirror_mass_kg)?;
        non_negative("input_power_w", self.input_power_w)?;
        if self.round_trip_loss() >= 1.0 {
            return Err(Error::param(
                "input_transmission",
                "total round-trip loss must be below 1",
            ));
        }
        Ok(())
    }

    /// ρ = T1 + T2 + excess loss.
    pub fn round_trip_loss(&self) -> f64 {
        self.input_transmission + self.end_transmission + self.excess_loss
    }

    /// Optical carrier frequency ν = c/λ in Hz.
    pub fn optical_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength_m
    }

    /// Angular carrier frequency ω0 in rad/s.
    pub fn omega0(&self) -> f64 {
        TWO_PI * self.optical_frequency()
    }

    pub fn fsr(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.length_m)
    }

    pub fn finesse(&self) -> f64 {
        TWO_PI / self.round_trip_loss()
    }

    pub fn fwhm(&self) -> f64 {
        self.fsr() / self.finesse()
    }

    /// On-resonance power gain 4·T1/ρ².
    pub fn buildup_gain(&self) -> f64 {
        let rho = self.round_trip_loss();
        4.0 * self.input_transmission / (rho * rho)
    }

    /// Circulating power at a laser-cavity detuning `detuning_hz`.
    pub fn circulating_power(&self, detuning_hz: f64) -> f64 {
        let u = 2.0 * detuning_hz / self.fwhm();
        self.input_power_w * self.buildup_gain() / (1.0 + u * u)
    }

    /// Length change equivalent to a resonance shift of `hz`: δL = δν·L/ν.
    pub fn displacement_for_frequency(&self, hz: f64) -> f64 {
        hz * self.length_m / self.optical_frequency()
    }

    pub fn frequency_for_displacement(&self, m: f64) -> f64 {
        m * self.optical_frequency() / self.length_m
    }

    /// Converts a frequency-noise spectrum into equivalent length noise.
    pub fn freq_to_disp(&self, s: &Spectrum) -> Result<Spectrum> {
        s.ensure_unit(Unit::Frequency)?;
        let k = self.displacement_for_frequency(1.0);
        s.converted(|_| k, Unit::Displacement)
    }

    pub fn disp_to_freq(&self, s: &Spectrum) -> Result<Spectrum> {
        s.ensure_unit(Unit::Displacement)?;
        let k = self.frequency_for_displacement(1.0);
        s.converted(|_| k, Unit::Frequency)
    }

    /// Displacement equivalent of one linewidth.
    pub fn linewidth_displacement(&self) -> f64 {
        self.displacement_for_frequency(self.fwhm())
    }
}

/// Restoring stiffness of the final pendulum stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumStiffness {
    pub f0_hz: f64,
    pub k: f64,
}

impl PendulumStiffness {
    pub fn new(f0_hz: f64, mass_kg: f64) -> Result<Self> {
        positive("f0_hz", f0_hz)?;
        positive("mass_kg", mass_kg)?;
        let w = TWO_PI * f0_hz;
        Ok(Self {
            f0_hz,
            k: mass_kg * w * w,
        })
    }
}

/// Static mirror displacements where the pendulum restoring force balances
/// radiation pressure, `k·x = 2·Pc(δν(x))/c` with `δν(x) = δν_laser − x·ν/L`.
///
/// Positive `x` lengthens the cavity. Returns one root, or three when the
/// resonance is bistable, sorted ascending.
pub fn rp_equilibrium(
    cavity: &CavityParams,
    k: &PendulumStiffness,
    laser_detuning_hz: f64,
) -> Result<Vec<f64>> {
    cavity.validate()?;
    positive("k", k.k)?;
    let nu_per_m = cavity.frequency_for_displacement(1.0);
    let x_lw = cavity.linewidth_displacement();
    let residual = |x: f64| {
        k.k * x - 2.0 * cavity.circulating_power(laser_detuning_hz - x * nu_per_m) / SPEED_OF_LIGHT
    };
    let f_max = 2.0 * cavity.input_power_w * cavity.buildup_gain() / SPEED_OF_LIGHT;
    let x_res = laser_detuning_hz / nu_per_m;
    let lo = (-10.0 * x_lw).min(x_res - 10.0 * x_lw);
    let hi = (f_max / k.k + 10.0 * x_lw).max(x_res + 10.0 * x_lw);

    // Sample on a grid that is fine near the resonance and geometric away
    // from it, so narrow lines inside a wide interval are still bracketed.
    let half = 0.5 * x_lw;
    let mut xs = vec![x_res];
    for dir in [-1.0, 1.0] {
        let mut u: f64 = 0.0;
        loop {
            u += (0.01f64).max(0.02 * u);
            let x = x_res + dir * u * half;
            if x < lo || x > hi {
                xs.push(if dir < 0.0 { lo } else { hi });
                break;
            }
            xs.push(x);
        }
    }
    xs.push(0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut roots = Vec::new();
    let mut prev = (xs[0], residual(xs[0]));
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    for &x in &xs[1..] {
        let r = residual(x);
        if r == 0.0 {
            roots.push(x);
        } else if prev.1 != 0.0 && (prev.1 < 0.0) != (r < 0.0) {
            roots.push(bisect(&residual, prev.0, x, prev.1));
        }
        prev = (x, r);
    }
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    let mut fb = f(b);
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return if fa.abs() <= fb.abs() { a } else { b };
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
}

/// Static length offset while the laser follows the cavity resonance, so the
/// full on-resonance power pushes the mirror.
pub fn locked_rp_displacement(cavity: &CavityParams, k: &PendulumStiffness) -> f64 {
    2.0 * cavity.circulating_power(0.0) / (SPEED_OF_LIGHT * k.k)
}

/// The same offset expressed as a laser-frequency excursion the controller
/// must supply.
pub fn locked_rp_frequency_shift(cavity: &CavityParams, k: &PendulumStiffness) -> f64 {
    cavity.frequency_for_displacement(locked_rp_displacement(cavity, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::FrequencyGrid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper() -> CavityParams {
        CavityParams::default()
    }

    #[test]
    fn reference_optics_values() {
        let c = paper();
        assert_relative_eq!(c.fsr(), 1_577_855_042.105_263_2, max_relative = 1e-14);
        assert_relative_eq!(c.finesse(), 392_699.081_698_724_1, max_relative = 1e-14);
        assert_relative_eq!(c.fwhm(), 4_017.974_870_936_372_4, max_relative = 1e-13);
        assert_relative_eq!(c.buildup_gain(), 117_187.5, max_relative = 1e-13);
        let c2 = CavityParams {
            excess_loss: 1.1e-6,
            ..paper()
        };
        assert_relative_eq!(c2.fwhm(), 4_043.087_213_879_725, max_relative = 1e-13);
    }

    #[test]
    fn scaling_examples() {
        let c = paper();
        let long = CavityParams {
            length_m: 0.19,
            ..paper()
        };
        assert_relative_eq!(long.fsr(), c.fsr() / 2.0, max_relative = 1e-15);
        let far = CavityParams {
            length_m: 1.5e8,
            ..paper()
        };
        assert!((far.fsr() - 1.0).abs() < 0.01);
        let f1e6 = CavityParams {
            input_transmission: TWO_PI * 1e-6,
            end_transmission: 0.0,
            excess_loss: 0.0,
            ..paper()
        };
        assert_relative_eq!(f1e6.finesse(), 1e6, max_relative = 1e-12);
    }

    #[test]
    fn vco_range_as_displacement() {
        assert_relative_eq!(
            paper().displacement_for_frequency(50e6),
            2.455_865_650_896_394_5e-8,
            max_relative = 1e-13
        );
    }

    #[test]
    fn half_power_at_half_linewidth() {
        let c = paper();
        let p0 = c.circulating_power(0.0);
        assert_relative_eq!(
            c.circulating_power(c.fwhm() / 2.0),
            p0 / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(p0, 117.1875, max_relative = 1e-13);
        assert!(c.circulating_power(1e15) < 1e-18);
    }

    #[test]
    fn validation_rejects_lossy_or_negative() {
        let bad = CavityParams {
            input_transmission: 0.6,
            end_transmission: 0.5,
            ..paper()
        };
        assert!(bad.validate().is_err());
        assert!(CavityParams {
            length_m: -1.0,
            ..paper()
        }
        .validate()
        .is_err());
        assert!(paper().validate().is_ok());
    }

    #[test]
    fn freq_to_disp_rejects_wrong_unit() {
        let g = FrequencyGrid::log(1.0, 10.0, 3).unwrap();
        let s = Spectrum::flat(&g, 1.0, Unit::Displacement).unwrap();
        assert!(paper().freq_to_disp(&s).is_err());
        let z = Spectrum::zeros(&g, Unit::Frequency);
        assert!(paper()
            .freq_to_disp(&z)
            .unwrap()
            .asd()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn no_light_no_shift() {
        let c = CavityParams {
            input_power_w: 0.0,
            ..paper()
        };
        let k = PendulumStiffness::new(3.5, 0.01).unwrap();
        assert_eq!(rp_equilibrium(&c, &k, 0.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn weak_light_matches_linear_shift() {
        let c = CavityParams {
            input_power_w: 1e-12,
            ..paper()
        };
        let k = PendulumStiffness::new(3.5, 0.01).unwrap();
        let roots = rp_equilibrium(&c, &k, 0.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(
            roots[0],
            locked_rp_displacement(&c, &k),
            max_relative = 1e-6
        );
    }

    #[test]
    fn blue_detuning_is_bistable() {
        // Laser above resonance; mirror pushed outward pulls the line toward it.
        let c = CavityParams {
            input_power_w: 1e-6,
            ..paper()
        };
        let k = PendulumStiffness::new(3.5, 0.01).unwrap();
        let roots = rp_equilibrium(&c, &k, 10.0 * c.fwhm()).unwrap();
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn locked_shift_crosses_controller_range_below_few_milliwatts() {
        let k = PendulumStiffness::new(3.5, 0.01).unwrap();
        assert_relative_eq!(k.k, 4.836_106_156_533_786, max_relative = 1e-13);
        let shift = |p: f64| {
            locked_rp_frequency_shift(
                &CavityParams {
                    input_power_w: p,
                    ..paper()
                },
                &k,
            )
        };
        assert!(shift(0.5e-3) > 1e8);
        assert!(shift(0.5e-3 * 4.0) > 400e6);
    }

    proptest! {
        #[test]
        fn finesse_times_fwhm_is_fsr(
            t1 in 1e-7f64..1e-2, t2 in 0.0f64..1e-2, ex in 0.0f64..1e-2, l in 1e-3f64..1e3
        ) {
            let c = CavityParams { input_transmission: t1, end_transmission: t2, excess_loss: ex, length_m: l, ..paper() };
            prop_assert!((c.finesse() * c.fwhm() / c.fsr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn buildup_is_even_and_peaked(d in -1e6f64..1e6) {
            let c = paper();
            prop_assert_eq!(c.circulating_power(d), c.circulating_power(-d));
            prop_assert!(c.circulating_power(d) <= c.circulating_power(0.0));
        }

        #[test]
        fn freq_disp_round_trip(v in 0.0f64..1e9, l in 1e-3f64..10.0) {
            let c = CavityParams { length_m: l, ..paper() };
            let back = c.frequency_for_displacement(c.displacement_for_frequency(v));
            prop_assert!((back - v).abs() <= 1e-12 * v.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn equilibria_are_odd_in_count_and_balanced(
            p_in in 0.0f64..1e-7, detune in -20.0f64..20.0, f0 in 0.5f64..10.0
        ) {
            let c = CavityParams { input_power_w: p_in, ..paper() };
            let k = PendulumStiffness::new(f0, 0.01).unwrap();
            let detune = detune * c.fwhm();
            let roots = rp_equilibrium(&c, &k, detune).unwrap();
            prop_assert!(roots.len() % 2 == 1, "{} roots", roots.len());
            let nu = c.frequency_for_displacement(1.0);
            let tol = 1e-12 * k.k * c.linewidth_displacement();
            for x in roots {
                let r = k.k * x - 2.0 * c.circulating_power(detune - x * nu) / SPEED_OF_LIGHT;
                prop_assert!(r.abs() < tol, "residual {r:e} vs {tol:e}");
            }
        }
    }
}
