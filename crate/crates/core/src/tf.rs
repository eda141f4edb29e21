//! Complex frequency responses and zero-pole-gain transfer functions.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Spectrum, Unit};

/// A complex transfer function sampled on a frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param("values", "length does not match grid"));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite {
                frequency_hz: grid.values()[i],
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid.clone(), grid.iter().map(f).collect())
    }

    pub fn constant(grid: &FrequencyGrid, value: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn phase_deg(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg().to_degrees()).collect()
    }

    /// Value at the grid point nearest to `f`.
    pub fn at(&self, f: f64) -> Complex64 {
        self.values[self.grid.nearest_index(f)]
    }

    pub fn mul(&self, other: &FrequencyResponse) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    /// `|H| · input` pointwise, tagged with the output unit.
    pub fn apply(&self, input: &Spectrum, unit: Unit) -> Result<Spectrum> {
        if !self.grid.same_as(input.grid()) {
            return Err(Error::GridMismatch);
        }
        Spectrum::computed(
            self.grid.clone(),
            self.values
                .iter()
                .zip(input.asd())
                .map(|(h, a)| h.norm() * a)
                .collect(),
            unit,
        )
    }

    /// Magnitude slope in decades per decade between the grid points nearest
    /// to `f1` and `f2`.
    pub fn log_slope(&self, f1: f64, f2: f64) -> f64 {
        let (i, j) = (self.grid.nearest_index(f1), self.grid.nearest_index(f2));
        let f = self.grid.values();
        (self.values[j].norm() / self.values[i].norm()).log10() / (f[j] / f[i]).log10()
    }
}

/// Rational transfer function `gain · Π(s − zᵢ) / Π(s − pᵢ)` with roots in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct Zpk {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: f64,
}

impl Zpk {
    pub fn new(zeros: Vec<Complex64>, poles: Vec<Complex64>, gain: f64) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::param("gain", "must be finite"));
        }
        check_conjugate_pairs("zeros", &zeros)?;
        check_conjugate_pairs("poles", &poles)?;
        Ok(Self { zeros, poles, gain })
    }

    pub fn gain_only(gain: f64) -> Self {
        Self {
            zeros: Vec::new(),
            poles: Vec::new(),
            gain,
        }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Same zeros and poles with the gain multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            gain: self.gain * k,
            ..self.clone()
        }
    }

    /// Cascade of `self` and `other`.
    pub fn series(&self, other: &Zpk) -> Zpk {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Zpk {
            zeros,
            poles,
            gain: self.gain * other.gain,
        }
    }

    pub fn eval_s(&self, s: Complex64) -> Complex64 {
        let num: Complex64 = self.zeros.iter().map(|z| s - z).product();
        let den: Complex64 = self.poles.iter().map(|p| s - p).product();
        num / den * self.gain
    }

    pub fn eval_hz(&self, f: f64) -> Complex64 {
        self.eval_s(Complex64::new(0.0, TWO_PI * f))
    }

    pub fn response(&self, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
        FrequencyResponse::from_fn(grid, |f| self.eval_hz(f))
    }

    /// Poles of `self / (1 + self)`, i.e. roots of `den(s) + num(s)`.
    pub fn closed_loop_poles(&self) -> Result<Vec<Complex64>> {
        // Work in u = s/σ so that coefficients stay within a sane range.
        let scale = characteristic_scale(&self.poles, &self.zeros);
        let den = poly_from_roots(&self.poles, scale);
        let num = poly_from_roots(&self.zeros, scale);
        let rel = self.gain * scale.powi(self.zeros.len() as i32 - self.poles.len() as i32);
        let n = den.len().max(num.len());
        let mut c = vec![0.0; n];
        // coefficients stored highest power first; align on the constant term
        for (i, v) in den.iter().rev().enumerate() {
            c[n - 1 - i] += v;
        }
        for (i, v) in num.iter().rev().enumerate() {
            c[n - 1 - i] += rel * v;
        }
        let roots = poly_roots(&c)?;
        Ok(roots.into_iter().map(|u| u * scale).collect())
    }

    /// True when every closed-loop pole lies strictly in the left half-plane.
    pub fn closed_loop_stable(&self) -> Result<bool> {
        Ok(self.closed_loop_poles()?.iter().all(|p| p.re < 0.0))
    }
}

/// A complex root in rad/s as written in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Root {
    pub real: f64,
    #[serde(default)]
    pub imag: f64,
}

impl From<Complex64> for Root {
    fn from(c: Complex64) -> Self {
        Self {
            real: c.re,
            imag: c.im,
        }
    }
}

impl From<Root> for Complex64 {
    fn from(r: Root) -> Self {
        Complex64::new(r.real, r.imag)
    }
}

/// Serializable form of [`Zpk`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZpkConfig {
    #[serde(default)]
    pub zeros: Vec<Root>,
    #[serde(default)]
    pub poles: Vec<Root>,
    pub gain: f64,
}

impl ZpkConfig {
    pub fn to_zpk(&self) -> Result<Zpk> {
        Zpk::new(
            self.zeros.iter().map(|&r| r.into()).collect(),
            self.poles.iter().map(|&r| r.into()).collect(),
            self.gain,
        )
    }
}

impl From<&Zpk> for ZpkConfig {
    fn from(z: &Zpk) -> Self {
        Self {
            zeros: z.zeros.iter().map(|&c| c.into()).collect(),
            poles: z.poles.iter().map(|&c| c.into()).collect(),
            gain: z.gain,
        }
    }
}

fn check_conjugate_pairs(name: &'static str, roots: &[Complex64]) -> Result<()> {
    for r in roots {
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::param(name, "roots must be finite"));
        }
    }
    let mut used = vec![false; roots.len()];
    for (i, r) in roots.iter().enumerate() {
        if r.im == 0.0 || used[i] {
            continue;
        }
        let tol = 1e-9 * r.norm();
        let partner = roots.iter().enumerate().position(|(j, c)| {
            j != i && !used[j] && (c - r.conj()).norm() <= tol && c.im.signum() != r.im.signum()
        });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => {
                return Err(Error::param(
                    name,
                    format!("complex root {r} has no conjugate partner"),
                ))
            }
        }
    }
    Ok(())
}

/// Pole/zero helpers expressed in Hz.
pub mod roots {
    use super::*;

    /// Real root at `-2π·f`.
    pub fn real_hz(f: f64) -> Complex64 {
        Complex64::new(-TWO_PI * f, 0.0)
    }

    /// Conjugate pair with natural frequency `f` and quality factor `q`.
    pub fn pair_hz(f: f64, q: f64) -> [Complex64; 2] {
        let w = TWO_PI * f;
        let re = -w / (2.0 * q);
        let disc = w * w - re * re;
        if disc >= 0.0 {
            let im = disc.sqrt();
            [Complex64::new(re, im), Complex64::new(re, -im)]
        } else {
            // overdamped: two real roots with product w² and sum w/q
            let d = (re * re - w * w).sqrt();
            [Complex64::new(re + d, 0.0), Complex64::new(re - d, 0.0)]
        }
    }
}

fn characteristic_scale(poles: &[Complex64], zeros: &[Complex64]) -> f64 {
    let logs: Vec<f64> = poles
        .iter()
        .chain(zeros)
        .map(|r| r.norm())
        .filter(|m| *m > 0.0)
        .map(f64::ln)
        .collect();
    if logs.is_empty() {
        1.0
    } else {
        (logs.iter().sum::<f64>() / logs.len() as f64).exp()
    }
}

/// Real coefficients (highest power first) of Π(u − r/scale).
fn poly_from_roots(roots: &[Complex64], scale: f64) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let r = r / scale;
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += v;
            next[i + 1] -= v * r;
        }
        c = next;
    }
    c.into_iter().map(|v| v.re).collect()
}

fn poly_eval(c: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Roots of a real polynomial via companion-matrix eigenvalues, polished by
/// a few Newton steps.
fn poly_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let first = c
        .iter()
        .position(|v| *v != 0.0)
        .ok_or_else(|| Error::Eigen("zero polynomial".into()))?;
    let c = &c[first..];
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Eigen("companion matrix Schur decomposition did not converge".into())
    })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|&r0| {
            let mut r = r0;
            for _ in 0..5 {
                let (p, dp) = poly_eval(c, r);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                r -= step;
            }
            if poly_eval(c, r).0.norm() <= poly_eval(c, r0).0.norm() {
                r
            } else {
                r0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unpaired_complex_roots_are_rejected() {
        assert!(Zpk::new(vec![c(-1.0, 2.0)], vec![], 1.0).is_err());
        assert!(Zpk::new(vec![c(-1.0, 2.0), c(-1.0, -2.0)], vec![c(-3.0, 0.0)], 1.0).is_ok());
        assert!(Zpk::new(vec![], vec![c(-1.0, 2.0), c(-1.0, 2.0)], 1.0).is_err());
    }

    #[test]
    fn first_order_lowpass_evaluates() {
        let w = TWO_PI * 10.0;
        let lp = Zpk::new(vec![], vec![c(-w, 0.0)], w).unwrap();
        assert_relative_eq!(lp.eval_hz(0.0).re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(lp.eval_hz(10.0).norm(), 0.5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(
            lp.eval_hz(10.0).arg().to_degrees(),
            -45.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pair_helper_matches_quality_factor() {
        let [p, q] = roots::pair_hz(3.9, 10.0);
        assert_relative_eq!(p.norm(), TWO_PI * 3.9, max_relative = 1e-12);
        assert_relative_eq!(p.norm() / (-2.0 * p.re), 10.0, max_relative = 1e-12);
        assert_eq!(p.conj(), q);
        let [a, b] = roots::pair_hz(1.0, 0.2);
        assert!(a.im == 0.0 && b.im == 0.0);
        assert_relative_eq!(a.re * b.re, TWO_PI * TWO_PI, max_relative = 1e-12);
    }

    #[test]
    fn closed_loop_poles_of_integrator() {
        // k/s in unity feedback has its pole at -k
        let g = Zpk::new(vec![], vec![c(0.0, 0.0)], 5.0).unwrap();
        let p = g.closed_loop_poles().unwrap();
        assert_eq!(p.len(), 1);
        assert_relative_eq!(p[0].re, -5.0, max_relative = 1e-12);
        assert!(g.closed_loop_stable().unwrap());
    }

    #[test]
    fn closed_loop_poles_of_oscillator_with_gain() {
        // k / (s² + 1) closes to s² + 1 + k
        let g = Zpk::new(vec![], vec![c(0.0, 1.0), c(0.0, -1.0)], 3.0).unwrap();
        let mut p = g.closed_loop_poles().unwrap();
        p.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!(p[0].re.abs() < 1e-12);
        assert_relative_eq!(p[1].im, 2.0, max_relative = 1e-12);
        assert!(!g.closed_loop_stable().unwrap());

        // three stacked real poles go unstable at k = 8
        let triple = |k: f64| Zpk::new(vec![], vec![c(-1.0, 0.0); 3], k).unwrap();
        assert!(triple(7.0).closed_loop_stable().unwrap());
        assert!(!triple(9.0).closed_loop_stable().unwrap());
    }

    #[test]
    fn series_multiplies_responses() {
        let g = FrequencyGrid::log(0.1, 100.0, 20).unwrap();
        let a = Zpk::new(vec![c(-1.0, 0.0)], vec![c(-10.0, 0.0)], 2.0).unwrap();
        let b = Zpk::new(vec![], roots::pair_hz(3.0, 4.0).to_vec(), 7.0).unwrap();
        let direct = a.series(&b).response(&g).unwrap();
        let product = a
            .response(&g)
            .unwrap()
            .mul(&b.response(&g).unwrap())
            .unwrap();
        for (x, y) in direct.values().iter().zip(product.values()) {
            assert_relative_eq!((x - y).norm(), 0.0, epsilon = 1e-12 * x.norm());
        }
    }

    #[test]
    fn config_round_trip() {
        let z = Zpk::new(
            roots::pair_hz(1.0, 0.7).to_vec(),
            vec![roots::real_hz(3.0)],
            2.5,
        )
        .unwrap();
        let json = serde_json::to_string(&ZpkConfig::from(&z)).unwrap();
        let back: ZpkConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_zpk().unwrap(), z);
        let bad: ZpkConfig =
            serde_json::from_str(r#"{"zeros":[{"real":-1,"imag":2}],"gain":1}"#).unwrap();
        assert!(bad.to_zpk().is_err());
    }

    #[test]
    fn pole_on_grid_is_reported() {
        let g = FrequencyGrid::new(vec![1.0, 2.0]).unwrap();
        let osc = Zpk::new(vec![], vec![c(0.0, TWO_PI), c(0.0, -TWO_PI)], 1.0).unwrap();
        let err = osc.response(&g).unwrap_err();
        assert!(matches!(err, Error::NonFinite { frequency_hz } if frequency_hz == 1.0));
    }
}
