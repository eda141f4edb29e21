//! Frequency grids, unit-tagged one-sided spectral densities and noise budgets.
//!
//! Every spectrum is stored as an amplitude spectral density (ASD); the power
//! spectral density is its square. Spectra only combine when they share both
//! grid and unit.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};

/// Strictly increasing, positive frequency points in Hz.
#[derive(Clone, Debug)]
pub struct FrequencyGrid {
    values: Arc<[f64]>,
}

impl FrequencyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "frequencies must be finite and positive, found {bad}"
            )));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            values: values.into(),
        })
    }

    /// `n` logarithmically spaced points from `fmin` to `fmax`, endpoints exact.
    pub fn log(fmin: f64, fmax: f64, n: usize) -> Result<Self> {
        if !(fmin.is_finite() && fmax.is_finite()) || fmin <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite and positive, got ({fmin}, {fmax})"
            )));
        }
        if fmax <= fmin {
            return Err(Error::InvalidGrid(format!(
                "upper bound {fmax} must exceed lower bound {fmin}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2, got {n}")));
        }
        let lo = fmin.log10();
        let hi = fmax.log10();
        let step = (hi - lo) / (n - 1) as f64;
        let mut values: Vec<f64> = (0..n).map(|i| 10f64.powf(lo + step * i as f64)).collect();
        values[0] = fmin;
        values[n - 1] = fmax;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    /// Index of the grid point closest to `f` in log distance.
    pub fn nearest_index(&self, f: f64) -> usize {
        let target = f.max(f64::MIN_POSITIVE).ln();
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            let d = (v.ln() - target).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }

    pub fn same_as(&self, other: &FrequencyGrid) -> bool {
        Arc::ptr_eq(&self.values, &other.values) || self.values[..] == other.values[..]
    }
}

impl Default for FrequencyGrid {
    /// 1000 log-spaced points over 0.1 Hz – 10 kHz.
    fn default() -> Self {
        Self::log(0.1, 1e4, 1000).expect("default grid is valid")
    }
}

impl PartialEq for FrequencyGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

pub fn make_log_grid(fmin: f64, fmax: f64, n: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::log(fmin, fmax, n)
}

/// Unit of an amplitude spectral density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// m/√Hz
    Displacement,
    /// Hz/√Hz
    Frequency,
    /// V/√Hz
    Voltage,
    /// (m/s)/√Hz
    Velocity,
    /// N/√Hz
    Force,
    /// 1/√Hz
    Relative,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Displacement => "m/√Hz",
            Unit::Frequency => "Hz/√Hz",
            Unit::Voltage => "V/√Hz",
            Unit::Velocity => "(m/s)/√Hz",
            Unit::Force => "N/√Hz",
            Unit::Relative => "1/√Hz",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One-sided amplitude spectral density sampled on a [`FrequencyGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    asd: Vec<f64>,
    unit: Unit,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, asd: Vec<f64>, unit: Unit) -> Result<Self> {
        if asd.len() != grid.len() {
            return Err(Error::param(
                "asd",
                format!(
                    "length {} does not match grid length {}",
                    asd.len(),
                    grid.len()
                ),
            ));
        }
        if let Some((i, v)) = asd
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::param(
                "asd",
                format!(
                    "entry {v} at {} Hz is not finite and non-negative",
                    grid.values()[i]
                ),
            ));
        }
        Ok(Self { grid, asd, unit })
    }

    pub fn zeros(grid: &FrequencyGrid, unit: Unit) -> Self {
        Self {
            asd: vec![0.0; grid.len()],
            grid: grid.clone(),
            unit,
        }
    }

    pub fn flat(grid: &FrequencyGrid, level: f64, unit: Unit) -> Result<Self> {
        Self::new(grid.clone(), vec![level; grid.len()], unit)
    }

    /// Evaluates `f(frequency_hz)` at every grid point.
    pub fn from_fn(grid: &FrequencyGrid, unit: Unit, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::computed(grid.clone(), grid.iter().map(f).collect(), unit)
    }

    /// Like [`Spectrum::new`], but overflow or NaN in a computed result is a
    /// numerical failure rather than a bad parameter.
    pub(crate) fn computed(grid: FrequencyGrid, asd: Vec<f64>, unit: Unit) -> Result<Self> {
        if let Some(i) = asd.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                frequency_hz: grid.values()[i],
            });
        }
        Self::new(grid, asd, unit)
    }

    pub fn from_psd(grid: &FrequencyGrid, psd: &[f64], unit: Unit) -> Result<Self> {
        if let Some(p) = psd.iter().find(|p| **p < 0.0) {
            return Err(Error::param("psd", format!("negative value {p}")));
        }
        Self::computed(grid.clone(), psd.iter().map(|p| p.sqrt()).collect(), unit)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn asd(&self) -> &[f64] {
        &self.asd
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn psd(&self) -> Vec<f64> {
        self.asd.iter().map(|a| a * a).collect()
    }

    pub fn len(&self) -> usize {
        self.asd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asd.is_empty()
    }

    /// ASD at the grid point nearest to `f`.
    pub fn at(&self, f: f64) -> f64 {
        self.asd[self.grid.nearest_index(f)]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::param(
                "factor",
                format!("{factor} is not a valid gain"),
            ));
        }
        Self::computed(
            self.grid.clone(),
            self.asd.iter().map(|a| a * factor).collect(),
            self.unit,
        )
    }

    /// Pointwise scaling by a non-negative gain with a change of unit.
    pub fn converted(&self, gain: impl Fn(f64) -> f64, unit: Unit) -> Result<Self> {
        let asd = self
            .grid
            .iter()
            .zip(&self.asd)
            .map(|(f, a)| a * gain(f))
            .collect();
        Self::computed(self.grid.clone(), asd, unit)
    }

    pub fn ensure_unit(&self, unit: Unit) -> Result<()> {
        if self.unit != unit {
            return Err(Error::UnitMismatch {
                expected: unit,
                found: self.unit,
            });
        }
        Ok(())
    }

    pub fn ensure_compatible(&self, other: &Spectrum) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        other.ensure_unit(self.unit)
    }

    /// Log-log interpolation onto `grid`, holding the end values outside the
    /// sampled range. Zero samples interpolate linearly.
    pub fn resample(&self, grid: &FrequencyGrid) -> Result<Self> {
        Self::new(
            grid.clone(),
            interpolate_loglog(self.grid.values(), &self.asd, grid.values()),
            self.unit,
        )
    }

    /// RMS over the whole grid.
    pub fn rms(&self) -> f64 {
        cumulative_rms(self).asd[0]
    }

    /// RMS integrated over `[f_lo, f_hi]`, restricted to grid points inside the band.
    pub fn band_rms(&self, f_lo: f64, f_hi: f64) -> f64 {
        let f = self.grid.values();
        let mut acc = 0.0;
        for i in 0..f.len() - 1 {
            if f[i] >= f_lo && f[i + 1] <= f_hi {
                acc += 0.5 * (f[i + 1] - f[i]) * (self.asd[i].powi(2) + self.asd[i + 1].powi(2));
            }
        }
        acc.sqrt()
    }
}

pub(crate) fn interpolate_loglog(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    at.iter()
        .map(|&x| {
            if x <= xs[0] {
                return ys[0];
            }
            if x >= xs[xs.len() - 1] {
                return ys[ys.len() - 1];
            }
            let hi = xs.partition_point(|v| *v < x);
            let lo = hi - 1;
            let (x0, x1, y0, y1) = (xs[lo], xs[hi], ys[lo], ys[hi]);
            if y0 > 0.0 && y1 > 0.0 {
                let t = (x / x0).ln() / (x1 / x0).ln();
                (y0.ln() + t * (y1 / y0).ln()).exp()
            } else {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        })
        .collect()
}

/// Pointwise root-sum-square of uncorrelated components.
pub fn sum_uncorrelated<'a, I>(components: I) -> Result<Spectrum>
where
    I: IntoIterator<Item = &'a Spectrum>,
{
    let mut iter = components.into_iter();
    let first = iter.next().ok_or(Error::Empty("no spectra to sum"))?;
    let mut psd = first.psd();
    for s in iter {
        first.ensure_compatible(s)?;
        for (p, a) in psd.iter_mut().zip(&s.asd) {
            *p += a * a;
        }
    }
    Spectrum::from_psd(&first.grid, &psd, first.unit)
}

/// RMS integrated from the top of the grid down to each frequency
/// (trapezoidal rule on the grid).
pub fn cumulative_rms(s: &Spectrum) -> Spectrum {
    let f = s.grid.values();
    let n = f.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n - 1).rev() {
        acc += 0.5 * (f[i + 1] - f[i]) * (s.asd[i] * s.asd[i] + s.asd[i + 1] * s.asd[i + 1]);
        out[i] = acc.sqrt();
    }
    Spectrum {
        grid: s.grid.clone(),
        asd: out,
        unit: s.unit,
    }
}

/// Named noise contributions on a common grid and unit.
///
/// `components` enter the total as an uncorrelated sum; `references` are
/// carried along for plotting but never summed.
#[derive(Clone, Debug)]
pub struct NoiseBudget {
    components: Vec<(String, Spectrum)>,
    references: Vec<(String, Spectrum)>,
    total: Spectrum,
}

impl NoiseBudget {
    pub fn new(
        components: Vec<(String, Spectrum)>,
        references: Vec<(String, Spectrum)>,
    ) -> Result<Self> {
        let total = sum_uncorrelated(components.iter().map(|(_, s)| s))?;
        for (_, s) in &references {
            total.ensure_compatible(s)?;
        }
        let mut seen = std::collections::BTreeSet::new();
        for (name, _) in components.iter().chain(&references) {
            if name == "total" || name == "frequency_hz" || !seen.insert(name.as_str()) {
                return Err(Error::param(
                    "components",
                    format!("duplicate or reserved name `{name}`"),
                ));
            }
        }
        Ok(Self {
            components,
            references,
            total,
        })
    }

    pub fn components(&self) -> &[(String, Spectrum)] {
        &self.components
    }

    pub fn references(&self) -> &[(String, Spectrum)] {
        &self.references
    }

    pub fn total(&self) -> &Spectrum {
        &self.total
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.total.grid()
    }

    pub fn unit(&self) -> Unit {
        self.total.unit()
    }

    pub fn get(&self, name: &str) -> Option<&Spectrum> {
        self.components
            .iter()
            .chain(&self.references)
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    /// Column names in export order: components, references, then `total`.
    pub fn trace_names(&self) -> Vec<&str> {
        self.components
            .iter()
            .chain(&self.references)
            .map(|(n, _)| n.as_str())
            .chain(std::iter::once("total"))
            .collect()
    }

    fn traces(&self) -> impl Iterator<Item = &Spectrum> {
        self.components
            .iter()
            .chain(&self.references)
            .map(|(_, s)| s)
            .chain(std::iter::once(&self.total))
    }

    /// Writes `frequency_hz,<trace>...,total` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let columns: Vec<&[f64]> = self.traces().map(|s| s.asd()).collect();
        csvio::write_columns(w, self.grid().values(), &self.trace_names(), &columns)
    }

    /// Same layout as [`write_csv`](Self::write_csv) with every trace replaced
    /// by its cumulative RMS.
    pub fn write_cumulative_rms_csv<W: Write>(&self, w: W) -> Result<()> {
        let rms: Vec<Spectrum> = self.traces().map(cumulative_rms).collect();
        let columns: Vec<&[f64]> = rms.iter().map(|s| s.asd()).collect();
        csvio::write_columns(w, self.grid().values(), &self.trace_names(), &columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn log_grid_midpoint_and_endpoints() {
        let g = make_log_grid(1.0, 100.0, 3).unwrap();
        assert_eq!(g.values(), &[1.0, 10.0, 100.0]);

        let g = make_log_grid(0.1, 1e4, 1000).unwrap();
        assert_eq!(g.len(), 1000);
        assert_eq!(g.min(), 0.1);
        assert_eq!(g.max(), 1e4);
        assert_eq!(FrequencyGrid::default(), g);
    }

    #[test]
    fn log_grid_rejects_bad_bounds() {
        assert!(make_log_grid(10.0, 10.0, 2).is_err());
        assert!(make_log_grid(100.0, 10.0, 5).is_err());
        assert!(make_log_grid(0.0, 10.0, 5).is_err());
        assert!(make_log_grid(-1.0, 10.0, 5).is_err());
        assert!(make_log_grid(1.0, 10.0, 1).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn spectrum_rejects_negative_and_nan() {
        let g = make_log_grid(1.0, 10.0, 3).unwrap();
        assert!(Spectrum::new(g.clone(), vec![1.0, -1.0, 0.0], Unit::Displacement).is_err());
        assert!(Spectrum::new(g.clone(), vec![1.0, f64::NAN, 0.0], Unit::Displacement).is_err());
        assert!(Spectrum::new(g, vec![1.0, 0.0], Unit::Displacement).is_err());
    }

    #[test]
    fn uncorrelated_sum_examples() {
        let g = make_log_grid(1.0, 100.0, 5).unwrap();
        let a = Spectrum::from_fn(&g, Unit::Displacement, |f| 1.0 / f).unwrap();
        let zero = Spectrum::zeros(&g, Unit::Displacement);
        assert_eq!(sum_uncorrelated([&a, &zero]).unwrap().asd(), a.asd());

        let three = Spectrum::flat(&g, 3.0, Unit::Displacement).unwrap();
        let four = Spectrum::flat(&g, 4.0, Unit::Displacement).unwrap();
        for v in sum_uncorrelated([&three, &four]).unwrap().asd() {
            assert_relative_eq!(*v, 5.0, max_relative = 1e-15);
        }

        let doubled = sum_uncorrelated([&a, &a]).unwrap();
        for (d, x) in doubled.asd().iter().zip(a.asd()) {
            assert_relative_eq!(*d, x * 2f64.sqrt(), max_relative = 1e-15);
        }
    }

    #[test]
    fn uncorrelated_sum_rejects_mismatch() {
        let g = make_log_grid(1.0, 100.0, 5).unwrap();
        let h = make_log_grid(1.0, 100.0, 6).unwrap();
        let a = Spectrum::flat(&g, 1.0, Unit::Displacement).unwrap();
        let b = Spectrum::flat(&h, 1.0, Unit::Displacement).unwrap();
        let c = Spectrum::flat(&g, 1.0, Unit::Frequency).unwrap();
        assert!(matches!(
            sum_uncorrelated([&a, &b]),
            Err(Error::GridMismatch)
        ));
        assert!(matches!(
            sum_uncorrelated([&a, &c]),
            Err(Error::UnitMismatch { .. })
        ));
        assert!(sum_uncorrelated(std::iter::empty()).is_err());
    }

    #[test]
    fn cumulative_rms_flat_is_analytic() {
        let g = make_log_grid(2.0, 50.0, 200).unwrap();
        let a = 3e-12;
        let s = Spectrum::flat(&g, a, Unit::Displacement).unwrap();
        let rms = cumulative_rms(&s);
        assert_relative_eq!(
            rms.asd()[0],
            a * (50.0f64 - 2.0).sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(rms.asd()[199], 0.0);
        assert!(cumulative_rms(&Spectrum::zeros(&g, Unit::Displacement))
            .asd()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn cumulative_rms_single_bin_peak() {
        // trapezoid by hand on [1, 2, 3] with ASD [0, a, 0]:
        // above 2 Hz: ½·1·a² ; above 1 Hz: ½·1·a² + ½·1·a²
        let g = FrequencyGrid::new(vec![1.0, 2.0, 3.0]).unwrap();
        let a = 2.0;
        let s = Spectrum::new(g, vec![0.0, a, 0.0], Unit::Displacement).unwrap();
        let rms = cumulative_rms(&s);
        assert_eq!(rms.asd()[2], 0.0);
        assert_relative_eq!(rms.asd()[1], (0.5 * a * a).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(rms.asd()[0], a, max_relative = 1e-15);
    }

    #[test]
    fn budget_total_and_reserved_names() {
        let g = make_log_grid(1.0, 10.0, 4).unwrap();
        let a = Spectrum::flat(&g, 3.0, Unit::Displacement).unwrap();
        let b = Spectrum::flat(&g, 4.0, Unit::Displacement).unwrap();
        let r = Spectrum::flat(&g, 100.0, Unit::Displacement).unwrap();
        let budget = NoiseBudget::new(
            vec![("a".into(), a.clone()), ("b".into(), b)],
            vec![("r".into(), r)],
        )
        .unwrap();
        assert_eq!(budget.trace_names(), vec!["a", "b", "r", "total"]);
        assert_relative_eq!(budget.total().asd()[2], 5.0, max_relative = 1e-15);
        assert!(NoiseBudget::new(vec![("total".into(), a.clone())], vec![]).is_err());
        assert!(NoiseBudget::new(vec![("a".into(), a.clone()), ("a".into(), a)], vec![]).is_err());
    }

    #[test]
    fn resample_is_loglog_exact_for_power_laws() {
        let coarse = make_log_grid(1.0, 1000.0, 4).unwrap();
        let fine = make_log_grid(1.0, 1000.0, 31).unwrap();
        let s = Spectrum::from_fn(&coarse, Unit::Displacement, |f| 1e-7 / (f * f)).unwrap();
        let r = s.resample(&fine).unwrap();
        for (f, v) in fine.iter().zip(r.asd()) {
            assert_relative_eq!(*v, 1e-7 / (f * f), max_relative = 1e-12);
        }
    }

    fn spectrum_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1e3, n)
    }

    proptest! {
        #[test]
        fn cumulative_rms_non_increasing(asd in spectrum_strategy(64)) {
            let g = make_log_grid(0.5, 500.0, 64).unwrap();
            let s = Spectrum::new(g, asd, Unit::Displacement).unwrap();
            let rms = cumulative_rms(&s);
            for w in rms.asd().windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }

        #[test]
        fn sum_is_permutation_invariant_and_associative(
            a in spectrum_strategy(16), b in spectrum_strategy(16), c in spectrum_strategy(16)
        ) {
            let g = make_log_grid(1.0, 100.0, 16).unwrap();
            let [a, b, c] = [a, b, c].map(|v| Spectrum::new(g.clone(), v, Unit::Force).unwrap());
            let abc = sum_uncorrelated([&a, &b, &c]).unwrap();
            let cba = sum_uncorrelated([&c, &b, &a]).unwrap();
            let nested = sum_uncorrelated([&sum_uncorrelated([&a, &b]).unwrap(), &c]).unwrap();
            for i in 0..16 {
                let x = abc.asd()[i];
                prop_assert!((x - cba.asd()[i]).abs() <= 1e-12 * x.max(f64::MIN_POSITIVE));
                prop_assert!((x - nested.asd()[i]).abs() <= 1e-12 * x.max(f64::MIN_POSITIVE));
            }
        }

        #[test]
        fn asd_psd_round_trip(asd in spectrum_strategy(16)) {
            let g = make_log_grid(1.0, 100.0, 16).unwrap();
            let s = Spectrum::new(g.clone(), asd, Unit::Voltage).unwrap();
            let back = Spectrum::from_psd(&g, &s.psd(), Unit::Voltage).unwrap();
            for (x, y) in s.asd().iter().zip(back.asd()) {
                prop_assert!((x - y).abs() <= 1e-15 * x.abs().max(f64::MIN_POSITIVE) * 2.0);
            }
        }
    }
}
