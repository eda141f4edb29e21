//! Linear longitudinal dynamics of the multi-stage pendulum suspension.
//!
//! Each stage is one coordinate (absolute displacement) hanging from its
//! parent by a spring `k(1 + iφ)` in parallel with a dashpot `c`. The two
//! mirror stages branch off the common penultimate mass.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{STANDARD_GRAVITY, TWO_PI};
use crate::csvio::format_f64;
use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Spectrum, Unit};
use crate::tf::FrequencyResponse;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub name: String,
    pub mass_kg: f64,
    pub wire_length_m: f64,
    #[serde(default = "default_wires")]
    pub n_wires: u32,
    /// Blade-spring stiffness, used only on the vertical axis.
    #[serde(default)]
    pub vertical_stiffness_n_per_m: f64,
    #[serde(default)]
    pub viscous_damping_to_parent: f64,
    #[serde(default)]
    pub loss_angle: f64,
}

fn default_wires() -> u32 {
    4
}

impl Stage {
    fn new(name: &str, mass_kg: f64, wire_length_m: f64, vertical: f64) -> Self {
        Self {
            name: name.into(),
            mass_kg,
            wire_length_m,
            n_wires: 4,
            vertical_stiffness_n_per_m: vertical,
            viscous_damping_to_parent: 0.0,
            loss_angle: 1e-4,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let nn = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.mass_kg) {
            return Err(Error::param(
                "mass_kg",
                format!("stage `{}` must have mass > 0", self.name),
            ));
        }
        if !ok(self.wire_length_m) {
            return Err(Error::param(
                "wire_length_m",
                format!("stage `{}` must have wire length > 0", self.name),
            ));
        }
        if !nn(self.vertical_stiffness_n_per_m)
            || !nn(self.viscous_damping_to_parent)
            || !nn(self.loss_angle)
        {
            return Err(Error::param(
                "stage",
                format!(
                    "stage `{}` has a negative stiffness, damping or loss angle",
                    self.name
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Pendulum chain from the suspension point down to the penultimate mass,
/// with two mirror stages hanging from the penultimate mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuspensionChain {
    pub stages: Vec<Stage>,
    pub final_stages: [Stage; 2],
    /// Relative stiffness difference ε of the two mirror stages.
    pub stiffness_mismatch: f64,
    /// Fraction of vertical mirror motion that appears along the cavity axis.
    pub vertical_cross_coupling: f64,
}

impl Default for SuspensionChain {
    fn default() -> Self {
        let mut penultimate = Stage::new("penultimate", 0.8, 0.19, 291.0);
        // eddy-current dashpot between upper-intermediate and penultimate
        penultimate.viscous_damping_to_parent = 1.0;
        Self {
            stages: vec![
                Stage::new("top", 0.8, 0.19, 860.0),
                Stage::new("upper_intermediate", 0.8, 0.19, 575.0),
                penultimate,
            ],
            final_stages: [
                Stage::new("mirror_a", 0.01, 0.02, 0.0),
                Stage::new("mirror_b", 0.01, 0.02, 0.0),
            ],
            stiffness_mismatch: 1e-2,
            vertical_cross_coupling: 1e-3,
        }
    }
}

impl SuspensionChain {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::param(
                "stages",
                "at least one stage above the mirrors is required",
            ));
        }
        for s in self.stages.iter().chain(&self.final_stages) {
            s.validate()?;
        }
        let e = self.stiffness_mismatch;
        if !(e.is_finite() && (0.0..2.0).contains(&e)) {
            return Err(Error::param("stiffness_mismatch", "must lie in [0, 2)"));
        }
        if !(self.vertical_cross_coupling.is_finite() && self.vertical_cross_coupling >= 0.0) {
            return Err(Error::param(
                "vertical_cross_coupling",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }

    /// Same chain with every loss angle replaced.
    pub fn with_loss_angle(&self, phi: f64) -> Self {
        let mut c = self.clone();
        for s in c.stages.iter_mut().chain(c.final_stages.iter_mut()) {
            s.loss_angle = phi;
        }
        c
    }

    /// Same chain with all viscous damping removed.
    pub fn without_viscous_damping(&self) -> Self {
        let mut c = self.clone();
        for s in c.stages.iter_mut().chain(c.final_stages.iter_mut()) {
            s.viscous_damping_to_parent = 0.0;
        }
        c
    }

    pub fn with_mismatch(&self, eps: f64) -> Self {
        Self {
            stiffness_mismatch: eps,
            ..self.clone()
        }
    }

    /// Viscous coefficient of the dashpot above the penultimate mass.
    pub fn with_eddy_damping(&self, c: f64) -> Self {
        let mut chain = self.clone();
        if let Some(s) = chain.stages.last_mut() {
            s.viscous_damping_to_parent = c;
        }
        chain
    }

    pub fn mirror_mass(&self) -> f64 {
        self.final_stages[0].mass_kg
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Link {
    child: usize,
    parent: Option<usize>,
    k: f64,
    phi: f64,
    c: f64,
}

impl Link {
    fn stiffness(&self, w: f64) -> Complex64 {
        Complex64::new(self.k, self.k * self.phi + w * self.c)
    }
}

/// Mass, stiffness and damping of a tree of point masses connected to their
/// parents (or the suspension point) by lossy springs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    names: Vec<String>,
    masses: Vec<f64>,
    links: Vec<Link>,
    outputs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub frequency_hz: f64,
    /// `None` when the mode has no dissipation.
    pub q: Option<f64>,
    /// Displacement of each coordinate, normalised to unit peak.
    pub shape: Vec<f64>,
    pub dominant_stage: String,
}

impl LinearModel {
    /// Builds the branched model of `chain`.
    pub fn build(chain: &SuspensionChain, axis: Axis) -> Result<Self> {
        chain.validate()?;
        match axis {
            Axis::Horizontal => Ok(Self::horizontal(chain)),
            Axis::Vertical => Self::vertical(chain),
        }
    }

    fn horizontal(chain: &SuspensionChain) -> Self {
        let n_upper = chain.stages.len();
        let mirrors_mass: f64 = chain.final_stages.iter().map(|s| s.mass_kg).sum();
        let mut names = Vec::new();
        let mut masses = Vec::new();
        let mut links = Vec::new();
        for (i, s) in chain.stages.iter().enumerate() {
            let supported: f64 =
                chain.stages[i..].iter().map(|s| s.mass_kg).sum::<f64>() + mirrors_mass;
            names.push(s.name.clone());
            masses.push(s.mass_kg);
            links.push(Link {
                child: i,
                parent: i.checked_sub(1),
                k: STANDARD_GRAVITY * supported / s.wire_length_m,
                phi: s.loss_angle,
                c: s.viscous_damping_to_parent,
            });
        }
        let eps = chain.stiffness_mismatch;
        for (j, (s, sign)) in chain.final_stages.iter().zip([1.0, -1.0]).enumerate() {
            names.push(s.name.clone());
            masses.push(s.mass_kg);
            links.push(Link {
                child: n_upper + j,
                parent: Some(n_upper - 1),
                k: STANDARD_GRAVITY * s.mass_kg / s.wire_length_m * (1.0 + sign * eps / 2.0),
                phi: s.loss_angle,
                c: s.viscous_damping_to_parent,
            });
        }
        Self {
            names,
            masses,
            links,
            outputs: vec![n_upper, n_upper + 1],
        }
    }

    /// Three blade stages; the mirrors ride rigidly on the penultimate mass.
    fn vertical(chain: &SuspensionChain) -> Result<Self> {
        if chain.stages.len() != 3 {
            return Err(Error::param(
                "stages",
                format!(
                    "vertical model needs exactly 3 blade stages, got {}",
                    chain.stages.len()
                ),
            ));
        }
        let mut masses: Vec<f64> = chain.stages.iter().map(|s| s.mass_kg).collect();
        masses[2] += chain.final_stages.iter().map(|s| s.mass_kg).sum::<f64>();
        for s in &chain.stages {
            if s.vertical_stiffness_n_per_m <= 0.0 {
                return Err(Error::param(
                    "vertical_stiffness_n_per_m",
                    format!("stage `{}` needs a positive blade stiffness", s.name),
                ));
            }
        }
        let links = chain
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| Link {
                child: i,
                parent: i.checked_sub(1),
                k: s.vertical_stiffness_n_per_m,
                phi: s.loss_angle,
                c: s.viscous_damping_to_parent,
            })
            .collect();
        Ok(Self {
            names: chain.stages.iter().map(|s| s.name.clone()).collect(),
            masses,
            links,
            outputs: vec![2],
        })
    }

    /// Simple hanging chain with no branch; the last stage is the output.
    pub fn serial(stages: &[Stage]) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Empty("stages"));
        }
        for s in stages {
            s.validate()?;
        }
        let links = stages
            .iter()
            .enumerate()
            .map(|(i, s)| Link {
                child: i,
                parent: i.checked_sub(1),
                k: STANDARD_GRAVITY * stages[i..].iter().map(|s| s.mass_kg).sum::<f64>()
                    / s.wire_length_m,
                phi: s.loss_angle,
                c: s.viscous_damping_to_parent,
            })
            .collect();
        Ok(Self {
            names: stages.iter().map(|s| s.name.clone()).collect(),
            masses: stages.iter().map(|s| s.mass_kg).collect(),
            links,
            outputs: vec![stages.len() - 1],
        })
    }

    /// Single mass on a spring `k` with loss angle `phi` and dashpot `c`.
    pub fn oscillator(mass: f64, k: f64, phi: f64, c: f64) -> Result<Self> {
        if !(mass > 0.0 && k > 0.0 && phi >= 0.0 && c >= 0.0) {
            return Err(Error::param(
                "oscillator",
                "mass, k > 0 and phi, c >= 0 required",
            ));
        }
        Ok(Self {
            names: vec!["mass".into()],
            masses: vec![mass],
            links: vec![Link {
                child: 0,
                parent: None,
                k,
                phi,
                c,
            }],
            outputs: vec![0],
        })
    }

    pub fn dof(&self) -> usize {
        self.masses.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.masses))
    }

    fn assemble(&self, value: impl Fn(&Link) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dof(), self.dof());
        for l in &self.links {
            let v = value(l);
            m[(l.child, l.child)] += v;
            if let Some(p) = l.parent {
                m[(p, p)] += v;
                m[(l.child, p)] -= v;
                m[(p, l.child)] -= v;
            }
        }
        m
    }

    pub fn stiffness_matrix(&self) -> DMatrix<f64> {
        self.assemble(|l| l.k)
    }

    /// Imaginary part of the structural stiffness, `Σ k·φ`.
    pub fn loss_matrix(&self) -> DMatrix<f64> {
        self.assemble(|l| l.k * l.phi)
    }

    pub fn damping_matrix(&self) -> DMatrix<f64> {
        self.assemble(|l| l.c)
    }

    pub fn has_dissipation(&self) -> bool {
        self.links.iter().any(|l| l.phi > 0.0 || l.c > 0.0)
    }

    /// `K(1 + iφ) + iΩC − Ω²M`.
    pub fn dynamic_stiffness(&self, f: f64) -> DMatrix<Complex64> {
        let w = TWO_PI * f;
        let mut d = DMatrix::from_element(self.dof(), self.dof(), Complex64::new(0.0, 0.0));
        for l in &self.links {
            let z = l.stiffness(w);
            d[(l.child, l.child)] += z;
            if let Some(p) = l.parent {
                d[(p, p)] += z;
                d[(l.child, p)] -= z;
                d[(p, l.child)] -= z;
            }
        }
        for (i, m) in self.masses.iter().enumerate() {
            d[(i, i)] -= m * w * w;
        }
        d
    }

    fn solve(&self, f: f64, rhs: DVector<Complex64>) -> Result<DVector<Complex64>> {
        let x = self
            .dynamic_stiffness(f)
            .lu()
            .solve(&rhs)
            .ok_or(Error::Singular { frequency_hz: f })?;
        if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Singular { frequency_hz: f });
        }
        Ok(x)
    }

    /// Displacement of every coordinate per unit suspension-point motion.
    pub fn ground_response(&self, f: f64) -> Result<DVector<Complex64>> {
        let w = TWO_PI * f;
        let mut b = DVector::from_element(self.dof(), Complex64::new(0.0, 0.0));
        for l in self.links.iter().filter(|l| l.parent.is_none()) {
            b[l.child] += l.stiffness(w);
        }
        self.solve(f, b)
    }

    /// Displacement of coordinate `node` per unit force applied to it.
    pub fn compliance(&self, f: f64, node: usize) -> Result<Complex64> {
        let mut b = DVector::from_element(self.dof(), Complex64::new(0.0, 0.0));
        b[node] = Complex64::new(1.0, 0.0);
        Ok(self.solve(f, b)?[node])
    }

    /// Coordinate index of the (first) mirror.
    pub fn mirror_index(&self) -> usize {
        self.outputs[0]
    }

    pub fn tf_suspoint_to_node(
        &self,
        grid: &FrequencyGrid,
        node: usize,
    ) -> Result<FrequencyResponse> {
        let values = grid
            .iter()
            .map(|f| self.ground_response(f).map(|x| x[node]))
            .collect::<Result<Vec<_>>>()?;
        FrequencyResponse::new(grid.clone(), values)
    }

    pub fn tf_suspoint_to_mirror(&self, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
        self.tf_suspoint_to_node(grid, self.mirror_index())
    }

    /// `x_a − x_b` for common suspension-point motion.
    ///
    /// Mirrors are leaves, so each follows the shared parent through its own
    /// single-stage response; the difference is formed from those factors,
    /// which makes identical stages cancel exactly.
    pub fn tf_suspoint_to_differential(&self, grid: &FrequencyGrid) -> Result<FrequencyResponse> {
        let [a, b] = match self.outputs[..] {
            [a, b] => [a, b],
            _ => {
                return Err(Error::param(
                    "model",
                    "differential output needs two mirrors",
                ))
            }
        };
        let la = self
            .links
            .iter()
            .find(|l| l.child == a)
            .copied()
            .expect("mirror link");
        let lb = self
            .links
            .iter()
            .find(|l| l.child == b)
            .copied()
            .expect("mirror link");
        let parent = la.parent.expect("mirror hangs from a stage");
        let leaf = |l: &Link, f: f64| {
            let w = TWO_PI * f;
            let z = l.stiffness(w);
            z / (z - self.masses[l.child] * w * w)
        };
        let values = grid
            .iter()
            .map(|f| {
                let xp = self.ground_response(f)?[parent];
                let v = xp * (leaf(&la, f) - leaf(&lb, f));
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Singular { frequency_hz: f })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FrequencyResponse::new(grid.clone(), values)
    }

    /// Undamped normal modes, sorted by frequency, with modal quality factors.
    pub fn eigenmodes(&self) -> Result<Vec<Mode>> {
        let n = self.dof();
        let inv_sqrt: Vec<f64> = self.masses.iter().map(|m| 1.0 / m.sqrt()).collect();
        let k = self.stiffness_matrix();
        let scaled = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
        let eig = SymmetricEigen::try_new(scaled, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen("symmetric eigen-decomposition did not converge".into()))?;
        let c = self.damping_matrix();
        let kphi = self.loss_matrix();
        let mut modes = Vec::with_capacity(n);
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < 0.0 {
                return Err(Error::Eigen(format!(
                    "negative stiffness eigenvalue {lambda:e}"
                )));
            }
            let u = eig.eigenvectors.column(idx);
            // mass-normalised physical shape
            let v = DVector::from_fn(n, |i, _| u[i] * inv_sqrt[i]);
            let w = lambda.sqrt();
            let c_n = (v.transpose() * &c * &v)[(0, 0)];
            let phi_n = (v.transpose() * &kphi * &v)[(0, 0)] / lambda;
            let loss = c_n / w + phi_n;
            let peak = v.iter().cloned().fold(0.0f64, |a, x| a.max(x.abs()));
            let dominant = v.iter().position(|x| x.abs() == peak).unwrap_or(0);
            let sign = v[dominant].signum();
            modes.push(Mode {
                frequency_hz: w / TWO_PI,
                q: (loss > 0.0).then(|| 1.0 / loss),
                shape: v.iter().map(|x| sign * x / peak).collect(),
                dominant_stage: self.names[dominant].clone(),
            });
        }
        modes.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
        Ok(modes)
    }
}

pub fn build_model(chain: &SuspensionChain, axis: Axis) -> Result<LinearModel> {
    LinearModel::build(chain, axis)
}

pub fn tf_suspoint_to_differential(
    chain: &SuspensionChain,
    grid: &FrequencyGrid,
) -> Result<FrequencyResponse> {
    LinearModel::build(chain, Axis::Horizontal)?.tf_suspoint_to_differential(grid)
}

/// Differential cavity motion driven by ground motion through the platform
/// and the suspension.
pub fn seismic_to_cavity(
    chain: &SuspensionChain,
    ground: &Spectrum,
    platform_tf: &FrequencyResponse,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    ground.ensure_unit(Unit::Displacement)?;
    if !ground.grid().same_as(grid) || !platform_tf.grid().same_as(grid) {
        return Err(Error::GridMismatch);
    }
    let diff = tf_suspoint_to_differential(chain, grid)?;
    platform_tf.mul(&diff)?.apply(ground, Unit::Displacement)
}

/// Vertical mirror motion projected onto the cavity axis.
pub fn vertical_to_cavity(
    chain: &SuspensionChain,
    grid: &FrequencyGrid,
) -> Result<FrequencyResponse> {
    let model = LinearModel::build(chain, Axis::Vertical)?;
    Ok(model
        .tf_suspoint_to_mirror(grid)?
        .scale(chain.vertical_cross_coupling))
}

/// Mode table with columns `frequency_hz,q,dominant_stage`; undamped modes
/// have `q = inf`.
pub fn write_mode_table<W: Write>(w: W, modes: &[Mode]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(["frequency_hz", "q", "dominant_stage"])?;
    for m in modes {
        let q = m.q.map_or_else(|| "inf".to_string(), format_f64);
        writer.write_record([format_f64(m.frequency_hz), q, m.dominant_stage.clone()])?;
    }
    writer.flush()?;
    Ok(())
}
