//! Run-configuration schema (TOML) and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid3, PotentialGrid};
use crate::potentials::{
    make_bump_potential, make_gaussian_potential, make_radial_well_potential,
    make_truncated_power_law, RadialWell,
};
use crate::wave::is_unit;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub grid: GridSection,
    pub potential: PotentialSection,
    #[serde(default)]
    pub potential2: Option<PotentialSection>,
    #[serde(default)]
    pub forward: ForwardSection,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub certificate: CertificateSection,
    #[serde(default)]
    pub invert: InvertSection,
    #[serde(default)]
    pub uniqueness: UniquenessSection,
    #[serde(default)]
    pub noise: NoiseSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub out_dir: String,
    #[serde(default)]
    pub seed: u64,
    /// 0 means machine parallelism.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub pipelines: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_width_a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kind: String,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub depth: f64,
    #[serde(default = "default_l")]
    pub smoothness_l: u32,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_radius")]
    pub truncation_radius: f64,
}

fn default_radius() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.5
}
fn default_l() -> u32 {
    3
}
fn default_gamma() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardSection {
    pub k: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: [f64; 3],
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_alpha() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    400
}

impl Default for ForwardSection {
    fn default() -> Self {
        Self {
            k: 1.0,
            eta: 0.0,
            alpha: default_alpha(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    #[serde(default = "default_ds_kind")]
    pub kind: String,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_kmin")]
    pub k_min: f64,
    #[serde(default = "default_kmax")]
    pub k_max: f64,
    #[serde(default = "default_kcount")]
    pub k_count: usize,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_alpha")]
    pub alpha0: [f64; 3],
}

fn default_ds_kind() -> String {
    "backscatter".into()
}
fn default_directions() -> usize {
    64
}
fn default_kmin() -> f64 {
    0.25
}
fn default_kmax() -> f64 {
    4.0
}
fn default_kcount() -> usize {
    16
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            kind: default_ds_kind(),
            directions: default_directions(),
            k_min: default_kmin(),
            k_max: default_kmax(),
            k_count: default_kcount(),
            eta: 0.0,
            alpha0: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    #[serde(default = "default_k1")]
    pub k: f64,
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub beta: [f64; 3],
}

fn default_k1() -> f64 {
    1.0
}
fn default_etas() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}

impl Default for CertificateSection {
    fn default() -> Self {
        Self {
            k: default_k1(),
            etas: default_etas(),
            beta: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSection {
    #[serde(default = "default_refine")]
    pub refine_iters: usize,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_support")]
    pub support_radius: f64,
}

fn default_refine() -> usize {
    3
}
fn default_support() -> f64 {
    1.5
}

impl Default for InvertSection {
    fn default() -> Self {
        Self {
            refine_iters: default_refine(),
            eta: 0.0,
            support_radius: default_support(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSection {
    #[serde(default = "default_uniq_dirs")]
    pub directions: usize,
    #[serde(default = "default_uniq_ks")]
    pub ks: Vec<f64>,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_amps")]
    pub perturbation_amplitudes: Vec<f64>,
}

fn default_uniq_dirs() -> usize {
    6
}
fn default_uniq_ks() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_amps() -> Vec<f64> {
    vec![0.005, 0.01, 0.02, 0.04, 0.08]
}

impl Default for UniquenessSection {
    fn default() -> Self {
        Self {
            directions: default_uniq_dirs(),
            ks: default_uniq_ks(),
            eta: 0.0,
            perturbation_amplitudes: default_amps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_delta() -> f64 {
    1e-3
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            gamma: default_gamma(),
        }
    }
}

const PIPELINES: [&str; 6] = [
    "forward",
    "dataset",
    "certificate",
    "invert",
    "uniqueness",
    "noise-study",
];

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::ConfigValidation {
            field: "(toml)".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |field: &str, message: String| {
            Err(Error::ConfigValidation {
                field: field.into(),
                message,
            })
        };
        for p in &self.run.pipelines {
            if !PIPELINES.contains(&p.as_str()) {
                return err(
                    "run.pipelines",
                    format!("unknown pipeline `{p}` (expected one of {PIPELINES:?})"),
                );
            }
        }
        if self.grid.n < 8 || self.grid.n % 2 != 0 {
            return err("grid.n", format!("must be even and >= 8, got {}", self.grid.n));
        }
        if !(self.grid.half_width_a > 0.0) {
            return err("grid.half_width_a", "must be positive".into());
        }
        self.potential.validate("potential")?;
        if let Some(p2) = &self.potential2 {
            p2.validate("potential2")?;
        }
        if !is_unit(self.forward.alpha, 1e-10) {
            return err(
                "forward.alpha",
                format!("must be a unit vector, |alpha| = {:.6}", crate::wave::norm(self.forward.alpha)),
            );
        }
        if !(self.forward.tol > 0.0 && self.forward.tol <= 1e-2) {
            return err("forward.tol", "must be in (0, 1e-2]".into());
        }
        if !is_unit(self.dataset.alpha0, 1e-10) {
            return err(
                "dataset.alpha0",
                format!("must be a unit vector, |alpha0| = {:.6}", crate::wave::norm(self.dataset.alpha0)),
            );
        }
        if !matches!(self.dataset.kind.as_str(), "backscatter" | "fixed-incident") {
            return err(
                "dataset.kind",
                format!("must be `backscatter` or `fixed-incident`, got `{}`", self.dataset.kind),
            );
        }
        if self.dataset.k_count == 0 || self.dataset.k_min <= 0.0 || self.dataset.k_max < self.dataset.k_min {
            return err("dataset", "need 0 < k_min <= k_max and k_count >= 1".into());
        }
        if !is_unit(self.certificate.beta, 1e-10) {
            return err("certificate.beta", "must be a unit vector".into());
        }
        if self
            .certificate
            .etas
            .windows(2)
            .any(|w| w[0] >= w[1])
        {
            return err("certificate.etas", "must be strictly ascending".into());
        }
        Ok(())
    }

    pub fn ks(&self) -> Vec<f64> {
        let n = self.dataset.k_count;
        if n == 1 {
            return vec![self.dataset.k_max];
        }
        (0..n)
            .map(|i| {
                self.dataset.k_min
                    + (self.dataset.k_max - self.dataset.k_min) * i as f64 / (n - 1) as f64
            })
            .collect()
    }

    pub fn build_grid(&self) -> Result<Grid3> {
        Grid3::new(self.grid.half_width_a, self.grid.n)
    }

    pub fn build_potential(&self) -> Result<PotentialGrid> {
        self.potential.build(self.build_grid()?)
    }

    pub fn build_potential2(&self) -> Result<PotentialGrid> {
        match &self.potential2 {
            Some(p) => p.build(self.build_grid()?),
            None => {
                let g = self.build_grid()?;
                PotentialGrid::new(g, ndarray::Array3::zeros((g.n(), g.n(), g.n())), 3)
            }
        }
    }
}

impl PotentialSection {
    fn validate(&self, section: &str) -> Result<()> {
        match self.kind.as_str() {
            "bump" | "gaussian" | "well" | "zero" | "power-law" => Ok(()),
            other => Err(Error::ConfigValidation {
                field: format!("{section}.kind"),
                message: format!(
                    "unknown potential kind `{other}` (bump | gaussian | well | zero | power-law)"
                ),
            }),
        }
    }

    pub fn build(&self, grid: Grid3) -> Result<PotentialGrid> {
        match self.kind.as_str() {
            "bump" => make_bump_potential(grid, self.center, self.radius, self.amplitude, self.smoothness_l),
            "gaussian" => {
                make_gaussian_potential(grid, self.center, self.sigma, self.amplitude, self.smoothness_l)
            }
            "well" => make_radial_well_potential(
                grid,
                &RadialWell::single(self.radius, -self.depth),
                self.smoothness_l,
            ),
            "power-law" => make_truncated_power_law(
                grid,
                self.gamma,
                self.amplitude,
                self.truncation_radius,
                self.smoothness_l,
            ),
            "zero" => PotentialGrid::new(
                grid,
                ndarray::Array3::zeros((grid.n(), grid.n(), grid.n())),
                self.smoothness_l,
            ),
            other => Err(Error::ConfigValidation {
                field: "potential.kind".into(),
                message: format!("unknown potential kind `{other}`"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[run]
out_dir = "runs/demo"
pipelines = ["forward"]

[grid]
n = 16
half_width_a = 3.0

[potential]
kind = "bump"
amplitude = 0.2

[forward]
k = 1.0
"#;

    #[test]
    fn parses_and_validates() {
        let cfg: RunConfig = toml::from_str(GOOD).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.ks().len(), 16);
    }

    #[test]
    fn non_unit_alpha_names_the_field() {
        let text = GOOD.replace("k = 1.0", "k = 1.0\nalpha = [0.0, 0.0, 1.5]");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        match cfg.validate() {
            Err(Error::ConfigValidation { field, .. }) => assert_eq!(field, "forward.alpha"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected_with_position() {
        let text = GOOD.replace("amplitude = 0.2", "amplitude = 0.2\nbogus = 1");
        let e = toml::from_str::<RunConfig>(&text).unwrap_err();
        assert!(e.to_string().contains("bogus"));
    }
}
