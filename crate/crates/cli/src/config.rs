//! Experiment configuration files.

use std::path::Path;

use chaoscalc::donsker::{donsker_process, DonskerExperiment};
use chaoscalc::vmbv::Volatility;
use chaoscalc::volterra::{KernelSpec, VolterraKernel};
use chaoscalc::{ChaosProcess, ChaosVector, Grid, SymKernel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_grid")]
    pub grid: Grid,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default = "default_integrand")]
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub volatility: Option<VolatilitySpec>,
    /// Evaluation time; defaults to the horizon.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Highest chaos order an integral may produce.
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub identity: IdentitySection,
    #[serde(default)]
    pub donsker: DonskerSection,
    #[serde(default)]
    pub fbm: FbmSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// Builders for the integrand process `s ↦ Φ(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum IntegrandSpec {
    /// `Φ(s) = I_0(value)`.
    Constant { value: f64 },
    /// `Φ(s) = I_1(f)` with `f` given per cell.
    Wiener { f: Vec<f64> },
    /// `Φ(s) = 𝟙_{[ε,∞)}(s) δ₀(B(s))` with `terms` even orders.
    Donsker { terms: usize, eps: f64 },
    /// `Φ(s) = B(s)`.
    Brownian,
    /// A process given in full.
    Custom { process: ChaosProcess },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolatilitySpec {
    pub mode: VolatilityMode,
    pub process: IntegrandSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolatilityMode {
    Pointwise,
    Wick,
    Strongind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub json: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitySection {
    pub draws: usize,
    pub order: usize,
}

impl Default for IdentitySection {
    fn default() -> Self {
        IdentitySection { draws: 50, order: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DonskerSection {
    pub alpha: f64,
    pub eps: f64,
    pub t: f64,
    pub terms: usize,
}

impl Default for DonskerSection {
    fn default() -> Self {
        DonskerSection {
            alpha: 1.0,
            eps: 0.25,
            t: 1.0,
            terms: 20,
        }
    }
}

impl DonskerSection {
    pub fn experiment(&self) -> DonskerExperiment {
        DonskerExperiment {
            alpha: self.alpha,
            eps: self.eps,
            t: self.t,
            terms: self.terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbmSection {
    pub hurst: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
}

impl Default for FbmSection {
    fn default() -> Self {
        FbmSection {
            hurst: vec![0.6, 0.7, 0.8],
            pairs: vec![(1.0, 0.5), (1.0, 0.25), (0.75, 0.5)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub samples: usize,
}

impl Default for McSection {
    fn default() -> Self {
        McSection { samples: 100_000 }
    }
}

/// Cartesian sweep axes; empty axes fall back to the single configured value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub times: Vec<f64>,
    pub cells: Vec<usize>,
}

fn default_grid() -> Grid {
    Grid::new(1.0, 8).expect("valid default grid")
}

fn default_kernel() -> KernelSpec {
    KernelSpec::Ou { alpha: 1.0 }
}

fn default_integrand() -> IntegrandSpec {
    IntegrandSpec::Constant { value: 1.0 }
}

fn default_lambdas() -> Vec<f64> {
    vec![1.0]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        VolterraKernel::new(self.kernel.clone())?;
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(CliError::Parse(
                "lambdas must be a non-empty list of finite numbers".into(),
            ));
        }
        if let Some(t) = self.t {
            if self.grid.aligned_boundary(t).is_none_or(|b| b == 0) {
                return Err(CliError::Parse(format!("t = {t} must be a positive cell boundary")));
            }
        }
        if self.sweep.cells.contains(&0) {
            return Err(CliError::Parse("sweep cell counts must be positive".into()));
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.t.unwrap_or(self.grid.horizon())
    }
}

impl IntegrandSpec {
    pub fn build(&self, grid: &Grid) -> Result<ChaosProcess, CliError> {
        let process = match self {
            IntegrandSpec::Constant { value } => ChaosProcess::constant(ChaosVector::constant(*value, *grid)),
            IntegrandSpec::Wiener { f } => {
                let v = ChaosVector::from_kernel(SymKernel::from_values(*grid, f)?);
                ChaosProcess::constant(v)
            }
            IntegrandSpec::Donsker { terms, eps } => donsker_process(grid, *eps, *terms)?,
            IntegrandSpec::Brownian => ChaosProcess::try_from_fn(*grid, |j| {
                let values: Vec<f64> = (0..grid.cells()).map(|i| if i < j { 1.0 } else { 0.0 }).collect();
                Ok(ChaosVector::from_kernel(SymKernel::from_values(*grid, &values)?))
            })?,
            IntegrandSpec::Custom { process } => {
                if process.grid() != grid {
                    return Err(CliError::Parse(
                        "custom process grid differs from the experiment grid".into(),
                    ));
                }
                process.clone()
            }
        };
        Ok(process)
    }
}

impl VolatilitySpec {
    pub fn volatility<'a>(&self, process: &'a ChaosProcess) -> Volatility<'a> {
        match self.mode {
            VolatilityMode::Pointwise => Volatility::Pointwise(process),
            VolatilityMode::Wick => Volatility::Wick(process),
            VolatilityMode::Strongind => Volatility::StrongInd(process),
        }
    }
}
