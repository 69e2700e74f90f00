//! Integrals with respect to volatility modulated Volterra processes.
//!
//! Every variant runs the same pipeline: `K_g(Φ)(t, ·)`, a per-cell product
//! with the volatility, then a Skorohod part plus a drift part
//! `∫ D_s{K_g(Φ)(t,s)} ⋆ σ(s) ds`, where `⋆` is the variant's product.

use serde::Serialize;

use crate::calculus::{derivative_at, pettis_cells, pointwise, skorohod_cells, strongly_independent, wick};
use crate::chaos::{ChaosProcess, ChaosVector};
use crate::error::{invalid, ChaosError, Result};
use crate::volterra::{assumption_report, kg_apply_index, AssumptionReport, KernelTable};

/// How the volatility enters the integral.
#[derive(Debug, Clone, Copy)]
pub enum Volatility<'a> {
    /// `∫ Φ dX₁`.
    None,
    /// `∫ Φ dX_σ` with pointwise products.
    Pointwise(&'a ChaosProcess),
    /// `∫ Φ dX_{⋄Σ}` with Wick products.
    Wick(&'a ChaosProcess),
    /// Pointwise products gated on strong independence of `K_g(Φ)(t,s)` and `Σ(s)`.
    StrongInd(&'a ChaosProcess),
}

impl Volatility<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Volatility::None => "none",
            Volatility::Pointwise(_) => "pointwise",
            Volatility::Wick(_) => "wick",
            Volatility::StrongInd(_) => "strongind",
        }
    }

    fn process(&self) -> Option<&ChaosProcess> {
        match self {
            Volatility::None => None,
            Volatility::Pointwise(p) | Volatility::Wick(p) | Volatility::StrongInd(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmbvOptions {
    /// Diagnostics are evaluated at index `−λ`.
    pub lambda: f64,
    /// Regularity gap used by the pointwise-volatility diagnostics.
    pub nu: f64,
    /// Highest chaos order the result may carry; defaults to
    /// `max order of Φ + max order of σ + 1`.
    pub cap: Option<usize>,
}

impl Default for VmbvOptions {
    fn default() -> Self {
        VmbvOptions {
            lambda: 1.0,
            nu: 1.0,
            cap: None,
        }
    }
}

/// Volatility diagnostics: `∫‖σ(s)‖²_λ ds` and `∫‖K_g(Φ)(t,s)‖²_{−λ+ν}‖σ(s)‖²_λ ds`
/// for pointwise volatility; `∫‖Σ(s)‖²_{−λ} ds` and
/// `∫‖K_g(Φ)(t,s)‖²_{−λ}‖Σ(s)‖²_{−λ} ds` for Wick volatility.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilityReport {
    pub volatility_norm: f64,
    pub weighted_kg_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub assumptions: AssumptionReport,
    pub volatility: Option<VolatilityReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmbvResult {
    pub value: ChaosVector,
    pub skorohod_part: ChaosVector,
    pub drift_part: ChaosVector,
    pub diagnostics: Diagnostics,
}

pub fn integrate_plain(phi: &ChaosProcess, table: &KernelTable, t: f64, opts: &VmbvOptions) -> Result<VmbvResult> {
    integrate(phi, table, t, Volatility::None, opts)
}

pub fn integrate_sigma(
    phi: &ChaosProcess,
    sigma: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    opts: &VmbvOptions,
) -> Result<VmbvResult> {
    integrate(phi, table, t, Volatility::Pointwise(sigma), opts)
}

pub fn integrate_wick(
    phi: &ChaosProcess,
    sigma: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    opts: &VmbvOptions,
) -> Result<VmbvResult> {
    integrate(phi, table, t, Volatility::Wick(sigma), opts)
}

pub fn integrate_strongind(
    phi: &ChaosProcess,
    sigma: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    opts: &VmbvOptions,
) -> Result<VmbvResult> {
    integrate(phi, table, t, Volatility::StrongInd(sigma), opts)
}

pub fn integrate(
    phi: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    vol: Volatility<'_>,
    opts: &VmbvOptions,
) -> Result<VmbvResult> {
    let grid = *phi.grid();
    if *table.grid() != grid {
        return Err(invalid!("integrand and kernel table use different grids"));
    }
    if let Some(s) = vol.process() {
        if *s.grid() != grid {
            return Err(invalid!("volatility lives on a different grid"));
        }
    }
    let m = table.time_index(t)?;
    let assumptions = assumption_report(phi, table, opts.lambda, t)?;
    if let Some(name) = assumptions.first_failure() {
        return Err(ChaosError::Integrability {
            assumption: name,
            detail: format!("diagnostic is not finite at lambda = {}", opts.lambda),
        });
    }
    let kg = kg_apply_index(phi, table, m)?;
    let volatility = volatility_report(&kg, vol, m, opts)?;

    if let Volatility::StrongInd(s) = vol {
        for j in 0..m {
            if !strongly_independent(kg.at(j), s.at(j)).disjoint {
                return Err(ChaosError::Independence { cell: j });
            }
        }
    }

    let product = |a: &ChaosVector, j: usize| -> Result<ChaosVector> {
        match vol {
            Volatility::None => Ok(a.clone()),
            Volatility::Pointwise(s) | Volatility::StrongInd(s) => pointwise(a, s.at(j)),
            Volatility::Wick(s) => wick(a, s.at(j)),
        }
    };
    let pairs = crate::par_map(grid.cells(), |j| -> Result<(ChaosVector, ChaosVector)> {
        if j >= m {
            let z = ChaosVector::zero(grid);
            return Ok((z.clone(), z));
        }
        let y = product(kg.at(j), j)?;
        let z = product(&derivative_at(kg.at(j), j)?, j)?;
        Ok((y, z))
    });
    let (ys, zs): (Vec<_>, Vec<_>) = pairs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let skorohod_part = skorohod_cells(&ChaosProcess::new(grid, ys)?, 0..m)?;
    let drift_part = pettis_cells(&ChaosProcess::new(grid, zs)?, 0..m)?;
    let value = ChaosVector::linear_combine(1.0, &skorohod_part, 1.0, &drift_part)?;

    let cap = opts
        .cap
        .unwrap_or(phi.max_order() + vol.process().map_or(0, ChaosProcess::max_order) + 1);
    if value.max_order() > cap {
        return Err(ChaosError::TruncationOverflow {
            needed: value.max_order(),
            cap,
        });
    }
    Ok(VmbvResult {
        value,
        skorohod_part,
        drift_part,
        diagnostics: Diagnostics {
            assumptions,
            volatility,
        },
    })
}

fn volatility_report(
    kg: &ChaosProcess,
    vol: Volatility<'_>,
    m: usize,
    opts: &VmbvOptions,
) -> Result<Option<VolatilityReport>> {
    let step = kg.grid().step();
    let lambda = opts.lambda;
    let report = match vol {
        Volatility::None => return Ok(None),
        Volatility::Pointwise(s) => {
            let rows: Vec<(f64, f64)> = (0..m)
                .map(|j| {
                    let sn = s.at(j).gnorm_sq(lambda);
                    (sn, kg.at(j).gnorm_sq(-lambda + opts.nu) * sn)
                })
                .collect();
            VolatilityReport {
                volatility_norm: step * rows.iter().map(|r| r.0).sum::<f64>(),
                weighted_kg_norm: step * rows.iter().map(|r| r.1).sum::<f64>(),
            }
        }
        Volatility::Wick(s) | Volatility::StrongInd(s) => {
            let rows: Vec<(f64, f64)> = (0..m)
                .map(|j| {
                    let sn = s.at(j).gnorm_sq(-lambda);
                    (sn, kg.at(j).gnorm_sq(-lambda) * sn)
                })
                .collect();
            VolatilityReport {
                volatility_norm: step * rows.iter().map(|r| r.0).sum::<f64>(),
                weighted_kg_norm: step * rows.iter().map(|r| r.1).sum::<f64>(),
            }
        }
    };
    let (norm_name, weighted_name) = match vol {
        Volatility::Pointwise(_) => ("C(2)", "Remark 3"),
        _ => ("D(1)", "Remark 4"),
    };
    if !report.volatility_norm.is_finite() {
        return Err(ChaosError::Integrability {
            assumption: norm_name,
            detail: "volatility norm is not finite".into(),
        });
    }
    if !report.weighted_kg_norm.is_finite() {
        return Err(ChaosError::Integrability {
            assumption: weighted_name,
            detail: "weighted K_g norm is not finite".into(),
        });
    }
    Ok(Some(report))
}

/// One row of a stability table for `Φ_n = Φ + Ψ/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityRow {
    pub n: usize,
    /// `‖∫Φ_n − ∫Φ‖` at the requested index.
    pub residual: f64,
    /// `‖∫Ψ‖ / n` at the same index.
    pub predicted: f64,
}

/// Residual norms `‖∫Φ_n − ∫Φ‖_{index}` for `n = 1..=n_max`.
#[allow(clippy::too_many_arguments)]
pub fn stability_suite(
    phi: &ChaosProcess,
    psi: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    vol: Volatility<'_>,
    index: f64,
    n_max: usize,
    opts: &VmbvOptions,
) -> Result<Vec<StabilityRow>> {
    let base = integrate(phi, table, t, vol, opts)?.value;
    let direction = integrate(psi, table, t, vol, opts)?.value.gnorm(index);
    (1..=n_max)
        .map(|n| {
            let phi_n = ChaosProcess::linear_combine(1.0, phi, 1.0 / n as f64, psi)?;
            let v = integrate(&phi_n, table, t, vol, opts)?.value;
            Ok(StabilityRow {
                n,
                residual: v.sub(&base)?.gnorm(index),
                predicted: direction / n as f64,
            })
        })
        .collect()
}
