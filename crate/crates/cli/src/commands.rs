//! Subcommand bodies. Each returns the CSV table and the JSON results.

use chaoscalc::montecarlo::mc_moments;
use chaoscalc::suite::identity_suite;
use chaoscalc::vmbv::{integrate, VmbvOptions, VmbvResult, Volatility};
use chaoscalc::volterra::{fbm_covariance_exact, kernel_covariance, KernelSpec, VolterraKernel};
use chaoscalc::{ChaosProcess, ChaosVector, Grid, SymKernel};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct Tables {
    pub csv: Vec<u8>,
    pub results: Value,
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn tables<T: Serialize>(rows: &[T], results: Value) -> Result<Tables, CliError> {
    Ok(Tables {
        csv: to_csv(rows)?,
        results,
    })
}

pub fn identity(cfg: &ExperimentConfig) -> Result<Tables, CliError> {
    let rows = identity_suite(&cfg.grid, cfg.identity.order, cfg.seed, cfg.identity.draws)?;
    tables(&rows, json!(rows))
}

#[derive(Serialize)]
struct DonskerCsvRow {
    lambda: f64,
    norm_sq: f64,
    a3_max: f64,
    bound_max: f64,
    finite: bool,
}

pub fn donsker(cfg: &ExperimentConfig) -> Result<Tables, CliError> {
    let report = cfg.donsker.experiment().run(&cfg.grid, &cfg.lambdas)?;
    let rows: Vec<DonskerCsvRow> = report
        .rows
        .iter()
        .map(|r| DonskerCsvRow {
            lambda: r.lambda,
            norm_sq: r.norm_sq,
            a3_max: r.a3_max,
            bound_max: r.bound_max,
            finite: r.finite,
        })
        .collect();
    tables(&rows, json!(report))
}

#[derive(Serialize)]
struct FbmRow {
    hurst: f64,
    t: f64,
    s: f64,
    discrete: f64,
    exact: f64,
    rel_error: f64,
}

pub fn fbm_cov(cfg: &ExperimentConfig) -> Result<Tables, CliError> {
    let mut rows = Vec::new();
    for &h in &cfg.fbm.hurst {
        let kernel = VolterraKernel::fbm(h)?;
        for &(t, s) in &cfg.fbm.pairs {
            let discrete = kernel_covariance(&kernel, &cfg.grid, t, s)?;
            let exact = fbm_covariance_exact(h, t, s);
            rows.push(FbmRow {
                hurst: h,
                t,
                s,
                discrete,
                exact,
                rel_error: (discrete - exact).abs() / exact.abs(),
            });
        }
    }
    tables(&rows, json!(rows))
}

fn run_integral(cfg: &ExperimentConfig, grid: &Grid, t: f64, lambda: f64) -> Result<VmbvResult, CliError> {
    let table = VolterraKernel::new(cfg.kernel.clone())?.tabulate(grid)?;
    let phi = cfg.integrand.build(grid)?;
    let sigma = cfg.volatility.as_ref().map(|v| v.process.build(grid)).transpose()?;
    let vol = match (&cfg.volatility, &sigma) {
        (Some(spec), Some(p)) => spec.volatility(p),
        _ => Volatility::None,
    };
    let opts = VmbvOptions {
        lambda,
        cap: cfg.truncation,
        ..VmbvOptions::default()
    };
    Ok(integrate(&phi, &table, t, vol, &opts)?)
}

#[derive(Serialize)]
struct IntegralRow {
    cells: usize,
    t: f64,
    lambda: f64,
    norm: f64,
    expectation: f64,
    max_order: usize,
    a3_max: f64,
    b4: f64,
    b5: f64,
    kg_norm: f64,
    volatility_norm: Option<f64>,
    weighted_kg_norm: Option<f64>,
}

fn integral_row(grid: &Grid, t: f64, lambda: f64, r: &VmbvResult) -> IntegralRow {
    let d = &r.diagnostics;
    IntegralRow {
        cells: grid.cells(),
        t,
        lambda,
        norm: r.value.gnorm(-lambda),
        expectation: r.value.expectation(),
        max_order: r.value.max_order(),
        a3_max: d.assumptions.a3_max,
        b4: d.assumptions.b4,
        b5: d.assumptions.b5,
        kg_norm: d.assumptions.kg_norm,
        volatility_norm: d.volatility.as_ref().map(|v| v.volatility_norm),
        weighted_kg_norm: d.volatility.as_ref().map(|v| v.weighted_kg_norm),
    }
}

pub fn vmbv(cfg: &ExperimentConfig) -> Result<Tables, CliError> {
    let t = cfg.time();
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &lambda in &cfg.lambdas {
        let r = run_integral(cfg, &cfg.grid, t, lambda)?;
        rows.push(integral_row(&cfg.grid, t, lambda, &r));
        results.push(json!({
            "lambda": lambda,
            "diagnostics": r.diagnostics,
            "value": r.value,
        }));
    }
    tables(&rows, Value::Array(results))
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Tables, CliError> {
    let cells = if cfg.sweep.cells.is_empty() {
        vec![cfg.grid.cells()]
    } else {
        cfg.sweep.cells.clone()
    };
    let times = if cfg.sweep.times.is_empty() {
        vec![cfg.time()]
    } else {
        cfg.sweep.times.clone()
    };
    let mut points = Vec::new();
    for &m in &cells {
        for &t in &times {
            for &lambda in &cfg.lambdas {
                points.push((m, t, lambda));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(m, t, lambda)| {
            let grid = Grid::new(cfg.grid.horizon(), m)?;
            let r = run_integral(cfg, &grid, t, lambda)?;
            Ok(integral_row(&grid, t, lambda, &r))
        })
        .collect::<Vec<Result<IntegralRow, CliError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    tables(&rows, json!(rows))
}

#[derive(Serialize)]
struct McRow {
    experiment: String,
    n_samples: usize,
    mean: f64,
    se_mean: f64,
    var: f64,
    se_var: f64,
    reference: f64,
    z_score: f64,
}

fn mc_rows(
    name: &str,
    v: &ChaosVector,
    ref_mean: f64,
    ref_var: f64,
    cfg: &ExperimentConfig,
) -> Result<Vec<McRow>, CliError> {
    let m = mc_moments(v, cfg.mc.samples, cfg.seed)?;
    let row = |stat: &str, est: f64, se: f64, reference: f64| McRow {
        experiment: format!("{name}:{stat}"),
        n_samples: m.n_samples,
        mean: m.mean,
        se_mean: m.se_mean,
        var: m.variance,
        se_var: m.se_variance,
        reference,
        z_score: if se > 0.0 { (est - reference) / se } else { 0.0 },
    };
    Ok(vec![
        row("mean", m.mean, m.se_mean, ref_mean),
        row("var", m.variance, m.se_variance, ref_var),
    ])
}

/// Moments of the configured integral against its chaos-expansion values,
/// of `B(T)`, and of the OU Volterra process against its closed form.
pub fn mc_compare(cfg: &ExperimentConfig) -> Result<Tables, CliError> {
    let grid = &cfg.grid;
    let t = cfg.time();
    let mut rows = Vec::new();

    let value = run_integral(cfg, grid, t, cfg.lambdas[0])?.value;
    let mean = value.expectation();
    let var = value.gnorm_sq(0.0) - mean * mean;
    rows.extend(mc_rows("integral", &value, mean, var, cfg)?);

    let endpoint = ChaosVector::from_kernel(SymKernel::from_values(*grid, &vec![1.0; grid.cells()])?);
    rows.extend(mc_rows("brownian_endpoint", &endpoint, 0.0, grid.horizon(), cfg)?);

    if let KernelSpec::Ou { alpha } = cfg.kernel {
        let table = VolterraKernel::ou(alpha)?.tabulate(grid)?;
        let unit = ChaosProcess::constant(ChaosVector::constant(1.0, *grid));
        let x = integrate(&unit, &table, t, Volatility::None, &VmbvOptions::default())?.value;
        let closed = -(-2.0 * alpha * t).exp_m1() / (2.0 * alpha);
        rows.extend(mc_rows("ou_process", &x, 0.0, closed, cfg)?);
    }
    tables(&rows, json!(rows))
}
