use chaoscalc::donsker::{donsker_delta, donsker_norm_limit, donsker_norm_series};
use chaoscalc::volterra::{fbm_covariance_exact, kernel_covariance, KernelSpec, VolterraKernel};
use chaoscalc::{ChaosError, Grid};
use wasm_bindgen::prelude::*;

fn js(e: ChaosError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Kernel from a kind name and up to two parameters.
pub fn kernel_from(kind: &str, a: f64, b: f64) -> Result<VolterraKernel, ChaosError> {
    let spec = match kind {
        "ou" => KernelSpec::Ou { alpha: a },
        "turbulence" => KernelSpec::Turbulence { alpha: a, nu: b },
        "fbm" => KernelSpec::Fbm { hurst: a },
        other => {
            return Err(ChaosError::InvalidArgument(format!(
                "unknown kernel {other:?}; expected ou, turbulence or fbm"
            )))
        }
    };
    VolterraKernel::new(spec)
}

/// `R(t_k, s)` on every grid time `t_k = k·T/M`, as `[t, discrete, exact]` triples.
pub fn fbm_rows(hurst: f64, cells: usize, s: f64) -> Result<Vec<f64>, ChaosError> {
    let grid = Grid::new(1.0, cells)?;
    let kernel = VolterraKernel::fbm(hurst)?;
    let mut out = Vec::with_capacity(3 * cells);
    for k in 1..=cells {
        let t = k as f64 * grid.step();
        out.extend([
            t,
            kernel_covariance(&kernel, &grid, t, s)?,
            fbm_covariance_exact(hurst, t, s),
        ]);
    }
    Ok(out)
}

/// `g(t, s)` at `points` evenly spaced `s` strictly inside `(0, t)`, as `[s, g]` pairs.
pub fn kernel_rows(kind: &str, a: f64, b: f64, t: f64, points: usize) -> Result<Vec<f64>, ChaosError> {
    let kernel = kernel_from(kind, a, b)?;
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let s = t * (i as f64 + 0.5) / points as f64;
        out.extend([s, kernel.eval(t, s)?]);
    }
    Ok(out)
}

/// `‖δ₀(B(t))‖²_{−λ}` for each `λ`, as `[λ, series, tensor, limit]` rows.
pub fn donsker_rows(t: f64, terms: usize, lambdas: &[f64]) -> Result<Vec<f64>, ChaosError> {
    let grid = Grid::new(t, 4)?;
    let delta = donsker_delta(t, terms, &grid)?;
    let mut out = Vec::with_capacity(4 * lambdas.len());
    for &lambda in lambdas {
        out.extend([
            lambda,
            donsker_norm_series(t, lambda, terms)?,
            delta.gnorm_sq(-lambda),
            donsker_norm_limit(t, lambda),
        ]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn fbm_covariance(hurst: f64, cells: usize, s: f64) -> Result<Vec<f64>, JsValue> {
    fbm_rows(hurst, cells, s).map_err(js)
}

#[wasm_bindgen]
pub fn kernel_curve(kind: &str, a: f64, b: f64, t: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    kernel_rows(kind, a, b, t, points).map_err(js)
}

#[wasm_bindgen]
pub fn donsker_norms(t: f64, terms: usize, lambdas: Vec<f64>) -> Result<Vec<f64>, JsValue> {
    donsker_rows(t, terms, &lambdas).map_err(js)
}
