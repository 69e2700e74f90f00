//! Residuals of the exact identities of the discrete calculus on random draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{derivative_at, pettis_time_integral, pointwise, skorohod, wick};
use crate::chaos::{relative_residual, ChaosProcess, ChaosVector};
use crate::draws;
use crate::error::Result;
use crate::grid::Grid;
use crate::tensor::{SymKernel, MATERIALIZE_LIMIT};
use crate::vmbv::{integrate_plain, integrate_sigma, VmbvOptions};
use crate::volterra::VolterraKernel;

pub const IDENTITIES: [&str; 9] = [
    "ftc",
    "integration_by_parts",
    "wick_product_rule",
    "pointwise_product_rule",
    "skorohod_additivity",
    "skorohod_of_one",
    "localization",
    "linearity",
    "pull_out",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: &'static str,
    pub draws: usize,
    pub max_residual: f64,
}

const DENSITY: f64 = 0.5;

fn residual(a: &ChaosVector, b: &ChaosVector) -> Result<f64> {
    relative_residual(a, b, MATERIALIZE_LIMIT)
}

fn interior_boundary(rng: &mut impl Rng, grid: &Grid) -> f64 {
    grid.cell_start(rng.random_range(1..grid.cells()))
}

/// Largest residual of one identity on one random draw of order ≤ `order`.
pub fn identity_residual(name: &str, rng: &mut impl Rng, grid: &Grid, order: usize) -> Result<f64> {
    let horizon = grid.horizon();
    let m = grid.cells();
    let ou = || VolterraKernel::ou(1.0).and_then(|k| k.tabulate(grid));
    let opts = VmbvOptions::default();
    match name {
        "ftc" => {
            let psi = draws::process(rng, grid, order, DENSITY);
            let d = skorohod(&psi, 0.0, horizon)?;
            let mut worst: f64 = 0.0;
            for j in 0..m {
                let lhs = derivative_at(&d, j)?;
                let dpsi = psi.map(|_, v| derivative_at(v, j))?;
                let rhs = ChaosVector::linear_combine(1.0, psi.at(j), 1.0, &skorohod(&dpsi, 0.0, horizon)?)?;
                worst = worst.max(residual(&lhs, &rhs)?);
            }
            Ok(worst)
        }
        "integration_by_parts" => {
            let phi = draws::vector(rng, grid, order, DENSITY);
            let psi = draws::process(rng, grid, order.min(2), DENSITY);
            let prod = psi.map(|_, v| pointwise(&phi, v))?;
            let lhs = skorohod(&prod, 0.0, horizon)?;
            let corr = psi.map(|j, v| pointwise(v, &derivative_at(&phi, j)?))?;
            let rhs = ChaosVector::linear_combine(
                1.0,
                &pointwise(&phi, &skorohod(&psi, 0.0, horizon)?)?,
                -1.0,
                &pettis_time_integral(&corr, 0.0, horizon)?,
            )?;
            residual(&lhs, &rhs)
        }
        "wick_product_rule" | "pointwise_product_rule" => {
            let a = draws::vector(rng, grid, order, DENSITY);
            let b = draws::vector(rng, grid, order, DENSITY);
            let prod = |x: &ChaosVector, y: &ChaosVector| {
                if name == "wick_product_rule" {
                    wick(x, y)
                } else {
                    pointwise(x, y)
                }
            };
            let ab = prod(&a, &b)?;
            let mut worst: f64 = 0.0;
            for j in 0..m {
                let lhs = derivative_at(&ab, j)?;
                let rhs = ChaosVector::linear_combine(
                    1.0,
                    &prod(&derivative_at(&a, j)?, &b)?,
                    1.0,
                    &prod(&a, &derivative_at(&b, j)?)?,
                )?;
                worst = worst.max(residual(&lhs, &rhs)?);
            }
            Ok(worst)
        }
        "skorohod_additivity" => {
            let psi = draws::process(rng, grid, order, DENSITY);
            let b = interior_boundary(rng, grid);
            let parts = ChaosVector::linear_combine(1.0, &skorohod(&psi, 0.0, b)?, 1.0, &skorohod(&psi, b, horizon)?)?;
            residual(&parts, &skorohod(&psi, 0.0, horizon)?)
        }
        "skorohod_of_one" => {
            let a = grid.cell_start(rng.random_range(0..m));
            let b = grid.cell_start(rng.random_range(grid.cell_of(a)? + 1..=m));
            let one = ChaosProcess::constant(ChaosVector::constant(1.0, *grid));
            let range = grid.cell_range(a, b)?;
            let values: Vec<f64> = (0..m).map(|j| if range.contains(&j) { 1.0 } else { 0.0 }).collect();
            let expected = ChaosVector::from_kernel(SymKernel::from_values(*grid, &values)?);
            residual(&skorohod(&one, a, b)?, &expected)
        }
        "localization" => {
            let phi = draws::process(rng, grid, order, DENSITY);
            let s = interior_boundary(rng, grid);
            let table = ou()?;
            let cut = phi.restricted(grid.cell_range(0.0, s)?);
            let whole = integrate_plain(&cut, &table, horizon, &opts)?.value;
            let part = integrate_plain(&phi, &table, s, &opts)?.value;
            residual(&whole, &part)
        }
        "linearity" => {
            let phi = draws::process(rng, grid, order, DENSITY);
            let psi = draws::process(rng, grid, order, DENSITY);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let table = ou()?;
            let combo = ChaosProcess::linear_combine(a, &phi, b, &psi)?;
            let lhs = integrate_plain(&combo, &table, horizon, &opts)?.value;
            let rhs = ChaosVector::linear_combine(
                a,
                &integrate_plain(&phi, &table, horizon, &opts)?.value,
                b,
                &integrate_plain(&psi, &table, horizon, &opts)?.value,
            )?;
            residual(&lhs, &rhs)
        }
        "pull_out" => {
            let small = order.min(2);
            let phi = draws::vector(rng, grid, small, DENSITY);
            let big_phi = draws::process(rng, grid, small, DENSITY);
            let sigma = draws::process(rng, grid, 1, DENSITY);
            let table = ou()?;
            let scaled = big_phi.map(|_, v| pointwise(&phi, v))?;
            let lhs = integrate_sigma(&scaled, &sigma, &table, horizon, &opts)?.value;
            let rhs = pointwise(&phi, &integrate_sigma(&big_phi, &sigma, &table, horizon, &opts)?.value)?;
            residual(&lhs, &rhs)
        }
        other => Err(crate::error::invalid!("unknown identity {other}")),
    }
}

/// Maximum residual of every identity over `draws` seeded draws.
pub fn identity_suite(grid: &Grid, order: usize, seed: u64, draws: usize) -> Result<Vec<IdentityResidual>> {
    let rows = crate::par_map(IDENTITIES.len(), |i| -> Result<IdentityResidual> {
        let name = IDENTITIES[i];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..draws {
            worst = worst.max(identity_residual(name, &mut rng, grid, order)?);
        }
        Ok(IdentityResidual {
            identity: name,
            draws,
            max_residual: worst,
        })
    });
    rows.into_iter().collect()
}
