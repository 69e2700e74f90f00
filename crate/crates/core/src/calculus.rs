//! Stochastic derivative, Skorohod integral, Wick and pointwise products,
//! S-transform and the Pettis time integral.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use crate::chaos::{ChaosProcess, ChaosVector};
use crate::combinatorics::{binomial, factorial, insert_sorted};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::tensor::{factored, Factor, Groups, SparseMap, SymKernel};

/// A test function `ξ`, given by its value on every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl TestFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(invalid!(
                "test function needs {} values, got {}",
                grid.cells(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid!("test function values must be finite"));
        }
        Ok(TestFunction { grid, values })
    }

    pub fn zero(grid: Grid) -> Self {
        let values = vec![0.0; grid.cells()];
        TestFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        (self.grid.step() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `ξ + h·e_j/step`: a bump of unit mass `h` on cell `j`.
    pub fn bumped(&self, cell: usize, h: f64) -> TestFunction {
        let mut v = self.clone();
        v.values[cell] += h / self.grid.step();
        v
    }
}

/// `D_jΦ = Σ n I_{n−1}(Φ⁽ⁿ⁾(·, j))`.
pub fn derivative_at(phi: &ChaosVector, cell: usize) -> Result<ChaosVector> {
    let grid = phi.grid();
    if cell >= grid.cells() {
        return Err(invalid!("cell {cell} out of range for {} cells", grid.cells()));
    }
    let mut out = ChaosVector::zero(*grid);
    for (n, k) in phi.components().iter().enumerate().skip(1) {
        if k.is_zero() {
            continue;
        }
        out.add_kernel(n as f64, &k.slice(cell)?)?;
    }
    Ok(out)
}

/// `j ↦ D_jΦ` on every cell.
pub fn derivative_process(phi: &ChaosVector) -> Result<ChaosProcess> {
    ChaosProcess::try_from_fn(*phi.grid(), |j| derivative_at(phi, j))
}

/// `δ(Ψ 𝟙_{[a,b)})` with endpoints snapped down to cell boundaries.
pub fn skorohod(psi: &ChaosProcess, a: f64, b: f64) -> Result<ChaosVector> {
    let range = psi.grid().cell_range(a, b)?;
    skorohod_cells(psi, range)
}

/// `δ` of the process restricted to a range of time cells.
pub fn skorohod_cells(psi: &ChaosProcess, cells: Range<usize>) -> Result<ChaosVector> {
    let grid = psi.grid();
    if cells.start >= cells.end || cells.end > grid.cells() {
        return Err(invalid!("empty or out-of-range cell interval {cells:?}"));
    }
    let m = grid.cells();
    let top = cells.clone().map(|j| psi.at(j).max_order()).max().unwrap_or(0);
    let mut out = ChaosVector::zero(*grid);
    for n in 0..=top {
        let mut entries = SparseMap::new();
        let mut profiles: BTreeMap<Groups, Vec<f64>> = BTreeMap::new();
        for j in cells.clone() {
            let Some(k) = psi.at(j).get(n) else { continue };
            for (tau, c) in k.entries() {
                let rho = insert_sorted(tau, j as u32);
                let r = rho.iter().filter(|&&x| x == j as u32).count() as f64;
                *entries.entry(rho).or_insert(0.0) += c * r / (n + 1) as f64;
            }
            for (g, c) in k.products() {
                profiles.entry(g.clone()).or_insert_with(|| vec![0.0; m])[j] += c;
            }
        }
        let mut products = factored::ProductMap::new();
        for (g, h) in profiles {
            let mut groups = g;
            groups.push((Factor::new(h), 1));
            factored::accumulate(&mut products, factored::normalize_groups(groups), 1.0);
        }
        let k = SymKernel::from_parts(n + 1, *grid, entries, products);
        out.add_kernel(1.0, &k)?;
    }
    Ok(out)
}

/// `step · Σ_{j∈[a,b)} Ψ(j)`, endpoints snapped down.
pub fn pettis_time_integral(psi: &ChaosProcess, a: f64, b: f64) -> Result<ChaosVector> {
    let range = psi.grid().cell_range(a, b)?;
    pettis_cells(psi, range)
}

pub fn pettis_cells(psi: &ChaosProcess, cells: Range<usize>) -> Result<ChaosVector> {
    let grid = psi.grid();
    if cells.start >= cells.end || cells.end > grid.cells() {
        return Err(invalid!("empty or out-of-range cell interval {cells:?}"));
    }
    let mut out = ChaosVector::zero(*grid);
    for j in cells {
        out.add_scaled(grid.step(), psi.at(j))?;
    }
    Ok(out)
}

/// `Φ ⋄ Ψ = Σ_n I_n(Σ_m Φ⁽ⁿ⁻ᵐ⁾ ⊗̂ Ψ⁽ᵐ⁾)`.
pub fn wick(phi: &ChaosVector, psi: &ChaosVector) -> Result<ChaosVector> {
    wick_capped(phi, psi, usize::MAX)
}

/// Wick product keeping only orders up to `cap`.
pub fn wick_capped(phi: &ChaosVector, psi: &ChaosVector, cap: usize) -> Result<ChaosVector> {
    phi.check_grid(psi)?;
    let mut out = ChaosVector::zero(*phi.grid());
    for (n, a) in phi.components().iter().enumerate() {
        for (m, b) in psi.components().iter().enumerate() {
            if n + m > cap || a.is_zero() || b.is_zero() {
                continue;
            }
            out.add_kernel(1.0, &a.contract(b, 0)?)?;
        }
    }
    Ok(out)
}

/// The pointwise product through the contraction expansion
/// `Σ_{n,m} Σ_k k! C(n,k) C(m,k) I_{n+m−2k}(Φ⁽ⁿ⁾ ⊗̂_k Ψ⁽ᵐ⁾)`.
pub fn pointwise(phi: &ChaosVector, psi: &ChaosVector) -> Result<ChaosVector> {
    pointwise_capped(phi, psi, usize::MAX)
}

pub fn pointwise_capped(phi: &ChaosVector, psi: &ChaosVector, cap: usize) -> Result<ChaosVector> {
    phi.check_grid(psi)?;
    let mut out = ChaosVector::zero(*phi.grid());
    for (n, a) in phi.components().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (m, b) in psi.components().iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for k in 0..=n.min(m) {
                if n + m - 2 * k > cap {
                    continue;
                }
                let w = factorial(k) * binomial(n, k) * binomial(m, k);
                let c = a.contract(b, k)?;
                out.add_kernel(w, &c)?;
            }
        }
    }
    Ok(out)
}

/// `SΦ(ξ) = Σ_n (Φ⁽ⁿ⁾, ξ^{⊗n})`.
pub fn s_transform(phi: &ChaosVector, xi: &TestFunction) -> Result<f64> {
    if phi.grid() != xi.grid() {
        return Err(invalid!("grid mismatch"));
    }
    phi.components().iter().map(|k| k.pair_power(xi.values())).sum()
}

/// The functional derivative of `SΦ` at `ξ` in the direction of cell `j`:
/// `S(D_jΦ)(ξ)`.
pub fn s_transform_frechet(phi: &ChaosVector, xi: &TestFunction, cell: usize) -> Result<f64> {
    s_transform(&derivative_at(phi, cell)?, xi)
}

/// Cell supports of two variables and whether they are disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceReport {
    pub support_left: BTreeSet<u32>,
    pub support_right: BTreeSet<u32>,
    pub disjoint: bool,
}

pub fn support(phi: &ChaosVector) -> BTreeSet<u32> {
    phi.components().iter().flat_map(|k| k.support()).collect()
}

/// Strong independence: no cell carries kernel mass of both variables.
pub fn strongly_independent(phi: &ChaosVector, psi: &ChaosVector) -> IndependenceReport {
    let support_left = support(phi);
    let support_right = support(psi);
    let disjoint = support_left.is_disjoint(&support_right);
    IndependenceReport {
        support_left,
        support_right,
        disjoint,
    }
}
