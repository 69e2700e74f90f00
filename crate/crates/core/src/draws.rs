//! Seeded random chaos vectors and processes for property checks.

use rand::Rng;

use crate::calculus::TestFunction;
use crate::chaos::{ChaosProcess, ChaosVector};
use crate::grid::Grid;
use crate::tensor::{sparse, EntryMode, SymKernel};

/// Sparse random kernel on the given cells: each sorted tuple is kept with
/// probability `density` and gets a coefficient uniform in `[-1, 1)`.
pub fn kernel(rng: &mut impl Rng, grid: &Grid, order: usize, cells: &[u32], density: f64) -> SymKernel {
    let mut raw = Vec::new();
    sparse::canonical_tuples(cells, order, |t| {
        if rng.random::<f64>() < density {
            raw.push((t.to_vec(), rng.random_range(-1.0..1.0)));
        }
    });
    SymKernel::from_entries(order, *grid, raw, EntryMode::Canonical).expect("valid tuples")
}

/// A vector with every order up to `max_order` populated on `cells`.
pub fn vector_on(rng: &mut impl Rng, grid: &Grid, max_order: usize, cells: &[u32], density: f64) -> ChaosVector {
    let components = (0..=max_order)
        .map(|n| {
            if n == 0 {
                SymKernel::scalar(rng.random_range(-1.0..1.0), *grid)
            } else {
                kernel(rng, grid, n, cells, density)
            }
        })
        .collect();
    ChaosVector::new(*grid, components).expect("consistent components")
}

pub fn vector(rng: &mut impl Rng, grid: &Grid, max_order: usize, density: f64) -> ChaosVector {
    vector_on(rng, grid, max_order, &all_cells(grid), density)
}

/// A vector without a constant term, so every chaos order is random.
pub fn centered_vector(rng: &mut impl Rng, grid: &Grid, max_order: usize, density: f64) -> ChaosVector {
    let v = vector(rng, grid, max_order, density);
    let mut out = v.clone();
    out.add_scaled(-1.0, &v.truncate(0)).expect("same grid");
    out
}

pub fn process(rng: &mut impl Rng, grid: &Grid, max_order: usize, density: f64) -> ChaosProcess {
    let values = (0..grid.cells())
        .map(|_| vector(rng, grid, max_order, density))
        .collect();
    ChaosProcess::new(*grid, values).expect("one value per cell")
}

/// Each value supported on cells strictly before its own cell.
pub fn adapted_process(rng: &mut impl Rng, grid: &Grid, max_order: usize, density: f64) -> ChaosProcess {
    let values = (0..grid.cells())
        .map(|j| {
            let past: Vec<u32> = (0..j as u32).collect();
            if past.is_empty() {
                ChaosVector::constant(rng.random_range(-1.0..1.0), *grid)
            } else {
                vector_on(rng, grid, max_order, &past, density)
            }
        })
        .collect();
    ChaosProcess::new(*grid, values).expect("one value per cell")
}

/// Each value supported on the given cells.
pub fn process_on(rng: &mut impl Rng, grid: &Grid, max_order: usize, cells: &[u32], density: f64) -> ChaosProcess {
    let values = (0..grid.cells())
        .map(|_| vector_on(rng, grid, max_order, cells, density))
        .collect();
    ChaosProcess::new(*grid, values).expect("one value per cell")
}

pub fn test_function(rng: &mut impl Rng, grid: &Grid) -> TestFunction {
    let values = (0..grid.cells()).map(|_| rng.random_range(-1.0..1.0)).collect();
    TestFunction::new(*grid, values).expect("finite values")
}

pub fn all_cells(grid: &Grid) -> Vec<u32> {
    (0..grid.cells() as u32).collect()
}
