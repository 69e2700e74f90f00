//! The Donsker delta `δ₀(B(t))` and the OU-integrability experiment built on it.
//!
//! The order-`2n` kernel of `δ₀(B(t))` is the constant
//! `(−1)ⁿ / (√(2πt) (2t)ⁿ n!)` on `[0,t)^{2n}`. It is stored as one factored
//! term `c · 𝟙_{[0,t)}^{⊗2n}`, so no tuple is ever enumerated.

use serde::Serialize;

use crate::chaos::{ChaosProcess, ChaosVector};
use crate::combinatorics::ln_factorial;
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::quad;
use crate::tensor::SymKernel;
use crate::vmbv::{integrate_plain, VmbvOptions};
use crate::volterra::{assumption_report, kg_apply_index, KernelTable, VolterraKernel};

/// Kernel constant of the order-`2n` component at time `t`.
pub fn donsker_coefficient(t: f64, n: usize) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let ln_mag = -0.5 * (2.0 * std::f64::consts::PI * t).ln() - n as f64 * (2.0 * t).ln() - ln_factorial(n);
    sign * ln_mag.exp()
}

/// `δ₀(B(t))` with the orders `0, 2, …, 2·terms`.
pub fn donsker_delta(t: f64, terms: usize, grid: &Grid) -> Result<ChaosVector> {
    if t.is_nan() || t <= 0.0 {
        return Err(invalid!("δ₀(B(0)) does not exist; t must be positive, got {t}"));
    }
    let cells = grid
        .aligned_boundary(t)
        .ok_or_else(|| invalid!("time {t} is not on a cell boundary"))?;
    let indicator: Vec<f64> = (0..grid.cells()).map(|j| if j < cells { 1.0 } else { 0.0 }).collect();
    let mut out = ChaosVector::zero(*grid);
    for n in 0..=terms {
        let c = donsker_coefficient(t, n);
        let k = if n == 0 {
            SymKernel::scalar(c, *grid)
        } else {
            SymKernel::product(*grid, c, vec![(indicator.clone(), 2 * n as u32)])?
        };
        out.add_kernel(1.0, &k)?;
    }
    Ok(out)
}

/// `(1/2πt) Σ_{n≤terms} (2n)! / (4ⁿ (n!)² e^{4λn})`, i.e. `‖δ₀(B(t))‖²_{−λ}` truncated.
pub fn donsker_norm_series(t: f64, lambda: f64, terms: usize) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(invalid!("the norm series diverges for lambda = {lambda} <= 0"));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(invalid!("t must be positive, got {t}"));
    }
    let sum: f64 = (0..=terms)
        .map(|n| {
            let ln = ln_factorial(2 * n) - 2.0 * ln_factorial(n) - n as f64 * (4.0f64.ln() + 4.0 * lambda);
            ln.exp()
        })
        .sum();
    Ok(sum / (2.0 * std::f64::consts::PI * t))
}

/// Limit of [`donsker_norm_series`]: `1 / (2πt √(1 − e^{−4λ}))`.
pub fn donsker_norm_limit(t: f64, lambda: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * t * (-(-4.0 * lambda).exp_m1()).sqrt())
}

/// `s ↦ 𝟙_{[ε,∞)}(s) δ₀(B(s))`, evaluated at the left edge of each cell.
pub fn donsker_process(grid: &Grid, eps: f64, terms: usize) -> Result<ChaosProcess> {
    let first = grid
        .aligned_boundary(eps)
        .filter(|&b| b > 0)
        .ok_or_else(|| invalid!("cut-off {eps} must be a positive cell boundary"))?;
    ChaosProcess::try_from_fn(*grid, |j| {
        if j < first {
            Ok(ChaosVector::zero(*grid))
        } else {
            donsker_delta(grid.cell_start(j), terms, grid)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DonskerExperiment {
    /// OU rate; zero means `g ≡ 1`.
    pub alpha: f64,
    pub eps: f64,
    pub t: f64,
    pub terms: usize,
}

/// One λ of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DonskerRow {
    pub lambda: f64,
    /// `‖∫Φ dX₁‖²_{−λ}`.
    pub norm_sq: f64,
    pub a3_max: f64,
    /// Largest value of `4·‖δ₀(B(s))‖²_{−λ}·(1 − e^{−α(t−s)})` over s-cells.
    pub bound_max: f64,
    pub finite: bool,
    /// Whether every s-cell's A(3) value sits below its bound.
    pub dominated: bool,
}

/// Order-`2n` kernel of `K_g(Φ)(t,s)` on the tuple of zeros, against the
/// continuum value `c_n(s) − α∫_s^t c_n(u) e^{−α(u−s)} du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KgShapeRow {
    pub s: f64,
    pub order: usize,
    pub discrete: f64,
    pub continuum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DonskerReport {
    pub experiment: DonskerExperiment,
    pub rows: Vec<DonskerRow>,
    pub kg_shape: Vec<KgShapeRow>,
}

impl DonskerExperiment {
    pub fn table(&self, grid: &Grid) -> Result<KernelTable> {
        if self.alpha == 0.0 {
            VolterraKernel::constant_one(grid).tabulate(grid)
        } else {
            VolterraKernel::ou(self.alpha)?.tabulate(grid)
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < self.t) {
            return Err(invalid!("need 0 < eps < t, got eps={}, t={}", self.eps, self.t));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid!("OU rate must be non-negative, got {}", self.alpha));
        }
        if grid.aligned_boundary(self.t).is_none() || grid.aligned_boundary(self.eps).is_none() {
            return Err(invalid!("t and eps must lie on cell boundaries"));
        }
        Ok(())
    }

    /// Runs the A(3) check and the integral for every λ, plus the K_g shape table.
    pub fn run(&self, grid: &Grid, lambdas: &[f64]) -> Result<DonskerReport> {
        self.validate(grid)?;
        let phi = donsker_process(grid, self.eps, self.terms)?;
        let table = self.table(grid)?;
        let m = table.time_index(self.t)?;
        let first = grid.aligned_boundary(self.eps).expect("validated");
        let step = grid.step();

        let rows = lambdas
            .iter()
            .map(|&lambda| {
                let report = assumption_report(&phi, &table, lambda, self.t)?;
                let mut bound_max: f64 = 0.0;
                let mut dominated = true;
                for (j, &a3) in report.a3.iter().enumerate() {
                    let s = (j.max(first) as f64) * step;
                    let decay = -(-self.alpha * (self.t - table.s_point(j))).exp_m1();
                    let bound = 4.0 * donsker_norm_series(s, lambda, self.terms)? * decay;
                    bound_max = bound_max.max(bound);
                    dominated &= a3 <= bound * (1.0 + 1e-12);
                }
                let opts = VmbvOptions {
                    lambda,
                    ..VmbvOptions::default()
                };
                let value = integrate_plain(&phi, &table, self.t, &opts)?.value;
                let norm_sq = value.gnorm_sq(-lambda);
                Ok(DonskerRow {
                    lambda,
                    norm_sq,
                    a3_max: report.a3_max,
                    bound_max,
                    finite: norm_sq.is_finite(),
                    dominated,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let kg = kg_apply_index(&phi, &table, m)?;
        let mut kg_shape = Vec::new();
        for j in (first..m).step_by(((m - first) / 4).max(1)) {
            let s = grid.cell_start(j);
            for n in 0..=self.terms.min(3) {
                let zeros = vec![0u32; 2 * n];
                kg_shape.push(KgShapeRow {
                    s,
                    order: 2 * n,
                    discrete: kg.at(j).component(2 * n).value_at(&zeros),
                    continuum: self.continuum_shape(s, n),
                });
            }
        }
        Ok(DonskerReport {
            experiment: *self,
            rows,
            kg_shape,
        })
    }

    fn continuum_shape(&self, s: f64, n: usize) -> f64 {
        let a = self.alpha;
        if a == 0.0 {
            return donsker_coefficient(s, n);
        }
        let (tail, _) = quad::integrate(
            |u| donsker_coefficient(u, n) * (-a * (u - s)).exp(),
            s,
            self.t,
            1e-10,
            0.0,
        );
        donsker_coefficient(s, n) - a * tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_term_and_parity() {
        let grid = Grid::new(1.0, 4).unwrap();
        let d = donsker_delta(1.0, 3, &grid).unwrap();
        assert!((d.expectation() - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        for n in [1, 3, 5] {
            assert!(d.component(n).is_zero());
        }
        assert_eq!(d.max_order(), 6);
        assert!(donsker_delta(0.0, 2, &grid).is_err());
    }

    #[test]
    fn series_needs_positive_lambda() {
        assert!(donsker_norm_series(1.0, 0.0, 5).is_err());
        let lead = donsker_norm_series(1.0, 1.0, 0).unwrap();
        assert!((lead - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
    }
}
