//! Finite chaos expansions `Σ_{n≤N} I_n(Φ⁽ⁿ⁾)` and processes of them.

use serde::{Deserialize, Serialize};

use crate::combinatorics::ln_factorial;
use crate::error::{invalid, ChaosError, Result};
use crate::grid::Grid;
use crate::tensor::SymKernel;

/// A random variable given by its chaos kernels, one per order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct ChaosVector {
    grid: Grid,
    components: Vec<SymKernel>,
}

impl ChaosVector {
    pub fn zero(grid: Grid) -> Self {
        ChaosVector {
            grid,
            components: Vec::new(),
        }
    }

    /// The deterministic variable `I_0(c)`.
    pub fn constant(c: f64, grid: Grid) -> Self {
        Self::from_kernel(SymKernel::scalar(c, grid))
    }

    pub fn from_kernel(k: SymKernel) -> Self {
        let grid = *k.grid();
        let mut v = Self::zero(grid);
        v.set(k);
        v
    }

    /// Builds from kernels listed by order; `components[n]` must have order `n`.
    pub fn new(grid: Grid, components: Vec<SymKernel>) -> Result<Self> {
        for (n, k) in components.iter().enumerate() {
            if k.order() != n {
                return Err(invalid!("component {n} has order {}", k.order()));
            }
            if *k.grid() != grid {
                return Err(invalid!("component {n} lives on a different grid"));
            }
        }
        let mut v = ChaosVector { grid, components };
        v.trim();
        Ok(v)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[SymKernel] {
        &self.components
    }

    /// Kernel of order `n`; a zero kernel when absent.
    pub fn component(&self, n: usize) -> SymKernel {
        self.components
            .get(n)
            .cloned()
            .unwrap_or_else(|| SymKernel::zero(n, self.grid))
    }

    pub fn get(&self, n: usize) -> Option<&SymKernel> {
        self.components.get(n).filter(|k| !k.is_zero())
    }

    /// Highest order with a nonzero kernel (0 for the zero vector).
    pub fn max_order(&self) -> usize {
        self.components.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(SymKernel::is_zero)
    }

    /// `E[Φ] = Φ⁽⁰⁾`.
    pub fn expectation(&self) -> f64 {
        self.components.first().map_or(0.0, SymKernel::scalar_value)
    }

    /// Adds `k` into the component of its order.
    pub fn add_kernel(&mut self, a: f64, k: &SymKernel) -> Result<()> {
        if *k.grid() != self.grid {
            return Err(invalid!("grid mismatch"));
        }
        let n = k.order();
        while self.components.len() <= n {
            let m = self.components.len();
            self.components.push(SymKernel::zero(m, self.grid));
        }
        self.components[n].add_scaled(a, k)?;
        self.trim();
        Ok(())
    }

    fn set(&mut self, k: SymKernel) {
        let n = k.order();
        while self.components.len() <= n {
            let m = self.components.len();
            self.components.push(SymKernel::zero(m, self.grid));
        }
        self.components[n] = k;
        self.trim();
    }

    fn trim(&mut self) {
        while self.components.last().is_some_and(SymKernel::is_zero) {
            self.components.pop();
        }
    }

    /// `Σ_n n! e^{2λn} |Φ⁽ⁿ⁾|²`, summed in log space.
    pub fn gnorm_sq(&self, lambda: f64) -> f64 {
        let terms: Vec<(f64, f64)> = self
            .components
            .iter()
            .enumerate()
            .map(|(n, k)| (ln_factorial(n) + 2.0 * lambda * n as f64, k.norm_sq()))
            .filter(|&(_, q)| q > 0.0)
            .collect();
        if terms.iter().all(|&(w, _)| w.abs() < 600.0) {
            return terms.iter().fold(0.0, |acc, &(w, q)| acc + w.exp() * q);
        }
        let logs: Vec<f64> = terms.iter().map(|&(w, q)| w + q.ln()).collect();
        log_sum_exp(&logs).exp()
    }

    /// The `G_λ` norm `‖Φ‖_λ`.
    pub fn gnorm(&self, lambda: f64) -> f64 {
        self.gnorm_sq(lambda).sqrt()
    }

    /// `⟨⟨Φ, φ⟩⟩ = Σ n! (Φ⁽ⁿ⁾, φ⁽ⁿ⁾)`.
    pub fn pairing(&self, other: &ChaosVector) -> Result<f64> {
        self.check_grid(other)?;
        let mut s = 0.0;
        for (n, (a, b)) in self.components.iter().zip(&other.components).enumerate() {
            s += ln_factorial(n).exp() * a.inner(b)?;
        }
        Ok(s)
    }

    /// Drops every component above order `n`.
    pub fn truncate(&self, n: usize) -> ChaosVector {
        let mut v = self.clone();
        v.components.truncate(n + 1);
        v.trim();
        v
    }

    pub fn scaled(&self, a: f64) -> ChaosVector {
        let mut v = ChaosVector {
            grid: self.grid,
            components: self.components.iter().map(|k| k.scaled(a)).collect(),
        };
        v.trim();
        v
    }

    /// `self += a · other`.
    pub fn add_scaled(&mut self, a: f64, other: &ChaosVector) -> Result<()> {
        self.check_grid(other)?;
        for k in &other.components {
            self.add_kernel(a, k)?;
        }
        Ok(())
    }

    /// `a·Φ + b·Ψ`.
    pub fn linear_combine(a: f64, x: &ChaosVector, b: f64, y: &ChaosVector) -> Result<ChaosVector> {
        x.check_grid(y)?;
        let mut v = x.scaled(a);
        v.add_scaled(b, y)?;
        Ok(v)
    }

    pub fn sub(&self, other: &ChaosVector) -> Result<ChaosVector> {
        Self::linear_combine(1.0, self, -1.0, other)
    }

    pub(crate) fn check_grid(&self, other: &ChaosVector) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid!("grid mismatch"));
        }
        Ok(())
    }

    /// Expands factored kernels into explicit tuples.
    pub fn materialize(&self, limit: f64) -> Result<ChaosVector> {
        let components = self
            .components
            .iter()
            .map(|k| k.materialize(limit))
            .collect::<Result<Vec<_>>>()?;
        ChaosVector::new(self.grid, components)
    }

    /// Largest absolute explicit coefficient (after materializing).
    pub fn max_abs_coefficient(&self, limit: f64) -> Result<f64> {
        let m = self.materialize(limit)?;
        Ok(m.components
            .iter()
            .flat_map(|k| k.entries().values())
            .fold(0.0f64, |acc, c| acc.max(c.abs())))
    }
}

/// Maximum coefficientwise difference of two vectors, relative to the
/// larger coefficient scale (absolute when both are below one).
pub fn relative_residual(a: &ChaosVector, b: &ChaosVector, limit: f64) -> Result<f64> {
    let d = a.sub(b)?.max_abs_coefficient(limit)?;
    let scale = a
        .max_abs_coefficient(limit)?
        .max(b.max_abs_coefficient(limit)?)
        .max(1.0);
    Ok(d / scale)
}

pub(crate) fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVector {
    grid: Grid,
    components: Vec<SymKernel>,
}

impl TryFrom<RawVector> for ChaosVector {
    type Error = ChaosError;

    fn try_from(raw: RawVector) -> Result<Self> {
        ChaosVector::new(raw.grid, raw.components)
    }
}

impl From<ChaosVector> for RawVector {
    fn from(v: ChaosVector) -> Self {
        RawVector {
            grid: v.grid,
            components: v.components,
        }
    }
}

/// One chaos vector per time cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProcess", into = "RawProcess")]
pub struct ChaosProcess {
    grid: Grid,
    values: Vec<ChaosVector>,
}

impl ChaosProcess {
    pub fn new(grid: Grid, values: Vec<ChaosVector>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(invalid!("process needs {} values, got {}", grid.cells(), values.len()));
        }
        if values.iter().any(|v| *v.grid() != grid) {
            return Err(invalid!("process value on a different grid"));
        }
        Ok(ChaosProcess { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> ChaosVector + Sync + Send) -> Result<Self> {
        let values = crate::par_map(grid.cells(), f);
        Self::new(grid, values)
    }

    pub fn try_from_fn(grid: Grid, f: impl Fn(usize) -> Result<ChaosVector> + Sync + Send) -> Result<Self> {
        let values = crate::par_map(grid.cells(), f)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn constant(v: ChaosVector) -> Self {
        let grid = *v.grid();
        let values = vec![v; grid.cells()];
        ChaosProcess { grid, values }
    }

    pub fn zero(grid: Grid) -> Self {
        Self::constant(ChaosVector::zero(grid))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, cell: usize) -> &ChaosVector {
        &self.values[cell]
    }

    pub fn values(&self) -> &[ChaosVector] {
        &self.values
    }

    pub fn max_order(&self) -> usize {
        self.values.iter().map(ChaosVector::max_order).max().unwrap_or(0)
    }

    /// Cellwise `a·X + b·Y`.
    pub fn linear_combine(a: f64, x: &ChaosProcess, b: f64, y: &ChaosProcess) -> Result<ChaosProcess> {
        if x.grid != y.grid {
            return Err(invalid!("grid mismatch"));
        }
        let values = x
            .values
            .iter()
            .zip(&y.values)
            .map(|(u, v)| ChaosVector::linear_combine(a, u, b, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChaosProcess { grid: x.grid, values })
    }

    pub fn map(&self, f: impl Fn(usize, &ChaosVector) -> Result<ChaosVector> + Sync + Send) -> Result<ChaosProcess> {
        let values = crate::par_map(self.values.len(), |j| f(j, &self.values[j]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        ChaosProcess::new(self.grid, values)
    }

    /// Sets the process to zero on cells outside `range`.
    pub fn restricted(&self, range: std::ops::Range<usize>) -> ChaosProcess {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if range.contains(&j) {
                    v.clone()
                } else {
                    ChaosVector::zero(self.grid)
                }
            })
            .collect();
        ChaosProcess {
            grid: self.grid,
            values,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcess {
    grid: Grid,
    values: Vec<ChaosVector>,
}

impl TryFrom<RawProcess> for ChaosProcess {
    type Error = ChaosError;

    fn try_from(raw: RawProcess) -> Result<Self> {
        ChaosProcess::new(raw.grid, raw.values)
    }
}

impl From<ChaosProcess> for RawProcess {
    fn from(p: ChaosProcess) -> Self {
        RawProcess {
            grid: p.grid,
            values: p.values,
        }
    }
}
