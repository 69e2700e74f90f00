//! Volterra kernels `g(t, s)`, their Stieltjes measures in `u`, and the
//! operator `K_g(Φ)(t,s) = g(t,s)Φ(s) + ∫_s^t (Φ(u) − Φ(s)) g(du, s)`.
//!
//! On the grid, the kernel time of s-cell `j` is `s_j = (j + 1 − d)·step`
//! where `d` is the diagonal offset (half a cell by default). Then
//! `t − s_j ≥ d·step` for every grid time `t > s_j`, which keeps singular
//! kernels finite. The `u`-measure on cell `k` is the exact increment
//! `g((k+1)·step, s_j) − g(k·step, s_j)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::chaos::{ChaosProcess, ChaosVector};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::quad;

/// Kernel configuration as it appears in experiment files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Ou {
        alpha: f64,
    },
    Turbulence {
        alpha: f64,
        nu: f64,
    },
    Fbm {
        #[serde(rename = "H")]
        hurst: f64,
    },
    /// `values[k][j] = g(k·step, s_j)` for grid times `k = 0..=M` and s-cells `j < M`.
    Table {
        values: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraKernel {
    spec: KernelSpec,
    fbm_scale: f64,
    diagonal_offset: f64,
}

/// Signed per-cell weights of `g(du, s)` and their total variation.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub weights: Vec<(usize, f64)>,
    pub total_variation: f64,
}

impl VolterraKernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        let mut fbm_scale = 1.0;
        match &spec {
            KernelSpec::Ou { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(invalid!("OU rate must be positive, got {alpha}"));
                }
            }
            KernelSpec::Turbulence { alpha, nu } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(invalid!("turbulence rate must be positive, got {alpha}"));
                }
                if !(*nu > 0.5 && nu.is_finite()) {
                    return Err(invalid!("turbulence exponent must exceed 1/2, got {nu}"));
                }
            }
            KernelSpec::Fbm { hurst } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(invalid!("Hurst index must lie in (0, 1), got {hurst}"));
                }
                fbm_scale = fbm_constant(*hurst);
            }
            KernelSpec::Table { values } => {
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid!("table kernel values must be finite"));
                }
            }
        }
        Ok(VolterraKernel {
            spec,
            fbm_scale,
            diagonal_offset: 0.5,
        })
    }

    pub fn ou(alpha: f64) -> Result<Self> {
        Self::new(KernelSpec::Ou { alpha })
    }

    pub fn turbulence(alpha: f64, nu: f64) -> Result<Self> {
        Self::new(KernelSpec::Turbulence { alpha, nu })
    }

    pub fn fbm(hurst: f64) -> Result<Self> {
        Self::new(KernelSpec::Fbm { hurst })
    }

    pub fn table(values: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(KernelSpec::Table { values })
    }

    /// The constant kernel `g ≡ 1` as a table on `grid`.
    pub fn constant_one(grid: &Grid) -> Self {
        let m = grid.cells();
        Self::table(vec![vec![1.0; m]; m + 1]).expect("finite table")
    }

    /// Diagonal offset `d ∈ (0, 1]` in cells.
    pub fn with_diagonal_offset(mut self, d: f64) -> Result<Self> {
        if !(d > 0.0 && d <= 1.0) {
            return Err(invalid!("diagonal offset must lie in (0, 1], got {d}"));
        }
        self.diagonal_offset = d;
        Ok(self)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn diagonal_offset(&self) -> f64 {
        self.diagonal_offset
    }

    /// True when `g(t, s)` blows up as `t − s → 0`.
    pub fn is_singular(&self) -> bool {
        match self.spec {
            KernelSpec::Turbulence { nu, .. } => nu < 1.0,
            KernelSpec::Fbm { hurst } => hurst != 0.5,
            _ => false,
        }
    }

    /// `g(t, s)` for `0 ≤ s < t`.
    pub fn eval(&self, t: f64, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s < t) {
            return Err(invalid!("kernel needs 0 <= s < t, got s={s}, t={t}"));
        }
        let x = t - s;
        Ok(match self.spec {
            KernelSpec::Ou { alpha } => (-alpha * x).exp(),
            KernelSpec::Turbulence { alpha, nu } => x.powf(nu - 1.0) * (-alpha * x).exp(),
            KernelSpec::Fbm { hurst } => self.fbm_eval(hurst, t, s)?,
            KernelSpec::Table { .. } => return Err(invalid!("table kernels are only defined on grid points")),
        })
    }

    /// `g(t, s)` with `t − s` clipped to at least `diagonal_offset·step` for
    /// singular kernels; the flag reports whether clipping happened.
    pub fn eval_clipped(&self, t: f64, s: f64, step: f64) -> Result<(f64, bool)> {
        let floor = self.diagonal_offset * step;
        if self.is_singular() && t - s < floor {
            if s < 0.0 || s >= t {
                return Err(invalid!("kernel needs 0 <= s < t, got s={s}, t={t}"));
            }
            return Ok((self.eval(s + floor, s)?, true));
        }
        Ok((self.eval(t, s)?, false))
    }

    /// `∂_u g(u, s)`.
    pub fn density(&self, u: f64, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s < u) {
            return Err(invalid!("density needs 0 <= s < u, got s={s}, u={u}"));
        }
        let x = u - s;
        Ok(match self.spec {
            KernelSpec::Ou { alpha } => -alpha * (-alpha * x).exp(),
            KernelSpec::Turbulence { alpha, nu } => ((nu - 1.0) / x - alpha) * x.powf(nu - 1.0) * (-alpha * x).exp(),
            KernelSpec::Fbm { hurst } => {
                if hurst == 0.5 {
                    0.0
                } else {
                    self.fbm_scale * (hurst - 0.5) * x.powf(hurst - 1.5) * (s / u).powf(0.5 - hurst)
                }
            }
            KernelSpec::Table { .. } => return Err(invalid!("table kernels are only defined on grid points")),
        })
    }

    fn fbm_eval(&self, hurst: f64, t: f64, s: f64) -> Result<f64> {
        let c = self.fbm_scale;
        let x = t - s;
        if hurst == 0.5 {
            return Ok(1.0);
        }
        if s == 0.0 {
            return Err(invalid!("fBm kernel with H != 1/2 is singular at s = 0"));
        }
        // u = s + v²: the (u − s)^{H − 3/2} endpoint singularity becomes v^{2H−2}·O(v²).
        let a = hurst - 0.5;
        let integrand = |v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            let r = -(a * (v * v / s).ln_1p()).exp_m1();
            2.0 * v.powf(2.0 * hurst - 2.0) * r
        };
        let (inner, _) = quad::integrate(integrand, 0.0, x.sqrt(), 1e-10, 1e-300);
        Ok(c * x.powf(a) + c * (0.5 - hurst) * inner)
    }

    /// Stieltjes weights of `g(du, s)` on the cells of `[u_lo, u_hi)`
    /// (endpoints snapped down to cell boundaries).
    pub fn measure(&self, grid: &Grid, s: f64, u_lo: f64, u_hi: f64) -> Result<Measure> {
        if !(s < u_lo && u_hi <= grid.horizon() + 1e-12) {
            return Err(invalid!(
                "measure interval [{u_lo}, {u_hi}) must lie in (s, T] with s={s}"
            ));
        }
        let lo = grid.boundary_below(u_lo)?;
        let hi = grid.boundary_below(u_hi)?;
        if lo >= hi {
            return Err(invalid!("empty measure interval after snapping"));
        }
        let mut weights = Vec::with_capacity(hi - lo);
        if grid.cell_start(lo) <= s {
            return Err(invalid!("snapped measure interval starts at or before s={s}"));
        }
        let mut prev = self.eval(grid.cell_start(lo), s)?;
        for k in lo..hi {
            let next = self.eval(grid.cell_start(k + 1), s)?;
            weights.push((k, next - prev));
            prev = next;
        }
        let total_variation = weights.iter().map(|(_, w)| w.abs()).sum();
        Ok(Measure {
            weights,
            total_variation,
        })
    }

    /// Precomputes `g(k·step, s_j)` for every grid time and s-cell.
    pub fn tabulate(&self, grid: &Grid) -> Result<KernelTable> {
        let m = grid.cells();
        let step = grid.step();
        let d = self.diagonal_offset;
        let values = match &self.spec {
            KernelSpec::Table { values } => {
                if values.len() != m + 1 || values.iter().any(|row| row.len() != m) {
                    return Err(invalid!("table kernel must be {} x {} for this grid", m + 1, m));
                }
                values.clone()
            }
            _ => {
                let cols = crate::par_map(m, |j| {
                    let s = (j as f64 + 1.0 - d) * step;
                    let mut col = vec![0.0; m + 1];
                    for (k, slot) in col.iter_mut().enumerate().skip(j + 1) {
                        *slot = self.eval(k as f64 * step, s)?;
                    }
                    Ok(col)
                });
                let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
                (0..=m).map(|k| cols.iter().map(|c| c[k]).collect()).collect()
            }
        };
        Ok(KernelTable {
            grid: *grid,
            values,
            diagonal_offset: d,
            singular: self.is_singular(),
        })
    }
}

/// `c(H) = sqrt(2H Γ(3/2 − H) / (Γ(H + 1/2) Γ(2 − 2H)))`.
pub fn fbm_constant(hurst: f64) -> f64 {
    (2.0 * hurst * gamma(1.5 - hurst) / (gamma(hurst + 0.5) * gamma(2.0 - 2.0 * hurst))).sqrt()
}

/// `½(t^{2H} + s^{2H} − |t − s|^{2H})`.
pub fn fbm_covariance_exact(hurst: f64, t: f64, s: f64) -> f64 {
    0.5 * (t.powf(2.0 * hurst) + s.powf(2.0 * hurst) - (t - s).abs().powf(2.0 * hurst))
}

/// `step · Σ_j g(t, s_j) g(s, s_j)` over s-cells below `min(t, s)`.
pub fn kernel_covariance(kernel: &VolterraKernel, grid: &Grid, t: f64, s: f64) -> Result<f64> {
    let step = grid.step();
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    let m = grid
        .aligned_boundary(lo)
        .ok_or_else(|| invalid!("time {lo} is not on a cell boundary"))?;
    grid.aligned_boundary(hi)
        .ok_or_else(|| invalid!("time {hi} is not on a cell boundary"))?;
    let d = kernel.diagonal_offset();
    let terms = crate::par_map(m, |j| {
        let sj = (j as f64 + 1.0 - d) * step;
        Ok(kernel.eval(hi, sj)? * kernel.eval(lo, sj)?)
    });
    let mut acc = 0.0;
    for t in terms {
        acc += t?;
    }
    Ok(step * acc)
}

/// A kernel tabulated on a grid: the discrete form used by `K_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    grid: Grid,
    values: Vec<Vec<f64>>,
    diagonal_offset: f64,
    singular: bool,
}

impl KernelTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `g(k·step, s_j)`; meaningful for `k > j`.
    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k][j]
    }

    /// Kernel time of s-cell `j`.
    pub fn s_point(&self, j: usize) -> f64 {
        (j as f64 + 1.0 - self.diagonal_offset) * self.grid.step()
    }

    /// True when the diagonal cell relies on the offset evaluation.
    pub fn clipped(&self) -> bool {
        self.singular
    }

    /// Grid index of a cell-aligned time in `(0, T]`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let m = self
            .grid
            .aligned_boundary(t)
            .ok_or_else(|| invalid!("time {t} is not on a cell boundary"))?;
        if m == 0 || m > self.grid.cells() {
            return Err(invalid!("time {t} outside (0, {}]", self.grid.horizon()));
        }
        Ok(m)
    }

    /// Weights of `g(du, s_j)` on the u-cells `j+1 .. m`.
    pub fn measure(&self, j: usize, m: usize) -> Measure {
        let weights: Vec<(usize, f64)> = (j + 1..m)
            .map(|k| (k, self.values[k + 1][j] - self.values[k][j]))
            .collect();
        let total_variation = weights.iter().map(|(_, w)| w.abs()).sum();
        Measure {
            weights,
            total_variation,
        }
    }

    /// `K_g(Φ)(t_m, s_j) = Σ_k c_k Φ(k)` as a list of `(k, c_k)`.
    pub fn coefficients(&self, j: usize, m: usize) -> Vec<(usize, f64)> {
        let g = self.values[m][j];
        let meas = self.measure(j, m);
        let drift: f64 = meas.weights.iter().map(|(_, w)| w).sum();
        let mut out = Vec::with_capacity(meas.weights.len() + 1);
        out.push((j, g - drift));
        out.extend(meas.weights);
        out
    }

    /// `K_g` applied to a scalar function of the cell.
    pub fn apply_scalar(&self, u: &[f64], m: usize) -> Vec<f64> {
        (0..self.grid.cells())
            .map(|j| {
                if j >= m {
                    return 0.0;
                }
                self.coefficients(j, m).iter().map(|&(k, c)| c * u[k]).sum()
            })
            .collect()
    }
}

/// `s ↦ K_g(Φ)(t, s)` on every s-cell (zero on cells at or after `t`).
pub fn kg_apply(phi: &ChaosProcess, table: &KernelTable, t: f64) -> Result<ChaosProcess> {
    if phi.grid() != table.grid() {
        return Err(invalid!("process and kernel table use different grids"));
    }
    let m = table.time_index(t)?;
    kg_apply_index(phi, table, m)
}

pub(crate) fn kg_apply_index(phi: &ChaosProcess, table: &KernelTable, m: usize) -> Result<ChaosProcess> {
    let grid = *phi.grid();
    ChaosProcess::try_from_fn(grid, |j| {
        let mut v = ChaosVector::zero(grid);
        if j < m {
            for (k, c) in table.coefficients(j, m) {
                v.add_scaled(c, phi.at(k))?;
            }
        }
        Ok(v)
    })
}

/// Discrete values of the integrability conditions at index `−λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub lambda: f64,
    /// `Σ_k |w_k| ‖Φ(k) − Φ(j)‖²_{−λ}` per s-cell `j < m`.
    pub a3: Vec<f64>,
    pub a3_max: f64,
    /// `∫ |g(t,s)|² ‖Φ(s)‖²_{−λ} ds`.
    pub b4: f64,
    /// `∫ ‖∫_s^t (Φ(u) − Φ(s)) g(du,s)‖²_{−λ} ds`.
    pub b5: f64,
    /// `∫ ‖K_g(Φ)(t,s)‖²_{−λ} ds`.
    pub kg_norm: f64,
    pub clipped: bool,
}

impl AssumptionReport {
    pub fn is_finite(&self) -> bool {
        self.a3_max.is_finite() && self.b4.is_finite() && self.b5.is_finite() && self.kg_norm.is_finite()
    }

    /// Name of the first non-finite diagnostic.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.a3_max.is_finite() {
            Some("A(3)")
        } else if !self.b4.is_finite() {
            Some("B(4)")
        } else if !self.b5.is_finite() {
            Some("B(5)")
        } else if !self.kg_norm.is_finite() {
            Some("Remark 1")
        } else {
            None
        }
    }
}

pub fn assumption_report(phi: &ChaosProcess, table: &KernelTable, lambda: f64, t: f64) -> Result<AssumptionReport> {
    if phi.grid() != table.grid() {
        return Err(invalid!("process and kernel table use different grids"));
    }
    let m = table.time_index(t)?;
    let step = phi.grid().step();
    let rows = crate::par_map(m, |j| -> Result<(f64, f64, f64, f64)> {
        let meas = table.measure(j, m);
        let mut a3 = 0.0;
        let mut stieltjes = ChaosVector::zero(*phi.grid());
        for &(k, w) in &meas.weights {
            let diff = phi.at(k).sub(phi.at(j))?;
            a3 += w.abs() * diff.gnorm_sq(-lambda);
            stieltjes.add_scaled(w, &diff)?;
        }
        let g = table.value(m, j);
        let b4 = g * g * phi.at(j).gnorm_sq(-lambda);
        let b5 = stieltjes.gnorm_sq(-lambda);
        let mut kg = phi.at(j).scaled(g);
        kg.add_scaled(1.0, &stieltjes)?;
        Ok((a3, b4, b5, kg.gnorm_sq(-lambda)))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let a3: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(AssumptionReport {
        lambda,
        a3_max: a3.iter().copied().fold(0.0, f64::max),
        a3,
        b4: step * rows.iter().map(|r| r.1).sum::<f64>(),
        b5: step * rows.iter().map(|r| r.2).sum::<f64>(),
        kg_norm: step * rows.iter().map(|r| r.3).sum::<f64>(),
        clipped: table.clipped(),
    })
}
