//! Pathwise evaluation on the discrete Gaussian model.
//!
//! A path is one standard normal `ξ_i` per cell, with increments
//! `ΔB_i = √step · ξ_i`. With `e_i = 𝟙_{cell i}/√step` orthonormal,
//! `I_n(e_{i_1}^{⊗a_1} ⊗̂ …) = Π He_{a_k}(ξ_{i_k})` for the monic
//! (probabilists') Hermite polynomials, so a sparse entry `c` on the sorted
//! tuple `τ` contributes `c · step^{n/2} · mult(τ) · Π He`. Factored terms
//! use the recursion
//! `I(f_1 ⊗ … ⊗ f_n) = I(f_1) I(f_2 ⊗ …) − Σ_{j≥2} ⟨f_1, f_j⟩ I(… f̂_j …)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::calculus::support;
use crate::chaos::{ChaosProcess, ChaosVector};
use crate::combinatorics::{multiplicity, runs};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::tensor::factored::Groups;

/// One sampled path: standard normal coordinates per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    pub xi: Vec<f64>,
    pub seed: u64,
}

impl NoiseVector {
    pub fn increments(&self, grid: &Grid) -> Vec<f64> {
        let h = grid.step().sqrt();
        self.xi.iter().map(|x| h * x).collect()
    }
}

pub fn sample_noise(grid: &Grid, seed: u64) -> NoiseVector {
    sample_path(grid, seed, 0)
}

/// Path number `path` of the stream family rooted at `seed`.
pub fn sample_path(grid: &Grid, seed: u64, path: u64) -> NoiseVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    NoiseVector {
        xi: (0..grid.cells()).map(|_| StandardNormal.sample(&mut rng)).collect(),
        seed,
    }
}

/// `He_0(x) … He_n(x)`.
pub fn hermite_table(x: f64, n: usize) -> Vec<f64> {
    let mut he = Vec::with_capacity(n + 1);
    he.push(1.0);
    if n >= 1 {
        he.push(x);
    }
    for k in 1..n {
        he.push(x * he[k] - k as f64 * he[k - 1]);
    }
    he
}

/// A chaos vector compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    grid: Grid,
    constant: f64,
    monomials: Vec<(f64, Vec<(usize, usize)>)>,
    products: Vec<(f64, Groups)>,
    top_power: usize,
}

impl Evaluator {
    pub fn new(phi: &ChaosVector) -> Self {
        let grid = *phi.grid();
        let step = grid.step();
        let mut constant = 0.0;
        let mut monomials = Vec::new();
        let mut products = Vec::new();
        let mut top_power = 0;
        for (n, k) in phi.components().iter().enumerate() {
            let scale = step.powf(n as f64 / 2.0);
            for (tuple, c) in k.entries() {
                if tuple.is_empty() {
                    constant += c;
                    continue;
                }
                let powers: Vec<(usize, usize)> =
                    runs(tuple).into_iter().map(|(i, r)| (i as usize, r as usize)).collect();
                top_power = top_power.max(powers.iter().map(|p| p.1).max().unwrap_or(0));
                monomials.push((c * scale * multiplicity(tuple), powers));
            }
            for (groups, c) in k.products() {
                products.push((*c, groups.clone()));
            }
        }
        Evaluator {
            grid,
            constant,
            monomials,
            products,
            top_power,
        }
    }

    pub fn eval(&self, omega: &NoiseVector) -> Result<f64> {
        if omega.xi.len() != self.grid.cells() {
            return Err(invalid!(
                "path has {} cells but the vector lives on {}",
                omega.xi.len(),
                self.grid.cells()
            ));
        }
        let he: Vec<Vec<f64>> = if self.monomials.is_empty() {
            Vec::new()
        } else {
            omega.xi.iter().map(|&x| hermite_table(x, self.top_power)).collect()
        };
        let mut total = self.constant;
        for (c, powers) in &self.monomials {
            total += c * powers.iter().map(|&(i, a)| he[i][a]).product::<f64>();
        }
        let step = self.grid.step();
        let h = step.sqrt();
        for (c, groups) in &self.products {
            let first: Vec<f64> = groups
                .iter()
                .map(|(f, _)| h * f.values().iter().zip(&omega.xi).map(|(a, x)| a * x).sum::<f64>())
                .collect();
            total += c * iterated_integral(groups, &first, step);
        }
        Ok(total)
    }
}

/// `I_n(sym(f_1^{⊗k_1} ⊗ …))` from `I_1(f_g)` and the Gram matrix, by the
/// product recursion over the power vector.
fn iterated_integral(groups: &Groups, first: &[f64], step: f64) -> f64 {
    let g = groups.len();
    let radix: Vec<usize> = groups.iter().map(|(_, k)| *k as usize + 1).collect();
    let mut stride = vec![1usize; g];
    for i in 1..g {
        stride[i] = stride[i - 1] * radix[i - 1];
    }
    let states = stride[g - 1] * radix[g - 1];
    let gram: Vec<Vec<f64>> = groups
        .iter()
        .map(|(a, _)| groups.iter().map(|(b, _)| a.dot(b, step)).collect())
        .collect();
    let mut z = vec![0.0; states];
    z[0] = 1.0;
    let mut k = vec![0usize; g];
    for idx in 1..states {
        let mut rem = idx;
        for i in (0..g).rev() {
            k[i] = rem / stride[i];
            rem %= stride[i];
        }
        let f = k.iter().position(|&x| x > 0).expect("nonzero state");
        let base = idx - stride[f];
        let mut v = first[f] * z[base];
        for j in 0..g {
            let count = if j == f { k[j] - 1 } else { k[j] };
            if count > 0 {
                v -= count as f64 * gram[f][j] * z[base - stride[j]];
            }
        }
        z[idx] = v;
    }
    z[states - 1]
}

pub fn evaluate(phi: &ChaosVector, omega: &NoiseVector) -> Result<f64> {
    Evaluator::new(phi).eval(omega)
}

/// Forward sum `Σ_s Φ(s)(ω) ΔB_s`; every `Φ(s)` must live on cells before `s`.
pub fn ito_oracle(phi: &ChaosProcess, omega: &NoiseVector) -> Result<f64> {
    let grid = phi.grid();
    for (j, v) in phi.values().iter().enumerate() {
        if let Some(&c) = support(v).iter().find(|&&c| c as usize >= j) {
            return Err(invalid!("integrand at cell {j} is not adapted: it depends on cell {c}"));
        }
    }
    let db = omega.increments(grid);
    let mut total = 0.0;
    for (j, v) in phi.values().iter().enumerate() {
        total += evaluate(v, omega)? * db[j];
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n_samples: usize,
    pub mean: f64,
    pub se_mean: f64,
    pub variance: f64,
    pub se_variance: f64,
}

/// Sample mean and variance of `Φ(ω)` over `n_samples` paths, with
/// jackknife standard errors.
pub fn mc_moments(phi: &ChaosVector, n_samples: usize, seed: u64) -> Result<Moments> {
    if n_samples < 2 {
        return Err(invalid!("need at least two samples, got {n_samples}"));
    }
    let ev = Evaluator::new(phi);
    let grid = *phi.grid();
    let draws = crate::par_map(n_samples, |p| ev.eval(&sample_path(&grid, seed, p as u64)));
    let xs = draws.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(moments_of(&xs))
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Moments of a sample with jackknife errors for both statistics.
pub fn moments_of(xs: &[f64]) -> Moments {
    let n = xs.len();
    let nf = n as f64;
    let mean = pairwise_sum(xs) / nf;
    let dev: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let sq: Vec<f64> = dev.iter().map(|d| d * d).collect();
    let ss = pairwise_sum(&sq);
    let variance = ss / (nf - 1.0);

    // Leave-one-out variance from the centered sums: removing d_i shifts the
    // mean by −d_i/(n−1), so SS_{−i} = SS − d_i² · n/(n−1).
    let loo: Vec<f64> = dev
        .iter()
        .map(|d| (ss - d * d * nf / (nf - 1.0)) / (nf - 2.0).max(1.0))
        .collect();
    let loo_mean = pairwise_sum(&loo) / nf;
    let spread: Vec<f64> = loo.iter().map(|v| (v - loo_mean).powi(2)).collect();
    let se_variance = ((nf - 1.0) / nf * pairwise_sum(&spread)).sqrt();

    Moments {
        n_samples: n,
        mean,
        se_mean: (variance / nf).sqrt(),
        variance,
        se_variance,
    }
}
