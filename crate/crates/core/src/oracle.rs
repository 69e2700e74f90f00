//! Reference formulas for the integrals, built directly from kernel values.
//!
//! [`chaos_formula_oracle`] writes the chaos expansion of `∫Φ dX_{⋄Σ}`
//! order by order:
//!
//! ```text
//! order N = sym_{N slots}[ Σ_{n+m=N−1} K_g(Φ⁽ⁿ⁾)(t,·) ⊗̂ Σ⁽ᵐ⁾(·) ]
//!         + Σ_{n+m=N} (n+1) ∫ K_g(Φ⁽ⁿ⁺¹⁾)(t,s)(·, s) ⊗̂ Σ⁽ᵐ⁾(s) ds
//! ```
//!
//! With `Σ ≡ 1` this is the expansion of `∫Φ dX₁`. Symmetrization is done
//! slot by slot and tensor products by enumerating slot subsets, so the
//! code shares nothing with the operator pipeline except the `K_g`
//! coefficient map.

use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::{s_transform, s_transform_frechet, TestFunction};
use crate::chaos::{ChaosProcess, ChaosVector};
use crate::error::{invalid, Result};
use crate::tensor::{EntryMode, SparseMap, SymKernel, MATERIALIZE_LIMIT};
use crate::volterra::KernelTable;

fn kernels_of(v: &ChaosVector) -> Result<Vec<SparseMap>> {
    let v = v.materialize(MATERIALIZE_LIMIT)?;
    Ok(v.components().iter().map(|k| k.entries().clone()).collect())
}

fn lookup(maps: &[SparseMap], n: usize, key: &[u32]) -> f64 {
    maps.get(n).and_then(|m| m.get(key)).copied().unwrap_or(0.0)
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v
}

/// `(A ⊗̂ B)(ρ)`: average of `A(ρ_S) B(ρ_{S^c})` over slot subsets `S` of size `p`.
fn sym_product_at(a: &[SparseMap], p: usize, b: &[SparseMap], q: usize, rho: &[u32]) -> f64 {
    let len = rho.len();
    debug_assert_eq!(p + q, len);
    let mut total = 0.0;
    let mut count = 0usize;
    for mask in 0u32..(1u32 << len) {
        if mask.count_ones() as usize != p {
            continue;
        }
        count += 1;
        let (mut left, mut right) = (Vec::with_capacity(p), Vec::with_capacity(q));
        for (i, &c) in rho.iter().enumerate() {
            if mask & (1 << i) != 0 {
                left.push(c);
            } else {
                right.push(c);
            }
        }
        let x = lookup(a, p, &left);
        if x == 0.0 {
            continue;
        }
        total += x * lookup(b, q, &right);
    }
    total / count as f64
}

/// Entries containing `cell`, with that one slot pinned and removed.
fn pinned(map: &SparseMap, cell: u32) -> SparseMap {
    let mut out = SparseMap::new();
    for (t, c) in map {
        if let Some(pos) = t.iter().position(|&x| x == cell) {
            let mut rest = t.clone();
            rest.remove(pos);
            *out.entry(rest).or_insert(0.0) += c;
        }
    }
    out
}

/// Chaos expansion of `∫_0^t Φ dX₁` (no `sigma`) or `∫_0^t Φ dX_{⋄Σ}`.
pub fn chaos_formula_oracle(
    phi: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    sigma: Option<&ChaosProcess>,
) -> Result<ChaosVector> {
    let grid = *phi.grid();
    if *table.grid() != grid {
        return Err(invalid!("integrand and kernel table use different grids"));
    }
    let m = table.time_index(t)?;
    let step = grid.step();

    let phis = phi.values().iter().map(kernels_of).collect::<Result<Vec<_>>>()?;
    let unit = vec![SparseMap::from([(Vec::new(), 1.0)])];
    let sigmas: Vec<Vec<SparseMap>> = match sigma {
        Some(s) => s.values().iter().map(kernels_of).collect::<Result<_>>()?,
        None => vec![unit; grid.cells()],
    };

    // K[j][n]: kernel of K_g(Φ⁽ⁿ⁾)(t, s_j).
    let top_phi = phis.iter().map(Vec::len).max().unwrap_or(0);
    let mut kg: Vec<Vec<SparseMap>> = vec![vec![SparseMap::new(); top_phi]; m];
    for (j, row) in kg.iter_mut().enumerate() {
        for (k, c) in table.coefficients(j, m) {
            for (n, map) in phis[k].iter().enumerate() {
                for (tuple, v) in map {
                    *row[n].entry(tuple.clone()).or_insert(0.0) += c * v;
                }
            }
        }
    }
    // P[j][n]: K_g(Φ⁽ⁿ⁺¹⁾)(t, s_j) with one slot pinned at s_j, order n.
    let pins: Vec<Vec<SparseMap>> = (0..m)
        .map(|j| kg[j].iter().skip(1).map(|map| pinned(map, j as u32)).collect())
        .collect();

    let top_sigma = sigmas.iter().map(Vec::len).max().unwrap_or(0);
    let top = (top_phi + top_sigma).max(1);
    let mut out = ChaosVector::zero(grid);
    for order in 0..=top {
        let mut candidates = BTreeSet::new();
        for j in 0..m {
            if order >= 1 {
                for (n, kmap) in kg[j].iter().enumerate() {
                    let Some(mm) = (order - 1).checked_sub(n) else { continue };
                    let Some(smap) = sigmas[j].get(mm) else { continue };
                    for x in kmap.keys() {
                        for y in smap.keys() {
                            let mut rho = x.clone();
                            rho.extend(y);
                            rho.push(j as u32);
                            candidates.insert(sorted(rho));
                        }
                    }
                }
            }
            for (n, pmap) in pins[j].iter().enumerate() {
                let Some(mm) = order.checked_sub(n) else { continue };
                let Some(smap) = sigmas[j].get(mm) else { continue };
                for x in pmap.keys() {
                    for y in smap.keys() {
                        let mut rho = x.clone();
                        rho.extend(y);
                        candidates.insert(sorted(rho));
                    }
                }
            }
        }
        let mut values: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for rho in candidates {
            let mut v = 0.0;
            if order >= 1 {
                let mut sk = 0.0;
                for i in 0..order {
                    let j = rho[i] as usize;
                    if j >= m {
                        continue;
                    }
                    let mut rest = rho.clone();
                    rest.remove(i);
                    for n in 0..order {
                        let mm = order - 1 - n;
                        sk += sym_product_at(&kg[j], n, &sigmas[j], mm, &rest);
                    }
                }
                v += sk / order as f64;
            }
            let mut drift = 0.0;
            for j in 0..m {
                for n in 0..=order {
                    let mm = order - n;
                    drift += (n + 1) as f64 * sym_product_at(&pins[j], n, &sigmas[j], mm, &rho);
                }
            }
            v += step * drift;
            values.insert(rho, v);
        }
        let k = SymKernel::from_entries(order, grid, values, EntryMode::Canonical)?;
        out.add_kernel(1.0, &k)?;
    }
    Ok(out)
}

/// `∫ K_g(SΦ(ξ))(t,s) ξ(s) ds + ∫ δ/δξ(s) K_g(SΦ(ξ))(t,s) ds`, each term
/// multiplied by `SΣ(s)(ξ)` when a Wick volatility is given.
pub fn s_transform_oracle(
    phi: &ChaosProcess,
    table: &KernelTable,
    t: f64,
    xi: &TestFunction,
    sigma: Option<&ChaosProcess>,
) -> Result<f64> {
    let grid = phi.grid();
    if table.grid() != grid || xi.grid() != grid {
        return Err(invalid!("grid mismatch"));
    }
    let m = table.time_index(t)?;
    let s_phi = phi
        .values()
        .iter()
        .map(|v| s_transform(v, xi))
        .collect::<Result<Vec<_>>>()?;
    let kg = table.apply_scalar(&s_phi, m);
    let mut total = 0.0;
    for (j, kj) in kg.iter().enumerate().take(m) {
        let mut frechet = 0.0;
        for (k, c) in table.coefficients(j, m) {
            frechet += c * s_transform_frechet(phi.at(k), xi, j)?;
        }
        let weight = match sigma {
            Some(s) => s_transform(s.at(j), xi)?,
            None => 1.0,
        };
        total += (kj * xi.values()[j] + frechet) * weight;
    }
    Ok(grid.step() * total)
}
