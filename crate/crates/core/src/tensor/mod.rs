//! Symmetric step-function kernels on a grid.
//!
//! A [`SymKernel`] of order `n` is a symmetric function on `[0,T)^n` that is
//! constant on grid cells. It is stored as a sparse map from sorted cell
//! tuples to values, plus an optional list of factored product terms
//! `c · sym(a_1^{⊗k_1} ⊗ … ⊗ a_r^{⊗k_r})` for kernels that are dense but
//! low rank (the Donsker delta at order 40 is one such term).

pub mod factored;
pub mod sparse;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{multiplicity, runs};
use crate::error::{invalid, ChaosError, Result};
use crate::grid::Grid;
pub use factored::{Factor, Groups, ProductMap};
pub use sparse::SparseMap;

/// Default budget for expanding product terms into explicit tuples.
pub const MATERIALIZE_LIMIT: f64 = 2.0e6;

/// How `from_entries` reads raw tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryMode {
    /// Raw values of an unsymmetric tensor at ordered positions; distinct
    /// orderings of one multiset are averaged.
    Positional,
    /// Values of a symmetric function; duplicates of a multiset are summed.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct SymKernel {
    order: usize,
    grid: Grid,
    entries: SparseMap,
    products: ProductMap,
}

impl SymKernel {
    pub fn zero(order: usize, grid: Grid) -> Self {
        SymKernel {
            order,
            grid,
            entries: SparseMap::new(),
            products: ProductMap::new(),
        }
    }

    pub fn scalar(value: f64, grid: Grid) -> Self {
        let mut k = Self::zero(0, grid);
        sparse::accumulate(&mut k.entries, Vec::new(), value);
        k
    }

    pub fn from_entries(
        order: usize,
        grid: Grid,
        raw: impl IntoIterator<Item = (Vec<u32>, f64)>,
        mode: EntryMode,
    ) -> Result<Self> {
        let mut k = Self::zero(order, grid);
        for (mut tuple, c) in raw {
            if tuple.len() != order {
                return Err(invalid!(
                    "tuple {tuple:?} has length {} but the order is {order}",
                    tuple.len()
                ));
            }
            if let Some(&bad) = tuple.iter().find(|&&i| i as usize >= grid.cells()) {
                return Err(invalid!("cell index {bad} out of range for {} cells", grid.cells()));
            }
            if !c.is_finite() {
                return Err(invalid!("non-finite coefficient at {tuple:?}"));
            }
            tuple.sort_unstable();
            let w = match mode {
                EntryMode::Positional => c / multiplicity(&tuple),
                EntryMode::Canonical => c,
            };
            *k.entries.entry(tuple).or_insert(0.0) += w;
        }
        sparse::prune(&mut k.entries);
        Ok(k)
    }

    /// Order-1 kernel from one value per cell.
    pub fn from_values(grid: Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(invalid!("expected {} cell values, got {}", grid.cells(), values.len()));
        }
        let raw = values.iter().enumerate().map(|(i, &v)| (vec![i as u32], v));
        Self::from_entries(1, grid, raw, EntryMode::Canonical)
    }

    /// Tabulates a symmetric function on every sorted tuple of `cells`.
    pub fn from_fn(order: usize, grid: Grid, cells: &[u32], f: impl Fn(&[u32]) -> f64) -> Result<Self> {
        let mut raw = Vec::new();
        sparse::canonical_tuples(cells, order, |t| raw.push((t.to_vec(), f(t))));
        Self::from_entries(order, grid, raw, EntryMode::Canonical)
    }

    /// `coeff · sym(a_1^{⊗k_1} ⊗ …)` kept in factored form.
    pub fn product(grid: Grid, coeff: f64, factors: Vec<(Vec<f64>, u32)>) -> Result<Self> {
        let mut groups = Vec::with_capacity(factors.len());
        for (values, power) in factors {
            if values.len() != grid.cells() {
                return Err(invalid!(
                    "factor has {} values but the grid has {} cells",
                    values.len(),
                    grid.cells()
                ));
            }
            if values.iter().any(|v| !v.is_finite()) || !coeff.is_finite() {
                return Err(invalid!("non-finite product term"));
            }
            groups.push((Factor::new(values), power));
        }
        let groups = factored::normalize_groups(groups);
        let mut k = Self::zero(factored::groups_order(&groups), grid);
        k.push_product(groups, coeff);
        Ok(k)
    }

    pub(crate) fn from_parts(order: usize, grid: Grid, entries: SparseMap, products: ProductMap) -> Self {
        let mut k = SymKernel {
            order,
            grid,
            entries,
            products: ProductMap::new(),
        };
        for (g, c) in products {
            k.push_product(g, c);
        }
        sparse::prune(&mut k.entries);
        k
    }

    pub(crate) fn push_product(&mut self, groups: Groups, coeff: f64) {
        debug_assert_eq!(factored::groups_order(&groups), self.order);
        if groups.is_empty() {
            sparse::accumulate(&mut self.entries, Vec::new(), coeff);
        } else {
            factored::accumulate(&mut self.products, groups, coeff);
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Explicit sorted-tuple entries (excludes factored terms).
    pub fn entries(&self) -> &SparseMap {
        &self.entries
    }

    pub fn products(&self) -> &ProductMap {
        &self.products
    }

    pub fn is_factored(&self) -> bool {
        !self.products.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|&c| c == 0.0) && self.products.values().all(|&c| c == 0.0)
    }

    /// The scalar of an order-0 kernel.
    pub fn scalar_value(&self) -> f64 {
        debug_assert_eq!(self.order, 0);
        self.entries.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    /// Value at a cell tuple (any ordering).
    pub fn value_at(&self, tuple: &[u32]) -> f64 {
        let mut t = tuple.to_vec();
        t.sort_unstable();
        let mut v = self.entries.get(&t).copied().unwrap_or(0.0);
        for (g, c) in &self.products {
            v += c * factored::value_at(g, &t);
        }
        v
    }

    pub(crate) fn check_same(&self, other: &SymKernel) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid!("grid mismatch"));
        }
        if self.order != other.order {
            return Err(invalid!("order mismatch: {} vs {}", self.order, other.order));
        }
        Ok(())
    }

    /// `(F, G)_{L²}`.
    pub fn inner(&self, other: &SymKernel) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.inner_unchecked(other))
    }

    fn inner_unchecked(&self, other: &SymKernel) -> f64 {
        let step = self.grid.step();
        let n = self.order as i32;
        let mut s = sparse::inner(&self.entries, &other.entries, self.order, step);
        let cross = |sp: &SparseMap, pr: &ProductMap| -> f64 {
            if pr.is_empty() {
                return 0.0;
            }
            let t: f64 = sp
                .iter()
                .map(|(tau, c)| {
                    let v: f64 = pr.iter().map(|(g, d)| d * factored::value_at(g, tau)).sum();
                    multiplicity(tau) * c * v
                })
                .sum();
            t * step.powi(n)
        };
        s += cross(&self.entries, &other.products);
        s += cross(&other.entries, &self.products);
        for (ga, ca) in &self.products {
            for (gb, cb) in &other.products {
                s += ca * cb * factored::inner(ga, gb, step);
            }
        }
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner_unchecked(self).max(0.0)
    }

    pub fn scaled(&self, a: f64) -> SymKernel {
        let mut k = self.clone();
        if a == 0.0 {
            k.entries.clear();
            k.products.clear();
            return k;
        }
        k.entries.values_mut().for_each(|c| *c *= a);
        k.products.values_mut().for_each(|c| *c *= a);
        k
    }

    /// `self += a · other`.
    pub fn add_scaled(&mut self, a: f64, other: &SymKernel) -> Result<()> {
        self.check_same(other)?;
        if a == 0.0 {
            return Ok(());
        }
        for (t, c) in &other.entries {
            *self.entries.entry(t.clone()).or_insert(0.0) += a * c;
        }
        for (g, c) in &other.products {
            *self.products.entry(g.clone()).or_insert(0.0) += a * c;
        }
        sparse::prune(&mut self.entries);
        factored::prune(&mut self.products);
        Ok(())
    }

    pub fn axpby(a: f64, x: &SymKernel, b: f64, y: &SymKernel) -> Result<SymKernel> {
        x.check_same(y)?;
        let mut out = x.scaled(a);
        out.add_scaled(b, y)?;
        Ok(out)
    }

    /// `F(·, j)` as an order `n − 1` kernel.
    pub fn slice(&self, cell: usize) -> Result<SymKernel> {
        if self.order == 0 {
            return Err(invalid!("cannot slice an order-0 kernel"));
        }
        if cell >= self.grid.cells() {
            return Err(invalid!("cell {cell} out of range"));
        }
        let mut out = SymKernel::zero(self.order - 1, self.grid);
        out.entries = sparse::slice(&self.entries, cell as u32);
        for (g, c) in &self.products {
            for (rest, w) in factored::slice(g, cell) {
                out.push_product(rest, c * w);
            }
        }
        factored::prune(&mut out.products);
        Ok(out)
    }

    /// `sym(F ⊗_k G)`: contract `k` slot pairs, then symmetrize.
    pub fn contract(&self, other: &SymKernel, k: usize) -> Result<SymKernel> {
        if self.grid != other.grid {
            return Err(invalid!("grid mismatch"));
        }
        if k > self.order || k > other.order {
            return Err(invalid!(
                "cannot contract {k} slots of orders {} and {}",
                self.order,
                other.order
            ));
        }
        let order = self.order + other.order - 2 * k;
        let step = self.grid.step();
        let mut out = SymKernel::zero(order, self.grid);
        if !self.is_factored() && !other.is_factored() {
            out.entries = sparse::contract_sym(&self.entries, self.order, &other.entries, other.order, k, step);
            return Ok(out);
        }
        let a = self.all_products();
        let b = other.all_products();
        for (ga, ca) in &a {
            for (gb, cb) in &b {
                for (g, w) in factored::contract(ga, gb, k, step) {
                    out.push_product(g, ca * cb * w);
                }
            }
        }
        factored::prune(&mut out.products);
        sparse::prune(&mut out.entries);
        Ok(out)
    }

    /// Every term in factored form; sparse entries become one-hot products.
    fn all_products(&self) -> Vec<(Groups, f64)> {
        let m = self.grid.cells();
        let mut out: Vec<(Groups, f64)> = self.products.iter().map(|(g, c)| (g.clone(), *c)).collect();
        for (tau, c) in &self.entries {
            let groups: Groups = runs(tau)
                .into_iter()
                .map(|(cell, r)| {
                    let mut v = vec![0.0; m];
                    v[cell as usize] = 1.0;
                    (Factor::new(v), r)
                })
                .collect();
            out.push((factored::normalize_groups(groups), c * multiplicity(tau)));
        }
        out
    }

    /// `(F, ξ^{⊗n})_{L²}`.
    pub fn pair_power(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.grid.cells() {
            return Err(invalid!(
                "test function has {} values, grid has {} cells",
                xi.len(),
                self.grid.cells()
            ));
        }
        let step = self.grid.step();
        let mut s = sparse::pair_power(&self.entries, xi, self.order, step);
        for (g, c) in &self.products {
            s += c * factored::pair_power(g, xi, step);
        }
        Ok(s)
    }

    /// Cells appearing in a tuple with a nonzero coefficient, or where a
    /// factor of a nonzero product term is nonzero.
    pub fn support(&self) -> BTreeSet<u32> {
        let mut s = BTreeSet::new();
        for (t, c) in &self.entries {
            if *c != 0.0 {
                s.extend(t.iter().copied());
            }
        }
        for (g, c) in &self.products {
            if *c != 0.0 {
                factored::support_cells(g, &mut s);
            }
        }
        s
    }

    /// Expands factored terms into explicit tuples.
    pub fn materialize(&self, limit: f64) -> Result<SymKernel> {
        if !self.is_factored() {
            return Ok(self.clone());
        }
        let mut entries = self.entries.clone();
        for (g, c) in &self.products {
            let cells = factored::active_cells(g);
            let count = sparse::tuple_count(cells.len(), self.order);
            if count > limit {
                return Err(ChaosError::TooLarge(format!(
                    "order-{} term over {} cells expands to {count:.3e} tuples",
                    self.order,
                    cells.len()
                )));
            }
            sparse::canonical_tuples(&cells, self.order, |t| {
                let v = factored::value_at(g, t);
                sparse::accumulate(&mut entries, t.to_vec(), c * v);
            });
        }
        sparse::prune(&mut entries);
        Ok(SymKernel::from_parts(self.order, self.grid, entries, ProductMap::new()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    order: usize,
    grid: Grid,
    entries: Vec<(Vec<u32>, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    products: Vec<RawProduct>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProduct {
    coeff: f64,
    factors: Vec<(Vec<f64>, u32)>,
}

impl TryFrom<RawKernel> for SymKernel {
    type Error = ChaosError;

    fn try_from(raw: RawKernel) -> Result<Self> {
        let mut k = SymKernel::from_entries(raw.order, raw.grid, raw.entries, EntryMode::Canonical)?;
        for p in raw.products {
            let term = SymKernel::product(raw.grid, p.coeff, p.factors)?;
            if term.order != raw.order {
                return Err(invalid!(
                    "product term of order {} in an order-{} kernel",
                    term.order,
                    raw.order
                ));
            }
            k.add_scaled(1.0, &term)?;
        }
        Ok(k)
    }
}

impl From<SymKernel> for RawKernel {
    fn from(k: SymKernel) -> Self {
        RawKernel {
            order: k.order,
            grid: k.grid,
            entries: k.entries.into_iter().collect(),
            products: k
                .products
                .into_iter()
                .map(|(g, coeff)| RawProduct {
                    coeff,
                    factors: g.into_iter().map(|(f, p)| (f.values().to_vec(), p)).collect(),
                })
                .collect(),
        }
    }
}
