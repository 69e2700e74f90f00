//! Kernels stored as canonical (sorted) cell tuples.

use std::collections::BTreeMap;

use crate::combinatorics::{binomial, merge_sorted, multiplicity, remove_one, split_count, sub_multisets};

pub type SparseMap = BTreeMap<Vec<u32>, f64>;

pub fn accumulate(map: &mut SparseMap, key: Vec<u32>, v: f64) {
    if v == 0.0 {
        return;
    }
    *map.entry(key).or_insert(0.0) += v;
}

pub fn prune(map: &mut SparseMap) {
    map.retain(|_, c| *c != 0.0);
}

pub fn inner(a: &SparseMap, b: &SparseMap, order: usize, step: f64) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let s: f64 = small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| multiplicity(k) * x * y))
        .sum();
    s * step.powi(order as i32)
}

/// `F(·, j)`: every stored tuple containing `cell`, with one copy removed.
pub fn slice(map: &SparseMap, cell: u32) -> SparseMap {
    let mut out = SparseMap::new();
    for (k, c) in map {
        if let Some(rest) = remove_one(k, cell) {
            accumulate(&mut out, rest, *c);
        }
    }
    out
}

pub fn pair_power(map: &SparseMap, xi: &[f64], order: usize, step: f64) -> f64 {
    let s: f64 = map
        .iter()
        .map(|(k, c)| multiplicity(k) * c * k.iter().map(|&i| xi[i as usize]).product::<f64>())
        .sum();
    s * step.powi(order as i32)
}

/// `sym(A ⊗_k B)`: contract `k` slot pairs (step-weighted), then symmetrize.
pub fn contract_sym(a: &SparseMap, a_order: usize, b: &SparseMap, b_order: usize, k: usize, step: f64) -> SparseMap {
    let mut out = SparseMap::new();
    if k > a_order || k > b_order || a.is_empty() || b.is_empty() {
        return out;
    }
    let by_z = |m: &SparseMap| {
        let mut g: BTreeMap<Vec<u32>, Vec<(Vec<u32>, f64)>> = BTreeMap::new();
        for (t, c) in m {
            for (z, rest) in sub_multisets(t, k) {
                g.entry(z).or_default().push((rest, *c));
            }
        }
        g
    };
    let az = by_z(a);
    let bz = by_z(b);
    let mut pairs: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
    let wk = step.powi(k as i32);
    for (z, xs) in &az {
        let Some(ys) = bz.get(z) else { continue };
        let w = wk * multiplicity(z);
        for (x, c) in xs {
            for (y, d) in ys {
                *pairs.entry((x.clone(), y.clone())).or_insert(0.0) += w * c * d;
            }
        }
    }
    let left = a_order - k;
    let norm = binomial(a_order + b_order - 2 * k, left);
    for ((x, y), v) in pairs {
        let rho = merge_sorted(&x, &y);
        let w = split_count(&rho, &x) / norm;
        accumulate(&mut out, rho, v * w);
    }
    prune(&mut out);
    out
}

/// All canonical tuples of length `n` over the given sorted cells.
pub fn canonical_tuples(cells: &[u32], n: usize, mut f: impl FnMut(&[u32])) {
    let mut cur = Vec::with_capacity(n);
    fn rec(cells: &[u32], start: usize, n: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if cur.len() == n {
            f(cur);
            return;
        }
        for i in start..cells.len() {
            cur.push(cells[i]);
            rec(cells, i, n, cur, f);
            cur.pop();
        }
    }
    rec(cells, 0, n, &mut cur, &mut f);
}

/// Number of canonical tuples of length `n` over `m` cells, saturating.
pub fn tuple_count(m: usize, n: usize) -> f64 {
    if m == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    binomial(m + n - 1, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&[u32], f64)]) -> SparseMap {
        entries.iter().map(|(k, v)| (k.to_vec(), *v)).collect()
    }

    #[test]
    fn contraction_of_indicators() {
        // f = 1 on both cells of a 2-cell grid with step 1/2: |f|² = 1.
        let f = map(&[(&[0], 1.0), (&[1], 1.0)]);
        let c1 = contract_sym(&f, 1, &f, 1, 1, 0.5);
        assert_eq!(c1, map(&[(&[], 1.0)]));
        let c0 = contract_sym(&f, 1, &f, 1, 0, 0.5);
        assert_eq!(c0, map(&[(&[0, 0], 1.0), (&[0, 1], 1.0), (&[1, 1], 1.0)]));
    }

    #[test]
    fn symmetrized_tensor_product_averages() {
        let f = map(&[(&[0], 1.0)]);
        let g = map(&[(&[1], 1.0)]);
        // (1_0 ⊗ 1_1) symmetrized takes value 1/2 on the multiset {0,1}.
        assert_eq!(contract_sym(&f, 1, &g, 1, 0, 1.0), map(&[(&[0, 1], 0.5)]));
    }

    #[test]
    fn tuple_enumeration_count() {
        let mut n = 0;
        canonical_tuples(&[0, 1, 2, 3], 3, |_| n += 1);
        assert_eq!(n as f64, tuple_count(4, 3));
    }
}
