//! Symmetrized products of cell-valued factor vectors.
//!
//! A product term with groups `(a_1, k_1), …, (a_r, k_r)` stands for the
//! symmetric step function `sym(a_1^{⊗k_1} ⊗ … ⊗ a_r^{⊗k_r})`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::combinatorics::{binomial, grouped_permanent, runs};

/// One factor vector: a step function given by its value on every cell.
#[derive(Clone)]
pub struct Factor {
    values: Arc<[f64]>,
    fingerprint: u64,
}

impl Factor {
    pub fn new(values: Vec<f64>) -> Self {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in &values {
            // +0.0 and -0.0 must hash alike because they compare equal below.
            let bits = if *v == 0.0 { 0 } else { v.to_bits() };
            bits.hash(&mut h);
        }
        Factor {
            values: values.into(),
            fingerprint: h.finish(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `(a, b)_{L²}` of two step functions on a grid with the given step.
    pub fn dot(&self, other: &Factor, step: f64) -> f64 {
        step * self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    fn key(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() })
    }
}

impl std::fmt::Debug for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.values.iter()).finish()
    }
}

impl PartialEq for Factor {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && (Arc::ptr_eq(&self.values, &other.values) || self.key().eq(other.key()))
    }
}

impl Eq for Factor {}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.fingerprint
            .cmp(&other.fingerprint)
            .then_with(|| self.key().cmp(other.key()))
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorted factor groups with merged powers; the key of a product term.
pub type Groups = Vec<(Factor, u32)>;

pub type ProductMap = BTreeMap<Groups, f64>;

pub fn normalize_groups(mut groups: Groups) -> Groups {
    groups.retain(|(_, k)| *k > 0);
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Groups = Vec::with_capacity(groups.len());
    for (f, k) in groups {
        match out.last_mut() {
            Some((last, kk)) if *last == f => *kk += k,
            _ => out.push((f, k)),
        }
    }
    out
}

pub fn groups_order(groups: &Groups) -> usize {
    groups.iter().map(|(_, k)| *k as usize).sum()
}

pub fn accumulate(map: &mut ProductMap, groups: Groups, coeff: f64) {
    if coeff == 0.0 || groups.iter().any(|(f, _)| f.is_zero()) {
        return;
    }
    let e = map.entry(groups).or_insert(0.0);
    *e += coeff;
}

pub fn prune(map: &mut ProductMap) {
    map.retain(|_, c| *c != 0.0);
}

/// Value of the symmetric product at a canonical cell tuple.
pub fn value_at(groups: &Groups, tuple: &[u32]) -> f64 {
    let rs = runs(tuple);
    let rows: Vec<u32> = groups.iter().map(|(_, k)| *k).collect();
    let cols: Vec<u32> = rs.iter().map(|&(_, r)| r).collect();
    let w: Vec<Vec<f64>> = groups
        .iter()
        .map(|(f, _)| rs.iter().map(|&(c, _)| f.values()[c as usize]).collect())
        .collect();
    grouped_permanent(&rows, &cols, &w)
}

/// `(sym A, sym B)_{L²}` for two product terms of equal order.
pub fn inner(a: &Groups, b: &Groups, step: f64) -> f64 {
    let rows: Vec<u32> = a.iter().map(|(_, k)| *k).collect();
    let cols: Vec<u32> = b.iter().map(|(_, k)| *k).collect();
    let w: Vec<Vec<f64>> = a
        .iter()
        .map(|(fa, _)| b.iter().map(|(fb, _)| fa.dot(fb, step)).collect())
        .collect();
    grouped_permanent(&rows, &cols, &w)
}

/// `F(·, j)` for `F = sym(groups)`: terms of one order lower.
pub fn slice(groups: &Groups, cell: usize) -> Vec<(Groups, f64)> {
    let n = groups_order(groups) as f64;
    let mut out = Vec::new();
    for (g, (f, k)) in groups.iter().enumerate() {
        let v = f.values()[cell];
        if v == 0.0 {
            continue;
        }
        let mut rest = groups.clone();
        rest[g].1 -= 1;
        out.push((normalize_groups(rest), *k as f64 / n * v));
    }
    out
}

/// `(sym(groups), ξ^{⊗n})_{L²}`.
pub fn pair_power(groups: &Groups, xi: &[f64], step: f64) -> f64 {
    groups
        .iter()
        .map(|(f, k)| {
            let d: f64 = step * f.values().iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
            d.powi(*k as i32)
        })
        .product()
}

pub fn concat(a: &Groups, b: &Groups) -> Groups {
    let mut g = a.clone();
    g.extend(b.iter().cloned());
    normalize_groups(g)
}

pub fn support_cells(groups: &Groups, out: &mut std::collections::BTreeSet<u32>) {
    for (f, _) in groups {
        for (i, v) in f.values().iter().enumerate() {
            if *v != 0.0 {
                out.insert(i as u32);
            }
        }
    }
}

/// Cells on which at least one factor is nonzero.
pub fn active_cells(groups: &Groups) -> Vec<u32> {
    let mut s = std::collections::BTreeSet::new();
    support_cells(groups, &mut s);
    s.into_iter().collect()
}

/// `sym(A) ⊗̂_k sym(B)`: contract `k` slot pairs and symmetrize the rest.
///
/// The contracted slots of `A` carry group counts `p` with hypergeometric
/// probability `Π C(k_g, p_g) / C(n, k)`; likewise `q` for `B`. The paired
/// slots average to a grouped permanent of the Gram matrix.
pub fn contract(a: &Groups, b: &Groups, k: usize, step: f64) -> Vec<(Groups, f64)> {
    let n = groups_order(a);
    let m = groups_order(b);
    if k > n || k > m {
        return Vec::new();
    }
    if k == 0 {
        return vec![(concat(a, b), 1.0)];
    }
    let gram: Vec<Vec<f64>> = a
        .iter()
        .map(|(fa, _)| b.iter().map(|(fb, _)| fa.dot(fb, step)).collect())
        .collect();
    let pa = compositions(a, k);
    let pb = compositions(b, k);
    let na = binomial(n, k);
    let nb = binomial(m, k);
    let mut out = Vec::new();
    for (p, wa) in &pa {
        for (q, wb) in &pb {
            let perm = grouped_permanent(p, q, &gram);
            if perm == 0.0 {
                continue;
            }
            let mut rest: Groups = a.iter().zip(p).map(|((f, kk), pp)| (f.clone(), kk - pp)).collect();
            rest.extend(b.iter().zip(q).map(|((f, kk), qq)| (f.clone(), kk - qq)));
            out.push((normalize_groups(rest), wa / na * wb / nb * perm));
        }
    }
    out
}

/// Every way to draw `k` slots from the groups, with its count `Π C(k_g, p_g)`.
fn compositions(groups: &Groups, k: usize) -> Vec<(Vec<u32>, f64)> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; groups.len()];
    fn rec(groups: &Groups, g: usize, left: u32, cur: &mut Vec<u32>, w: f64, out: &mut Vec<(Vec<u32>, f64)>) {
        if g == groups.len() {
            if left == 0 {
                out.push((cur.clone(), w));
            }
            return;
        }
        let cap: u32 = groups[g..].iter().map(|(_, k)| *k).sum();
        if cap < left {
            return;
        }
        let kg = groups[g].1;
        for x in 0..=kg.min(left) {
            cur[g] = x;
            rec(groups, g + 1, left - x, cur, w * binomial(kg as usize, x as usize), out);
        }
        cur[g] = 0;
    }
    rec(groups, 0, k as u32, &mut cur, 1.0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_identity_ignores_zero_sign() {
        let a = Factor::new(vec![0.0, 1.0]);
        let b = Factor::new(vec![-0.0, 1.0]);
        assert_eq!(a, b);
        assert_eq!(a.cmp(&b), Ordering::Equal);
    }

    #[test]
    fn box_power_value_and_norm() {
        let f = Factor::new(vec![1.0, 1.0, 0.0, 0.0]);
        let g = vec![(f, 3)];
        assert_eq!(value_at(&g, &[0, 1, 1]), 1.0);
        assert_eq!(value_at(&g, &[0, 1, 2]), 0.0);
        // |1_{[0,1/2)}^{⊗3}|² = (1/2)^3 on a 4-cell grid of [0,1).
        assert!((inner(&g, &g, 0.25) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn mixed_value_is_symmetrized() {
        let a = Factor::new(vec![1.0, 2.0]);
        let b = Factor::new(vec![3.0, 5.0]);
        let g = normalize_groups(vec![(a, 1), (b, 1)]);
        // sym(a⊗b)(0,1) = (a0 b1 + a1 b0)/2
        assert!((value_at(&g, &[0, 1]) - (1.0 * 5.0 + 2.0 * 3.0) / 2.0).abs() < 1e-14);
    }
}
