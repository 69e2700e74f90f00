//! Multiset and factorial helpers shared by the tensor kernels.

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 512;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        ln_fact_table()[n]
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

pub fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>() as f64
    } else {
        ln_factorial(n).exp()
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `(cell, repeat count)` runs of a sorted tuple.
pub fn runs(tuple: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &c in tuple {
        match out.last_mut() {
            Some((last, n)) if *last == c => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

/// Number of distinct orderings of a multiset: `n! / Π r_c!`.
pub fn multiplicity(tuple: &[u32]) -> f64 {
    let mut ln = ln_factorial(tuple.len());
    for (_, r) in runs(tuple) {
        ln -= ln_factorial(r as usize);
    }
    if tuple.len() <= 20 {
        ln.exp().round()
    } else {
        ln.exp()
    }
}

pub fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Removes one occurrence of `cell`; `None` when absent.
pub fn remove_one(tuple: &[u32], cell: u32) -> Option<Vec<u32>> {
    let pos = tuple.iter().position(|&c| c == cell)?;
    let mut out = tuple.to_vec();
    out.remove(pos);
    Some(out)
}

pub fn insert_sorted(tuple: &[u32], cell: u32) -> Vec<u32> {
    let pos = tuple.partition_point(|&c| c <= cell);
    let mut out = Vec::with_capacity(tuple.len() + 1);
    out.extend_from_slice(&tuple[..pos]);
    out.push(cell);
    out.extend_from_slice(&tuple[pos..]);
    out
}

/// Every distinct sub-multiset of size `k`, paired with its complement.
pub fn sub_multisets(tuple: &[u32], k: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    let rs = runs(tuple);
    let mut out = Vec::new();
    let mut pick = vec![0u32; rs.len()];
    fn rec(rs: &[(u32, u32)], idx: usize, left: usize, pick: &mut Vec<u32>, out: &mut Vec<(Vec<u32>, Vec<u32>)>) {
        if idx == rs.len() {
            if left == 0 {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (i, &(c, r)) in rs.iter().enumerate() {
                    a.extend(std::iter::repeat_n(c, pick[i] as usize));
                    b.extend(std::iter::repeat_n(c, (r - pick[i]) as usize));
                }
                out.push((a, b));
            }
            return;
        }
        let remaining: usize = rs[idx..].iter().map(|&(_, r)| r as usize).sum();
        if remaining < left {
            return;
        }
        let top = (rs[idx].1 as usize).min(left);
        for x in 0..=top {
            pick[idx] = x as u32;
            rec(rs, idx + 1, left - x, pick, out);
        }
        pick[idx] = 0;
    }
    rec(&rs, 0, k, &mut pick, &mut out);
    out
}

/// `Π_c C(r_c(rho), r_c(part))`: the number of slot subsets of `rho` whose
/// cells form the multiset `part`.
pub fn split_count(rho: &[u32], part: &[u32]) -> f64 {
    let pr = runs(part);
    let rr = runs(rho);
    let mut acc = 1.0;
    for (c, x) in pr {
        let r = rr.iter().find(|&&(cc, _)| cc == c).map_or(0, |&(_, r)| r);
        acc *= binomial(r as usize, x as usize);
    }
    acc
}

/// Normalized permanent of a block matrix with repeated rows and columns.
///
/// Row group `g` repeats `rows[g]` times and column group `h` repeats
/// `cols[h]` times, with entry `w[g][h]`. Returns `perm / n!` where
/// `n = Σ rows = Σ cols`, summing over contingency tables `X` with the given
/// margins and weight `Π rows! Π cols! / Π X! · Π w^X`.
pub fn grouped_permanent(rows: &[u32], cols: &[u32], w: &[Vec<f64>]) -> f64 {
    let n: u32 = rows.iter().sum();
    debug_assert_eq!(n, cols.iter().sum::<u32>());
    if n == 0 {
        return 1.0;
    }
    let base = rows.iter().chain(cols).map(|&k| ln_factorial(k as usize)).sum::<f64>() - ln_factorial(n as usize);
    let mut row_rem = rows.to_vec();
    let mut col_rem = cols.to_vec();
    let mut total = 0.0;
    fill(0, 0, &mut row_rem, &mut col_rem, base, 1.0, w, &mut total);
    total
}

#[allow(clippy::too_many_arguments)]
fn fill(
    r: usize,
    c: usize,
    row_rem: &mut [u32],
    col_rem: &mut [u32],
    ln_acc: f64,
    w_acc: f64,
    w: &[Vec<f64>],
    total: &mut f64,
) {
    if r == row_rem.len() {
        *total += ln_acc.exp() * w_acc;
        return;
    }
    let ncols = col_rem.len();
    let last = c + 1 == ncols;
    let want = row_rem[r];
    let cap_after: u32 = col_rem[c + 1..].iter().sum();
    let lo = want.saturating_sub(cap_after);
    let hi = want.min(col_rem[c]);
    if lo > hi {
        return;
    }
    let wij = w[r][c];
    for x in lo..=hi {
        if last && x != want {
            continue;
        }
        if x > 0 && wij == 0.0 {
            break;
        }
        row_rem[r] -= x;
        col_rem[c] -= x;
        let ln = ln_acc - ln_factorial(x as usize);
        let wa = w_acc * wij.powi(x as i32);
        if last {
            fill(r + 1, 0, row_rem, col_rem, ln, wa, w, total);
        } else {
            fill(r, c + 1, row_rem, col_rem, ln, wa, w, total);
        }
        row_rem[r] += x;
        col_rem[c] += x;
    }
}
