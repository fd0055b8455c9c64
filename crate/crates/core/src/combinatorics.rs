//! Exact counting in log space: log-factorials, multinomials and the
//! enumeration of types (compositions of `n` into `k` parts).

use crate::{Error, Result};

/// `ln k!` for `k = 0..=n`, accumulated as `Σ ln i`.
pub fn log_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        table.push(acc);
    }
    table
}

/// `ln (n! / Π kᵢ!)` with `n = Σ kᵢ`, using a table from [`log_factorials`].
pub fn log_multinomial(counts: &[u64], table: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    table[n as usize] - counts.iter().map(|k| table[*k as usize]).sum::<f64>()
}

/// Number of compositions of `n` into `k` nonnegative parts, `C(n+k−1, k−1)`,
/// saturating at `u64::MAX`.
pub fn composition_count(n: u64, k: u64) -> u64 {
    if k == 0 {
        return u64::from(n == 0);
    }
    let (top, choose) = (n + k - 1, k - 1);
    let choose = choose.min(top - choose);
    let mut acc: u128 = 1;
    for i in 0..choose {
        acc = acc * u128::from(top - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// All compositions of `n` into `k` parts, in lexicographic order, refusing
/// to materialize more than `limit` of them.
pub fn compositions(n: u64, k: usize, limit: u64) -> Result<Vec<Vec<u64>>> {
    let count = composition_count(n, k as u64);
    if count > limit {
        return Err(Error::Capacity(format!(
            "{count} compositions of {n} into {k} parts exceed {limit}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return Ok(out);
    }
    let mut current = vec![0u64; k];
    fill(&mut current, 0, n, &mut out);
    Ok(out)
}

fn fill(current: &mut Vec<u64>, slot: usize, remaining: u64, out: &mut Vec<Vec<u64>>) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[slot] = k;
        fill(current, slot + 1, remaining - k, out);
    }
}
