//! Exhaustive oracles shared by the integration tests.

use std::collections::BTreeMap;

use latwalk::walks::{Region, StepSet};
use num_bigint::BigInt;

/// Endpoint counts of all `|S|^m` step sequences that stay in the region,
/// found by trying every sequence.
pub fn brute_force_cells(steps: &StepSet, region: &Region, m: usize) -> BTreeMap<Vec<i64>, BigInt> {
    let k = steps.len();
    let mut out = BTreeMap::new();
    let mut digits = vec![0usize; m];
    loop {
        let mut pos = vec![0i64; steps.dim()];
        let mut inside = true;
        for &d in &digits {
            for (p, s) in pos.iter_mut().zip(&steps.steps()[d]) {
                *p += s;
            }
            if !region.contains(&pos) {
                inside = false;
                break;
            }
        }
        if inside {
            *out.entry(pos).or_insert_with(|| BigInt::from(0)) += 1;
        }
        let mut i = 0;
        loop {
            if i == m {
                return out;
            }
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |a, k| a * k)
}
