use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Constraint, GridFunction, Lookup, Region, StepSet, WalkError};

/// Restate a walk region as a region on step-multiplicity vectors
/// `A in N^r`: the endpoint `sum_i A_i s_i` must satisfy every constraint.
/// Since every prefix of a walk is again a walk, this is exactly the set of
/// unit-step walks in `N^r` that stay inside.
pub fn refine(steps: &StepSet, region: &Region) -> Region {
    let constraints = region
        .constraints()
        .iter()
        .map(|c| {
            let coeffs = steps
                .steps()
                .iter()
                .map(|s| s.iter().zip(&c.coeffs).map(|(a, b)| a * b).sum())
                .collect();
            Constraint::new(coeffs, c.bound)
        })
        .collect();
    Region::new(steps.len(), constraints).expect("origin of N^r maps to the origin")
}

/// Counts `f(A_1, ..., A_r)` of walks using exactly `A_i` copies of step `i`,
/// for all `A` with `|A| <= total_max`.
#[derive(Clone, Debug)]
pub struct RefinedTable {
    steps: StepSet,
    region_refined: Region,
    total_max: usize,
    counts: HashMap<Vec<u32>, BigInt>,
}

pub fn refined_enumerate(
    steps: &StepSet,
    region: &Region,
    total_max: usize,
) -> Result<RefinedTable, WalkError> {
    refined_enumerate_with_budget(steps, region, total_max, super::DEFAULT_CELL_BUDGET / 8)
}

pub fn refined_enumerate_with_budget(
    steps: &StepSet,
    region: &Region,
    total_max: usize,
    budget: u64,
) -> Result<RefinedTable, WalkError> {
    let r = steps.len();
    let region_refined = refine(steps, region);
    let points = binomial(total_max + r, r);
    if points > budget as u128 {
        return Err(WalkError::Resource {
            dims: format!("N^{r} up to total {total_max}"),
            cells: points,
            budget,
        });
    }
    let mut counts: HashMap<Vec<u32>, BigInt> = HashMap::new();
    counts.insert(vec![0; r], BigInt::one());
    let mut layer = vec![vec![0u32; r]];
    for _ in 1..=total_max {
        let mut next_layer = Vec::new();
        for a in compositions_after(&layer, r) {
            let pt: Vec<i64> = a.iter().map(|&x| x as i64).collect();
            if !region_refined.contains(&pt) {
                continue;
            }
            let mut acc = BigInt::zero();
            for i in 0..r {
                if a[i] == 0 {
                    continue;
                }
                let mut p = a.clone();
                p[i] -= 1;
                if let Some(v) = counts.get(&p) {
                    acc += v;
                }
            }
            if !acc.is_zero() {
                counts.insert(a.clone(), acc);
            }
            next_layer.push(a);
        }
        layer = next_layer;
    }
    Ok(RefinedTable {
        steps: steps.clone(),
        region_refined,
        total_max,
        counts,
    })
}

/// All vectors one unit above some vector of `layer`, deduplicated and sorted.
fn compositions_after(layer: &[Vec<u32>], r: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    for a in layer {
        for i in 0..r {
            let mut b = a.clone();
            b[i] += 1;
            out.push(b);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

impl RefinedTable {
    pub fn steps(&self) -> &StepSet {
        &self.steps
    }

    pub fn region_refined(&self) -> &Region {
        &self.region_refined
    }

    pub fn total_max(&self) -> usize {
        self.total_max
    }

    pub fn kinds(&self) -> usize {
        self.steps.len()
    }

    /// `f(A)`; zero outside the refined region.
    pub fn get(&self, a: &[u32]) -> Result<BigInt, WalkError> {
        let total: usize = a.iter().map(|&x| x as usize).sum();
        if a.len() != self.kinds() {
            return Err(WalkError::Usage(format!(
                "expected {} multiplicities, got {}",
                self.kinds(),
                a.len()
            )));
        }
        if total > self.total_max {
            return Err(WalkError::Usage(format!(
                "total {total} exceeds the table depth {}",
                self.total_max
            )));
        }
        Ok(self.counts.get(a).cloned().unwrap_or_else(BigInt::zero))
    }

    /// Sum of `f(A)` over `|A| = m`.
    pub fn layer_sum(&self, m: usize) -> BigInt {
        self.counts
            .iter()
            .filter(|(a, _)| a.iter().map(|&x| x as usize).sum::<usize>() == m)
            .map(|(_, v)| v)
            .sum()
    }
}

impl GridFunction for RefinedTable {
    fn arity(&self) -> usize {
        self.kinds()
    }

    fn lookup(&self, point: &[i64]) -> Lookup<'_> {
        if point.iter().any(|&x| x < 0) || !self.region_refined.contains(point) {
            return Lookup::Zero;
        }
        let total: i64 = point.iter().sum();
        if total as usize > self.total_max {
            return Lookup::Unresolved;
        }
        let key: Vec<u32> = point.iter().map(|&x| x as u32).collect();
        match self.counts.get(&key) {
            Some(v) => Lookup::Value(v),
            None => Lookup::Zero,
        }
    }
}

/// `G(n) = sum_{a=0..n} f(a, a, n-a, n-a)` for a four-kind refined table.
pub fn gessel_g(rt: &RefinedTable, n: usize) -> Result<BigInt, WalkError> {
    if rt.kinds() != 4 {
        return Err(WalkError::Usage(format!(
            "G(n) needs four step kinds, table has {}",
            rt.kinds()
        )));
    }
    if 2 * n > rt.total_max() {
        return Err(WalkError::Usage(format!(
            "G({n}) needs refined counts up to total {}, table stops at {}",
            2 * n,
            rt.total_max()
        )));
    }
    let mut acc = BigInt::zero();
    for a in 0..=n as u32 {
        let b = n as u32 - a;
        acc += rt.get(&[a, a, b, b])?;
    }
    Ok(acc)
}
