use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridFunction, Lookup, Region, StepSet, WalkError};

/// Default limit on resident cells (box size times resident slices).
pub const DEFAULT_CELL_BUDGET: u64 = 200_000_000;

/// Axis-aligned integer box `[lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl LatticeBox {
    /// The smallest box holding every point reachable in `m_max` steps that
    /// the region's single-variable bounds do not already exclude.
    pub fn derive(steps: &StepSet, region: &Region, m_max: usize) -> Self {
        let m = m_max as i64;
        let d = steps.dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let max_s = steps.steps().iter().map(|s| s[i]).max().unwrap();
            let min_s = steps.steps().iter().map(|s| s[i]).min().unwrap();
            let reach_lo = m * min_s.min(0);
            let h = m * max_s.max(0);
            let l = region.lower_bound(i).map_or(reach_lo, |b| b.max(reach_lo)).min(h);
            lo.push(l);
            hi.push(h);
        }
        LatticeBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn widths(&self) -> Vec<u128> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as u128)
            .collect()
    }

    pub fn cells(&self) -> u128 {
        self.widths().iter().product()
    }

    pub fn index(&self, n: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..self.dim() {
            if n[i] < self.lo[i] || n[i] > self.hi[i] {
                return None;
            }
            let w = (self.hi[i] - self.lo[i] + 1) as usize;
            idx = idx * w + (n[i] - self.lo[i]) as usize;
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut n = vec![0; d];
        for i in (0..d).rev() {
            let w = (self.hi[i] - self.lo[i] + 1) as usize;
            n[i] = self.lo[i] + (idx % w) as i64;
            idx /= w;
        }
        n
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| format!("[{l},{h}]"))
            .collect();
        parts.join("x")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retention {
    /// Keep every time slice (required for operator fitting and certification).
    All,
    /// Keep only the last slice and the return sequence.
    Latest,
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    pub retention: Retention,
    pub cell_budget: u64,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            retention: Retention::All,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

/// Exact counts `F(m; n)` of region-restricted walks from the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkTable {
    steps: StepSet,
    region: Region,
    m_max: usize,
    bbox: LatticeBox,
    slices: Vec<Option<Vec<BigInt>>>,
    returns: Vec<BigInt>,
}

pub fn enumerate(steps: &StepSet, region: &Region, m_max: usize) -> Result<WalkTable, WalkError> {
    enumerate_with(steps, region, m_max, &EnumerateOptions::default())
}

pub fn enumerate_with(
    steps: &StepSet,
    region: &Region,
    m_max: usize,
    opts: &EnumerateOptions,
) -> Result<WalkTable, WalkError> {
    if steps.dim() != region.dim() {
        return Err(WalkError::Usage(format!(
            "steps are {}-dimensional but the region is {}-dimensional",
            steps.dim(),
            region.dim()
        )));
    }
    let bbox = LatticeBox::derive(steps, region, m_max);
    let cells = bbox.cells();
    let resident = match opts.retention {
        Retention::All => m_max as u128 + 1,
        Retention::Latest => 2,
    };
    if cells.saturating_mul(resident) > opts.cell_budget as u128 {
        return Err(WalkError::Resource {
            dims: bbox.describe(),
            cells: cells.saturating_mul(resident),
            budget: opts.cell_budget,
        });
    }
    let cells = cells as usize;

    // Predecessor indices for in-region cells; None marks out-of-region cells.
    let k = steps.len();
    let preds: Vec<Option<Vec<usize>>> = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let n = bbox.point(idx);
            if !region.contains(&n) {
                return None;
            }
            let mut p = Vec::with_capacity(k);
            for s in steps.steps() {
                let prev: Vec<i64> = n.iter().zip(s).map(|(a, b)| a - b).collect();
                // Predecessors outside the box are unreachable, those outside
                // the region hold zero.
                if region.contains(&prev) {
                    if let Some(j) = bbox.index(&prev) {
                        p.push(j);
                    }
                }
            }
            Some(p)
        })
        .collect();

    let origin = bbox
        .index(&vec![0; steps.dim()])
        .expect("origin lies in the box");
    let mut current = vec![BigInt::zero(); cells];
    current[origin] = BigInt::one();
    let mut returns = vec![BigInt::one()];
    let mut slices = Vec::with_capacity(m_max + 1);
    for _ in 1..=m_max {
        let next: Vec<BigInt> = preds
            .par_iter()
            .map(|p| match p {
                None => BigInt::zero(),
                Some(p) => {
                    let mut acc = BigInt::zero();
                    for &j in p {
                        if !current[j].is_zero() {
                            acc += &current[j];
                        }
                    }
                    acc
                }
            })
            .collect();
        returns.push(next[origin].clone());
        let prev = std::mem::replace(&mut current, next);
        slices.push(match opts.retention {
            Retention::All => Some(prev),
            Retention::Latest => None,
        });
    }
    slices.push(Some(current));
    Ok(WalkTable {
        steps: steps.clone(),
        region: region.clone(),
        m_max,
        bbox,
        slices,
        returns,
    })
}

/// `|S|^m`, the number of unrestricted walks of length `m`.
pub fn total_count(steps: &StepSet, m: usize) -> BigInt {
    num_traits::pow(BigInt::from(steps.len()), m)
}

impl WalkTable {
    pub fn steps(&self) -> &StepSet {
        &self.steps
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn bbox(&self) -> &LatticeBox {
        &self.bbox
    }

    pub fn dim(&self) -> usize {
        self.steps.dim()
    }

    pub fn is_retained(&self, m: usize) -> bool {
        self.slices.get(m).is_some_and(Option::is_some)
    }

    pub fn slice(&self, m: usize) -> Option<&[BigInt]> {
        self.slices.get(m).and_then(|s| s.as_deref())
    }

    /// `F(m; n)`, zero outside the region or the reachable box; `None` if
    /// the slice was not retained or `m > m_max`.
    pub fn get(&self, m: usize, n: &[i64]) -> Option<BigInt> {
        let slice = self.slice(m)?;
        Some(match self.bbox.index(n) {
            Some(i) if self.region.contains(n) => slice[i].clone(),
            _ => BigInt::zero(),
        })
    }

    /// `F(m; origin)` for `m = 0..=m_max`.
    pub fn return_sequence(&self) -> Vec<BigInt> {
        self.returns.clone()
    }

    /// Every retained in-region cell at time `m`, as (point, value).
    pub fn cells(&self, m: usize) -> Vec<(Vec<i64>, BigInt)> {
        let Some(slice) = self.slice(m) else {
            return Vec::new();
        };
        slice
            .iter()
            .enumerate()
            .map(|(i, v)| (self.bbox.point(i), v))
            .filter(|(n, _)| self.region.contains(n))
            .map(|(n, v)| (n, v.clone()))
            .collect()
    }

    pub fn to_json(&self) -> TableJson {
        TableJson {
            steps: self.steps.to_string(),
            region: self.region.to_string(),
            m_max: self.m_max,
            bbox: self.bbox.clone(),
            returns: self.returns.iter().map(BigInt::to_string).collect(),
            slices: self
                .slices
                .iter()
                .map(|s| s.as_ref().map(|v| v.iter().map(BigInt::to_string).collect()))
                .collect(),
        }
    }

    pub fn from_json(json: &TableJson) -> Result<Self, WalkError> {
        let steps = StepSet::parse(&json.steps)?;
        let region = Region::parse(&json.region, steps.dim())?;
        let bbox = LatticeBox::derive(&steps, &region, json.m_max);
        if bbox != json.bbox {
            return Err(WalkError::Usage("stored box does not match the box policy".into()));
        }
        let parse = |s: &String| -> Result<BigInt, WalkError> {
            s.parse()
                .map_err(|_| WalkError::Usage(format!("invalid count '{s}'")))
        };
        let cells = bbox.cells() as usize;
        let mut slices = Vec::with_capacity(json.slices.len());
        for s in &json.slices {
            slices.push(match s {
                None => None,
                Some(v) if v.len() == cells => Some(v.iter().map(parse).collect::<Result<_, _>>()?),
                Some(v) => {
                    return Err(WalkError::Usage(format!(
                        "slice has {} cells, expected {cells}",
                        v.len()
                    )))
                }
            });
        }
        if slices.len() != json.m_max + 1 || json.returns.len() != json.m_max + 1 {
            return Err(WalkError::Usage("slice count does not match m_max".into()));
        }
        Ok(WalkTable {
            steps,
            region,
            m_max: json.m_max,
            bbox,
            slices,
            returns: json.returns.iter().map(parse).collect::<Result<_, _>>()?,
        })
    }
}

/// Points are `(m, n_1, ..., n_d)`.
impl GridFunction for WalkTable {
    fn arity(&self) -> usize {
        self.dim() + 1
    }

    fn lookup(&self, point: &[i64]) -> Lookup<'_> {
        let m = point[0];
        let n = &point[1..];
        if m < 0 || !self.region.contains(n) {
            return Lookup::Zero;
        }
        if m as usize > self.m_max {
            return Lookup::Unresolved;
        }
        let Some(slice) = self.slice(m as usize) else {
            return Lookup::Unresolved;
        };
        match self.bbox.index(n) {
            Some(i) => Lookup::Value(&slice[i]),
            None => Lookup::Zero,
        }
    }
}

/// Persisted form; counts are decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableJson {
    pub steps: String,
    pub region: String,
    pub m_max: usize,
    #[serde(rename = "box")]
    pub bbox: LatticeBox,
    pub returns: Vec<String>,
    pub slices: Vec<Option<Vec<String>>>,
}
