//! Restricted lattice walks: step sets, linear-inequality regions, exact
//! enumeration by dynamic programming, and refined counting by step kind.

mod grid;
mod refined;
mod table;

use std::fmt;

use thiserror::Error;

pub use grid::{GridFunction, Lookup, Sequence};
pub use refined::{gessel_g, refine, refined_enumerate, refined_enumerate_with_budget, RefinedTable};
pub use table::{
    enumerate, enumerate_with, total_count, EnumerateOptions, LatticeBox, Retention, TableJson,
    WalkTable, DEFAULT_CELL_BUDGET,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid step set: {0}")]
    InvalidSteps(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("box {dims} needs {cells} cells, over the budget of {budget}")]
    Resource { dims: String, cells: u128, budget: u64 },
    #[error("{0}")]
    Usage(String),
}

/// A finite set of distinct integer step vectors of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepSet {
    dim: usize,
    steps: Vec<Vec<i64>>,
}

impl StepSet {
    pub fn new(steps: Vec<Vec<i64>>) -> Result<Self, WalkError> {
        let Some(first) = steps.first() else {
            return Err(WalkError::InvalidSteps("empty step set".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(WalkError::InvalidSteps("steps must have dimension >= 1".into()));
        }
        for (i, s) in steps.iter().enumerate() {
            if s.len() != dim {
                return Err(WalkError::InvalidSteps(format!(
                    "step {i} has length {}, expected {dim}",
                    s.len()
                )));
            }
            if steps[..i].contains(s) {
                return Err(WalkError::InvalidSteps(format!("duplicate step {s:?}")));
            }
        }
        Ok(StepSet { dim, steps })
    }

    /// Parse `"-1,0;0,-1;1,1"`.
    pub fn parse(text: &str) -> Result<Self, WalkError> {
        let mut steps = Vec::new();
        let mut offset = 0;
        for chunk in text.split(';') {
            let mut v = Vec::new();
            let mut inner = offset;
            for part in chunk.split(',') {
                let lead = part.len() - part.trim_start().len();
                let n: i64 = part.trim().parse().map_err(|_| WalkError::Parse {
                    pos: inner + lead,
                    msg: format!("expected integer, found '{}'", part.trim()),
                })?;
                v.push(n);
                inner += part.len() + 1;
            }
            steps.push(v);
            offset += chunk.len() + 1;
        }
        StepSet::new(steps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[Vec<i64>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for StepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| s.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// `coeffs · n >= bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub bound: i64,
}

impl Constraint {
    pub fn new(coeffs: Vec<i64>, bound: i64) -> Self {
        Constraint { coeffs, bound }
    }

    pub fn holds(&self, n: &[i64]) -> bool {
        let s: i64 = self.coeffs.iter().zip(n).map(|(c, x)| c * x).sum();
        s >= self.bound
    }
}

/// Conjunction of integer linear inequalities; always contains the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    dim: usize,
    constraints: Vec<Constraint>,
}

impl Region {
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self, WalkError> {
        for c in &constraints {
            if c.coeffs.len() != dim {
                return Err(WalkError::InvalidRegion(format!(
                    "constraint has {} coefficients, expected {dim}",
                    c.coeffs.len()
                )));
            }
            if c.bound > 0 {
                return Err(WalkError::InvalidRegion(format!(
                    "origin violates {}",
                    fmt_constraint(c)
                )));
            }
        }
        Ok(Region { dim, constraints })
    }

    pub fn unrestricted(dim: usize) -> Self {
        Region {
            dim,
            constraints: Vec::new(),
        }
    }

    /// `n_i >= 0` for every coordinate.
    pub fn orthant(dim: usize) -> Self {
        let constraints = (0..dim)
            .map(|i| {
                let mut c = vec![0; dim];
                c[i] = 1;
                Constraint::new(c, 0)
            })
            .collect();
        Region { dim, constraints }
    }

    /// Weyl chamber `n_1 >= n_2 >= ... >= n_d >= 0`.
    pub fn ballot(dim: usize) -> Self {
        let mut constraints = Vec::new();
        for i in 0..dim {
            let mut c = vec![0; dim];
            c[i] = 1;
            if i + 1 < dim {
                c[i + 1] = -1;
            }
            constraints.push(Constraint::new(c, 0));
        }
        Region { dim, constraints }
    }

    /// Presets `quadrant`, `halfline`, `octant3d`, `ballot:d`, `none`, or a
    /// `;`-separated list of atoms `c1,...,cd>=b`.
    pub fn parse(text: &str, dim: usize) -> Result<Self, WalkError> {
        let t = text.trim();
        let preset = |d: usize, r: Region| {
            if d == dim {
                Ok(r)
            } else {
                Err(WalkError::InvalidRegion(format!(
                    "preset '{t}' is {d}-dimensional but the steps are {dim}-dimensional"
                )))
            }
        };
        match t {
            "quadrant" => return preset(2, Region::orthant(2)),
            "halfline" => return preset(1, Region::orthant(1)),
            "octant3d" => return preset(3, Region::orthant(3)),
            "none" | "" => return Ok(Region::unrestricted(dim)),
            _ => {}
        }
        if let Some(d) = t.strip_prefix("ballot:") {
            let d: usize = d.parse().map_err(|_| WalkError::Parse {
                pos: 7,
                msg: "expected dimension after 'ballot:'".into(),
            })?;
            return preset(d, Region::ballot(d));
        }
        let mut constraints = Vec::new();
        let mut offset = 0;
        for atom in text.split(';') {
            let Some((lhs, rhs)) = atom.split_once(">=") else {
                return Err(WalkError::Parse {
                    pos: offset,
                    msg: format!("expected 'c1,...,cd>=b', found '{}'", atom.trim()),
                });
            };
            let mut coeffs = Vec::new();
            let mut inner = offset;
            for part in lhs.split(',') {
                coeffs.push(part.trim().parse().map_err(|_| WalkError::Parse {
                    pos: inner,
                    msg: format!("expected integer coefficient, found '{}'", part.trim()),
                })?);
                inner += part.len() + 1;
            }
            let bound = rhs.trim().parse().map_err(|_| WalkError::Parse {
                pos: offset + lhs.len() + 2,
                msg: format!("expected integer bound, found '{}'", rhs.trim()),
            })?;
            constraints.push(Constraint::new(coeffs, bound));
            offset += atom.len() + 1;
        }
        Region::new(dim, constraints)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds(n))
    }

    pub fn with_constraint(&self, c: Constraint) -> Result<Region, WalkError> {
        let mut cs = self.constraints.clone();
        cs.push(c);
        Region::new(self.dim, cs)
    }

    /// Lower bound on coordinate `i` implied by single-variable constraints.
    pub fn lower_bound(&self, i: usize) -> Option<i64> {
        self.constraints
            .iter()
            .filter(|c| c.coeffs[i] > 0 && c.coeffs.iter().enumerate().all(|(j, &x)| j == i || x == 0))
            .map(|c| div_ceil(c.bound, c.coeffs[i]))
            .max()
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    let q = a.div_euclid(b);
    if q * b == a {
        q
    } else {
        q + 1
    }
}

fn fmt_constraint(c: &Constraint) -> String {
    let cs: Vec<String> = c.coeffs.iter().map(i64::to_string).collect();
    format!("{}>={}", cs.join(","), c.bound)
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constraints.is_empty() {
            return write!(f, "none");
        }
        let atoms: Vec<String> = self.constraints.iter().map(fmt_constraint).collect();
        write!(f, "{}", atoms.join(";"))
    }
}
