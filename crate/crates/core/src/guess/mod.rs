//! Fitting annihilating operators to enumerated data: univariate
//! recurrences for return sequences and the structured quasi ansatz over
//! full walk tables. Every candidate is checked on held-out data.

mod ansatz;
mod quasi;
mod univariate;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{random_prime_62, RatMatrix, Rational};
use crate::opalgebra::{apply_resolvable, OpError, ShiftOperator};
use crate::walks::GridFunction;

pub use ansatz::{build_fit_system, Ansatz, DegreeBound, Structure};
pub use quasi::{fit_quasi, quasi_windows, search_quasi, specialize};
pub use univariate::{
    detect_period, fit_sequence, fit_univariate, lift_to_time, required_terms, search_univariate,
    subsequence, Attempt, SearchReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuessError {
    #[error("{0}")]
    Usage(String),
    #[error(
        "insufficient data: order {order}, degree {degree} needs at least {required} terms, have {available}"
    )]
    InsufficientData {
        order: usize,
        degree: u32,
        required: usize,
        available: usize,
    },
    #[error(transparent)]
    Op(#[from] OpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Fitted,
    Verified,
    Refuted,
}

/// Index points at which an operator is evaluated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Window(pub Vec<Vec<i64>>);

impl Window {
    pub fn range(lo: i64, hi_exclusive: i64) -> Self {
        Window((lo..hi_exclusive).map(|n| vec![n]).collect())
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_disjoint(&self, other: &Window) -> bool {
        let mine: std::collections::HashSet<&Vec<i64>> = self.0.iter().collect();
        other.0.iter().all(|p| !mine.contains(p))
    }

    pub fn summary(&self) -> WindowSummary {
        WindowSummary {
            size: self.0.len(),
            first: self.0.first().cloned(),
            last: self.0.last().cloned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub size: usize,
    pub first: Option<Vec<i64>>,
    pub last: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub operator: ShiftOperator,
    pub structure: Structure,
    pub fit_window: Window,
    pub heldout_window: Window,
    pub status: Status,
    /// Dimension of the nullspace the operator was taken from.
    pub nullity: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateJson {
    pub operator: String,
    pub vars: Vec<String>,
    pub gens: Vec<String>,
    pub structure: Structure,
    pub fit_window: WindowSummary,
    pub heldout_window: WindowSummary,
    pub status: Status,
    pub nullity: usize,
    pub warnings: Vec<String>,
}

impl Candidate {
    pub fn to_json(&self) -> CandidateJson {
        CandidateJson {
            operator: self.operator.to_string(),
            vars: self.operator.vars().to_vec(),
            gens: self.operator.gens().to_vec(),
            structure: self.structure,
            fit_window: self.fit_window.summary(),
            heldout_window: self.heldout_window.summary(),
            status: self.status,
            nullity: self.nullity,
            warnings: self.warnings.clone(),
        }
    }
}

const RANK_SEED: u64 = 0x6775_6573;

/// Nullspace basis, short-circuiting on full column rank modulo a prime
/// (modular rank never exceeds the rational rank).
pub(crate) fn solve(m: &RatMatrix) -> Vec<Vec<Rational>> {
    if m.cols() == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RANK_SEED);
    let p = random_prime_62(&mut rng);
    if m.rank_mod_prime(p).is_ok_and(|r| r == m.cols()) {
        return Vec::new();
    }
    m.nullspace()
}

/// Evaluate the candidate on its fit window and on `window`; VERIFIED iff
/// every residual is zero.
pub fn verify_heldout<F: GridFunction + ?Sized>(
    c: &mut Candidate,
    f: &F,
    window: Window,
) -> Result<Status, GuessError> {
    if !c.fit_window.is_disjoint(&window) {
        c.warnings.push("held-out window overlaps the fit window".into());
    }
    let fit = apply_resolvable(&c.operator, f, c.fit_window.points())?;
    let held = apply_resolvable(&c.operator, f, window.points())?;
    if held.unresolved > 0 {
        c.warnings.push(format!(
            "{} held-out points skipped: references outside the data",
            held.unresolved
        ));
    }
    if held.evaluated == 0 {
        c.warnings.push("held-out window is empty; verification is vacuous".into());
    }
    c.status = if fit.is_zero() && held.is_zero() {
        Status::Verified
    } else {
        if let Some(r) = held.first_nonzero().or(fit.first_nonzero()) {
            c.warnings.push(format!("nonzero residual {} at {:?}", r.value, r.point));
        }
        Status::Refuted
    };
    c.heldout_window = window;
    Ok(c.status)
}
