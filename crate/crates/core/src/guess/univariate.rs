use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exactmath::{Poly, Rational};
use crate::opalgebra::{walk_symbols, ShiftOperator};
use crate::walks::Sequence;

use super::{build_fit_system, solve, verify_heldout, Ansatz, Candidate, GuessError, Status, Structure, Window};

/// Fewest terms accepted for an order-`order`, degree-`degree` fit: one
/// equation per unknown, `order` terms consumed by the shifts, and a margin
/// of five.
pub fn required_terms(order: usize, degree: u32) -> usize {
    (order + 1) * (degree as usize + 1) + order + 5
}

fn complexity(op: &ShiftOperator) -> (i64, u32, usize) {
    let span = op.shift_range(0).map_or(0, |(lo, hi)| hi - lo);
    let deg = op.coefficient_degree().unwrap_or(0);
    let terms = op.terms().map(|(_, p)| p.num_terms()).sum();
    (span, deg, terms)
}

/// Fit `sum_{i<=order} p_i(n) f(n+i) = 0` on the equations indexed by
/// `fit`, then verify on `heldout`. `None` if the fit system has only the
/// trivial solution.
pub fn fit_sequence(
    seq: &Sequence,
    order: usize,
    degree: u32,
    fit: Window,
    heldout: Window,
) -> Result<Option<Candidate>, GuessError> {
    let ansatz = Ansatz::univariate(order, degree);
    let m = build_fit_system(seq, &ansatz, fit.points())?;
    let basis = solve(&m);
    let Some(operator) = basis
        .iter()
        .map(|v| ansatz.operator(v).normalize_content())
        .min_by_key(complexity)
    else {
        return Ok(None);
    };
    let mut warnings = Vec::new();
    if basis.len() > 1 {
        warnings.push(format!("nullspace has dimension {}", basis.len()));
    }
    if fit.len() < ansatz.unknowns() {
        warnings.push(format!(
            "{} fit equations for {} unknowns",
            fit.len(),
            ansatz.unknowns()
        ));
    }
    let mut c = Candidate {
        operator,
        structure: Structure::None,
        fit_window: fit,
        heldout_window: Window::default(),
        status: Status::Fitted,
        nullity: basis.len(),
        warnings,
    };
    verify_heldout(&mut c, seq, heldout)?;
    Ok(Some(c))
}

/// Fit on the earliest equations and hold out the latest quarter.
pub fn fit_univariate(
    seq: &Sequence,
    order: usize,
    degree: u32,
) -> Result<Option<Candidate>, GuessError> {
    let required = required_terms(order, degree);
    if seq.len() < required {
        return Err(GuessError::InsufficientData {
            order,
            degree,
            required,
            available: seq.len(),
        });
    }
    let equations = seq.len() - order;
    let unknowns = (order + 1) * (degree as usize + 1);
    let held = (equations / 4).max(1).min(equations - unknowns);
    let split = (equations - held) as i64;
    fit_sequence(
        seq,
        order,
        degree,
        Window::range(0, split),
        Window::range(split, equations as i64),
    )
}

/// `(offset, period)`: the first nonzero index and the gcd of the gaps
/// between nonzero terms. `None` for an identically zero sequence.
pub fn detect_period(seq: &[BigInt]) -> Option<(usize, usize)> {
    let mut nonzero = seq.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i);
    let first = nonzero.next()?;
    let period = nonzero.fold(0usize, |g, i| g.gcd(&(i - first)));
    Some((first, period.max(1)))
}

pub fn subsequence(seq: &[BigInt], offset: usize, period: usize) -> Sequence {
    Sequence(seq.iter().skip(offset).step_by(period).cloned().collect())
}

/// Rewrite an operator in `(n, N)` acting on `a(n) = f(p n)` as one in the
/// walk symbols of dimension `dim` acting on `f(m)`: `n = m/p`, `N = M^p`,
/// cleared to integer coefficients.
pub fn lift_to_time(op: &ShiftOperator, period: usize, dim: usize) -> Result<ShiftOperator, GuessError> {
    if op.vars().len() != 1 {
        return Err(GuessError::Usage("only univariate operators can be lifted".into()));
    }
    let (vars, gens) = walk_symbols(dim);
    let p = BigInt::from(period);
    let terms = op.terms().map(|(e, poly)| {
        let mut shift = vec![0; dim + 1];
        shift[0] = e[0] * period as i64;
        let lifted = Poly::from_terms(
            vars.clone(),
            poly.terms().map(|(mono, c)| {
                let j = mono.0[0];
                let mut exps = vec![0; dim + 1];
                exps[0] = j;
                let scale = Rational::from_integer(num_traits::pow(p.clone(), j as usize));
                (exps, c / scale)
            }),
        );
        (shift, lifted)
    });
    let terms: Vec<_> = terms.collect();
    Ok(ShiftOperator::from_terms(vars, gens, terms).normalize_content())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub order: usize,
    pub degree: u32,
    /// `skipped`, `none`, `refuted` or `verified`.
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub offset: usize,
    pub period: usize,
    /// Terms of the re-indexed subsequence.
    pub terms: usize,
    pub found: Option<Candidate>,
    pub refuted: Vec<Candidate>,
    pub attempts: Vec<Attempt>,
}

impl SearchReport {
    /// Whether no `(order, degree)` pair had enough data.
    pub fn all_skipped(&self) -> bool {
        self.attempts.iter().all(|a| a.outcome == "skipped")
    }
}

/// Re-index to the nonzero subsequence, then try orders `1..=max_order`
/// and degrees `0..=max_degree` in that order, stopping at the first
/// verified candidate. Pairs without enough data are skipped.
pub fn search_univariate(
    seq: &[BigInt],
    max_order: usize,
    max_degree: u32,
) -> Result<SearchReport, GuessError> {
    let (offset, period) = detect_period(seq)
        .ok_or_else(|| GuessError::Usage("sequence is identically zero".into()))?;
    let sub = subsequence(seq, offset, period);
    let mut report = SearchReport {
        offset,
        period,
        terms: sub.len(),
        found: None,
        refuted: Vec::new(),
        attempts: Vec::new(),
    };
    'outer: for order in 1..=max_order {
        for degree in 0..=max_degree {
            let mut attempt = Attempt {
                order,
                degree,
                outcome: "skipped".into(),
            };
            if sub.len() >= required_terms(order, degree) {
                match fit_univariate(&sub, order, degree)? {
                    None => attempt.outcome = "none".into(),
                    Some(c) if c.status == Status::Verified => {
                        attempt.outcome = "verified".into();
                        report.attempts.push(attempt);
                        report.found = Some(c);
                        break 'outer;
                    }
                    Some(c) => {
                        attempt.outcome = "refuted".into();
                        report.refuted.push(c);
                    }
                }
            }
            report.attempts.push(attempt);
        }
    }
    Ok(report)
}
