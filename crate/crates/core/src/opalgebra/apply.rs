use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactmath::{format_rational, Rational};
use crate::walks::{GridFunction, Lookup, WalkTable};

use super::{OpError, ShiftOperator};

/// Operator with coefficients scaled to integers, ready for evaluation.
struct Compiled {
    terms: Vec<(Vec<i64>, Vec<(Vec<u32>, BigInt)>)>,
    denom: BigInt,
}

impl Compiled {
    fn new(op: &ShiftOperator) -> Self {
        let denom = op
            .terms()
            .fold(BigInt::one(), |l, (_, p)| l.lcm(&p.content_parts().0));
        let terms = op
            .terms()
            .map(|(e, p)| (e.clone(), p.integer_terms(&denom)))
            .collect();
        Compiled { terms, denom }
    }

    /// `None` when some reference is unresolved; otherwise the residual
    /// times `denom`.
    fn eval<F: GridFunction + ?Sized>(&self, f: &F, point: &[i64]) -> Result<BigInt, Vec<i64>> {
        let mut acc = BigInt::zero();
        let mut shifted = vec![0i64; point.len()];
        for (e, coeffs) in &self.terms {
            for ((s, p), x) in shifted.iter_mut().zip(point).zip(e) {
                *s = p + x;
            }
            let v = match f.lookup(&shifted) {
                Lookup::Value(v) if !v.is_zero() => v,
                Lookup::Value(_) | Lookup::Zero => continue,
                Lookup::Unresolved => return Err(shifted),
            };
            let mut c = BigInt::zero();
            for (mono, k) in coeffs {
                let mut t = k.clone();
                for (&x, &a) in point.iter().zip(mono) {
                    if a > 0 {
                        t *= num_traits::pow(BigInt::from(x), a as usize);
                    }
                }
                c += t;
            }
            if !c.is_zero() {
                acc += c * v;
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub point: Vec<i64>,
    /// Exact residual as `"num/den"`.
    pub value: String,
}

/// Outcome of evaluating an operator at a set of points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub evaluated: usize,
    /// Points skipped because some reference was not resolvable.
    pub unresolved: usize,
    pub nonzero: Vec<Residual>,
}

impl ResidualReport {
    pub fn is_zero(&self) -> bool {
        self.nonzero.is_empty()
    }

    pub fn first_nonzero(&self) -> Option<&Residual> {
        self.nonzero.first()
    }
}

fn run<F: GridFunction + ?Sized>(
    op: &ShiftOperator,
    f: &F,
    points: &[Vec<i64>],
    strict: bool,
) -> Result<ResidualReport, OpError> {
    if op.vars().len() != f.arity() {
        return Err(OpError::Usage(format!(
            "operator has {} index variables, table has {}",
            op.vars().len(),
            f.arity()
        )));
    }
    let compiled = Compiled::new(op);
    let results: Vec<Result<BigInt, Vec<i64>>> =
        points.par_iter().map(|p| compiled.eval(f, p)).collect();
    let mut report = ResidualReport::default();
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok(v) => {
                report.evaluated += 1;
                if !v.is_zero() {
                    report.nonzero.push(Residual {
                        point: p.clone(),
                        value: format_rational(&Rational::new(v, compiled.denom.clone())),
                    });
                }
            }
            Err(cell) if strict => {
                return Err(OpError::Unresolved { point: p.clone(), cell });
            }
            Err(_) => report.unresolved += 1,
        }
    }
    Ok(report)
}

/// Evaluate `sum p(v) F(v + e)` at every point, with `F` zero-extended.
/// Any reference the table cannot resolve is an error naming the cell.
pub fn apply<F: GridFunction + ?Sized>(
    op: &ShiftOperator,
    f: &F,
    points: &[Vec<i64>],
) -> Result<ResidualReport, OpError> {
    run(op, f, points, true)
}

/// Like [`apply`], but points with unresolvable references are skipped and
/// counted instead.
pub fn apply_resolvable<F: GridFunction + ?Sized>(
    op: &ShiftOperator,
    f: &F,
    points: &[Vec<i64>],
) -> Result<ResidualReport, OpError> {
    run(op, f, points, false)
}

/// Points `(m, n)` with `m` in `times` and `n` an in-region box cell.
pub fn region_points(t: &WalkTable, times: std::ops::RangeInclusive<i64>) -> Vec<Vec<i64>> {
    let cells = t.bbox().cells() as usize;
    let spatial: Vec<Vec<i64>> = (0..cells)
        .map(|i| t.bbox().point(i))
        .filter(|n| t.region().contains(n))
        .collect();
    let mut out = Vec::with_capacity(spatial.len() * times.clone().count());
    for m in times {
        for n in &spatial {
            let mut p = Vec::with_capacity(n.len() + 1);
            p.push(m);
            p.extend(n);
            out.push(p);
        }
    }
    out
}

pub fn origin_points(dim: usize, times: std::ops::RangeInclusive<i64>) -> Vec<Vec<i64>> {
    times
        .map(|m| {
            let mut p = vec![0; dim + 1];
            p[0] = m;
            p
        })
        .collect()
}

/// Points `(m, n)` with `n` outside the region but one unit step away from
/// an in-region box cell.
pub fn boundary_points(t: &WalkTable, times: std::ops::RangeInclusive<i64>) -> Vec<Vec<i64>> {
    let d = t.dim();
    let cells = t.bbox().cells() as usize;
    let mut spatial = std::collections::BTreeSet::new();
    for i in 0..cells {
        let n = t.bbox().point(i);
        if !t.region().contains(&n) {
            continue;
        }
        for k in 0..d {
            for delta in [-1, 1] {
                let mut x = n.clone();
                x[k] += delta;
                if !t.region().contains(&x) {
                    spatial.insert(x);
                }
            }
        }
    }
    let mut out = Vec::new();
    for m in times {
        for n in &spatial {
            let mut p = vec![m];
            p.extend(n);
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::var_list;
    use crate::opalgebra::walk_symbols;
    use crate::walks::{enumerate, Region, Sequence, StepSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kreweras_table(m: usize) -> WalkTable {
        enumerate(&StepSet::parse("-1,0;0,-1;1,1").unwrap(), &Region::orthant(2), m).unwrap()
    }

    #[test]
    fn transfer_annihilates_on_region() {
        let t = kreweras_table(10);
        let q = ShiftOperator::transfer(t.steps());
        let rep = apply(&q, &t, &region_points(&t, 1..=10)).unwrap();
        assert!(rep.is_zero());
        assert!(rep.evaluated > 100);
    }

    #[test]
    fn transfer_gives_delta_at_time_zero() {
        let t = kreweras_table(3);
        let q = ShiftOperator::transfer(t.steps());
        let rep = apply(&q, &t, &[vec![0, 0, 0]]).unwrap();
        assert_eq!(rep.nonzero, vec![Residual { point: vec![0, 0, 0], value: "1".into() }]);
        // Off-region residual just below the boundary.
        let rep = apply(&q, &t, &[vec![3, -1, 1]]).unwrap();
        assert!(!rep.is_zero());
    }

    #[test]
    fn zero_operator_has_no_residual() {
        let t = kreweras_table(3);
        let (v, g) = walk_symbols(2);
        let z = ShiftOperator::zero(v, g);
        assert!(apply(&z, &t, &region_points(&t, 0..=3)).unwrap().is_zero());
    }

    #[test]
    fn unresolved_reference_is_an_error() {
        let t = kreweras_table(3);
        let (v, g) = walk_symbols(2);
        let op = ShiftOperator::parse("M^2", v, g).unwrap();
        match apply(&op, &t, &[vec![2, 0, 0]]) {
            Err(OpError::Unresolved { cell, .. }) => assert_eq!(cell, vec![4, 0, 0]),
            other => panic!("expected unresolved error, got {other:?}"),
        }
        let rep = apply_resolvable(&op, &t, &[vec![1, 0, 0], vec![2, 0, 0]]).unwrap();
        assert_eq!((rep.evaluated, rep.unresolved), (1, 1));
    }

    #[test]
    fn product_with_transfer_matches_pointwise_application() {
        // Q * (n1 N1) applied to F equals Q applied to the function (n1 N1) F.
        let t = kreweras_table(12);
        let (v, g) = walk_symbols(2);
        let q = ShiftOperator::transfer(t.steps());
        let p = ShiftOperator::parse("n1*N1", v, g).unwrap();
        let qp = q.checked_mul(&p).unwrap();
        let pf = |m: i64, a: i64, b: i64| -> BigInt {
            // (n1 N1 F)(m, a, b) = a * F(m, a+1, b) with zero extension.
            t.lookup(&[m, a + 1, b]).to_value().unwrap() * a
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (m, a, b) = (rng.gen_range(1..10), rng.gen_range(0..8), rng.gen_range(0..8));
            let direct = pf(m, a, b) - pf(m - 1, a + 1, b) - pf(m - 1, a, b + 1) - pf(m - 1, a - 1, b - 1);
            let rep = apply(&qp, &t, &[vec![m, a, b]]).unwrap();
            let got = rep.first_nonzero().map_or("0".to_string(), |r| r.value.clone());
            assert_eq!(got, direct.to_string(), "at ({m},{a},{b})");
        }
    }

    #[test]
    fn sequences_as_grid_functions() {
        let cat = Sequence::from_i64(&[1, 1, 2, 5, 14, 42, 132]);
        let op = ShiftOperator::parse("(n+2)*N - (4*n+2)", var_list(&["n"]), var_list(&["N"])).unwrap();
        let pts: Vec<Vec<i64>> = (0..6).map(|n| vec![n]).collect();
        assert!(apply(&op, &cat, &pts).unwrap().is_zero());
    }

    #[test]
    fn boundary_points_are_outside() {
        let t = kreweras_table(2);
        let b = boundary_points(&t, 1..=1);
        assert!(b.contains(&vec![1, -1, 0]) && b.contains(&vec![1, 0, -1]));
        assert!(b.iter().all(|p| !t.region().contains(&p[1..])));
    }
}
