use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactmath::{var_list, Monomial, Poly, RatMatrix, Rational};
use crate::opalgebra::{walk_symbols, ShiftOperator};
use crate::walks::{GridFunction, Lookup};

use super::GuessError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeBound {
    Total(u32),
    PerVariable(Vec<u32>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    None,
    /// `R = R0(n, N) + (terms whose coefficients vanish when every spatial
    /// index is zero)`. Index 0 is time; the others are spatial.
    Quasi,
}

/// Shape of the operator being fitted: which shifts may appear and which
/// coefficient monomials each shift may carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ansatz {
    vars: Arc<Vec<String>>,
    gens: Arc<Vec<String>>,
    support: Vec<Vec<i64>>,
    degree: DegreeBound,
    structure: Structure,
}

fn monomials_total(k: usize, d: u32) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in monomials_total(k - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn monomials_box(bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|m: Vec<u32>| {
                (0..=b).map(move |x| {
                    let mut m = m.clone();
                    m.push(x);
                    m
                })
            })
            .collect();
    }
    out
}

fn is_spatially_trivial(v: &[impl PartialEq + Default]) -> bool {
    v.iter().skip(1).all(|x| *x == Default::default())
}

impl Ansatz {
    pub fn new(
        vars: Arc<Vec<String>>,
        gens: Arc<Vec<String>>,
        support: Vec<Vec<i64>>,
        degree: DegreeBound,
        structure: Structure,
    ) -> Result<Self, GuessError> {
        let k = vars.len();
        if gens.len() != k {
            return Err(GuessError::Usage("one generator per index variable".into()));
        }
        if support.is_empty() {
            return Err(GuessError::Usage("ansatz support is empty".into()));
        }
        if let Some(e) = support.iter().find(|e| e.len() != k) {
            return Err(GuessError::Usage(format!("shift {e:?} has the wrong length")));
        }
        let mut sorted = support.clone();
        sorted.sort();
        sorted.dedup();
        if let DegreeBound::PerVariable(b) = &degree {
            if b.len() != k {
                return Err(GuessError::Usage(format!(
                    "{} degree bounds for {k} index variables",
                    b.len()
                )));
            }
        }
        if structure == Structure::Quasi {
            if k < 2 {
                return Err(GuessError::Usage("quasi ansatz needs spatial indices".into()));
            }
            if sorted.iter().flatten().any(|&x| x < 0) {
                return Err(GuessError::Usage("quasi ansatz exponents must be nonnegative".into()));
            }
            if !sorted.iter().any(|e| is_spatially_trivial(e)) {
                return Err(GuessError::Usage(
                    "quasi ansatz needs at least one pure time shift".into(),
                ));
            }
        }
        Ok(Ansatz {
            vars,
            gens,
            support: sorted,
            degree,
            structure,
        })
    }

    /// `sum_{i=0..order} p_i(n) N^i` with `deg p_i <= degree`.
    pub fn univariate(order: usize, degree: u32) -> Self {
        let support = (0..=order as i64).map(|i| vec![i]).collect();
        Ansatz::new(
            var_list(&["n"]),
            var_list(&["N"]),
            support,
            DegreeBound::Total(degree),
            Structure::None,
        )
        .expect("valid univariate ansatz")
    }

    /// Quasi ansatz over walk symbols of dimension `dim`: every shift with
    /// exponents in `0..=shift_max`, coefficients of total degree at most
    /// `degree`.
    pub fn quasi(dim: usize, shift_max: u32, degree: u32) -> Result<Self, GuessError> {
        let (vars, gens) = walk_symbols(dim);
        let support = monomials_box(&vec![shift_max; dim + 1])
            .into_iter()
            .map(|e| e.into_iter().map(i64::from).collect())
            .collect();
        Ansatz::new(vars, gens, support, DegreeBound::Total(degree), Structure::Quasi)
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn gens(&self) -> &Arc<Vec<String>> {
        &self.gens
    }

    pub fn support(&self) -> &[Vec<i64>] {
        &self.support
    }

    pub fn degree(&self) -> &DegreeBound {
        &self.degree
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    fn monomials(&self) -> Vec<Vec<u32>> {
        let mut ms = match &self.degree {
            DegreeBound::Total(d) => monomials_total(self.vars.len(), *d),
            DegreeBound::PerVariable(b) => monomials_box(b),
        };
        ms.sort_by(|a, b| Monomial(a.clone()).cmp(&Monomial(b.clone())));
        ms
    }

    fn allowed(&self, shift: &[i64], mono: &[u32]) -> bool {
        match self.structure {
            Structure::None => true,
            Structure::Quasi => is_spatially_trivial(shift) || !is_spatially_trivial(mono),
        }
    }

    /// Unknowns `(shift, monomial)`, ordered by shift and then monomial.
    pub fn columns(&self) -> Vec<(Vec<i64>, Vec<u32>)> {
        let monos = self.monomials();
        let mut out = Vec::new();
        for e in &self.support {
            for m in &monos {
                if self.allowed(e, m) {
                    out.push((e.clone(), m.clone()));
                }
            }
        }
        out
    }

    pub fn unknowns(&self) -> usize {
        self.columns().len()
    }

    /// Largest exponent of generator `k` in the support.
    pub fn max_shift(&self, k: usize) -> i64 {
        self.support.iter().map(|e| e[k]).max().unwrap_or(0)
    }

    pub fn min_shift(&self, k: usize) -> i64 {
        self.support.iter().map(|e| e[k]).min().unwrap_or(0)
    }

    /// Operator whose coefficients are the entries of `v` in column order.
    pub fn operator(&self, v: &[Rational]) -> ShiftOperator {
        let cols = self.columns();
        assert_eq!(cols.len(), v.len());
        let mut grouped: Vec<(Vec<i64>, Vec<(Vec<u32>, Rational)>)> = Vec::new();
        for ((e, m), c) in cols.into_iter().zip(v) {
            if c.is_zero() {
                continue;
            }
            match grouped.last_mut() {
                Some((last, terms)) if *last == e => terms.push((m, c.clone())),
                _ => grouped.push((e, vec![(m, c.clone())])),
            }
        }
        ShiftOperator::from_terms(
            self.vars.clone(),
            self.gens.clone(),
            grouped
                .into_iter()
                .map(|(e, ts)| (e, Poly::from_terms(self.vars.clone(), ts))),
        )
    }

    /// Whether `v` has a nonzero entry in a pure-time, pure-`n` column.
    pub(crate) fn has_pure_part(&self, v: &[Rational]) -> bool {
        self.columns()
            .iter()
            .zip(v)
            .any(|((e, m), c)| !c.is_zero() && is_spatially_trivial(e) && is_spatially_trivial(m))
    }
}

fn mono_value(mono: &[u32], point: &[i64]) -> BigInt {
    let mut t = BigInt::from(1);
    for (&a, &x) in mono.iter().zip(point) {
        if a > 0 {
            t *= num_traits::pow(BigInt::from(x), a as usize);
        }
    }
    t
}

/// One row per window point and one column per unknown; entries are the
/// monomial value at the point times the function at the shifted point.
pub fn build_fit_system<F: GridFunction + ?Sized>(
    f: &F,
    ansatz: &Ansatz,
    window: &[Vec<i64>],
) -> Result<RatMatrix, GuessError> {
    if f.arity() != ansatz.vars.len() {
        return Err(GuessError::Usage(format!(
            "ansatz has {} index variables, data has {}",
            ansatz.vars.len(),
            f.arity()
        )));
    }
    let cols = ansatz.columns();
    let rows: Result<Vec<Vec<Rational>>, GuessError> = window
        .par_iter()
        .map(|p| {
            let mut shifted = vec![0; p.len()];
            let mut row = Vec::with_capacity(cols.len());
            let mut cached: Option<(&Vec<i64>, BigInt)> = None;
            for (e, m) in &cols {
                let value = match &cached {
                    Some((ce, v)) if *ce == e => v.clone(),
                    _ => {
                        for ((s, x), d) in shifted.iter_mut().zip(p).zip(e) {
                            *s = x + d;
                        }
                        let v = match f.lookup(&shifted) {
                            Lookup::Value(v) => v.clone(),
                            Lookup::Zero => BigInt::zero(),
                            Lookup::Unresolved => {
                                return Err(GuessError::Usage(format!(
                                    "window point {p:?} needs {shifted:?}, which the data does not determine"
                                )))
                            }
                        };
                        cached = Some((e, v.clone()));
                        v
                    }
                };
                let entry = if value.is_zero() {
                    BigInt::zero()
                } else {
                    mono_value(m, p) * value
                };
                row.push(Rational::from_integer(entry));
            }
            Ok(row)
        })
        .collect();
    Ok(RatMatrix::from_rows(cols.len(), rows?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::Sequence;

    #[test]
    fn univariate_columns() {
        let a = Ansatz::univariate(1, 1);
        assert_eq!(
            a.columns(),
            vec![(vec![0], vec![0]), (vec![0], vec![1]), (vec![1], vec![0]), (vec![1], vec![1])]
        );
    }

    #[test]
    fn quasi_columns_follow_the_structure() {
        let a = Ansatz::quasi(2, 1, 1).unwrap();
        let cols = a.columns();
        // Pure time shifts take all 4 monomials, the other 6 shifts take a and b only.
        assert_eq!(cols.len(), 2 * 4 + 6 * 2);
        assert!(cols
            .iter()
            .all(|(e, m)| is_spatially_trivial(e) || !is_spatially_trivial(m)));
        assert!(Ansatz::new(
            a.vars().clone(),
            a.gens().clone(),
            vec![vec![0, 1, 0]],
            DegreeBound::Total(1),
            Structure::Quasi
        )
        .is_err());
    }

    #[test]
    fn single_point_system() {
        let seq = Sequence::from_i64(&[1, 1, 2, 5, 14]);
        let m = build_fit_system(&seq, &Ansatz::univariate(1, 0), &[vec![2]]).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 2));
        assert_eq!(m.row(0), &[Rational::from_integer(2.into()), Rational::from_integer(5.into())]);
    }

    #[test]
    fn unresolved_window_is_a_usage_error() {
        let seq = Sequence::from_i64(&[1, 1, 2]);
        assert!(matches!(
            build_fit_system(&seq, &Ansatz::univariate(1, 0), &[vec![2]]),
            Err(GuessError::Usage(_))
        ));
    }

    #[test]
    fn catalan_system_has_one_dimensional_nullspace() {
        let seq = Sequence::from_i64(&[1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862]);
        let window: Vec<Vec<i64>> = (0..9).map(|n| vec![n]).collect();
        let m = build_fit_system(&seq, &Ansatz::univariate(1, 1), &window).unwrap();
        assert_eq!(m.rows(), 9);
        assert_eq!(m.nullspace().len(), 1);
    }
}
