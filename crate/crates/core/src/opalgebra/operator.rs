use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exactmath::parse::{parse_expr, ExprBuilder};
use crate::exactmath::{var_list, ParseError, Poly, PolyJson, Rational};
use crate::walks::StepSet;

use super::OpError;

/// Linear recurrence operator `sum_e p_e(v) * S^e` in normal form: polynomial
/// coefficients to the left of shift monomials. Generator `k` shifts index
/// variable `k`, so `S^e * p(v) = p(v + e) * S^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftOperator {
    vars: Arc<Vec<String>>,
    gens: Arc<Vec<String>>,
    terms: BTreeMap<Vec<i64>, Poly>,
}

/// Index variables `m, n1, ..., nd` and generators `M, N1, ..., Nd` for
/// walks in dimension `d`.
pub fn walk_symbols(d: usize) -> (Arc<Vec<String>>, Arc<Vec<String>>) {
    let mut vars = vec!["m".to_string()];
    let mut gens = vec!["M".to_string()];
    for i in 1..=d {
        vars.push(format!("n{i}"));
        gens.push(format!("N{i}"));
    }
    (Arc::new(vars), Arc::new(gens))
}

impl ShiftOperator {
    pub fn zero(vars: Arc<Vec<String>>, gens: Arc<Vec<String>>) -> Self {
        assert_eq!(vars.len(), gens.len(), "one generator per index variable");
        ShiftOperator {
            vars,
            gens,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: Arc<Vec<String>>, gens: Arc<Vec<String>>) -> Self {
        let k = vars.len();
        Self::term(Poly::one(vars), gens, vec![0; k])
    }

    /// `coeff * S^shift`.
    pub fn term(coeff: Poly, gens: Arc<Vec<String>>, shift: Vec<i64>) -> Self {
        let mut op = ShiftOperator::zero(coeff.vars().clone(), gens);
        assert_eq!(shift.len(), op.vars.len());
        op.add_term(shift, coeff);
        op
    }

    pub fn from_terms<I>(vars: Arc<Vec<String>>, gens: Arc<Vec<String>>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<i64>, Poly)>,
    {
        let mut op = ShiftOperator::zero(vars, gens);
        for (e, p) in terms {
            op.add_term(e, p);
        }
        op
    }

    fn add_term(&mut self, shift: Vec<i64>, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(shift) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = &*o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn gens(&self) -> &Arc<Vec<String>> {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending lexicographic order of shift vectors.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Vec<i64>, &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, shift: &[i64]) -> Option<&Poly> {
        self.terms.get(shift)
    }

    /// Maximum total degree of the coefficients; `None` for zero.
    pub fn coefficient_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(Poly::total_degree).max()
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.terms.values().all(Poly::is_constant)
    }

    /// True iff no term has a negative exponent in a spatial generator
    /// (every generator but the first, which is time).
    pub fn is_good(&self) -> bool {
        self.terms.keys().all(|e| e[1..].iter().all(|&x| x >= 0))
    }

    /// Smallest and largest exponent of generator `k` over all terms.
    pub fn shift_range(&self, k: usize) -> Option<(i64, i64)> {
        let lo = self.terms.keys().map(|e| e[k]).min()?;
        let hi = self.terms.keys().map(|e| e[k]).max()?;
        Some((lo, hi))
    }

    fn check_compatible(&self, other: &ShiftOperator) -> Result<(), OpError> {
        if self.vars == other.vars && self.gens == other.gens {
            Ok(())
        } else {
            Err(OpError::Usage(format!(
                "operators over different symbols: {:?}/{:?} vs {:?}/{:?}",
                self.vars, self.gens, other.vars, other.gens
            )))
        }
    }

    pub fn checked_add(&self, other: &ShiftOperator) -> Result<ShiftOperator, OpError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, p) in &other.terms {
            out.add_term(e.clone(), p.clone());
        }
        Ok(out)
    }

    /// Product in normal form: `(p S^e)(q S^f) = p * q(v + e) * S^(e+f)`.
    pub fn checked_mul(&self, other: &ShiftOperator) -> Result<ShiftOperator, OpError> {
        self.check_compatible(other)?;
        let mut out = ShiftOperator::zero(self.vars.clone(), self.gens.clone());
        for (e, p) in &self.terms {
            for (f, q) in &other.terms {
                let shifted = q.shift(e);
                let ef: Vec<i64> = e.iter().zip(f).map(|(a, b)| a + b).collect();
                out.add_term(ef, p * &shifted);
            }
        }
        Ok(out)
    }

    /// `[x, y] = x*y - y*x`.
    pub fn commutator(&self, other: &ShiftOperator) -> Result<ShiftOperator, OpError> {
        let xy = self.checked_mul(other)?;
        let yx = other.checked_mul(self)?;
        xy.checked_add(&-&yx)
    }

    pub fn scale(&self, c: &Rational) -> ShiftOperator {
        ShiftOperator::from_terms(
            self.vars.clone(),
            self.gens.clone(),
            self.terms.iter().map(|(e, p)| (e.clone(), p.scale(c))),
        )
    }

    /// Apply `f` to every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&Poly) -> Poly) -> ShiftOperator {
        ShiftOperator::from_terms(
            self.vars.clone(),
            self.gens.clone(),
            self.terms.iter().map(|(e, p)| (e.clone(), f(p))),
        )
    }

    /// Scaled to coprime integer coefficients with a positive leading
    /// coefficient (highest shift vector, then highest monomial).
    pub fn normalize_content(&self) -> ShiftOperator {
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |l, p| l.lcm(&p.content_parts().0));
        let gcd = self
            .terms
            .values()
            .flat_map(|p| p.integer_terms(&lcm))
            .fold(BigInt::zero(), |g, (_, c)| g.gcd(&c));
        if gcd.is_zero() {
            return self.clone();
        }
        let lead_negative = self
            .terms
            .values()
            .next_back()
            .and_then(|p| p.leading())
            .is_some_and(|(_, c)| c.is_negative());
        let mut factor = Rational::new(lcm, gcd);
        if lead_negative {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// `1 - M^{-1} sum_{s in S} N^{-s}`.
    pub fn transfer(steps: &StepSet) -> ShiftOperator {
        let (vars, gens) = walk_symbols(steps.dim());
        let mut op = ShiftOperator::one(vars.clone(), gens.clone());
        let minus_one = Poly::constant(vars.clone(), -Rational::one());
        for s in steps.steps() {
            let mut e = vec![-1];
            e.extend(s.iter().map(|x| -x));
            op.add_term(e, minus_one.clone());
        }
        op
    }

    pub fn parse(
        text: &str,
        vars: Arc<Vec<String>>,
        gens: Arc<Vec<String>>,
    ) -> Result<ShiftOperator, ParseError> {
        if text.trim() == "0" {
            return Ok(ShiftOperator::zero(vars, gens));
        }
        parse_expr(text, &OpBuilder { vars, gens })
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            vars: self.vars.to_vec(),
            gens: self.gens.to_vec(),
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(e, p)| OperatorTermJson {
                    shift: e.clone(),
                    coeff: p.to_json(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<ShiftOperator, OpError> {
        if json.vars.len() != json.gens.len() {
            return Err(OpError::Usage("one generator per variable required".into()));
        }
        let vars = var_list(&json.vars);
        let gens = var_list(&json.gens);
        let mut op = ShiftOperator::zero(vars.clone(), gens);
        for t in &json.terms {
            if t.shift.len() != vars.len() {
                return Err(OpError::Usage("shift vector length mismatch".into()));
            }
            let p = Poly::from_json(&t.coeff, vars.clone())
                .map_err(|e| OpError::Usage(e.to_string()))?;
            op.add_term(t.shift.clone(), p);
        }
        Ok(op)
    }
}

impl std::ops::Neg for &ShiftOperator {
    type Output = ShiftOperator;
    fn neg(self) -> ShiftOperator {
        self.map_coefficients(|p| -p)
    }
}

fn fmt_shift(e: &[i64], gens: &[String]) -> String {
    let mut parts = Vec::new();
    for (g, &x) in gens.iter().zip(e) {
        match x {
            0 => {}
            1 => parts.push(g.clone()),
            x => parts.push(format!("{g}^{x}")),
        }
    }
    parts.join("*")
}

/// `(<poly>)*M^i*N1^j - ...`, highest shift vector first; constant and
/// single-term coefficients are written without parentheses.
impl fmt::Display for ShiftOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, p)) in self.terms.iter().rev().enumerate() {
            let negative = p.leading().is_some_and(|(_, c)| c.is_negative());
            let p = if negative { -p } else { p.clone() };
            let s = fmt_shift(e, &self.gens);
            let body = match (s.is_empty(), p.num_terms() == 1) {
                (true, true) => format!("{p}"),
                (true, false) => format!("({p})"),
                (false, _) if p.is_constant() && p.coeff(&vec![0; p.nvars()]).is_one() => s,
                (false, true) => format!("{p}*{s}"),
                (false, false) => format!("({p})*{s}"),
            };
            match (i, negative) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

struct OpBuilder {
    vars: Arc<Vec<String>>,
    gens: Arc<Vec<String>>,
}

impl ExprBuilder for OpBuilder {
    type Value = ShiftOperator;

    fn constant(&self, c: Rational) -> ShiftOperator {
        ShiftOperator::term(
            Poly::constant(self.vars.clone(), c),
            self.gens.clone(),
            vec![0; self.vars.len()],
        )
    }

    fn atom(&self, name: &str, exp: i64) -> Result<ShiftOperator, String> {
        let k = self.vars.len();
        if let Some(i) = self.gens.iter().position(|g| g == name) {
            let mut e = vec![0; k];
            e[i] = exp;
            return Ok(ShiftOperator::term(Poly::one(self.vars.clone()), self.gens.clone(), e));
        }
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            if exp < 0 {
                return Err(format!("negative power of variable '{name}'"));
            }
            let p = Poly::var(self.vars.clone(), i).pow(exp as u32);
            return Ok(ShiftOperator::term(p, self.gens.clone(), vec![0; k]));
        }
        Err(format!("unknown symbol '{name}'"))
    }

    fn add(&self, a: ShiftOperator, b: ShiftOperator) -> ShiftOperator {
        a.checked_add(&b).expect("same symbols")
    }

    fn neg(&self, a: ShiftOperator) -> ShiftOperator {
        -&a
    }

    fn mul(&self, a: ShiftOperator, b: ShiftOperator) -> ShiftOperator {
        a.checked_mul(&b).expect("same symbols")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTermJson {
    pub shift: Vec<i64>,
    pub coeff: PolyJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub vars: Vec<String>,
    pub gens: Vec<String>,
    pub terms: Vec<OperatorTermJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uni() -> (Arc<Vec<String>>, Arc<Vec<String>>) {
        (var_list(&["n"]), var_list(&["N"]))
    }

    fn op(text: &str, syms: &(Arc<Vec<String>>, Arc<Vec<String>>)) -> ShiftOperator {
        ShiftOperator::parse(text, syms.0.clone(), syms.1.clone()).unwrap()
    }

    #[test]
    fn shift_passes_over_coefficient() {
        let u = uni();
        assert_eq!(op("N*n", &u), op("(n+1)*N", &u));
        let w = walk_symbols(2);
        assert_eq!(op("M^-1*m", &w), op("(m-1)*M^-1", &w));
        assert_eq!(op("N1*m", &w), op("m*N1", &w));
    }

    #[test]
    fn commutator_examples() {
        let u = uni();
        assert_eq!(op("N", &u).commutator(&op("n", &u)).unwrap(), op("N", &u));
        let q = ShiftOperator::transfer(&StepSet::parse("-1,0;0,-1;1,1").unwrap());
        let c = op("7/3", &walk_symbols(2));
        assert!(q.commutator(&c).unwrap().is_zero());
        let p = op("(m^2+n1*n2)*N1 + n2^2*M", &walk_symbols(2));
        let k = q.commutator(&p).unwrap();
        assert!(k.coefficient_degree().unwrap() <= 1);
    }

    #[test]
    fn goodness() {
        let w = walk_symbols(2);
        assert!(op("1 - M^-1*N1^2 - M^-2*N2", &w).is_good());
        assert!(!op("1 - M^-1*N1^-1", &w).is_good());
        assert!(ShiftOperator::zero(w.0, w.1).is_good());
    }

    #[test]
    fn transfer_operators() {
        let w = walk_symbols(2);
        let kre = ShiftOperator::transfer(&StepSet::parse("-1,0;0,-1;1,1").unwrap());
        assert_eq!(kre, op("1 - M^-1*(N1 + N2 + N1^-1*N2^-1)", &w));
        let line = ShiftOperator::transfer(&StepSet::parse("-1;1").unwrap());
        assert_eq!(line, op("1 - M^-1*(N1 + N1^-1)", &walk_symbols(1)));
        let ges = ShiftOperator::transfer(&StepSet::parse("-1,0;1,0;-1,-1;1,1").unwrap());
        assert_eq!(ges, op("1 - M^-1*(N1 + N1^-1 + N1*N2 + N1^-1*N2^-1)", &w));
        assert!(kre.has_constant_coefficients());
    }

    #[test]
    fn text_and_json_roundtrip() {
        let w = walk_symbols(2);
        let p = op("(2*m^2 - 3/2*n1)*M^-1*N1*N2^-2 + (n2 - 1)*M^3 + 5", &w);
        let text = p.to_string();
        assert_eq!(op(&text, &w), p);
        assert_eq!(op(&text, &w).to_string(), text);
        assert_eq!(ShiftOperator::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(ShiftOperator::parse("0", w.0.clone(), w.1.clone()).unwrap().to_string(), "0");
    }

    #[test]
    fn content_normalization() {
        let u = uni();
        let p = op("(-1/2*n - 1)*N + 3/4", &u);
        assert_eq!(p.normalize_content(), op("(2*n+4)*N - 3", &u));
    }

    fn arb_op() -> impl Strategy<Value = ShiftOperator> {
        let term = (
            (-1i64..2, -1i64..2),
            prop::collection::vec(((0u32..2, 0u32..2), -3i64..4), 1..3),
        );
        prop::collection::vec(term, 1..4).prop_map(|ts| {
            let vars = var_list(&["m", "n1"]);
            let gens = var_list(&["M", "N1"]);
            ShiftOperator::from_terms(
                vars.clone(),
                gens,
                ts.into_iter().map(|((a, b), cs)| {
                    let p = Poly::from_terms(
                        vars.clone(),
                        cs.into_iter()
                            .map(|((x, y), c)| (vec![x, y], Rational::from_integer(c.into()))),
                    );
                    (vec![a, b], p)
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(x in arb_op(), y in arb_op(), z in arb_op()) {
            let l = x.checked_mul(&y).unwrap().checked_mul(&z).unwrap();
            let r = x.checked_mul(&y.checked_mul(&z).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn text_roundtrip(x in arb_op()) {
            let back = ShiftOperator::parse(&x.to_string(), x.vars().clone(), x.gens().clone()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
