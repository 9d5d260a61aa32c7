use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::parse::{parse_expr, ExprBuilder, ParseError};
use super::{format_rational, parse_rational, ExactMathError, Rational};

/// Exponent vector ordered graded-lexicographically: total degree first,
/// then lexicographic on the exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with rational coefficients over a named,
/// ordered list of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Monomial, Rational>,
}

pub fn var_list<S: AsRef<str>>(names: &[S]) -> Arc<Vec<String>> {
    Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect())
}

impl Poly {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: Rational) -> Self {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            let n = p.vars.len();
            p.terms.insert(Monomial::one(n), c);
        }
        p
    }

    pub fn one(vars: Arc<Vec<String>>) -> Self {
        Poly::constant(vars, Rational::one())
    }

    /// The polynomial `x_i`.
    pub fn var(vars: Arc<Vec<String>>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Poly::from_terms(vars, [(e, Rational::one())])
    }

    pub fn from_terms<I>(vars: Arc<Vec<String>>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Poly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn check_vars(&self, other: &Poly) -> Result<(), ExactMathError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(ExactMathError::VariableMismatch {
                left: self.vars.to_vec(),
                right: other.vars.to_vec(),
            })
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, ExactMathError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, ExactMathError> {
        self.check_vars(other)?;
        let mut out = Poly::zero(self.vars.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.vars.clone());
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.vars.clone());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational, ExactMathError> {
        if point.len() != self.nvars() {
            return Err(ExactMathError::DimensionMismatch {
                expected: self.nvars(),
                got: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluate at an integer point.
    pub fn eval_int(&self, point: &[i64]) -> Rational {
        let q: Vec<Rational> = point.iter().map(|&x| Rational::from_integer(x.into())).collect();
        self.eval(&q).expect("dimension checked by caller")
    }

    /// `p(v + offsets)`.
    pub fn shift(&self, offsets: &[i64]) -> Poly {
        assert_eq!(offsets.len(), self.nvars());
        if offsets.iter().all(|&o| o == 0) || self.is_zero() {
            return self.clone();
        }
        let mut out = Poly::zero(self.vars.clone());
        for (m, c) in &self.terms {
            // Expand prod_i (x_i + o_i)^{e_i} one variable at a time.
            let mut partial: Vec<(Vec<u32>, Rational)> = vec![(vec![0; self.nvars()], c.clone())];
            for (i, (&e, &o)) in m.0.iter().zip(offsets).enumerate() {
                if e == 0 {
                    continue;
                }
                if o == 0 {
                    for (ex, _) in partial.iter_mut() {
                        ex[i] = e;
                    }
                    continue;
                }
                let o = BigInt::from(o);
                let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
                for (ex, cc) in &partial {
                    let mut binom = BigInt::one();
                    for k in 0..=e {
                        // C(e,k) * o^(e-k) * x^k
                        let factor = &binom * num_traits::pow(o.clone(), (e - k) as usize);
                        let mut ex2 = ex.clone();
                        ex2[i] = k;
                        next.push((ex2, cc * Rational::from_integer(factor)));
                        binom = binom * BigInt::from(e - k) / BigInt::from(k + 1);
                    }
                }
                partial = next;
            }
            for (ex, cc) in partial {
                out.add_term(Monomial(ex), cc);
            }
        }
        out
    }

    /// Substitute the constant `value` for variable `i`; the variable list is kept.
    pub fn substitute(&self, i: usize, value: &Rational) -> Poly {
        let mut out = Poly::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = e[i];
            e[i] = 0;
            let factor = if k == 0 {
                Rational::one()
            } else {
                num_traits::pow(value.clone(), k as usize)
            };
            out.add_term(Monomial(e), c * factor);
        }
        out
    }

    /// Re-express over `new_vars`, keeping the variables at positions `keep`.
    /// Fails if a dropped variable occurs.
    pub fn project(&self, keep: &[usize], new_vars: Arc<Vec<String>>) -> Option<Poly> {
        assert_eq!(keep.len(), new_vars.len());
        let mut out = Poly::zero(new_vars);
        for (m, c) in &self.terms {
            let dropped: u32 = m
                .0
                .iter()
                .enumerate()
                .filter(|(i, _)| !keep.contains(i))
                .map(|(_, &e)| e)
                .sum();
            if dropped > 0 {
                return None;
            }
            out.add_term(Monomial(keep.iter().map(|&i| m.0[i]).collect()), c.clone());
        }
        Some(out)
    }

    /// Least common multiple of the coefficient denominators and gcd of the
    /// numerators, so that `self * lcm / gcd` has coprime integer coefficients.
    pub fn content_parts(&self) -> (BigInt, BigInt) {
        let mut lcm = BigInt::one();
        let mut gcd = BigInt::zero();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
            gcd = gcd.gcd(c.numer());
        }
        (lcm, gcd)
    }

    /// Coefficients as integers after multiplying by `scale`; panics if any
    /// product is not integral.
    pub fn integer_terms(&self, scale: &BigInt) -> Vec<(Vec<u32>, BigInt)> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let v = c * Rational::from_integer(scale.clone());
                assert!(v.is_integer(), "scale does not clear denominators");
                (m.0.clone(), v.to_integer())
            })
            .collect()
    }

    pub fn parse(text: &str, vars: Arc<Vec<String>>) -> Result<Poly, ParseError> {
        parse_expr(text, &PolyBuilder { vars })
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson(
            self.terms
                .iter()
                .map(|(m, c)| (m.0.clone(), format_rational(c)))
                .collect(),
        )
    }

    pub fn from_json(json: &PolyJson, vars: Arc<Vec<String>>) -> Result<Poly, ExactMathError> {
        let mut terms = Vec::with_capacity(json.0.len());
        for (e, c) in &json.0 {
            if e.len() != vars.len() {
                return Err(ExactMathError::DimensionMismatch {
                    expected: vars.len(),
                    got: e.len(),
                });
            }
            terms.push((e.clone(), parse_rational(c)?));
        }
        Ok(Poly::from_terms(vars, terms))
    }
}

/// JSON form: sorted list of `(exponent vector, "num/den")` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson(pub Vec<(Vec<u32>, String)>);

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("variable lists differ")
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_add(&-rhs).expect("variable lists differ")
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("variable lists differ")
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

pub(crate) fn fmt_monomial(m: &Monomial, vars: &[String]) -> String {
    let mut parts = Vec::new();
    for (v, &e) in vars.iter().zip(&m.0) {
        match e {
            0 => {}
            1 => parts.push(v.clone()),
            e => parts.push(format!("{v}^{e}")),
        }
    }
    parts.join("*")
}

/// Highest term first, e.g. `2*n^2+7*n+6`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            let mono = fmt_monomial(m, &self.vars);
            if mono.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", format_rational(&abs))?;
            }
        }
        Ok(())
    }
}

struct PolyBuilder {
    vars: Arc<Vec<String>>,
}

impl ExprBuilder for PolyBuilder {
    type Value = Poly;

    fn constant(&self, c: Rational) -> Poly {
        Poly::constant(self.vars.clone(), c)
    }

    fn atom(&self, name: &str, exp: i64) -> Result<Poly, String> {
        let i = self
            .vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| format!("unknown variable '{name}'"))?;
        if exp < 0 {
            return Err(format!("negative power of variable '{name}'"));
        }
        Ok(Poly::var(self.vars.clone(), i).pow(exp as u32))
    }

    fn add(&self, a: Poly, b: Poly) -> Poly {
        &a + &b
    }

    fn neg(&self, a: Poly) -> Poly {
        -&a
    }

    fn mul(&self, a: Poly, b: Poly) -> Poly {
        &a * &b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n() -> Arc<Vec<String>> {
        var_list(&["n"])
    }

    fn q(x: i64) -> Rational {
        Rational::from_integer(x.into())
    }

    #[test]
    fn difference_of_squares() {
        let v = n();
        let a = Poly::parse("n+1", v.clone()).unwrap();
        let b = Poly::parse("n-1", v.clone()).unwrap();
        assert_eq!(&a * &b, Poly::parse("n^2-1", v).unwrap());
    }

    #[test]
    fn multiply_by_one_and_expand() {
        let v = n();
        let p = Poly::parse("2*n+3", v.clone()).unwrap();
        assert_eq!(&p * &Poly::one(v.clone()), p);
        let r = &p * &Poly::parse("n+2", v.clone()).unwrap();
        assert_eq!(r.to_string(), "2*n^2+7*n+6");
        assert_eq!(r.total_degree(), Some(2));
    }

    #[test]
    fn mismatched_variables_rejected() {
        let a = Poly::var(var_list(&["n"]), 0);
        let b = Poly::var(var_list(&["m"]), 0);
        assert!(matches!(
            a.checked_mul(&b),
            Err(ExactMathError::VariableMismatch { .. })
        ));
    }

    #[test]
    fn evaluation() {
        let v = n();
        assert_eq!(Poly::parse("n^2-1", v.clone()).unwrap().eval(&[q(3)]).unwrap(), q(8));
        assert_eq!(Poly::zero(v.clone()).eval(&[q(17)]).unwrap(), q(0));
        let k = Poly::parse("6*(3*n+1)*(3*n+2)", v.clone()).unwrap();
        assert_eq!(k.eval(&[q(0)]).unwrap(), q(12));
        assert!(matches!(
            k.eval(&[q(0), q(1)]),
            Err(ExactMathError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn shift_substitutes_offsets() {
        let v = var_list(&["m", "n"]);
        let p = Poly::parse("m^2*n+3*n-2", v.clone()).unwrap();
        let s = p.shift(&[1, -2]);
        let expect = Poly::parse("(m+1)^2*(n-2)+3*(n-2)-2", v).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn display_parse_roundtrip_with_rationals() {
        let v = var_list(&["a", "b", "n"]);
        let p = Poly::parse("3/2*a*b^2 - n + 7/3 - a", v.clone()).unwrap();
        let text = p.to_string();
        assert_eq!(Poly::parse(&text, v.clone()).unwrap(), p);
        let json = p.to_json();
        assert_eq!(Poly::from_json(&json, v).unwrap(), p);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Poly::parse("n + x", n()).unwrap_err();
        assert_eq!(err.pos, 4);
        assert!(Poly::parse("n^-1", n()).is_err());
        assert!(Poly::parse("(n+1", n()).is_err());
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(((0u32..3, 0u32..3), -5i64..6), 0..5).prop_map(|ts| {
            Poly::from_terms(
                var_list(&["x", "y"]),
                ts.into_iter().map(|((a, b), c)| (vec![a, b], q(c))),
            )
        })
    }

    proptest! {
        #[test]
        fn product_evaluates_to_product_of_values(
            p in arb_poly(),
            r in arb_poly(),
            pts in prop::collection::vec((-20i64..20, -20i64..20), 100),
        ) {
            let pr = &p * &r;
            for (x, y) in pts {
                let pt = [q(x), q(y)];
                prop_assert_eq!(
                    pr.eval(&pt).unwrap(),
                    p.eval(&pt).unwrap() * r.eval(&pt).unwrap()
                );
            }
        }

        #[test]
        fn text_roundtrip(p in arb_poly()) {
            prop_assert_eq!(Poly::parse(&p.to_string(), p.vars().clone()).unwrap(), p);
        }
    }
}
