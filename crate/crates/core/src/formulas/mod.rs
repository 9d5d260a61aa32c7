//! Closed forms for return counts: the eleven quarter-plane step sets,
//! Kreweras' binomial formula, Gessel's formula and the ballot formula.
//! Formulas are stored as data in `catalog.json`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{format_rational, parse_rational, Rational};
use crate::walks::{Region, StepSet, WalkError, WalkTable};

const CATALOG_JSON: &str = include_str!("catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unknown catalog key '{0}'")]
    UnknownKey(String),
    #[error("closed form '{key}' is not an integer at n = {n}: {value}")]
    Integrity { key: String, n: usize, value: String },
    #[error("{0}")]
    Usage(String),
    #[error("malformed catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// `(offset)_{n - shift + index_shift}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pochhammer {
    pub offset: Rational,
    pub index_shift: i64,
}

/// `C(top n, bottom n) / prod (a n + b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binomial {
    pub top: u64,
    pub bottom: u64,
    pub den_linear: Vec<(i64, i64)>,
}

/// `prefactor * base^(n - shift) * prod num / prod den`, optionally times a
/// binomial factor, giving the count at walk length `period * n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub period: usize,
    pub shift: usize,
    pub prefactor: Rational,
    pub base: Rational,
    pub num: Vec<Pochhammer>,
    pub den: Vec<Pochhammer>,
    pub binomial: Option<Binomial>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Form {
    /// No closed walks of positive length.
    Zero,
    Closed(ClosedForm),
    /// Unit positive steps in the Weyl chamber; counts given by
    /// [`ballot_count`].
    Ballot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub key: String,
    pub steps: StepSet,
    pub region: Region,
    pub form: Form,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub version: u32,
    pub entries: Vec<CatalogEntry>,
}

#[derive(Deserialize)]
struct CatalogFile {
    version: u32,
    entries: Vec<EntryFile>,
}

#[derive(Deserialize)]
struct EntryFile {
    key: String,
    steps: String,
    region: String,
    form: FormFile,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum FormFile {
    Zero,
    Ballot,
    Hypergeometric {
        period: usize,
        shift: usize,
        prefactor: String,
        base: String,
        num: Vec<(String, i64)>,
        den: Vec<(String, i64)>,
    },
    Binomial {
        period: usize,
        base: String,
        top: u64,
        bottom: u64,
        den_linear: Vec<(i64, i64)>,
    },
}

fn rational(s: &str) -> Result<Rational, FormulaError> {
    parse_rational(s).map_err(|e| FormulaError::Catalog(e.to_string()))
}

fn pochhammers(list: &[(String, i64)]) -> Result<Vec<Pochhammer>, FormulaError> {
    list.iter()
        .map(|(o, k)| {
            Ok(Pochhammer {
                offset: rational(o)?,
                index_shift: *k,
            })
        })
        .collect()
}

impl Catalog {
    pub fn parse(json: &str) -> Result<Catalog, FormulaError> {
        let file: CatalogFile =
            serde_json::from_str(json).map_err(|e| FormulaError::Catalog(e.to_string()))?;
        let mut entries = Vec::new();
        for e in file.entries {
            let steps = StepSet::parse(&e.steps)?;
            let region = Region::parse(&e.region, steps.dim())?;
            let form = match e.form {
                FormFile::Zero => Form::Zero,
                FormFile::Ballot => Form::Ballot,
                FormFile::Hypergeometric {
                    period,
                    shift,
                    prefactor,
                    base,
                    num,
                    den,
                } => Form::Closed(ClosedForm {
                    period,
                    shift,
                    prefactor: rational(&prefactor)?,
                    base: rational(&base)?,
                    num: pochhammers(&num)?,
                    den: pochhammers(&den)?,
                    binomial: None,
                }),
                FormFile::Binomial {
                    period,
                    base,
                    top,
                    bottom,
                    den_linear,
                } => Form::Closed(ClosedForm {
                    period,
                    shift: 0,
                    prefactor: Rational::one(),
                    base: rational(&base)?,
                    num: Vec::new(),
                    den: Vec::new(),
                    binomial: Some(Binomial {
                        top,
                        bottom,
                        den_linear,
                    }),
                }),
            };
            if let Form::Closed(cf) = &form {
                if cf.period == 0 {
                    return Err(FormulaError::Catalog(format!("entry {}: period 0", e.key)));
                }
            }
            entries.push(CatalogEntry {
                key: e.key,
                steps,
                region,
                form,
            });
        }
        Ok(Catalog {
            version: file.version,
            entries,
        })
    }

    /// The catalog shipped with the crate.
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::parse(CATALOG_JSON).expect("built-in catalog parses"))
    }

    pub fn get(&self, key: &str) -> Result<&CatalogEntry, FormulaError> {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .ok_or_else(|| FormulaError::UnknownKey(key.to_string()))
    }

    /// The eleven numbered rows.
    pub fn rows(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries
            .iter()
            .filter(|e| e.key.chars().all(|c| c.is_ascii_digit()))
    }
}

/// Rising factorial `a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    let mut x = a.clone();
    for _ in 0..n {
        acc *= &x;
        x += Rational::one();
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn rational_pow(x: &Rational, k: usize) -> Rational {
    num_traits::pow(x.clone(), k)
}

/// Exact value of the closed form at `n`, i.e. the predicted count at
/// walk length `period * n`. Shifted forms give 1 at `n = 0`, the empty
/// walk.
pub fn eval_closed_form(key: &str, cf: &ClosedForm, n: usize) -> Result<BigInt, FormulaError> {
    if n < cf.shift {
        return if n == 0 {
            Ok(BigInt::one())
        } else {
            Err(FormulaError::Usage(format!("'{key}' is defined from n = {}", cf.shift)))
        };
    }
    let k = n - cf.shift;
    let mut v = &cf.prefactor * rational_pow(&cf.base, k);
    let index = |p: &Pochhammer| -> Result<usize, FormulaError> {
        usize::try_from(k as i64 + p.index_shift)
            .map_err(|_| FormulaError::Usage(format!("'{key}' has a negative Pochhammer index at n = {n}")))
    };
    for p in &cf.num {
        v *= pochhammer(&p.offset, index(p)?);
    }
    for p in &cf.den {
        let d = pochhammer(&p.offset, index(p)?);
        if d.is_zero() {
            return Err(FormulaError::Integrity {
                key: key.to_string(),
                n,
                value: "division by zero".into(),
            });
        }
        v /= d;
    }
    if let Some(b) = &cf.binomial {
        v *= Rational::from_integer(binomial(b.top * k as u64, b.bottom * k as u64));
        for &(a, c) in &b.den_linear {
            v /= Rational::from_integer(BigInt::from(a * k as i64 + c));
        }
    }
    if !v.is_integer() || v.is_negative() {
        return Err(FormulaError::Integrity {
            key: key.to_string(),
            n,
            value: format_rational(&v),
        });
    }
    Ok(v.to_integer())
}

/// Number of standard Young tableaux of the given shape:
/// `prod_{i<j} (n_i - n_j + j - i) * (sum n)! / prod_i (n_i + d - i)!`.
pub fn ballot_count(shape: &[u64]) -> Result<BigInt, FormulaError> {
    if shape.windows(2).any(|w| w[0] < w[1]) {
        return Err(FormulaError::Usage(format!("shape {shape:?} is not weakly decreasing")));
    }
    let d = shape.len();
    let mut num = factorial(shape.iter().sum());
    for i in 0..d {
        for j in i + 1..d {
            num *= BigInt::from(shape[i] - shape[j] + (j - i) as u64);
        }
    }
    let den = (0..d).fold(BigInt::one(), |acc, i| acc * factorial(shape[i] + (d - 1 - i) as u64));
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero());
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Walk length, or the ballot shape's cell.
    pub at: Vec<i64>,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub key: String,
    pub steps: String,
    pub checked: usize,
    /// Predicted values in order of checking (return counts for closed
    /// forms; empty for the others).
    pub values: Vec<String>,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty() && self.checked > 0
    }
}

fn same_steps(a: &StepSet, b: &StepSet) -> bool {
    let mut x = a.steps().to_vec();
    let mut y = b.steps().to_vec();
    x.sort();
    y.sort();
    x == y
}

/// Compare a catalog entry with an enumerated table. Closed forms are
/// checked at `n = 0..=n_max` together with zeros at lengths off the
/// period; zero rows at every length `1..=m_max`; the ballot entry at
/// every chamber cell `n` with `|n| <= m_max`.
pub fn verify_entry(key: &str, t: &WalkTable, n_max: usize) -> Result<VerifyReport, FormulaError> {
    let entry = Catalog::builtin().get(key)?;
    if !same_steps(&entry.steps, t.steps()) || entry.region != *t.region() {
        return Err(FormulaError::Usage(format!(
            "table ({} in {}) does not match entry '{key}' ({} in {})",
            t.steps(),
            t.region(),
            entry.steps,
            entry.region
        )));
    }
    let returns = t.return_sequence();
    let mut report = VerifyReport {
        key: key.to_string(),
        steps: entry.steps.to_string(),
        checked: 0,
        values: Vec::new(),
        mismatches: Vec::new(),
    };
    let mut check = |at: Vec<i64>, expected: &BigInt, actual: &BigInt| {
        report.checked += 1;
        if expected != actual {
            report.mismatches.push(Mismatch {
                at,
                expected: expected.to_string(),
                actual: actual.to_string(),
            });
        }
    };
    match &entry.form {
        Form::Zero => {
            for (m, v) in returns.iter().enumerate().skip(1) {
                check(vec![m as i64], &BigInt::zero(), v);
            }
        }
        Form::Closed(cf) => {
            if cf.period * n_max > t.m_max() {
                return Err(FormulaError::Usage(format!(
                    "entry '{key}' at n = {n_max} needs walks of length {}, table stops at {}",
                    cf.period * n_max,
                    t.m_max()
                )));
            }
            let mut values = Vec::new();
            for n in 0..=n_max {
                let v = eval_closed_form(key, cf, n)?;
                check(vec![(cf.period * n) as i64], &v, &returns[cf.period * n]);
                values.push(v.to_string());
            }
            for (m, v) in returns.iter().enumerate() {
                if m % cf.period != 0 {
                    check(vec![m as i64], &BigInt::zero(), v);
                }
            }
            report.values = values;
        }
        Form::Ballot => {
            for m in 0..=t.m_max() {
                for (n, v) in t.cells(m) {
                    if n.iter().sum::<i64>() != m as i64 {
                        continue;
                    }
                    let shape: Vec<u64> = n.iter().map(|&x| x as u64).collect();
                    check(n, &ballot_count(&shape)?, &v);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::enumerate;

    fn closed(key: &str) -> &'static ClosedForm {
        match &Catalog::builtin().get(key).unwrap().form {
            Form::Closed(cf) => cf,
            other => panic!("{key} is {other:?}"),
        }
    }

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(&r("7/3"), 0), Rational::one());
        assert_eq!(pochhammer(&r("1/2"), 2), r("3/4"));
        assert_eq!(pochhammer(&r("4/3"), 1) * pochhammer(&r("5/3"), 1), r("20/9"));
    }

    #[test]
    fn catalog_shape() {
        let c = Catalog::builtin();
        assert_eq!(c.version, 1);
        assert_eq!(c.rows().count(), 11);
        for key in ["1", "3", "10", "11"] {
            assert_eq!(c.get(key).unwrap().form, Form::Zero);
        }
        assert_eq!(c.get("5").unwrap().steps.to_string(), "-1,0;0,-1;1,1");
        assert!(matches!(c.get("12"), Err(FormulaError::UnknownKey(_))));
    }

    #[test]
    fn documented_values() {
        assert_eq!(eval_closed_form("kreweras", closed("kreweras"), 2).unwrap(), 16.into());
        assert_eq!(eval_closed_form("5", closed("5"), 2).unwrap(), 16.into());
        assert_eq!(eval_closed_form("gessel", closed("gessel"), 1).unwrap(), 2.into());
        assert_eq!(eval_closed_form("5", closed("5"), 0).unwrap(), 1.into());
        let catalan: Vec<BigInt> = (0..6).map(|n| eval_closed_form("2", closed("2"), n).unwrap()).collect();
        assert_eq!(catalan, [1, 1, 2, 5, 14, 42].map(BigInt::from));
    }

    #[test]
    fn integrality_is_checked() {
        let mut cf = closed("2").clone();
        cf.prefactor = r("1/3");
        assert!(matches!(eval_closed_form("x", &cf, 1), Err(FormulaError::Integrity { n: 1, .. })));
    }

    #[test]
    fn nonzero_rows_are_positive_integers() {
        for e in &Catalog::builtin().entries {
            if let Form::Closed(cf) = &e.form {
                for n in 0..=12 {
                    let v = eval_closed_form(&e.key, cf, n).unwrap();
                    assert!(v.is_positive(), "{} at {n}", e.key);
                }
            }
        }
    }

    #[test]
    fn identical_rows_and_kreweras_forms_agree() {
        for n in 0..=12 {
            let ev = |k: &str| eval_closed_form(k, closed(k), n).unwrap();
            assert_eq!(ev("5"), ev("6"));
            assert_eq!(ev("8"), ev("9"));
            assert_eq!(ev("kreweras"), ev("5"));
            assert_eq!(ev("2"), ev("4"));
        }
    }

    #[test]
    fn ballot_values() {
        assert_eq!(ballot_count(&[1, 1]).unwrap(), 1.into());
        assert_eq!(ballot_count(&[2, 1]).unwrap(), 2.into());
        assert_eq!(ballot_count(&[3, 2, 1]).unwrap(), 16.into());
        for n in 0..10 {
            assert_eq!(ballot_count(&[n]).unwrap(), BigInt::one());
        }
        assert!(matches!(ballot_count(&[1, 2]), Err(FormulaError::Usage(_))));
    }

    #[test]
    fn row_two_matches_enumeration() {
        let e = Catalog::builtin().get("2").unwrap();
        let t = enumerate(&e.steps, &e.region, 16).unwrap();
        let rep = verify_entry("2", &t, 8).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert_eq!(&rep.values[..5], ["1", "1", "2", "5", "14"]);
    }

    #[test]
    fn wrong_table_is_rejected() {
        let e = Catalog::builtin().get("2").unwrap();
        let t = enumerate(&e.steps, &e.region, 4).unwrap();
        assert!(matches!(verify_entry("5", &t, 1), Err(FormulaError::Usage(_))));
        assert!(matches!(verify_entry("2", &t, 3), Err(FormulaError::Usage(_))));
    }

    #[test]
    fn ballot_entry_matches_enumeration() {
        let e = Catalog::builtin().get("ballot").unwrap();
        let t = enumerate(&e.steps, &e.region, 8).unwrap();
        let rep = verify_entry("ballot", &t, 0).unwrap();
        assert!(rep.pass());
        assert!(rep.checked > 20);
    }
}
