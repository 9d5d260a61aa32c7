use num_traits::Zero;

use crate::exactmath::{var_list, Rational};
use crate::opalgebra::ShiftOperator;
use crate::walks::{GridFunction, Lookup, WalkTable};

use super::{build_fit_system, solve, verify_heldout, Ansatz, Candidate, GuessError, Status, Structure, Window};

fn check_quasi(t: &WalkTable, a: &Ansatz) -> Result<(), GuessError> {
    if a.structure() != Structure::Quasi {
        return Err(GuessError::Usage("ansatz is not quasi-structured".into()));
    }
    if a.vars().len() != t.dim() + 1 {
        return Err(GuessError::Usage(format!(
            "ansatz has {} index variables, table has {}",
            a.vars().len(),
            t.dim() + 1
        )));
    }
    if let Some(m) = (0..=t.m_max()).find(|&m| !t.is_retained(m)) {
        return Err(GuessError::Usage(format!("table does not retain slice {m}")));
    }
    Ok(())
}

/// Valid points `(m, n)` ordered by time then cell, keeping only those
/// whose fit row is not identically zero. The latest quarter is held out;
/// the fit window takes the earliest of the rest, at most
/// `2 * unknowns + 50` of them.
pub fn quasi_windows(t: &WalkTable, a: &Ansatz) -> Result<(Window, Window), GuessError> {
    check_quasi(t, a)?;
    let tmax = t.m_max() as i64 - a.max_shift(0);
    let cols = a.columns();
    let mut by_shift: Vec<(Vec<i64>, Vec<Vec<u32>>)> = Vec::new();
    for (e, m) in cols.iter().cloned() {
        match by_shift.last_mut() {
            Some((last, ms)) if *last == e => ms.push(m),
            _ => by_shift.push((e, vec![m])),
        }
    }
    let cells: Vec<Vec<i64>> = (0..t.bbox().cells() as usize)
        .map(|i| t.bbox().point(i))
        .filter(|n| t.region().contains(n))
        .collect();
    let mut valid = Vec::new();
    let mut shifted = vec![0i64; t.dim() + 1];
    for m in 0..=tmax.max(-1) {
        for n in &cells {
            let mut p = vec![m];
            p.extend(n);
            let nonzero = by_shift.iter().any(|(e, monos)| {
                for ((s, x), d) in shifted.iter_mut().zip(&p).zip(e) {
                    *s = x + d;
                }
                matches!(t.lookup(&shifted), Lookup::Value(v) if !v.is_zero())
                    && monos
                        .iter()
                        .any(|mono| mono.iter().zip(&p).all(|(&k, &x)| k == 0 || x != 0))
            });
            if nonzero {
                valid.push(p);
            }
        }
    }
    if valid.is_empty() {
        return Ok((Window::default(), Window::default()));
    }
    let held = (valid.len() / 4).max(1);
    let split = valid.len() - held;
    let heldout = valid.split_off(split);
    valid.truncate(2 * cols.len() + 50);
    Ok((Window(valid), Window(heldout)))
}

/// Fit the quasi ansatz on `fit`, keep nullspace vectors with a nonzero
/// pure part `R0`, and return the sparsest one that also vanishes on
/// `heldout`.
pub fn fit_quasi(
    t: &WalkTable,
    a: &Ansatz,
    fit: Window,
    heldout: Window,
) -> Result<Option<Candidate>, GuessError> {
    check_quasi(t, a)?;
    if a.support().iter().flatten().any(|&x| x < 0) {
        return Err(GuessError::Usage("quasi ansatz exponents must be nonnegative".into()));
    }
    let sys = build_fit_system(t, a, fit.points())?;
    let basis = solve(&sys);
    let nullity = basis.len();
    let mut survivors: Vec<&Vec<Rational>> = basis.iter().filter(|v| a.has_pure_part(v)).collect();
    survivors.sort_by_key(|v| v.iter().filter(|x| !x.is_zero()).count());
    let mut refuted = 0;
    for v in survivors {
        let mut c = Candidate {
            operator: a.operator(v).normalize_content(),
            structure: Structure::Quasi,
            fit_window: fit.clone(),
            heldout_window: Window::default(),
            status: Status::Fitted,
            nullity,
            warnings: Vec::new(),
        };
        if verify_heldout(&mut c, t, heldout.clone())? == Status::Verified {
            if refuted > 0 {
                c.warnings.push(format!("{refuted} sparser candidates refuted"));
            }
            return Ok(Some(c));
        }
        refuted += 1;
    }
    Ok(None)
}

pub fn search_quasi(t: &WalkTable, a: &Ansatz) -> Result<Option<Candidate>, GuessError> {
    let (fit, heldout) = quasi_windows(t, a)?;
    fit_quasi(t, a, fit, heldout)
}

/// Set every spatial index to zero: the terms carrying spatial factors
/// vanish and what is left, `R0`, acts on the return sequence alone.
pub fn specialize(c: &Candidate) -> Result<ShiftOperator, GuessError> {
    if c.structure != Structure::Quasi {
        return Err(GuessError::Usage("candidate is not quasi-structured".into()));
    }
    let op = &c.operator;
    let vars = var_list(&[op.vars()[0].as_str()]);
    let gens = var_list(&[op.gens()[0].as_str()]);
    let zero = Rational::zero();
    let mut terms = Vec::new();
    for (e, p) in op.terms() {
        let mut q = p.clone();
        for i in 1..op.vars().len() {
            q = q.substitute(i, &zero);
        }
        if q.is_zero() {
            continue;
        }
        if e[1..].iter().any(|&x| x != 0) {
            return Err(GuessError::Usage(format!(
                "term with shift {e:?} does not vanish when the spatial indices are zero"
            )));
        }
        let q = q
            .project(&[0], vars.clone())
            .ok_or_else(|| GuessError::Usage("coefficient depends on spatial indices".into()))?;
        terms.push((vec![e[0]], q));
    }
    let r0 = ShiftOperator::from_terms(vars, gens, terms);
    if r0.is_zero() {
        return Err(GuessError::Usage("specialization is zero".into()));
    }
    Ok(r0.normalize_content())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::var_list;
    use crate::guess::DegreeBound;
    use crate::opalgebra::{apply, origin_points, walk_symbols};
    use crate::walks::{enumerate, Region, StepSet};

    fn table(steps: &str, m: usize) -> WalkTable {
        enumerate(&StepSet::parse(steps).unwrap(), &Region::orthant(2), m).unwrap()
    }

    #[test]
    fn pure_constant_ansatz_finds_nothing() {
        let t = table("-1,0;0,-1;1,1", 12);
        let (v, g) = walk_symbols(2);
        let a = Ansatz::new(v, g, vec![vec![0, 0, 0]], DegreeBound::Total(0), Structure::Quasi).unwrap();
        assert_eq!(search_quasi(&t, &a).unwrap(), None);
    }

    #[test]
    fn specialization_drops_spatial_terms() {
        let (v, g) = walk_symbols(2);
        let op = ShiftOperator::parse(
            "(m+2)*(2*m+3)*M - 6*(3*m+1)*(3*m+2) + n1*m*M*N1 + n2*N2^2 - n1*n2",
            v,
            g,
        )
        .unwrap();
        let c = Candidate {
            operator: op,
            structure: Structure::Quasi,
            fit_window: Window::default(),
            heldout_window: Window::default(),
            status: Status::Fitted,
            nullity: 1,
            warnings: Vec::new(),
        };
        let r0 = specialize(&c).unwrap();
        let expected = ShiftOperator::parse(
            "(m+2)*(2*m+3)*M - 6*(3*m+1)*(3*m+2)",
            var_list(&["m"]),
            var_list(&["M"]),
        )
        .unwrap();
        assert_eq!(r0, expected);
        // On the 3-step subsampled return sequence of Kreweras it annihilates.
        let t = table("-1,0;0,-1;1,1", 30);
        let sub = crate::guess::subsequence(&t.return_sequence(), 0, 3);
        assert!(apply(&r0, &sub, &origin_points(0, 0..=9)).unwrap().is_zero());

        let plain = Candidate { structure: Structure::None, ..c };
        assert!(matches!(specialize(&plain), Err(GuessError::Usage(_))));
    }

    #[test]
    fn windows_are_disjoint_and_resolvable() {
        let t = table("-1,0;0,-1;1,1", 10);
        let a = Ansatz::quasi(2, 1, 1).unwrap();
        let (fit, held) = quasi_windows(&t, &a).unwrap();
        assert!(fit.is_disjoint(&held));
        assert!(fit.len() <= 2 * a.unknowns() + 50);
        assert!(held.points().iter().all(|p| p[0] <= 9));
        assert!(build_fit_system(&t, &a, held.points()).is_ok());
    }

    #[test]
    fn small_gessel_search_is_empty() {
        let t = table("1,0;-1,0;1,1;-1,-1", 16);
        let a = Ansatz::quasi(2, 1, 1).unwrap();
        assert_eq!(search_quasi(&t, &a).unwrap(), None);
    }

    #[test]
    fn small_kreweras_search_only_returns_verified_candidates() {
        let t = table("-1,0;0,-1;1,1", 24);
        let a = Ansatz::quasi(2, 2, 2).unwrap();
        if let Some(c) = search_quasi(&t, &a).unwrap() {
            assert_eq!(c.status, Status::Verified);
            let r0 = specialize(&c).unwrap();
            let seq = crate::walks::Sequence(t.return_sequence());
            let (lo, hi) = r0.shift_range(0).unwrap();
            let pts = origin_points(0, (-lo).max(0)..=24 - hi);
            assert!(apply(&r0, &seq, &pts).unwrap().is_zero());
        }
    }
}
