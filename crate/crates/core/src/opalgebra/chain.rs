use serde::{Deserialize, Serialize};

use crate::walks::{enumerate, Region, StepSet, WalkTable};

use super::apply::{apply_resolvable, boundary_points, origin_points, region_points, Residual};
use super::{OpError, ShiftOperator};

/// `Q P_i = R_i Q + P_{i+1}` for `i = 0..=d`, with `R_i = P_i` and
/// `P_{i+1} = [Q, P_i]`, ending in `P_{d+1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionChain {
    pub q: ShiftOperator,
    /// `(P_i, R_i)` for `i = 0..=d`.
    pub pairs: Vec<(ShiftOperator, ShiftOperator)>,
    /// The terminating `P_{d+1}`.
    pub last: ShiftOperator,
    /// Goodness of each `R_i`.
    pub good: Vec<bool>,
    /// First `i` with `R_i` not good, when goodness was requested.
    pub first_bad: Option<usize>,
}

impl ReductionChain {
    /// `d`: index of the last nonzero `P_i`.
    pub fn depth(&self) -> usize {
        self.pairs.len().saturating_sub(1)
    }

    /// Number of `(P_i, R_i)` pairs, `d + 1`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Re-check every identity `Q P_i = R_i Q + P_{i+1}` exactly.
    pub fn identities_hold(&self) -> bool {
        self.pairs.iter().enumerate().all(|(i, (p, r))| {
            let next = self.pairs.get(i + 1).map_or(&self.last, |(p, _)| p);
            let lhs = self.q.checked_mul(p);
            let rhs = r.checked_mul(&self.q).and_then(|rq| rq.checked_add(next));
            matches!((lhs, rhs), (Ok(a), Ok(b)) if a == b)
        }) && self.last.is_zero()
    }
}

pub fn reduction_chain(
    q: &ShiftOperator,
    p: &ShiftOperator,
    require_good: bool,
) -> Result<ReductionChain, OpError> {
    if !q.has_constant_coefficients() {
        return Err(OpError::Usage("Q must have constant coefficients".into()));
    }
    let limit = p.coefficient_degree().map_or(0, |d| d as usize + 1);
    let mut pairs = Vec::new();
    let mut current = p.clone();
    let mut steps = 0;
    while !current.is_zero() {
        if steps == limit {
            return Err(OpError::Internal(format!(
                "reduction chain did not terminate within {limit} commutators"
            )));
        }
        let next = q.commutator(&current)?;
        pairs.push((current.clone(), current));
        current = next;
        steps += 1;
    }
    let good: Vec<bool> = pairs.iter().map(|(_, r)| r.is_good()).collect();
    let first_bad = if require_good {
        good.iter().position(|g| !g)
    } else {
        None
    };
    Ok(ReductionChain {
        q: q.clone(),
        pairs,
        last: current,
        good,
        first_bad,
    })
}

/// Where the operator is expected to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertDomain {
    /// Every in-region cell.
    Region,
    /// The origin only: operators annihilating the return sequence.
    Origin,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub index: usize,
    pub operator: String,
    pub good: bool,
    pub evaluated: usize,
    /// Largest `m` such that `P_i F` vanishes on the domain for all times up
    /// to `m` (`None` if it already fails at the first checked time).
    pub vanishes_through: Option<i64>,
    pub first_nonzero: Option<Residual>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub operator: String,
    pub steps: String,
    pub region: String,
    pub m_max: usize,
    pub domain: CertDomain,
    pub q: String,
    pub identities_hold: bool,
    pub chain: Vec<ChainEntry>,
    /// Time range over which `P_0 F` was checked.
    pub checked_times: (i64, i64),
    pub evaluated: usize,
    /// `P_0 F` on the first checked slice.
    pub initial_slice_zero: bool,
    /// Off-region residuals of `P_0 F` just outside the boundary; recorded,
    /// not part of validity.
    pub boundary_nonzero: usize,
    pub boundary_sample: Vec<Residual>,
    pub valid: bool,
    pub witness: Option<Residual>,
}

/// Times `m` at which every time reference of `op` lies in `0..=m_max`.
fn time_window(op: &ShiftOperator, m_max: usize) -> (i64, i64) {
    let (lo, hi) = op.shift_range(0).unwrap_or((0, 0));
    ((-lo).max(0), m_max as i64 - hi.max(0))
}

fn domain_points(t: &WalkTable, domain: CertDomain, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    if lo > hi {
        return Vec::new();
    }
    match domain {
        CertDomain::Region => region_points(t, lo..=hi),
        CertDomain::Origin => origin_points(t.dim(), lo..=hi),
    }
}

fn vanishing_prefix(nonzero: &[Residual], lo: i64, hi: i64) -> Option<i64> {
    match nonzero.iter().map(|r| r.point[0]).min() {
        None => Some(hi),
        Some(m) if m > lo => Some(m - 1),
        Some(_) => None,
    }
}

/// Enumerate the table and certify `p` against it.
pub fn certify(
    p: &ShiftOperator,
    steps: &StepSet,
    region: &Region,
    m_max: usize,
    domain: CertDomain,
) -> Result<Certificate, OpError> {
    let t = enumerate(steps, region, m_max)?;
    certify_table(p, &t, domain)
}

/// Build the reduction chain of `p` against the transfer operator, verify
/// every identity, and check `P_0 F = 0` on the domain for every time whose
/// references stay inside the table. Residuals of the later chain
/// operators and of `P_0` just outside the region are recorded alongside.
pub fn certify_table(
    p: &ShiftOperator,
    t: &WalkTable,
    domain: CertDomain,
) -> Result<Certificate, OpError> {
    let q = ShiftOperator::transfer(t.steps());
    if p.vars() != q.vars() || p.gens() != q.gens() {
        return Err(OpError::Usage(format!(
            "operator symbols {:?}/{:?} do not match the walk symbols {:?}/{:?}",
            p.vars(),
            p.gens(),
            q.vars(),
            q.gens()
        )));
    }
    let chain = reduction_chain(&q, p, true)?;
    let identities_hold = chain.identities_hold();

    let (lo, hi) = time_window(p, t.m_max());
    let main = apply_resolvable(p, t, &domain_points(t, domain, lo, hi))?;
    let initial_slice_zero = main.nonzero.iter().all(|r| r.point[0] != lo);

    let mut entries = Vec::new();
    for (i, (pi, _)) in chain.pairs.iter().enumerate() {
        let (elo, ehi) = time_window(pi, t.m_max());
        let rep = if i == 0 {
            main.clone()
        } else {
            apply_resolvable(pi, t, &domain_points(t, domain, elo, ehi))?
        };
        entries.push(ChainEntry {
            index: i,
            operator: pi.to_string(),
            good: chain.good[i],
            evaluated: rep.evaluated,
            vanishes_through: vanishing_prefix(&rep.nonzero, elo, ehi),
            first_nonzero: rep.nonzero.first().cloned(),
        });
    }

    let boundary = match domain {
        CertDomain::Region if lo <= hi => apply_resolvable(p, t, &boundary_points(t, lo..=hi))?,
        _ => Default::default(),
    };

    let witness = main.nonzero.first().cloned();
    let valid = identities_hold && main.evaluated > 0 && witness.is_none();
    Ok(Certificate {
        operator: p.to_string(),
        steps: t.steps().to_string(),
        region: t.region().to_string(),
        m_max: t.m_max(),
        domain,
        q: q.to_string(),
        identities_hold,
        chain: entries,
        checked_times: (lo, hi),
        evaluated: main.evaluated,
        initial_slice_zero,
        boundary_nonzero: boundary.nonzero.len(),
        boundary_sample: boundary.nonzero.into_iter().take(5).collect(),
        valid,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{Poly, Rational};
    use crate::opalgebra::walk_symbols;
    use proptest::prelude::*;

    fn kreweras() -> StepSet {
        StepSet::parse("-1,0;0,-1;1,1").unwrap()
    }

    fn parse2(text: &str) -> ShiftOperator {
        let (v, g) = walk_symbols(2);
        ShiftOperator::parse(text, v, g).unwrap()
    }

    #[test]
    fn constant_operator_has_depth_zero() {
        let q = ShiftOperator::transfer(&kreweras());
        let c = reduction_chain(&q, &parse2("3*N1^2 - M"), false).unwrap();
        assert_eq!(c.depth(), 0);
        assert_eq!(c.len(), 1);
        assert!(c.identities_hold());
    }

    #[test]
    fn linear_coefficients_give_two_pairs() {
        let q = ShiftOperator::transfer(&kreweras());
        let c = reduction_chain(&q, &parse2("n1*N1 + n2*N2"), true).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.identities_hold());
        assert!(c.pairs[1].0.has_constant_coefficients());
        assert_eq!(
            c.pairs[1].0,
            parse2("-M^-1*N1^2 - M^-1*N2^2 + M^-1*N1^-1 + M^-1*N2^-1")
        );
        // The second operator reads below the boundary.
        assert_eq!(c.good, vec![true, false]);
        assert_eq!(c.first_bad, Some(1));
    }

    #[test]
    fn goodness_failures_are_reported() {
        let q = ShiftOperator::transfer(&kreweras());
        let c = reduction_chain(&q, &parse2("m*N1^-1"), true).unwrap();
        assert_eq!(c.first_bad, Some(0));
    }

    #[test]
    fn chain_requires_constant_q() {
        let p = parse2("n1");
        assert!(matches!(reduction_chain(&p, &p, false), Err(OpError::Usage(_))));
    }

    #[test]
    fn transfer_certifies_itself() {
        let q = ShiftOperator::transfer(&kreweras());
        let cert = certify(&q, &kreweras(), &Region::orthant(2), 12, CertDomain::Region).unwrap();
        assert!(cert.valid, "{cert:?}");
        assert_eq!(cert.checked_times, (1, 12));
        assert!(cert.boundary_nonzero > 0);
    }

    #[test]
    fn perturbed_transfer_is_invalid() {
        let q = ShiftOperator::transfer(&kreweras());
        let bad = q.checked_add(&parse2("M^-1*N1")).unwrap();
        let cert = certify(&bad, &kreweras(), &Region::orthant(2), 8, CertDomain::Region).unwrap();
        assert!(!cert.valid);
        assert!(cert.witness.is_some());
    }

    #[test]
    fn return_sequence_operator_certifies_at_origin() {
        // (n+2)(2n+3) a(n+1) = 6(3n+1)(3n+2) a(n) with a(n) = F(3n), written in m = 3n.
        let p = parse2("(m+6)*(2*m+9)*M^3 - 54*(m+1)*(m+2)");
        let cert = certify(&p, &kreweras(), &Region::orthant(2), 36, CertDomain::Origin).unwrap();
        assert!(cert.valid, "{cert:?}");
        assert_eq!(cert.checked_times, (0, 33));
        assert_eq!(cert.chain.len(), 3);
    }

    fn arb_coeff() -> impl Strategy<Value = Poly> {
        prop::collection::vec(((0u32..4, 0u32..4, 0u32..4), -4i64..5), 1..5).prop_map(|ts| {
            let (v, _) = walk_symbols(2);
            Poly::from_terms(
                v,
                ts.into_iter()
                    .filter(|((a, b, c), _)| a + b + c <= 3)
                    .map(|((a, b, c), k)| (vec![a, b, c], Rational::from_integer(k.into()))),
            )
        })
    }

    fn arb_operator() -> impl Strategy<Value = ShiftOperator> {
        prop::collection::vec(((-1i64..2, -1i64..2, -1i64..2), arb_coeff()), 1..4).prop_map(|ts| {
            let (v, g) = walk_symbols(2);
            ShiftOperator::from_terms(v, g, ts.into_iter().map(|((a, b, c), p)| (vec![a, b, c], p)))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn commutator_lowers_degree(p in arb_operator()) {
            let q = ShiftOperator::transfer(&kreweras());
            let c = q.commutator(&p).unwrap();
            match p.coefficient_degree() {
                Some(d) if d > 0 => {
                    prop_assert!(c.coefficient_degree().map_or(true, |e| e < d));
                }
                _ => prop_assert!(c.is_zero()),
            }
            let chain = reduction_chain(&q, &p, false).unwrap();
            prop_assert!(chain.len() <= p.coefficient_degree().map_or(0, |d| d as usize + 1));
            prop_assert!(chain.identities_hold());
        }
    }
}
