use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExactMathError, Rational};

/// Dense matrix of rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Build from rows; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            entries.extend(r);
        }
        RatMatrix {
            rows: n,
            cols,
            entries,
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        RatMatrix::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .fold(Rational::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// Each row scaled by the lcm of its denominators; same nullspace.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let lcm = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
                row.iter()
                    .map(|x| x.numer() * (&lcm / x.denom()))
                    .collect()
            })
            .collect()
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut rows = self.integer_rows();
        bareiss_echelon(&mut rows, self.cols).len()
    }

    /// Rank of the matrix reduced modulo the prime `p`.
    pub fn rank_mod_prime(&self, p: u64) -> Result<usize, ExactMathError> {
        let pb = BigInt::from(p);
        let mut rows = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for x in self.row(r) {
                let d = mod_big(x.denom(), &pb, p);
                if d == 0 {
                    return Err(ExactMathError::DenominatorDivisible { prime: p });
                }
                let n = mod_big(x.numer(), &pb, p);
                row.push(mul_mod(n, inv_mod(d, p), p));
            }
            rows.push(row);
        }
        Ok(rank_select_mod_p(rows, self.cols, p).0.len())
    }

    /// Basis of the right nullspace, each vector scaled so that its first
    /// nonzero entry is 1. Vectors are ordered by their free column, so the
    /// first vector is supported on the earliest possible columns.
    ///
    /// A rank pass modulo a 62-bit prime runs first: full column rank mod p
    /// implies full rank over Q, and otherwise the rows independent mod p are
    /// solved exactly and the result is checked against the full matrix.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        if self.cols == 0 {
            return Vec::new();
        }
        let int_rows = self.integer_rows();
        let p = prepass_prime();
        let pb = BigInt::from(p);
        let reduced: Vec<Vec<u64>> = int_rows
            .iter()
            .map(|r| r.iter().map(|x| mod_big(x, &pb, p)).collect())
            .collect();
        let (selected, _) = rank_select_mod_p(reduced, self.cols, p);
        if selected.len() == self.cols {
            return Vec::new();
        }
        let mut sub: Vec<Vec<BigInt>> = selected.iter().map(|&i| int_rows[i].clone()).collect();
        let basis = solve_nullspace(&mut sub, self.cols);
        if basis.iter().all(|v| self.mul_vec(v).iter().all(Zero::is_zero)) {
            return basis;
        }
        // Unlucky prime: fall back to the full system.
        let mut all = int_rows;
        solve_nullspace(&mut all, self.cols)
    }
}

fn prepass_prime() -> u64 {
    use std::sync::OnceLock;
    static PRIME: OnceLock<u64> = OnceLock::new();
    *PRIME.get_or_init(|| random_prime_62(&mut ChaCha8Rng::seed_from_u64(0x6b72_6577)))
}

/// A uniformly drawn prime in `[2^61, 2^62)`.
pub fn random_prime_62<R: Rng>(rng: &mut R) -> u64 {
    loop {
        let c = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if num_prime::nt_funcs::is_prime64(c) {
            return c;
        }
    }
}

fn mod_big(x: &BigInt, pb: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(pb);
    let v = r.to_u64().expect("residue fits");
    debug_assert!(v < p);
    v
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Gaussian elimination mod p. Returns the indices of a maximal set of rows
/// independent mod p, and the pivot columns.
fn rank_select_mod_p(rows: Vec<Vec<u64>>, cols: usize, p: u64) -> (Vec<usize>, Vec<usize>) {
    // Reduced basis rows with their pivot columns; each incoming row is
    // reduced against the basis and kept if something survives.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut selected = Vec::new();
    for (idx, mut row) in rows.into_iter().enumerate() {
        if basis.len() == cols {
            break;
        }
        for c in 0..cols {
            if row[c] == 0 {
                continue;
            }
            if let Some(b) = pivot_of_col[c] {
                let f = row[c];
                let brow = &basis[b].1;
                for j in c..cols {
                    if brow[j] != 0 {
                        row[j] = (row[j] + p - mul_mod(f, brow[j], p)) % p;
                    }
                }
            }
        }
        if let Some(c) = row.iter().position(|&x| x != 0) {
            let inv = inv_mod(row[c], p);
            for x in row.iter_mut() {
                *x = mul_mod(*x, inv, p);
            }
            pivot_of_col[c] = Some(basis.len());
            basis.push((c, row));
            selected.push(idx);
        }
    }
    let mut pivots: Vec<usize> = basis.iter().map(|(c, _)| *c).collect();
    pivots.sort_unstable();
    (selected, pivots)
}

/// Fraction-free (Bareiss) forward elimination in place; returns the pivot
/// columns, one per nonzero echelon row (rows `0..len` hold the echelon form).
fn bareiss_echelon(rows: &mut [Vec<BigInt>], cols: usize) -> Vec<usize> {
    let nrows = rows.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let piv = &pivot_row[col];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[col]);
            for j in col + 1..cols {
                let mut v = piv * &row[j];
                if !lead.is_zero() && !pivot_row[j].is_zero() {
                    v -= &lead * &pivot_row[j];
                }
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = top[r][col].clone();
        pivots.push(col);
        r += 1;
    }
    pivots
}

fn solve_nullspace(rows: &mut [Vec<BigInt>], cols: usize) -> Vec<Vec<Rational>> {
    let pivots = bareiss_echelon(rows, cols);
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![Rational::zero(); cols];
        x[free] = Rational::one();
        for (t, &pc) in pivots.iter().enumerate().rev() {
            if pc > free {
                continue;
            }
            let row = &rows[t];
            let mut s = Rational::zero();
            for j in pc + 1..cols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s += &x[j] * Rational::from_integer(row[j].clone());
                }
            }
            x[pc] = -s / Rational::from_integer(row[pc].clone());
        }
        basis.push(normalize_first_nonzero(x));
    }
    basis
}

pub fn normalize_first_nonzero(mut v: Vec<Rational>) -> Vec<Rational> {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        for x in v.iter_mut() {
            *x /= &lead;
        }
    }
    v
}

/// Scale a rational vector to coprime integers with a positive first nonzero entry.
pub fn integer_content(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(false, |x| x.is_negative());
    ints.into_iter()
        .map(|x| if sign { -(x / &g) } else { x / &g })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(x: i64) -> Rational {
        Rational::from_integer(x.into())
    }

    #[test]
    fn rank_one_nullspace() {
        let m = RatMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(m.nullspace(), vec![vec![q(1), q(-1)]]);
    }

    #[test]
    fn identity_has_trivial_nullspace() {
        assert!(RatMatrix::identity(2).nullspace().is_empty());
        assert!(RatMatrix::identity(5).nullspace().is_empty());
    }

    #[test]
    fn catalan_fit_matrix() {
        // Unknowns (c00, c01, c10, c11) of (c00 + c01 n) f(n) + (c10 + c11 n) f(n+1).
        let cat = [1i64, 1, 2, 5, 14, 42, 132];
        let rows: Vec<Vec<Rational>> = (0..cat.len() - 1)
            .map(|n| {
                let nn = n as i64;
                vec![q(cat[n]), q(nn * cat[n]), q(cat[n + 1]), q(nn * cat[n + 1])]
            })
            .collect();
        let m = RatMatrix::from_rows(4, rows);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        // -(4n+2) f(n) + (n+2) f(n+1), first entry normalized to 1.
        let expect: Vec<Rational> = [-2, -4, 2, 1]
            .iter()
            .map(|&x| Rational::new(x.into(), (-2).into()))
            .collect();
        assert_eq!(ns[0], expect);
        assert_eq!(integer_content(&ns[0]), [2, 4, -2, -1].map(BigInt::from).to_vec());
        // Substitution into more Catalan numbers.
        let more = [1i64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for n in 0..more.len() - 1 {
            let nn = n as i64;
            assert_eq!((nn + 2) * more[n + 1] - (4 * nn + 2) * more[n], 0);
        }
    }

    #[test]
    fn rank_mod_prime_examples() {
        assert_eq!(RatMatrix::identity(3).rank_mod_prime(101).unwrap(), 3);
        assert_eq!(RatMatrix::from_i64(&[&[1, 1], &[2, 2]]).rank_mod_prime(101).unwrap(), 1);
        assert_eq!(RatMatrix::zeros(3, 4).rank_mod_prime(101).unwrap(), 0);
        let mut m = RatMatrix::identity(2);
        m.set(0, 1, Rational::new(1.into(), 101.into()));
        assert!(matches!(
            m.rank_mod_prime(101),
            Err(ExactMathError::DenominatorDivisible { prime: 101 })
        ));
    }

    #[test]
    fn unlucky_prime_still_exact() {
        // Rank 2 over Q but rank 1 mod 7: the exact answer is unaffected.
        let m = RatMatrix::from_i64(&[&[1, 1, 0], &[1, 8, 0]]);
        assert_eq!(m.rank_mod_prime(7).unwrap(), 1);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.nullspace(), vec![vec![q(0), q(0), q(1)]]);
    }

    #[test]
    fn random_primes_are_62_bit_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            let p = random_prime_62(&mut rng);
            assert!(p >= 1 << 61 && p < 1 << 62);
            assert!(num_prime::nt_funcs::is_prime64(p));
        }
    }

    fn arb_matrix() -> impl Strategy<Value = RatMatrix> {
        (1usize..6, 1usize..7).prop_flat_map(|(r, c)| {
            prop::collection::vec((-4i64..5, 1i64..4), r * c).prop_map(move |xs| {
                RatMatrix::from_rows(
                    c,
                    xs.chunks(c)
                        .map(|ch| ch.iter().map(|&(n, d)| Rational::new(n.into(), d.into())).collect())
                        .collect(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn nullspace_vectors_annihilate(m in arb_matrix()) {
            let ns = m.nullspace();
            for v in &ns {
                prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
                let lead = v.iter().find(|x| !x.is_zero()).unwrap();
                prop_assert!(lead.is_one());
            }
            prop_assert_eq!(m.rank() + ns.len(), m.cols());
        }

        #[test]
        fn rank_mod_prime_bounded_by_exact(
            xs in prop::collection::vec(-1_000_000i64..1_000_000, 30),
            seed in 0u64..4,
        ) {
            // Low-rank products (5x2 times 2x6) and full matrices alike.
            let m = if seed % 2 == 0 {
                RatMatrix::from_rows(6, xs.chunks(6).map(|c| c.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect())
            } else {
                let a = &xs[..10];
                let b = &xs[10..22];
                let rows = (0..5).map(|i| (0..6).map(|j| {
                    Rational::from_integer((a[2 * i] * b[j] + a[2 * i + 1] * b[6 + j]).into())
                }).collect()).collect();
                RatMatrix::from_rows(6, rows)
            };
            let exact = m.rank();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hit = false;
            for _ in 0..3 {
                let p = random_prime_62(&mut rng);
                let r = m.rank_mod_prime(p).unwrap();
                prop_assert!(r <= exact);
                hit |= r == exact;
            }
            prop_assert!(hit);
        }
    }
}
