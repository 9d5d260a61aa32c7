use num_bigint::BigInt;

/// Result of reading a discrete function at a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup<'a> {
    Value(&'a BigInt),
    /// Provably zero by the zero extension (outside the region, negative
    /// time, or unreachable).
    Zero,
    /// Not determined by the stored data.
    Unresolved,
}

impl Lookup<'_> {
    pub fn to_value(self) -> Option<BigInt> {
        match self {
            Lookup::Value(v) => Some(v.clone()),
            Lookup::Zero => Some(BigInt::from(0)),
            Lookup::Unresolved => None,
        }
    }
}

/// A discrete function on `Z^k` backed by a finite table.
pub trait GridFunction: Sync {
    /// Number of index variables.
    fn arity(&self) -> usize;
    fn lookup(&self, point: &[i64]) -> Lookup<'_>;
}

/// A univariate sequence `f(0), f(1), ...`, zero for negative indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence(pub Vec<BigInt>);

impl Sequence {
    pub fn from_i64(xs: &[i64]) -> Self {
        Sequence(xs.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl GridFunction for Sequence {
    fn arity(&self) -> usize {
        1
    }

    fn lookup(&self, point: &[i64]) -> Lookup<'_> {
        let n = point[0];
        if n < 0 {
            Lookup::Zero
        } else {
            self.0.get(n as usize).map_or(Lookup::Unresolved, Lookup::Value)
        }
    }
}
