use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        let degree = exps.iter().sum();
        MultiIndex { exps, degree }
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex {
            exps: vec![0; len],
            degree: 0,
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut exps = vec![0; len];
        exps[i] = 1;
        MultiIndex { exps, degree: 1 }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn get(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.exps
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            degree: self.degree + other.degree,
        }
    }

    /// `self + other - e_i - e_j`; caller guarantees non-negativity.
    pub(crate) fn add_minus_pair(&self, other: &MultiIndex, i: usize, j: usize) -> MultiIndex {
        let mut exps: Vec<u32> = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        exps[i] -= 1;
        exps[j] -= 1;
        MultiIndex {
            exps,
            degree: self.degree + other.degree - 2,
        }
    }

    /// All exponent vectors of length `len` with total degree `degree`,
    /// in ascending order.
    pub fn all_of_degree(len: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == len {
                prefix.push(left);
                out.push(MultiIndex::new(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in 0..=left {
                prefix.push(e);
                rec(len, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if degree == 0 {
                out.push(MultiIndex::new(Vec::new()));
            }
            return out;
        }
        rec(len, degree, &mut Vec::with_capacity(len), &mut out);
        out.sort();
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex::new(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}
