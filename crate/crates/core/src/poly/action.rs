use std::collections::BTreeMap;
use std::fmt;

use super::{Basis, MultiIndex, PhasePolynomial};
use crate::error::{Error, Result};
use crate::number::{Coeff, Float};

/// Polynomial in the actions `ι_j = ξ_j² + x_j² = z_j z̄_j`.
///
/// An exponent `α` stands for `ι^α`, which has phase-space degree `2|α|`.
#[derive(Clone, PartialEq)]
pub struct ActionPolynomial<C> {
    n: usize,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> ActionPolynomial<C> {
    pub fn zero(n: usize) -> Self {
        ActionPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Result<Self> {
        let mut out = Self::zero(n);
        for (m, c) in terms {
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.len(),
                });
            }
            let sum = match out.terms.remove(&m) {
                Some(prev) => prev + c,
                None => c,
            };
            out.terms.insert(m, sum);
        }
        out.prune();
        Ok(out)
    }

    /// `Σ_j ω_j ι_j`.
    pub fn linear(weights: &[C]) -> Self {
        let n = weights.len();
        Self::from_terms(
            n,
            weights
                .iter()
                .enumerate()
                .map(|(j, w)| (MultiIndex::unit(n, j), w.clone())),
        )
        .expect("consistent dimension")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &[u32]) -> C {
        self.terms
            .get(&MultiIndex::from(alpha))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// True when every term has action degree `degree`.
    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    fn prune(&mut self) {
        let scale = if C::EXACT {
            0.0
        } else {
            self.terms.values().map(Coeff::modulus).fold(0.0, f64::max)
        };
        self.terms.retain(|_, c| !c.negligible(scale));
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Self::from_terms(
            self.n,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, s: &C) -> Self {
        self.map_terms(|_, c| Some(c.clone() * s.clone()))
    }

    pub fn map_terms(&self, mut f: impl FnMut(&MultiIndex, &C) -> Option<C>) -> Self {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            if let Some(v) = f(m, c) {
                out.terms.insert(m.clone(), v);
            }
        }
        out.prune();
        out
    }

    /// Evaluates at given action values.
    pub fn evaluate(&self, actions: &[C]) -> Result<C> {
        if actions.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: actions.len(),
            });
        }
        Ok(self.terms.iter().fold(C::zero(), |acc, (m, c)| {
            let mono = m
                .exps()
                .iter()
                .zip(actions)
                .fold(C::one(), |p, (&e, a)| p * a.pow(e));
            acc + c.clone() * mono
        }))
    }

    /// The phase-space polynomial `Σ c_α z^α z̄^α` in the complex basis.
    pub fn to_phase(&self) -> PhasePolynomial<C> {
        let n = self.n;
        PhasePolynomial::from_terms(
            Basis::Complex,
            n,
            self.terms.iter().map(|(m, c)| {
                let mut exps = m.exps().to_vec();
                exps.extend_from_slice(m.exps());
                (MultiIndex::new(exps), c.clone())
            }),
        )
        .expect("consistent dimension")
    }

    pub fn to_float(&self) -> ActionPolynomial<Float> {
        ActionPolynomial::from_terms(self.n, self.terms.iter().map(|(m, c)| (m.clone(), c.to_c64())))
            .expect("consistent dimension")
    }
}

impl<C: Coeff> fmt::Debug for ActionPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActionPolynomial[n={}](", self.n)?;
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let (re, im) = c.to_strings();
            write!(f, "({re},{im})ι^{m:?}")?;
        }
        f.write_str(")")
    }
}
