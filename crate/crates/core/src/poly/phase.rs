use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::MultiIndex;
use crate::error::{Error, Result};
use crate::number::{Coeff, Float};

/// Coordinate system of a phase-space polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `(x, ξ)`
    Real,
    /// `(z, z̄)` with `z = x + iξ`
    Complex,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Real => "real",
            Basis::Complex => "complex",
        }
    }
}

/// Sparse polynomial in `2n` phase-space variables.
///
/// Terms are kept in a graded-lexicographic map and never store a zero
/// coefficient.
#[derive(Clone, PartialEq)]
pub struct PhasePolynomial<C> {
    basis: Basis,
    n: usize,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> PhasePolynomial<C> {
    pub fn zero(basis: Basis, n: usize) -> Self {
        PhasePolynomial {
            basis,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(basis: Basis, n: usize, c: C) -> Self {
        Self::monomial(basis, n, MultiIndex::zeros(2 * n), c)
    }

    pub fn monomial(basis: Basis, n: usize, exps: impl Into<MultiIndex>, c: C) -> Self {
        let exps = exps.into();
        assert_eq!(exps.len(), 2 * n, "monomial has the wrong number of exponents");
        let mut p = Self::zero(basis, n);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The `i`-th variable (`0 ≤ i < 2n`).
    pub fn variable(basis: Basis, n: usize, i: usize) -> Self {
        Self::monomial(basis, n, MultiIndex::unit(2 * n, i), C::one())
    }

    /// Builds a polynomial from raw terms, summing duplicates.
    pub fn from_terms(
        basis: Basis,
        n: usize,
        terms: impl IntoIterator<Item = (MultiIndex, C)>,
    ) -> Result<Self> {
        let mut p = Self::zero(basis, n);
        for (exps, c) in terms {
            if exps.len() != 2 * n {
                return Err(Error::DimensionMismatch {
                    expected: 2 * n,
                    found: exps.len(),
                });
            }
            p.accumulate(exps, c);
        }
        p.prune();
        Ok(p)
    }

    pub fn basis(&self) -> Basis {
        self.basis
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

    pub fn into_terms(self) -> impl Iterator<Item = (MultiIndex, C)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms
            .get(&MultiIndex::from(exps))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::degree)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::degree)
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    /// Terms of total degree exactly `degree`.
    pub fn homogeneous(&self, degree: u32) -> Self {
        self.filter(|m| m.degree() == degree)
    }

    /// Terms of total degree at most `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Self {
        self.filter(|m| m.degree() <= max_degree)
    }

    pub fn filter(&self, mut keep: impl FnMut(&MultiIndex) -> bool) -> Self {
        PhasePolynomial {
            basis: self.basis,
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Applies `f` to every term; `None` drops the term.
    pub fn map_terms(&self, mut f: impl FnMut(&MultiIndex, &C) -> Option<C>) -> Self {
        let mut out = Self::zero(self.basis, self.n);
        for (m, c) in &self.terms {
            if let Some(v) = f(m, c) {
                out.accumulate(m.clone(), v);
            }
        }
        out.prune();
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(self.basis.name(), other.basis.name()));
        }
        Ok(())
    }

    fn accumulate(&mut self, exps: MultiIndex, c: C) {
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                *e.get_mut() = sum;
            }
        }
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
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), -c.clone());
        }
        out.prune();
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|_, c| Some(-c.clone()))
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.basis, self.n);
        }
        self.map_terms(|_, c| Some(c.clone() * s.clone()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_truncated(other, u32::MAX)
    }

    /// Product keeping only terms of total degree `≤ max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.basis, self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() > max_degree {
                    // Later terms of `other` have higher degree.
                    break;
                }
                out.accumulate(ma.add(mb), ca.clone() * cb.clone());
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::constant(self.basis, self.n, C::one());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.basis, self.n);
        for (m, c) in &self.terms {
            let e = m.get(i);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[i] -= 1;
            out.accumulate(MultiIndex::new(exps), c.clone() * C::from_i64(e as i64));
        }
        out.prune();
        out
    }

    /// Poisson bracket `{self, other}`.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        self.bracket_truncated(other, u32::MAX)
    }

    /// Poisson bracket keeping only terms of total degree `≤ max_degree`.
    pub fn bracket_truncated(&self, other: &Self, max_degree: u32) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.n;
        let mut out = Self::zero(self.basis, n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() < 2 {
                    continue;
                }
                if ma.degree() + mb.degree() - 2 > max_degree {
                    break;
                }
                let prod = ca.clone() * cb.clone();
                for j in 0..n {
                    // real: α_ξ β_x − α_x β_ξ ; complex: α_z β_z̄ − α_z̄ β_z
                    let k = match self.basis {
                        Basis::Real => {
                            (ma.get(n + j) * mb.get(j)) as i64 - (ma.get(j) * mb.get(n + j)) as i64
                        }
                        Basis::Complex => {
                            (ma.get(j) * mb.get(n + j)) as i64 - (ma.get(n + j) * mb.get(j)) as i64
                        }
                    };
                    if k == 0 {
                        continue;
                    }
                    let exps = ma.add_minus_pair(mb, j, n + j);
                    out.accumulate(exps, prod.clone() * C::from_i64(k));
                }
            }
        }
        if self.basis == Basis::Complex {
            let two_i = C::i() * C::from_i64(2);
            for c in out.terms.values_mut() {
                *c = c.clone() * two_i.clone();
            }
        }
        out.prune();
        Ok(out)
    }

    /// Replaces variable `i` by the polynomial `images[i]` (same target
    /// basis for every image) and expands.
    pub fn compose(&self, images: &[PhasePolynomial<C>]) -> Result<Self> {
        if images.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: images.len(),
            });
        }
        let target = images[0].basis;
        for img in images {
            if img.n != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: img.n,
                });
            }
            if img.basis != target {
                return Err(Error::BasisMismatch(target.name(), img.basis.name()));
            }
        }
        // powers[i][e] = images[i]^e, grown on demand
        let mut powers: Vec<Vec<PhasePolynomial<C>>> = images
            .iter()
            .map(|_| vec![PhasePolynomial::constant(target, self.n, C::one())])
            .collect();
        let mut out = Self::zero(target, self.n);
        for (m, c) in &self.terms {
            let mut term = PhasePolynomial::constant(target, self.n, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("nonempty").mul(&images[i])?;
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize])?;
            }
            for (tm, tc) in term.terms {
                out.accumulate(tm, tc);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Rewrites a real-basis polynomial in `(z, z̄)` via
    /// `x = (z + z̄)/2`, `ξ = (z − z̄)/(2i)`.
    pub fn to_complex(&self) -> Result<Self> {
        if self.basis != Basis::Real {
            return Err(Error::BasisMismatch("real", self.basis.name()));
        }
        let n = self.n;
        let half = C::from_i64(2).inv().expect("2 is invertible");
        let half_i = half.clone() * C::i();
        let mut images = Vec::with_capacity(2 * n);
        for j in 0..n {
            let z = PhasePolynomial::variable(Basis::Complex, n, j);
            let zb = PhasePolynomial::variable(Basis::Complex, n, n + j);
            images.push(z.add(&zb)?.scale(&half));
        }
        for j in 0..n {
            let z = PhasePolynomial::variable(Basis::Complex, n, j);
            let zb = PhasePolynomial::variable(Basis::Complex, n, n + j);
            // (z − z̄)/(2i) = −(i/2) z + (i/2) z̄
            images.push(zb.sub(&z)?.scale(&half_i));
        }
        self.compose(&images)
    }

    /// Rewrites a complex-basis polynomial in `(x, ξ)` via `z = x + iξ`,
    /// `z̄ = x − iξ`.
    pub fn to_real(&self) -> Result<Self> {
        if self.basis != Basis::Complex {
            return Err(Error::BasisMismatch("complex", self.basis.name()));
        }
        let n = self.n;
        let mut images = Vec::with_capacity(2 * n);
        for sign in [1i64, -1] {
            for j in 0..n {
                let x = PhasePolynomial::variable(Basis::Real, n, j);
                let xi = PhasePolynomial::variable(Basis::Real, n, n + j);
                images.push(x.add(&xi.scale(&(C::i() * C::from_i64(sign))))?);
            }
        }
        self.compose(&images)
    }

    /// Expresses the polynomial in new coordinates `y = M v`, i.e. returns
    /// `f ∘ M⁻¹`. `matrix` is `2n × 2n`, row-major.
    pub fn substitute_linear(&self, matrix: &[Vec<C>]) -> Result<Self> {
        let dim = 2 * self.n;
        if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.len(),
            });
        }
        let inv = invert(matrix)?;
        let images = (0..dim)
            .map(|i| {
                PhasePolynomial::from_terms(
                    self.basis,
                    self.n,
                    (0..dim).map(|j| (MultiIndex::unit(dim, j), inv[i][j].clone())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        self.compose(&images)
    }

    /// Horner evaluation at a point of `2n` coordinates.
    pub fn evaluate(&self, point: &[C]) -> Result<C> {
        if point.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: point.len(),
            });
        }
        let mut terms: Vec<(&[u32], &C)> = self.terms.iter().map(|(m, c)| (m.exps(), c)).collect();
        terms.sort_by(|a, b| a.0.cmp(b.0));
        Ok(horner(&terms, 0, point))
    }

    /// Evaluates at a double precision point regardless of the coefficient mode.
    pub fn evaluate_c64(&self, point: &[Complex64]) -> Result<Complex64> {
        self.to_float().evaluate(point)
    }

    pub fn to_float(&self) -> PhasePolynomial<Float> {
        let mut out = PhasePolynomial::<Float>::zero(self.basis, self.n);
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), c.to_c64());
        }
        out.prune();
        out
    }

    /// Checks that every monomial has even degree in each coordinate pair
    /// `(x_j, ξ_j)` (or `(z_j, z̄_j)`).
    pub fn check_even(&self, context: &'static str) -> Result<()> {
        for m in self.terms.keys() {
            for j in 0..self.n {
                if (m.get(j) + m.get(self.n + j)) % 2 != 0 {
                    return Err(Error::Parity {
                        context,
                        exps: m.exps().to_vec(),
                        coord: j,
                    });
                }
            }
        }
        Ok(())
    }
}

impl PhasePolynomial<Float> {
    /// Largest coefficient modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .terms
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max))
    }
}

fn horner<C: Coeff>(terms: &[(&[u32], &C)], var: usize, point: &[C]) -> C {
    if terms.is_empty() {
        return C::zero();
    }
    if var == point.len() {
        return terms.iter().fold(C::zero(), |acc, (_, c)| acc + (*c).clone());
    }
    // Terms are sorted lexicographically, so equal exponents of `var` are contiguous.
    let mut groups: Vec<(u32, C)> = Vec::new();
    let mut start = 0;
    while start < terms.len() {
        let e = terms[start].0[var];
        let mut end = start;
        while end < terms.len() && terms[end].0[var] == e {
            end += 1;
        }
        groups.push((e, horner(&terms[start..end], var + 1, point)));
        start = end;
    }
    let p = &point[var];
    let mut acc = C::zero();
    let mut prev = groups.last().map(|g| g.0).unwrap_or(0);
    for (e, g) in groups.into_iter().rev() {
        acc = acc * p.pow(prev - e) + g;
        prev = e;
    }
    acc * p.pow(prev)
}

/// Gauss-Jordan inverse with partial pivoting on the modulus.
fn invert<C: Coeff>(matrix: &[Vec<C>]) -> Result<Vec<Vec<C>>> {
    let dim = matrix.len();
    let mut a: Vec<Vec<C>> = matrix.to_vec();
    let mut inv: Vec<Vec<C>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { C::one() } else { C::zero() }).collect())
        .collect();
    for col in 0..dim {
        let pivot = (col..dim)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&r, &s| a[r][col].modulus().total_cmp(&a[s][col].modulus()))
            .ok_or(Error::SingularMatrix)?;
        if !C::EXACT && a[pivot][col].modulus() < 1e-300 {
            return Err(Error::SingularMatrix);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].inv().ok_or(Error::SingularMatrix)?;
        for j in 0..dim {
            a[col][j] = a[col][j].clone() * p.clone();
            inv[col][j] = inv[col][j].clone() * p.clone();
        }
        for r in 0..dim {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..dim {
                a[r][j] = a[r][j].clone() - f.clone() * a[col][j].clone();
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Ok(inv)
}

impl<C: Coeff> fmt::Debug for PhasePolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhasePolynomial[{}; n={}](", self.basis.name(), self.n)?;
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let (re, im) = c.to_strings();
            write!(f, "({re}{}{im}i){m:?}", if im.starts_with('-') { "" } else { "+" })?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Exact;
    use num_rational::BigRational;

    type P = PhasePolynomial<Exact>;

    fn q(p: i64, d: i64) -> Exact {
        Exact::from_rational(&BigRational::new(p.into(), d.into()))
    }

    fn x(n: usize, j: usize) -> P {
        P::variable(Basis::Real, n, j)
    }

    fn xi(n: usize, j: usize) -> P {
        P::variable(Basis::Real, n, n + j)
    }

    #[test]
    fn ring_identities() {
        let a = x(1, 0).add(&xi(1, 0)).unwrap();
        let b = x(1, 0).sub(&xi(1, 0)).unwrap();
        let expected = x(1, 0).pow(2).unwrap().sub(&xi(1, 0).pow(2).unwrap()).unwrap();
        assert_eq!(a.mul(&b).unwrap(), expected);
        assert!(a.add(&a.scale(&Exact::from_i64(-1))).unwrap().is_zero());
        let x2 = x(1, 0).pow(2).unwrap();
        assert_eq!(x2.mul(&x2).unwrap(), P::monomial(Basis::Real, 1, vec![4, 0], Exact::one()));
    }

    #[test]
    fn mismatches_are_errors() {
        let a = x(1, 0);
        let b = P::variable(Basis::Complex, 1, 0);
        assert!(matches!(a.add(&b), Err(Error::BasisMismatch(..))));
        assert!(matches!(a.mul(&x(2, 0)), Err(Error::DimensionMismatch { .. })));
        assert!(a.poisson_bracket(&b).is_err());
    }

    #[test]
    fn bracket_convention() {
        let one = P::constant(Basis::Real, 1, Exact::one());
        assert_eq!(xi(1, 0).poisson_bracket(&x(1, 0)).unwrap(), one);
        assert_eq!(x(1, 0).poisson_bracket(&xi(1, 0)).unwrap(), one.neg());
    }

    #[test]
    fn complex_bracket_of_coordinates() {
        // {z, z̄} = 2i·(1·1 − 0) = 2i
        let z = P::variable(Basis::Complex, 1, 0);
        let zb = P::variable(Basis::Complex, 1, 1);
        let b = z.poisson_bracket(&zb).unwrap();
        assert_eq!(b, P::constant(Basis::Complex, 1, Exact::i() * Exact::from_i64(2)));
        // and it matches the real computation: {x+iξ, x−iξ} = −2i{x,ξ}... = 2i
        let zr = x(1, 0).add(&xi(1, 0).scale(&Exact::i())).unwrap();
        let zbr = x(1, 0).sub(&xi(1, 0).scale(&Exact::i())).unwrap();
        assert_eq!(zr.poisson_bracket(&zbr).unwrap(), b.to_real().unwrap());
    }

    #[test]
    fn complex_coordinates() {
        let action = x(1, 0).pow(2).unwrap().add(&xi(1, 0).pow(2).unwrap()).unwrap();
        let zz = P::monomial(Basis::Complex, 1, vec![1, 1], Exact::one());
        assert_eq!(action.to_complex().unwrap(), zz);
        let xc = x(1, 0).to_complex().unwrap();
        let expected = P::from_terms(
            Basis::Complex,
            1,
            [(MultiIndex::new(vec![1, 0]), q(1, 2)), (MultiIndex::new(vec![0, 1]), q(1, 2))],
        )
        .unwrap();
        assert_eq!(xc, expected);
        assert!(x(1, 0).to_real().is_err());
    }

    #[test]
    fn evaluation() {
        let action = x(1, 0).pow(2).unwrap().add(&xi(1, 0).pow(2).unwrap()).unwrap();
        assert_eq!(action.evaluate(&[Exact::one(), Exact::one()]).unwrap(), Exact::from_i64(2));
        let zz = P::monomial(Basis::Complex, 1, vec![1, 1], Exact::one());
        let z = Exact::one() + Exact::i();
        assert_eq!(zz.evaluate(&[z.clone(), z.conj()]).unwrap(), Exact::from_i64(2));
        assert!(zz.evaluate(&[z]).is_err());
    }

    #[test]
    fn linear_rescaling() {
        // ξ² + u²x² with y = M v, M = diag(u^{1/2}, u^{-1/2}) at u = 4
        let u = 4;
        let p = xi(1, 0)
            .pow(2)
            .unwrap()
            .add(&x(1, 0).pow(2).unwrap().scale(&Exact::from_i64(u * u)))
            .unwrap();
        let m = vec![vec![Exact::from_i64(2), Exact::zero()], vec![Exact::zero(), q(1, 2)]];
        let expected = xi(1, 0)
            .pow(2)
            .unwrap()
            .add(&x(1, 0).pow(2).unwrap())
            .unwrap()
            .scale(&Exact::from_i64(u));
        assert_eq!(p.substitute_linear(&m).unwrap(), expected);
    }

    #[test]
    fn singular_map_rejected() {
        let m = vec![vec![Exact::one(), Exact::one()], vec![Exact::one(), Exact::one()]];
        assert!(matches!(x(1, 0).substitute_linear(&m), Err(Error::SingularMatrix)));
    }

    #[test]
    fn derivative_and_truncation() {
        let p = P::monomial(Basis::Real, 1, vec![3, 1], Exact::from_i64(2))
            .add(&x(1, 0))
            .unwrap();
        assert_eq!(p.derivative(0).homogeneous(3), P::monomial(Basis::Real, 1, vec![2, 1], Exact::from_i64(6)));
        assert_eq!(p.truncate(2), x(1, 0));
        assert_eq!(p.max_degree(), Some(4));
        assert_eq!(p.min_degree(), Some(1));
    }

    #[test]
    fn parity_check() {
        assert!(P::monomial(Basis::Real, 2, vec![1, 0, 1, 0], Exact::one()).check_even("t").is_ok());
        assert!(P::monomial(Basis::Real, 2, vec![1, 1, 0, 0], Exact::one()).check_even("t").is_err());
    }

    #[test]
    fn float_pruning_is_relative() {
        let p = PhasePolynomial::<Float>::from_terms(
            Basis::Real,
            1,
            [
                (MultiIndex::new(vec![1, 0]), Float::new(1.0, 0.0)),
                (MultiIndex::new(vec![0, 1]), Float::new(1e-16, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(p.len(), 1);
    }
}
