//! Potential specifications and the symbol `p − E₀ = ξ² + V(x) − E₀`.
//!
//! The potential is even in every coordinate:
//!
//! ```text
//! V = E₀ + Σ_{j<n−d} u_j² x_j² − Σ_{j≥n−d} u_j² x_j² + Σ_α c_α x^{2α},   |α| ≥ 2
//! ```
//!
//! The first `n − d` coordinates are elliptic, the last `d` hyperbolic.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::{Coeff, Float, Real};
use crate::poly::{Basis, MultiIndex, PhasePolynomial};

/// Default tolerance for the floating point non-resonance test.
pub const DEFAULT_RESONANCE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub n: usize,
    pub d: usize,
    pub e0: Real,
    pub u: Vec<Real>,
    /// `α ↦ c_α`, the coefficient of `∏ x_j^{2α_j}`.
    pub coeffs: BTreeMap<MultiIndex, Real>,
}

impl PotentialSpec {
    pub fn new(
        n: usize,
        d: usize,
        e0: Real,
        u: Vec<Real>,
        coeffs: impl IntoIterator<Item = (Vec<u32>, Real)>,
    ) -> Result<Self> {
        let spec = PotentialSpec {
            n,
            d,
            e0,
            u,
            coeffs: coeffs
                .into_iter()
                .map(|(a, c)| (MultiIndex::new(a), c))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Pure quadratic potential.
    pub fn quadratic(n: usize, d: usize, e0: Real, u: Vec<Real>) -> Result<Self> {
        Self::new(n, d, e0, u, std::iter::empty())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if self.d > self.n {
            return Err(Error::InvalidSpec(format!(
                "hyperbolic index {} exceeds dimension {}",
                self.d, self.n
            )));
        }
        if self.u.len() != self.n {
            return Err(Error::InvalidSpec(format!(
                "expected {} frequencies, got {}",
                self.n,
                self.u.len()
            )));
        }
        if let Some((j, u)) = self.u.iter().enumerate().find(|(_, u)| !u.is_positive()) {
            return Err(Error::InvalidSpec(format!(
                "frequency u_{} = {u} is not positive (degenerate Hessian)",
                j + 1
            )));
        }
        for alpha in self.coeffs.keys() {
            if alpha.len() != self.n {
                return Err(Error::InvalidSpec(format!(
                    "coefficient index {alpha:?} has the wrong length"
                )));
            }
            if alpha.degree() < 2 {
                return Err(Error::InvalidSpec(format!(
                    "coefficient index {alpha:?} has degree {} in x; the quadratic part is carried by u",
                    2 * alpha.degree()
                )));
            }
        }
        Ok(())
    }

    pub fn is_elliptic(&self, j: usize) -> bool {
        j < self.n - self.d
    }

    /// Largest `|α|` with a nonzero coefficient (1 for a pure quadratic).
    pub fn max_alpha_degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(1)
    }

    pub fn frequencies(&self) -> Frequencies {
        Frequencies {
            u: self.u.clone(),
            d: self.d,
        }
    }

    /// Coefficients with `|α| ≤ max_degree`.
    pub fn truncated(&self, max_degree: u32) -> PotentialSpec {
        PotentialSpec {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(a, _)| a.degree() <= max_degree)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
            ..self.clone()
        }
    }

    pub fn coeff(&self, alpha: &[u32]) -> Real {
        self.coeffs
            .get(&MultiIndex::from(alpha))
            .cloned()
            .unwrap_or_else(Real::zero)
    }

    /// `V(x)` at a real point.
    pub fn potential(&self, x: &[f64]) -> f64 {
        let mut v = self.e0.to_f64();
        for j in 0..self.n {
            let s = if self.is_elliptic(j) { 1.0 } else { -1.0 };
            v += s * self.u[j].to_f64().powi(2) * x[j] * x[j];
        }
        for (alpha, c) in &self.coeffs {
            let mono: f64 = alpha
                .exps()
                .iter()
                .zip(x)
                .map(|(&a, &xj)| xj.powi(2 * a as i32))
                .product();
            v += c.to_f64() * mono;
        }
        v
    }

    pub fn to_json(&self) -> PotentialSpecJson {
        PotentialSpecJson {
            n: self.n,
            d: self.d,
            e0: self.e0.to_json(),
            u: self.u.iter().map(Real::to_json).collect(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(a, c)| CoeffJson {
                    alpha: a.exps().to_vec(),
                    c: c.to_json(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PotentialSpecJson) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for entry in &json.coeffs {
            let alpha = MultiIndex::new(entry.alpha.clone());
            let c = Real::from_json(&entry.c)?;
            if coeffs.insert(alpha.clone(), c).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate coefficient index {alpha:?}")));
            }
        }
        let spec = PotentialSpec {
            n: json.n,
            d: json.d,
            e0: Real::from_json(&json.e0)?,
            u: json.u.iter().map(Real::from_json).collect::<Result<_>>()?,
            coeffs,
        };
        spec.validate()?;
        Ok(PotentialSpec {
            coeffs: spec.coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            ..spec
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffJson {
    pub alpha: Vec<u32>,
    pub c: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpecJson {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "E0")]
    pub e0: serde_json::Value,
    pub u: Vec<serde_json::Value>,
    #[serde(default)]
    pub coeffs: Vec<CoeffJson>,
}

/// Frequencies of the scaled quadratic part `Σ ω_j (ξ_j² + x_j²)`:
/// `ω_j = u_j` on elliptic and `ω_j = u_j / i` on hyperbolic coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequencies {
    pub u: Vec<Real>,
    pub d: usize,
}

impl Frequencies {
    pub fn new(u: Vec<Real>, d: usize) -> Result<Self> {
        if d > u.len() {
            return Err(Error::InvalidSpec(format!(
                "hyperbolic index {d} exceeds dimension {}",
                u.len()
            )));
        }
        if u.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidSpec("frequencies must be positive".into()));
        }
        Ok(Frequencies { u, d })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn is_elliptic(&self, j: usize) -> bool {
        j < self.n() - self.d
    }

    pub fn omega<C: Coeff>(&self) -> Vec<C> {
        self.u
            .iter()
            .enumerate()
            .map(|(j, u)| {
                let u = C::from_real(u);
                if self.is_elliptic(j) {
                    u
                } else {
                    -(C::i() * u)
                }
            })
            .collect()
    }

    pub fn omega_c64(&self) -> Vec<Float> {
        self.omega::<Float>()
    }
}

/// `p − E₀` in the real basis, truncated at total degree `max_degree`.
pub fn build_symbol<C: Coeff>(spec: &PotentialSpec, max_degree: u32) -> Result<PhasePolynomial<C>> {
    spec.validate()?;
    if max_degree < 2 || max_degree % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "truncation degree must be even and at least 2, got {max_degree}"
        )));
    }
    let n = spec.n;
    let mut terms = Vec::new();
    for j in 0..n {
        let mut xi2 = vec![0; 2 * n];
        xi2[n + j] = 2;
        terms.push((MultiIndex::new(xi2), C::one()));
        let mut x2 = vec![0; 2 * n];
        x2[j] = 2;
        let u = C::from_real(&spec.u[j]);
        let u2 = u.clone() * u;
        terms.push((MultiIndex::new(x2), if spec.is_elliptic(j) { u2 } else { -u2 }));
    }
    for (alpha, c) in &spec.coeffs {
        if 2 * alpha.degree() > max_degree {
            continue;
        }
        let mut exps: Vec<u32> = alpha.exps().iter().map(|a| 2 * a).collect();
        exps.resize(2 * n, 0);
        terms.push((MultiIndex::new(exps), C::from_real(c)));
    }
    PhasePolynomial::from_terms(Basis::Real, n, terms)
}

/// Conjugates by `x_j ↦ u_j^{-1/2} x_j`, `ξ_j ↦ u_j^{1/2} ξ_j`, turning
/// `ξ_j² ± u_j² x_j²` into `u_j (ξ_j² ± x_j²)`.
pub fn rescale<C: Coeff>(p: &PhasePolynomial<C>, u: &[Real]) -> Result<PhasePolynomial<C>> {
    let n = p.n();
    if p.basis() != Basis::Real {
        return Err(Error::BasisMismatch("real", p.basis().name()));
    }
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    if let Some(bad) = u.iter().find(|x| !x.is_positive()) {
        return Err(Error::InvalidSpec(format!("rescale needs positive u, got {bad}")));
    }
    let mut failure = None;
    let out = p.map_terms(|m, c| {
        let mut factor = C::one();
        for (j, uj) in u.iter().enumerate() {
            let k = m.get(n + j) as i64 - m.get(j) as i64;
            if k == 0 {
                continue;
            }
            match C::half_power(uj, k) {
                Some(f) => factor = factor * f,
                None => {
                    failure.get_or_insert(Error::Parity {
                        context: "rescale (exact mode needs even degree per coordinate)",
                        exps: m.exps().to_vec(),
                        coord: j,
                    });
                }
            }
        }
        Some(c.clone() * factor)
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Complex scaling `x_j = e^{iπ/4} x̃_j`, `ξ_j = e^{−iπ/4} ξ̃_j` on the last
/// `d` coordinates; the result is written in the tilde variables.
pub fn complex_scale<C: Coeff>(p: &PhasePolynomial<C>, d: usize) -> Result<PhasePolynomial<C>> {
    let n = p.n();
    if p.basis() != Basis::Real {
        return Err(Error::BasisMismatch("real", p.basis().name()));
    }
    if d > n {
        return Err(Error::InvalidSpec(format!("hyperbolic index {d} exceeds dimension {n}")));
    }
    let mut failure = None;
    let out = p.map_terms(|m, c| {
        let eighths: i64 = (n - d..n)
            .map(|j| m.get(j) as i64 - m.get(n + j) as i64)
            .sum();
        match C::eighth_root_of_unity(eighths) {
            Some(phase) => Some(c.clone() * phase),
            None => {
                let coord = (n - d..n)
                    .find(|&j| (m.get(j) + m.get(n + j)) % 2 != 0)
                    .unwrap_or(n - d);
                failure.get_or_insert(Error::Parity {
                    context: "complex scaling (exact mode needs even degree per coordinate)",
                    exps: m.exps().to_vec(),
                    coord,
                });
                None
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `p − E₀` rescaled, complex-scaled and written in `(z, z̄)`, truncated at
/// `2 · max_order`: the input of the normal form engine.
pub fn scaled_hamiltonian<C: Coeff>(spec: &PotentialSpec, max_order: u32) -> Result<PhasePolynomial<C>> {
    let p = build_symbol::<C>(spec, 2 * max_order)?;
    let p = rescale(&p, &spec.u)?;
    let p = complex_scale(&p, spec.d)?;
    p.to_complex()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonResonance {
    Pass,
    /// A nonzero integer vector with `Σ m_j ω_j = 0`.
    Fail(Vec<i64>),
}

impl NonResonance {
    pub fn into_result(self) -> Result<()> {
        match self {
            NonResonance::Pass => Ok(()),
            NonResonance::Fail(witness) => Err(Error::Resonant { witness }),
        }
    }
}

/// Searches for `m ∈ ℤⁿ`, `0 < |m|₁ ≤ 2·order`, with `Σ m_j ω_j = 0`.
///
/// Elliptic frequencies are real and hyperbolic ones purely imaginary, so
/// both partial sums must vanish. With every `u_j` exact the test is exact;
/// otherwise a relation counts when `|Σ m_j ω_j| ≤ eps`. Candidates are
/// scanned by increasing `|m|₁` with the first nonzero entry positive, so a
/// reported witness is never mixed across the two blocks.
pub fn check_nonresonance(u: &[Real], d: usize, order: u32, eps: f64) -> NonResonance {
    let n = u.len();
    let exact = u.iter().all(Real::is_exact);
    let ell = n.saturating_sub(d);
    let rationals: Vec<_> = u.iter().map(Real::to_rational).collect();
    let floats: Vec<f64> = u.iter().map(Real::to_f64).collect();
    let vanishes = |m: &[i64]| -> bool {
        if exact {
            let part = |range: std::ops::Range<usize>| {
                range.fold(num_rational::BigRational::from_integer(0.into()), |acc, j| {
                    acc + &rationals[j] * num_rational::BigRational::from_integer(m[j].into())
                })
            };
            num_traits::Zero::is_zero(&part(0..ell)) && num_traits::Zero::is_zero(&part(ell..n))
        } else {
            let re: f64 = (0..ell).map(|j| m[j] as f64 * floats[j]).sum();
            let im: f64 = (ell..n).map(|j| m[j] as f64 * floats[j]).sum();
            re.hypot(im) <= eps
        }
    };
    for s in 1..=(2 * order as i64) {
        let mut found = None;
        for_each_signed(n, s, &mut |m| {
            if found.is_none() && vanishes(m) {
                found = Some(m.to_vec());
            }
        });
        if let Some(m) = found {
            return NonResonance::Fail(m);
        }
    }
    NonResonance::Pass
}

/// Visits every `m ∈ ℤⁿ` with `|m|₁ = s` whose first nonzero entry is positive,
/// in a fixed order (larger leading entries first).
fn for_each_signed(n: usize, s: i64, visit: &mut dyn FnMut(&[i64])) {
    fn rec(m: &mut Vec<i64>, n: usize, left: i64, leading: bool, visit: &mut dyn FnMut(&[i64])) {
        if m.len() == n {
            if left == 0 && !leading {
                visit(m);
            }
            return;
        }
        let range: Vec<i64> = if m.len() + 1 == n {
            if left == 0 { vec![0] } else { vec![left, -left] }
        } else {
            (-left..=left).rev().collect()
        };
        for a in range {
            if leading && a < 0 {
                continue;
            }
            m.push(a);
            rec(m, n, left - a.abs(), leading && a == 0, visit);
            m.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, s, true, visit);
}

/// Random even potential with rational data: `E₀`, frequencies accepted by
/// the non-resonance test at `max_alpha_degree`, and coefficients for
/// `2 ≤ |α| ≤ max_alpha_degree` (each present with probability 3/4).
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, max_alpha_degree: u32) -> Result<PotentialSpec> {
    if d > n {
        return Err(Error::InvalidSpec(format!("hyperbolic index {d} exceeds dimension {n}")));
    }
    fn ratio<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Real {
        Real::ratio(rng.gen_range(lo..=hi), rng.gen_range(1..=den))
    }
    let e0 = ratio(rng, -4, 4, 4);
    let mut u;
    let mut tries = 0;
    loop {
        u = (0..n).map(|_| ratio(rng, 1, 12, 5)).collect::<Vec<_>>();
        if check_nonresonance(&u, d, max_alpha_degree.max(2), DEFAULT_RESONANCE_EPS) == NonResonance::Pass {
            break;
        }
        tries += 1;
        if tries > 10_000 {
            return Err(Error::Numerical("no non-resonant frequencies found".into()));
        }
    }
    let mut coeffs = Vec::new();
    for deg in 2..=max_alpha_degree {
        for alpha in MultiIndex::all_of_degree(n, deg) {
            if rng.gen_bool(0.75) {
                coeffs.push((alpha.into_vec(), ratio(rng, -6, 6, 7)));
            }
        }
    }
    PotentialSpec::new(n, d, e0, u, coeffs)
}
