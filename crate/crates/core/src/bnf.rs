//! Classical Birkhoff normal form by successive Lie transforms.
//!
//! Everything runs in the scaled picture, where the quadratic part is
//! `H₁ = Σ ω_j z_j z̄_j` with complex `ω`. On a monomial `z^a z̄^b`,
//! `ad_{H₁}` acts diagonally with eigenvalue `2i Σ ω_j (b_j − a_j)`, so its
//! kernel is spanned by the `a = b` monomials (functions of the actions
//! `ι_j = z_j z̄_j`) and the homological equation is solved by division.
//!
//! At order `N` the degree `2N` part `R_N` of the current Hamiltonian is
//! split into its torus average `h_N` and a remainder `G`-solvable part; the
//! Hamiltonian is then replaced by `exp(ad_{G_N}) H`, after which its degree
//! `2N` part is exactly `h_N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_nonresonance, scaled_hamiltonian, Frequencies, PotentialSpec};
use crate::number::{Coeff, Float, Real};
use crate::poly::{ActionPolyJson, ActionPolynomial, Basis, MultiIndex, PhasePolynomial, PolyJson};

#[derive(Clone, Debug)]
pub struct BnfOptions {
    /// Smallest admissible divisor modulus in float mode.
    pub eps: f64,
    /// Abort when the working Hamiltonian grows beyond this many terms.
    pub max_terms: Option<usize>,
}

impl Default for BnfOptions {
    fn default() -> Self {
        BnfOptions {
            eps: crate::model::DEFAULT_RESONANCE_EPS,
            max_terms: None,
        }
    }
}

/// Normal form `Σ_N h_N` through order `max_order` (phase-space degree
/// `2·max_order`). `actions[k]` holds `h_{k+2}`; the linear part `h₁` is
/// implied by `u` and `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm<C: Coeff> {
    pub n: usize,
    pub d: usize,
    pub e0: Real,
    pub u: Vec<Real>,
    pub max_order: u32,
    pub actions: Vec<ActionPolynomial<C>>,
    /// `true`: coefficients in the tilde actions `ι̃`; `false`: in `(ı, ȷ)`.
    pub scaled: bool,
}

/// Generating functions `G_2..G_{N_max}` used by the engine, complex basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalChain<C: Coeff> {
    pub generators: Vec<PhasePolynomial<C>>,
}

impl<C: Coeff> NormalForm<C> {
    pub fn frequencies(&self) -> Frequencies {
        Frequencies {
            u: self.u.clone(),
            d: self.d,
        }
    }

    /// `h_N` for `N ≥ 2`.
    pub fn action(&self, order: u32) -> Option<&ActionPolynomial<C>> {
        order
            .checked_sub(2)
            .and_then(|k| self.actions.get(k as usize))
    }

    /// The linear part `h₁`.
    pub fn linear_part(&self) -> ActionPolynomial<C> {
        if self.scaled {
            ActionPolynomial::linear(&self.frequencies().omega::<C>())
        } else {
            let u: Vec<C> = self.u.iter().map(C::from_real).collect();
            ActionPolynomial::linear(&u)
        }
    }

    /// `Σ_{N≥1} h_N` at the given actions (without `E₀`).
    pub fn evaluate(&self, actions: &[C]) -> Result<C> {
        let mut total = self.linear_part().evaluate(actions)?;
        for h in &self.actions {
            total = total + h.evaluate(actions)?;
        }
        Ok(total)
    }

    /// Converts scaled coefficients to the real `(ı, ȷ)` form via
    /// `ι̃_j = i ȷ_j` on hyperbolic coordinates. The result must be real;
    /// in float mode an imaginary part above `tol · max|c|` is an error.
    pub fn unscale(&self, tol: f64) -> Result<NormalForm<C>> {
        if !self.scaled {
            return Err(Error::Precondition("normal form is already unscaled".into()));
        }
        let ell = self.n - self.d;
        let mut actions = Vec::with_capacity(self.actions.len());
        for (k, h) in self.actions.iter().enumerate() {
            let order = k + 2;
            let converted = h.map_terms(|m, c| {
                let hyp: i64 = m.exps()[ell..].iter().map(|&a| a as i64).sum();
                Some(c.clone() * C::i_pow(hyp))
            });
            let scale = converted.terms().map(|(_, c)| c.modulus()).fold(0.0, f64::max);
            let mut real_terms = Vec::new();
            for (m, c) in converted.terms() {
                let z = c.to_c64();
                let imag = z.im.abs();
                let bad = if C::EXACT {
                    imag != 0.0 || c.conj() != *c
                } else {
                    imag > tol * scale.max(f64::MIN_POSITIVE)
                };
                if bad {
                    return Err(Error::NonReal {
                        what: format!("unscaled h_{order} coefficient of {m:?}"),
                        imag,
                        tol,
                    });
                }
                // keep the exact value; drop float round-off in the imaginary part
                let cleaned = if C::EXACT {
                    c.clone()
                } else {
                    C::from_c64(Float::new(z.re, 0.0)).expect("float")
                };
                real_terms.push((m.clone(), cleaned));
            }
            actions.push(ActionPolynomial::from_terms(self.n, real_terms)?);
        }
        Ok(NormalForm {
            actions,
            scaled: false,
            ..self.clone()
        })
    }

    pub fn to_float(&self) -> NormalForm<Float> {
        NormalForm {
            n: self.n,
            d: self.d,
            e0: self.e0.clone(),
            u: self.u.clone(),
            max_order: self.max_order,
            actions: self.actions.iter().map(ActionPolynomial::to_float).collect(),
            scaled: self.scaled,
        }
    }

    pub fn to_json(&self) -> NormalFormJson {
        NormalFormJson {
            n: self.n,
            d: self.d,
            e0: self.e0.to_json(),
            u: self.u.iter().map(Real::to_json).collect(),
            scaled: self.scaled,
            actions: self
                .actions
                .iter()
                .enumerate()
                .map(|(k, h)| h.to_json(k as u32 + 2))
                .collect(),
        }
    }

    pub fn from_json(json: &NormalFormJson) -> Result<Self> {
        let e0 = Real::from_json(&json.e0)?;
        let u: Vec<Real> = json.u.iter().map(Real::from_json).collect::<Result<_>>()?;
        Frequencies::new(u.clone(), json.d)?;
        if u.len() != json.n {
            return Err(Error::DimensionMismatch {
                expected: json.n,
                found: u.len(),
            });
        }
        let max_order = json.actions.iter().map(|a| a.degree).max().unwrap_or(1);
        let mut actions = vec![ActionPolynomial::zero(json.n); max_order.saturating_sub(1) as usize];
        for a in &json.actions {
            if a.degree < 2 {
                return Err(Error::Parse(format!("action degree {} below 2", a.degree)));
            }
            actions[(a.degree - 2) as usize] = ActionPolynomial::from_json(json.n, a)?;
        }
        Ok(NormalForm {
            n: json.n,
            d: json.d,
            e0,
            u,
            max_order: max_order.max(1),
            actions,
            scaled: json.scaled,
        })
    }
}

impl<C: Coeff> CanonicalChain<C> {
    pub fn to_json(&self) -> Vec<PolyJson> {
        self.generators.iter().map(PhasePolynomial::to_json).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "E0")]
    pub e0: serde_json::Value,
    pub u: Vec<serde_json::Value>,
    pub scaled: bool,
    pub actions: Vec<ActionPolyJson>,
}

/// Splits a complex-basis polynomial into its torus average (the `a = b`
/// monomials, rewritten in the actions) and the rest.
pub fn torus_average<C: Coeff>(f: &PhasePolynomial<C>) -> Result<(ActionPolynomial<C>, PhasePolynomial<C>)> {
    if f.basis() != Basis::Complex {
        return Err(Error::BasisMismatch("complex", f.basis().name()));
    }
    let n = f.n();
    let mut avg = Vec::new();
    let mut rest = Vec::new();
    for (m, c) in f.terms() {
        let (a, b) = m.exps().split_at(n);
        if a == b {
            avg.push((MultiIndex::from(a), c.clone()));
        } else {
            rest.push((m.clone(), c.clone()));
        }
    }
    Ok((
        ActionPolynomial::from_terms(n, avg)?,
        PhasePolynomial::from_terms(Basis::Complex, n, rest)?,
    ))
}

/// Eigenvalue of `ad_{H₁}` on `z^a z̄^b`: `2i Σ ω_j (b_j − a_j)`.
pub fn homological_eigenvalue<C: Coeff>(exps: &[u32], omega: &[C]) -> C {
    let n = omega.len();
    let s = omega.iter().enumerate().fold(C::zero(), |acc, (j, w)| {
        acc + w.clone() * C::from_i64(exps[n + j] as i64 - exps[j] as i64)
    });
    C::i() * C::from_i64(2) * s
}

/// Solves `{H₁, G} = rest` for `G` with the same support as `rest`.
pub fn solve_homological<C: Coeff>(
    rest: &PhasePolynomial<C>,
    omega: &[C],
    eps: f64,
) -> Result<PhasePolynomial<C>> {
    if rest.basis() != Basis::Complex {
        return Err(Error::BasisMismatch("complex", rest.basis().name()));
    }
    let n = rest.n();
    if omega.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.len(),
        });
    }
    let mut terms = Vec::with_capacity(rest.len());
    for (m, c) in rest.terms() {
        let lambda = homological_eigenvalue(m.exps(), omega);
        let modulus = lambda.modulus();
        let small = if C::EXACT { lambda.is_zero() } else { modulus <= eps };
        let inv = if small { None } else { lambda.inv() };
        match inv {
            Some(inv) => terms.push((m.clone(), c.clone() * inv)),
            None => {
                let (a, b) = m.exps().split_at(n);
                return Err(Error::SmallDivisor {
                    a: a.to_vec(),
                    b: b.to_vec(),
                    divisor: modulus,
                });
            }
        }
    }
    PhasePolynomial::from_terms(Basis::Complex, n, terms)
}

/// `exp(ad_G) f = Σ_k ad_G^k f / k!` with `ad_G f = {G, f}`, keeping
/// terms of degree `≤ max_degree`. This is `f` composed with the time-one
/// flow of the Hamiltonian vector field of `G`.
pub fn lie_transform<C: Coeff>(
    f: &PhasePolynomial<C>,
    g: &PhasePolynomial<C>,
    max_degree: u32,
) -> Result<PhasePolynomial<C>> {
    let mut result = f.truncate(max_degree);
    if g.is_zero() {
        return Ok(result);
    }
    if g.min_degree().unwrap_or(0) < 3 {
        return Err(Error::Precondition(
            "lie_transform needs a generator of degree at least 3".into(),
        ));
    }
    let mut term = result.clone();
    let mut k = 1i64;
    while !term.is_zero() {
        let factor = C::from_i64(k).inv().expect("nonzero");
        term = g.bracket_truncated(&term, max_degree)?.scale(&factor);
        result = result.add(&term)?;
        k += 1;
    }
    Ok(result)
}

/// Stateful normal form iteration, shared with the recovery step.
pub(crate) struct Engine<C: Coeff> {
    omega: Vec<C>,
    max_degree: u32,
    next_order: u32,
    current: PhasePolynomial<C>,
    generators: Vec<PhasePolynomial<C>>,
    actions: Vec<ActionPolynomial<C>>,
    opts: BnfOptions,
}

impl<C: Coeff> Engine<C> {
    pub(crate) fn new(
        hamiltonian: PhasePolynomial<C>,
        omega: Vec<C>,
        max_order: u32,
        opts: BnfOptions,
    ) -> Result<Self> {
        let n = hamiltonian.n();
        if hamiltonian.basis() != Basis::Complex {
            return Err(Error::BasisMismatch("complex", hamiltonian.basis().name()));
        }
        if omega.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: omega.len(),
            });
        }
        if max_order < 1 {
            return Err(Error::Precondition("normal form order must be at least 1".into()));
        }
        let max_degree = 2 * max_order;
        let current = hamiltonian.truncate(max_degree);
        current.check_even("normal form input")?;
        if current.min_degree().is_some_and(|d| d < 2) {
            return Err(Error::Precondition(
                "Hamiltonian has constant or linear terms; subtract E₀ first".into(),
            ));
        }
        let expected_quadratic = ActionPolynomial::linear(&omega).to_phase();
        let quadratic = current.homogeneous(2);
        let mismatch = quadratic
            .to_float()
            .max_abs_diff(&expected_quadratic.to_float())?;
        let scale = omega.iter().map(Coeff::modulus).fold(0.0, f64::max);
        let ok = if C::EXACT {
            quadratic == expected_quadratic
        } else {
            mismatch <= 1e-12 * scale
        };
        if !ok {
            return Err(Error::Precondition(
                "quadratic part is not Σ ω_j z_j z̄_j for the given frequencies".into(),
            ));
        }
        Ok(Engine {
            omega,
            max_degree,
            next_order: 2,
            current,
            generators: Vec::new(),
            actions: Vec::new(),
            opts,
        })
    }

    pub(crate) fn next_order(&self) -> u32 {
        self.next_order
    }

    pub(crate) fn done(&self) -> bool {
        2 * self.next_order > self.max_degree
    }

    /// Degree `2N` part of the working Hamiltonian for the next order `N`.
    pub(crate) fn pending(&self) -> PhasePolynomial<C> {
        self.current.homogeneous(2 * self.next_order)
    }

    /// Adds a term of the original Hamiltonian after the fact: it is pushed
    /// through every transform applied so far.
    pub(crate) fn inject(&mut self, term: &PhasePolynomial<C>) -> Result<()> {
        let mut t = term.truncate(self.max_degree);
        for g in &self.generators {
            t = lie_transform(&t, g, self.max_degree)?;
        }
        self.current = self.current.add(&t)?;
        Ok(())
    }

    pub(crate) fn step(&mut self) -> Result<()> {
        let order = self.next_order;
        let r = self.current.homogeneous(2 * order);
        let (avg, rest) = torus_average(&r)?;
        let g = solve_homological(&rest, &self.omega, self.opts.eps)?;
        self.current = lie_transform(&self.current, &g, self.max_degree)?;
        self.current.check_even("normal form iteration")?;
        if let Some(limit) = self.opts.max_terms {
            if self.current.len() > limit {
                return Err(Error::TooManyTerms(limit));
            }
        }
        debug_assert!(torus_average(&self.current.homogeneous(2 * order))
            .map(|(_, rest)| rest.is_zero())
            .unwrap_or(false));
        self.generators.push(g);
        self.actions.push(avg);
        self.next_order += 1;
        Ok(())
    }

    pub(crate) fn finish(self) -> (Vec<ActionPolynomial<C>>, CanonicalChain<C>, PhasePolynomial<C>) {
        (
            self.actions,
            CanonicalChain {
                generators: self.generators,
            },
            self.current,
        )
    }
}

/// Normal form of a scaled complex-basis Hamiltonian `H₁ + O(|z|⁴)`.
///
/// Returns `h_2..h_{max_order}`, the generating chain, and the final
/// transformed Hamiltonian (truncated at degree `2·max_order`).
pub fn compute_bnf<C: Coeff>(
    p_scaled: &PhasePolynomial<C>,
    omega: &[C],
    max_order: u32,
    opts: &BnfOptions,
) -> Result<(Vec<ActionPolynomial<C>>, CanonicalChain<C>, PhasePolynomial<C>)> {
    let mut engine = Engine::new(p_scaled.clone(), omega.to_vec(), max_order, opts.clone())?;
    while !engine.done() {
        engine.step()?;
    }
    Ok(engine.finish())
}

/// Scaled normal form of a potential through `max_order`, after checking
/// non-resonance at that order.
pub fn normal_form<C: Coeff>(
    spec: &PotentialSpec,
    max_order: u32,
    opts: &BnfOptions,
) -> Result<(NormalForm<C>, CanonicalChain<C>)> {
    spec.validate()?;
    check_nonresonance(&spec.u, spec.d, max_order.max(2), opts.eps).into_result()?;
    let h = scaled_hamiltonian::<C>(spec, max_order)?;
    let omega = spec.frequencies().omega::<C>();
    let (actions, chain, _) = compute_bnf(&h, &omega, max_order, opts)?;
    Ok((
        NormalForm {
            n: spec.n,
            d: spec.d,
            e0: spec.e0.clone(),
            u: spec.u.clone(),
            max_order,
            actions,
            scaled: true,
        },
        chain,
    ))
}
