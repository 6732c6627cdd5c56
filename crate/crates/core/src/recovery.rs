//! Taylor coefficients of the potential from its normal form.
//!
//! The degree `2N` part of the working Hamiltonian at step `N` is
//! `W_N + R♯_N`, where `W_N` is the (scaled) degree `2N` Taylor part of the
//! potential and `R♯_N` is produced by the transforms of the earlier steps,
//! so it depends only on `W_2..W_{N−1}`. Averaging is diagonal on even
//! monomials,
//!
//! ```text
//! ⟨x^{2α}⟩ = ∏_j C(2α_j, α_j) / 4^{α_j} · ι^α,
//! ```
//!
//! hence `W_N` is read off from `h_N − ⟨R♯_N⟩` one coefficient at a time.
//! `R♯_N` is computed with the forward engine itself, fed with the
//! coefficients recovered so far.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;

use crate::bnf::{torus_average, BnfOptions, Engine, NormalForm};
use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::number::Coeff;
use crate::poly::{ActionPolynomial, Basis, MultiIndex, PhasePolynomial};

/// Torus average of `∏ x_j^{2α_j}` on the unit actions: `∏ C(2α_j, α_j)/4^{α_j}`.
pub fn averaging_coefficient(alpha: &[u32]) -> BigRational {
    alpha.iter().fold(BigRational::from_integer(1.into()), |acc, &a| {
        let num = binomial(BigInt::from(2 * a), BigInt::from(a));
        let den = num_traits::pow(BigInt::from(4), a as usize);
        acc * BigRational::new(num, den)
    })
}

/// Diagonal averaging map on the even monomials of one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragingMap {
    pub degree: u32,
    pub entries: Vec<(MultiIndex, BigRational)>,
}

impl AveragingMap {
    pub fn new(n: usize, degree: u32) -> Self {
        AveragingMap {
            degree,
            entries: MultiIndex::all_of_degree(n, degree)
                .into_iter()
                .map(|a| {
                    let c = averaging_coefficient(a.exps());
                    (a, c)
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryOptions {
    pub bnf: BnfOptions,
    /// Float mode: admissible `|Im c_α| / max(1, |c_α|)`.
    pub imag_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            bnf: BnfOptions::default(),
            imag_tol: 1e-9,
        }
    }
}

/// Recovers `c_α` for `2 ≤ |α| ≤ n_target` from a scaled normal form.
///
/// The returned potential reproduces `h_2..h_{n_target}` under the forward
/// engine.
pub fn recover_taylor<C: Coeff>(
    nf: &NormalForm<C>,
    n_target: u32,
    opts: &RecoveryOptions,
) -> Result<PotentialSpec> {
    if !nf.scaled {
        return Err(Error::Precondition("recovery needs the scaled normal form".into()));
    }
    if n_target > nf.max_order || (n_target as usize) > nf.actions.len() + 1 {
        return Err(Error::Precondition(format!(
            "normal form known to order {}, recovery asked for {n_target}",
            nf.max_order
        )));
    }
    let n = nf.n;
    let ell = n - nf.d;
    let freqs = nf.frequencies();
    let omega = freqs.omega::<C>();
    let h1 = ActionPolynomial::linear(&omega).to_phase();
    let mut coeffs = Vec::new();
    if n_target < 2 {
        return PotentialSpec::new(n, nf.d, nf.e0.clone(), nf.u.clone(), coeffs);
    }
    let mut engine = Engine::new(h1, omega, n_target, opts.bnf.clone())?;
    for order in 2..=n_target {
        debug_assert_eq!(engine.next_order(), order);
        let (artifact, _) = torus_average(&engine.pending())?;
        let target = nf.actions[(order - 2) as usize].sub(&artifact)?;

        let mut scaled_terms = Vec::new();
        for (alpha, t) in target.terms() {
            if alpha.degree() != order {
                return Err(Error::Parse(format!(
                    "h_{order} has a term {alpha:?} of the wrong degree"
                )));
            }
            let avg = C::from_rational(&averaging_coefficient(alpha.exps()));
            let c_scaled = t.div(&avg).expect("averages are positive");

            // undo complex scaling phase i^{Σ_hyp α} and rescale factor ∏ u^{-α}
            let hyp: i64 = alpha.exps()[ell..].iter().map(|&a| a as i64).sum();
            let mut c = c_scaled.clone() * C::i_pow(-hyp);
            for (j, &a) in alpha.exps().iter().enumerate() {
                c = c * C::from_real(&nf.u[j]).pow(a);
            }
            check_real(&c, alpha, opts.imag_tol)?;
            coeffs.push((alpha.exps().to_vec(), c.real_part()));

            let mut exps: Vec<u32> = alpha.exps().iter().map(|a| 2 * a).collect();
            exps.resize(2 * n, 0);
            scaled_terms.push((MultiIndex::new(exps), c_scaled));
        }
        let w = PhasePolynomial::from_terms(Basis::Real, n, scaled_terms)?.to_complex()?;
        engine.inject(&w)?;
        engine.step()?;
    }
    PotentialSpec::new(n, nf.d, nf.e0.clone(), nf.u.clone(), coeffs)
}

fn check_real<C: Coeff>(c: &C, alpha: &MultiIndex, tol: f64) -> Result<()> {
    let z = c.to_c64();
    let bad = if C::EXACT {
        c.conj() != *c
    } else {
        z.im.abs() > tol * z.norm().max(1.0)
    };
    if bad {
        return Err(Error::NonReal {
            what: format!("recovered coefficient c_{alpha:?}"),
            imag: z.im.abs(),
            tol,
        });
    }
    Ok(())
}
