#![allow(dead_code)]

use bnf_core::{Basis, Coeff, Exact, Float, MultiIndex, PhasePolynomial, Real};
use rand::Rng;

pub fn q(p: i64, d: i64) -> Exact {
    Exact::from_real(&Real::ratio(p, d))
}

/// Random exact polynomial with `terms` monomials of the given degrees.
pub fn random_exact<R: Rng>(rng: &mut R, basis: Basis, n: usize, degrees: &[u32], terms: usize) -> PhasePolynomial<Exact> {
    let mut out = Vec::new();
    for _ in 0..terms {
        let deg = degrees[rng.gen_range(0..degrees.len())];
        let all = MultiIndex::all_of_degree(2 * n, deg);
        let m = all[rng.gen_range(0..all.len())].clone();
        let mut c = q(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        if basis == Basis::Complex && rng.gen_bool(0.5) {
            c = c * Exact::i();
        }
        out.push((m, c));
    }
    let mut p = PhasePolynomial::zero(basis, n);
    for (m, c) in out {
        p = p.add(&PhasePolynomial::monomial(basis, n, m, c)).unwrap();
    }
    p
}

/// Random real float polynomial, coefficients uniform in `[-1, 1]`.
pub fn random_float<R: Rng>(rng: &mut R, n: usize, degrees: &[u32], terms: usize) -> PhasePolynomial<Float> {
    let mut p = PhasePolynomial::zero(Basis::Real, n);
    for _ in 0..terms {
        let deg = degrees[rng.gen_range(0..degrees.len())];
        let all = MultiIndex::all_of_degree(2 * n, deg);
        let m = all[rng.gen_range(0..all.len())].clone();
        let c = Float::new(rng.gen_range(-1.0..1.0), 0.0);
        p = p.add(&PhasePolynomial::monomial(Basis::Real, n, m, c)).unwrap();
    }
    p
}

/// Time-1 flow of `ẋ = ∂G/∂ξ`, `ξ̇ = −∂G/∂x` by classical RK4.
pub fn flow(g: &PhasePolynomial<Float>, start: &[f64], steps: usize) -> Vec<f64> {
    let n = g.n();
    let grads: Vec<_> = (0..2 * n).map(|i| g.derivative(i)).collect();
    let field = |p: &[f64]| -> Vec<f64> {
        let pc: Vec<Float> = p.iter().map(|&x| Float::new(x, 0.0)).collect();
        let d: Vec<f64> = grads.iter().map(|gi| gi.evaluate(&pc).unwrap().re).collect();
        (0..2 * n)
            .map(|i| if i < n { d[n + i] } else { -d[i - n] })
            .collect()
    };
    let dt = 1.0 / steps as f64;
    let mut y = start.to_vec();
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..steps {
        let k1 = field(&y);
        let k2 = field(&axpy(&y, &k1, dt / 2.0));
        let k3 = field(&axpy(&y, &k2, dt / 2.0));
        let k4 = field(&axpy(&y, &k3, dt));
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

pub fn eval_real(p: &PhasePolynomial<Float>, x: &[f64]) -> f64 {
    let pc: Vec<Float> = x.iter().map(|&v| Float::new(v, 0.0)).collect();
    p.evaluate(&pc).unwrap().re
}

/// Worst discrepancy between `exp(ad_G)H` truncated at `2·n_max` and
/// `H ∘ Φ_G` over sample points of radius `r`.
pub fn lie_flow_discrepancy(h: &PhasePolynomial<Float>, g: &PhasePolynomial<Float>, n_max: u32, directions: &[Vec<f64>], r: f64) -> f64 {
    let transformed = bnf_core::bnf::lie_transform(h, g, 2 * n_max).unwrap();
    directions
        .iter()
        .map(|dir| {
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let p: Vec<f64> = dir.iter().map(|x| r * x / norm).collect();
            let end = flow(g, &p, 64);
            (eval_real(&transformed, &p) - eval_real(h, &end)).abs()
        })
        .fold(0.0, f64::max)
}
