use num_complex::Complex64;

use super::ResonanceList;
use crate::bnf::NormalForm;
use crate::error::{Error, Result};
use crate::number::Coeff;

/// All `k ∈ ℕⁿ` with `max_j k_j ≤ k_max`, lexicographic.
pub fn lattice_points(n: usize, k_max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=k_max).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Exponent `δ` with `(2K+1)h = h^δ`: the disc radius covered by `K`.
pub fn implied_delta(h: f64, k_max: u32) -> f64 {
    ((2 * k_max + 1) as f64 * h).ln() / h.ln()
}

/// `E₀ + Σ_N h̃_N(ι)` at `ι_j = (2k_j + 1)h` for every `k` with
/// `max_j k_j ≤ k_max`.
pub fn generate_resonances<C: Coeff>(nf: &NormalForm<C>, h: f64, k_max: u32) -> Result<ResonanceList> {
    if !nf.scaled {
        return Err(Error::Precondition("the generator needs the scaled normal form".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidSpec(format!("h must be positive, got {h}")));
    }
    let nf = nf.to_float();
    let e0 = nf.e0.to_f64();
    let labels = lattice_points(nf.n, k_max);
    let values = labels
        .iter()
        .map(|k| {
            let iota: Vec<Complex64> = k
                .iter()
                .map(|&kj| Complex64::new((2 * kj + 1) as f64 * h, 0.0))
                .collect();
            Ok(nf.evaluate(&iota)? + e0)
        })
        .collect::<Result<Vec<_>>>()?;
    ResonanceList::new(h, values, Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnf::{normal_form, BnfOptions};
    use crate::model::PotentialSpec;
    use crate::number::{Exact, Real};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-13 * (1.0 + b.norm())
    }

    #[test]
    fn barrier_top() {
        let spec = PotentialSpec::quadratic(1, 1, Real::ratio(1, 2), vec![Real::int(1)]).unwrap();
        let (nf, _) = normal_form::<Exact>(&spec, 3, &BnfOptions::default()).unwrap();
        let list = generate_resonances(&nf, 0.01, 5).unwrap();
        assert_eq!(list.len(), 6);
        for (k, v) in list.labeled() {
            assert!(close(v, Complex64::new(0.5, -((2 * k[0] + 1) as f64) * 0.01)));
        }
    }

    #[test]
    fn mixed_quadratic() {
        let spec =
            PotentialSpec::quadratic(2, 1, Real::zero(), vec![Real::int(1), Real::Float(2f64.sqrt())]).unwrap();
        let (nf, _) = normal_form::<crate::number::Float>(&spec, 2, &BnfOptions::default()).unwrap();
        let h = 0.02;
        let list = generate_resonances(&nf, h, 3).unwrap();
        assert_eq!(list.len(), 16);
        for (k, v) in list.labeled() {
            let want = Complex64::new(
                (2 * k[0] + 1) as f64 * h,
                -(2f64.sqrt()) * (2 * k[1] + 1) as f64 * h,
            );
            assert!(close(v, want), "{k:?}");
        }
    }

    #[test]
    fn quartic_oscillator() {
        let beta = 0.3;
        let spec = PotentialSpec::new(1, 0, Real::zero(), vec![Real::int(1)], [(vec![2], Real::Float(beta))]).unwrap();
        let (nf, _) = normal_form::<Exact>(&spec, 2, &BnfOptions::default()).unwrap();
        let h = 0.05;
        for (k, v) in generate_resonances(&nf, h, 4).unwrap().labeled() {
            let iota = (2 * k[0] + 1) as f64 * h;
            assert!(close(v, Complex64::new(iota + 3.0 * beta / 8.0 * iota * iota, 0.0)));
        }
    }

    #[test]
    fn k_max_zero_and_lattice() {
        assert_eq!(lattice_points(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(lattice_points(0, 3), vec![Vec::<u32>::new()]);
        let spec = PotentialSpec::quadratic(1, 1, Real::zero(), vec![Real::int(1)]).unwrap();
        let (nf, _) = normal_form::<Exact>(&spec, 2, &BnfOptions::default()).unwrap();
        assert_eq!(generate_resonances(&nf, 0.1, 0).unwrap().len(), 1);
        assert!((implied_delta(0.01, 0) - 1.0).abs() < 1e-12);
    }
}
