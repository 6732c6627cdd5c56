//! Brute-force resonances for `n ≤ 2`: eigenvalues of the complex-scaled
//! operator `Σ P_j² + V(X) − E₀` in a truncated Hermite basis.
//!
//! Each coordinate uses the oscillator basis adapted to `u_j`, so the
//! quadratic part is diagonal. Powers of `X` are formed in a basis
//! enlarged by the polynomial degree and then truncated, which gives exact
//! matrix elements of the polynomial operator between retained states.
//! Hyperbolic coordinates get `X → e^{iπ/4}X`, `P → e^{−iπ/4}P`.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::resonance::ResonanceList;

pub const DEFAULT_MAX_DIM: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    /// Basis size `B` per coordinate.
    pub basis: usize,
    pub h: f64,
    /// Half-width of the real window around `E₀`.
    pub re_window: f64,
    /// Depth `W` of the imaginary window `[−W, 0]`.
    pub im_window: f64,
    pub stability_tol: f64,
    pub increment: usize,
    /// Cap on `Bⁿ` at the largest basis used.
    pub max_dim: usize,
}

impl OracleConfig {
    pub fn new(basis: usize, h: f64) -> Self {
        OracleConfig {
            basis,
            h,
            re_window: 1.0,
            im_window: 1.0,
            stability_tol: 1e-8,
            increment: 10,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.basis < 8 {
            return Err(Error::InvalidSpec(format!("basis size must be at least 8, got {}", self.basis)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidSpec(format!("h must be positive, got {}", self.h)));
        }
        if !(self.im_window > 0.0) || !(self.re_window > 0.0) {
            return Err(Error::InvalidSpec("windows must be positive".into()));
        }
        if !(self.stability_tol > 0.0) {
            return Err(Error::InvalidSpec("stability tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Dense matrix of the scaled operator (minus `E₀`) on `Bⁿ` states,
/// `k = (k_1, .., k_n)` stored row-major with `k_n` fastest.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub n: usize,
    pub basis: usize,
    pub matrix: DMatrix<Complex64>,
    /// All entries real (no hyperbolic coordinate).
    pub real: bool,
}

/// Oscillator `X`, `P` on `B` states for the frequency `u`:
/// `P² + u²X²` is diagonal with entries `u(2k+1)h`.
pub fn ladder_matrices_u(b: usize, h: f64, u: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let mut x = DMatrix::zeros(b, b);
    let mut p = DMatrix::zeros(b, b);
    let cx = (h / (2.0 * u)).sqrt();
    let cp = (h * u / 2.0).sqrt();
    for k in 1..b {
        let s = (k as f64).sqrt();
        // a|k⟩ = √k |k−1⟩
        x[(k - 1, k)] = Complex64::new(cx * s, 0.0);
        x[(k, k - 1)] = Complex64::new(cx * s, 0.0);
        p[(k - 1, k)] = Complex64::new(0.0, -cp * s);
        p[(k, k - 1)] = Complex64::new(0.0, cp * s);
    }
    (x, p)
}

/// `ladder_matrices_u` with `u = 1`.
pub fn ladder_matrices(b: usize, h: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    ladder_matrices_u(b, h, 1.0)
}

/// Per-coordinate pieces: `[P², X², X⁴, ..]` truncated to `B` states, with
/// the scaling phases applied.
fn coordinate_factors(b: usize, h: f64, u: f64, max_pow: u32, hyperbolic: bool) -> (DMatrix<Complex64>, Vec<DMatrix<Complex64>>) {
    let ext = b + 2 * max_pow as usize + 2;
    let (x, p) = ladder_matrices_u(ext, h, u);
    let phase = |m: u32| -> Complex64 {
        if hyperbolic {
            // (e^{iπ/4})^{2m} = i^m
            Complex64::i().powu(m)
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    let p2_phase = if hyperbolic { -Complex64::i() } else { Complex64::new(1.0, 0.0) };
    let p2 = (&p * &p).view((0, 0), (b, b)).into_owned() * p2_phase;
    let x2 = &x * &x;
    let mut powers = Vec::with_capacity(max_pow as usize + 1);
    let mut acc = DMatrix::<Complex64>::identity(ext, ext);
    powers.push(DMatrix::identity(b, b));
    for m in 1..=max_pow {
        acc = &acc * &x2;
        powers.push(acc.view((0, 0), (b, b)).into_owned() * phase(m));
    }
    (p2, powers)
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// `Σ P_j² + V(X) − E₀` after complex scaling, in the adapted basis.
pub fn assemble_scaled(spec: &PotentialSpec, basis: usize, h: f64, max_dim: usize) -> Result<DenseOperator> {
    spec.validate()?;
    let n = spec.n;
    if n == 0 || n > 2 {
        return Err(Error::Precondition(format!("the oracle supports n = 1, 2 (got {n})")));
    }
    let dim = basis.checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > max_dim {
        return Err(Error::TooLarge { dim, cap: max_dim });
    }
    let max_pow: Vec<u32> = (0..n)
        .map(|j| spec.coeffs.keys().map(|a| a.get(j)).max().unwrap_or(0).max(1))
        .collect();
    let factors: Vec<_> = (0..n)
        .map(|j| {
            coordinate_factors(basis, h, spec.u[j].to_f64(), max_pow[j], !spec.is_elliptic(j))
        })
        .collect();

    let id = DMatrix::<Complex64>::identity(basis, basis);
    let lift = |j: usize, m: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        match (n, j) {
            (1, _) => m.clone(),
            (_, 0) => kron(m, &id),
            _ => kron(&id, m),
        }
    };

    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for (j, (p2, powers)) in factors.iter().enumerate() {
        let u = spec.u[j].to_f64();
        let sign = if spec.is_elliptic(j) { 1.0 } else { -1.0 };
        let quad = p2 + &powers[1] * Complex64::new(sign * u * u, 0.0);
        mat += lift(j, &quad);
    }
    for (alpha, c) in &spec.coeffs {
        let c = Complex64::new(c.to_f64(), 0.0);
        let term = match n {
            1 => factors[0].1[alpha.get(0) as usize].clone(),
            _ => kron(&factors[0].1[alpha.get(0) as usize], &factors[1].1[alpha.get(1) as usize]),
        };
        mat += term * c;
    }
    if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    Ok(DenseOperator {
        n,
        basis,
        matrix: mat,
        real: spec.d == 0,
    })
}

/// All eigenvalues of the operator.
pub fn eigenvalues(op: &DenseOperator) -> Result<Vec<Complex64>> {
    if op.real {
        let re = op.matrix.map(|z| z.re);
        let sym = (&re + re.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        return Ok(eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    }
    let dim = op.matrix.nrows();
    let schur = Schur::try_new(op.matrix.clone(), f64::EPSILON, 100 * dim.max(10))
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..dim).map(|i| t[(i, i)]).collect())
}

/// Stable resonances of `spec` inside the window, sorted by `|Im|` then `Re`.
pub fn oracle_resonances(spec: &PotentialSpec, cfg: &OracleConfig) -> Result<ResonanceList> {
    cfg.validate()?;
    let e0 = spec.e0.to_f64();
    let b0 = cfg.basis;
    let b1 = cfg.basis + cfg.increment.max(1);
    let small = eigenvalues(&assemble_scaled(spec, b0, cfg.h, cfg.max_dim)?)?;
    let large = eigenvalues(&assemble_scaled(spec, b1, cfg.h, cfg.max_dim)?)?;
    let slack = cfg.stability_tol;
    let inside =
        |z: &Complex64| z.re.abs() <= cfg.re_window && z.im <= slack && z.im >= -cfg.im_window;
    let mut stable: Vec<Complex64> = large
        .iter()
        .filter(|z| inside(z))
        .filter(|z| small.iter().any(|w| (*w - **z).norm() <= cfg.stability_tol))
        .map(|z| {
            // d = 0: the spectrum is real
            let z = if spec.d == 0 { Complex64::new(z.re, 0.0) } else { *z };
            z + e0
        })
        .collect();
    stable.sort_by(|a, b| {
        a.im.abs()
            .total_cmp(&b.im.abs())
            .then(a.re.total_cmp(&b.re))
    });
    ResonanceList::unlabeled(cfg.h, stable)
}
