use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{estimate_structure, label_resonances, LabelOptions, ResonanceList, Structure, StructureOptions};
use crate::bnf::NormalForm;
use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::number::{Float, Real};
use crate::poly::{ActionPolynomial, MultiIndex};
use crate::recovery::{recover_taylor, RecoveryOptions};

/// Column-normalized SVD least squares.
struct Solution {
    coef: Vec<f64>,
    /// `(VΣ⁻²Vᵀ)_jj`, in the original column scaling.
    unit_var: Vec<f64>,
    condition: f64,
}

fn solve(a: &DMatrix<f64>, ys: &[&DVector<f64>], names: &[String], rcond: f64) -> Result<Vec<Solution>> {
    let (m, p) = a.shape();
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let nrm = a.column(j).norm();
            if nrm > 0.0 {
                nrm
            } else {
                1.0
            }
        })
        .collect();
    // zero rows keep the problem and give a full set of singular vectors
    let mut an = DMatrix::zeros(m.max(p), p);
    for j in 0..p {
        for i in 0..m {
            an[(i, j)] = a[(i, j)] / scale[j];
        }
    }
    let svd = an.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().expect("u"), svd.v_t.as_ref().expect("v_t"));
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let weak: Vec<usize> = (0..sv.len()).filter(|&i| !(sv[i] > rcond * smax)).collect();
    if !weak.is_empty() {
        let mut bad: Vec<usize> = (0..p)
            .filter(|&j| weak.iter().any(|&i| vt[(i, j)].abs() > 0.1))
            .collect();
        bad.dedup();
        return Err(Error::RankDeficient(bad.into_iter().map(|j| names[j].clone()).collect()));
    }
    let mut out = Vec::new();
    for y in ys {
        let mut yp = DVector::zeros(m.max(p));
        yp.rows_mut(0, m).copy_from(y);
        let uty = u.transpose() * yp;
        let mut coef = vec![0.0; p];
        let mut unit_var = vec![0.0; p];
        for j in 0..p {
            let mut c = 0.0;
            let mut v = 0.0;
            for i in 0..sv.len() {
                c += vt[(i, j)] * uty[i] / sv[i];
                v += (vt[(i, j)] / sv[i]).powi(2);
            }
            coef[j] = c / scale[j];
            unit_var[j] = v / (scale[j] * scale[j]);
        }
        out.push(Solution {
            coef,
            unit_var,
            condition: smax / smin,
        });
    }
    Ok(out)
}

/// Ordinary least squares for a small real design; rows are predictors.
pub(crate) fn least_squares_real(rows: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    let p = rows.first().map_or(0, Vec::len);
    let a = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(ys);
    let names: Vec<String> = (0..p).map(|j| format!("column {j}")).collect();
    let mut sol = solve(&a, &[&y], &names, 1e-13)?;
    Ok(sol.remove(0).coef)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// Highest action degree `M` of the fitted polynomial.
    pub max_degree: u32,
    /// Singular values below `rcond · σ_max` make the design rank deficient.
    pub rcond: f64,
    /// Residuals above `residual_flag · h_max²` mark the fit as suspect.
    pub residual_flag: f64,
}

impl FitOptions {
    pub fn new(max_degree: u32) -> Self {
        FitOptions {
            max_degree,
            rcond: 1e-12,
            residual_flag: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedCoefficient {
    pub alpha: Vec<u32>,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nuisance {
    pub h: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub h: f64,
    pub k: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    #[serde(rename = "E0")]
    pub e0: f64,
    pub n: usize,
    pub d: usize,
    pub u: Vec<f64>,
    pub max_degree: u32,
    /// Coefficients of the scaled action polynomial, degrees `1..=M`.
    pub coefficients: Vec<FittedCoefficient>,
    /// `γ_h`: per-`h` intercept minus `E₀`, divided by `h²`.
    pub gamma: Vec<Nuisance>,
    pub residuals: Vec<Residual>,
    pub residual_norm: f64,
    pub max_residual: f64,
    pub condition: f64,
    pub data_points: usize,
    pub flagged: bool,
}

impl FitReport {
    pub fn coefficient(&self, alpha: &[u32]) -> Option<&FittedCoefficient> {
        self.coefficients.iter().find(|c| c.alpha == alpha)
    }
}

/// Least-squares fit of `v − I_h = Σ_{1≤|α|≤M} c_α ι^α` with a free
/// intercept `I_h` per `h`; then `I_h = E₀ + γ_h h²` gives `E₀`.
pub fn fit_normal_form(
    lists: &[ResonanceList],
    structure: &Structure,
    opts: &FitOptions,
) -> Result<(FitReport, NormalForm<Float>)> {
    let n = structure.n;
    if opts.max_degree < 1 {
        return Err(Error::InvalidSpec("fit degree must be at least 1".into()));
    }
    let mut hs: Vec<f64> = lists.iter().map(|l| l.h).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    if hs.len() < 2 {
        return Err(Error::Precondition("the fit needs data at two or more distinct h".into()));
    }
    let mut data: Vec<(f64, Vec<u32>, Complex64)> = Vec::new();
    for list in lists {
        if list.labels.is_none() {
            return Err(Error::Precondition("the fit needs labeled resonances".into()));
        }
        if list.label_dim().is_some_and(|m| m != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: list.label_dim().unwrap_or(0),
            });
        }
        data.extend(list.labeled().map(|(k, v)| (list.h, k.to_vec(), v)));
    }
    let monomials: Vec<MultiIndex> = (1..=opts.max_degree)
        .flat_map(|deg| MultiIndex::all_of_degree(n, deg))
        .collect();
    let mut names: Vec<String> = hs.iter().map(|h| format!("intercept(h={h})")).collect();
    names.extend(monomials.iter().map(|a| format!("iota^{:?}", a.exps())));
    let p = names.len();
    let m = data.len();
    let a = DMatrix::from_fn(m, p, |i, j| {
        let (h, k, _) = &data[i];
        if j < hs.len() {
            return if hs[j] == *h { 1.0 } else { 0.0 };
        }
        monomials[j - hs.len()]
            .exps()
            .iter()
            .zip(k)
            .map(|(&e, &kj)| ((2 * kj + 1) as f64 * h).powi(e as i32))
            .product()
    });
    let y_re = DVector::from_iterator(m, data.iter().map(|d| d.2.re));
    let y_im = DVector::from_iterator(m, data.iter().map(|d| d.2.im));
    if m < p {
        // fewer data than unknowns: name the top-degree terms
        let missing = names[hs.len()..].iter().rev().take(p - m).cloned().collect();
        return Err(Error::RankDeficient(missing));
    }
    let sols = solve(&a, &[&y_re, &y_im], &names, opts.rcond)?;
    let (sr, si) = (&sols[0], &sols[1]);
    let fitted = |i: usize| -> Complex64 {
        let row = a.row(i);
        let re: f64 = (0..p).map(|j| row[j] * sr.coef[j]).sum();
        let im: f64 = (0..p).map(|j| row[j] * si.coef[j]).sum();
        Complex64::new(re, im)
    };
    let residuals: Vec<Residual> = (0..m)
        .map(|i| {
            let r = data[i].2 - fitted(i);
            Residual {
                h: data[i].0,
                k: data[i].1.clone(),
                re: r.re,
                im: r.im,
            }
        })
        .collect();
    let rss_re: f64 = residuals.iter().map(|r| r.re * r.re).sum();
    let rss_im: f64 = residuals.iter().map(|r| r.im * r.im).sum();
    let dof = (m - p).max(1) as f64;
    let (var_re, var_im) = (rss_re / dof, rss_im / dof);
    let residual_norm = (rss_re + rss_im).sqrt();
    let max_residual = residuals.iter().map(|r| r.re.hypot(r.im)).fold(0.0, f64::max);

    let intercepts: Vec<Complex64> = (0..hs.len()).map(|j| Complex64::new(sr.coef[j], si.coef[j])).collect();
    let rows: Vec<Vec<f64>> = hs.iter().map(|h| vec![1.0, h * h]).collect();
    let e0 = least_squares_real(&rows, &intercepts.iter().map(|c| c.re).collect::<Vec<_>>())?[0];
    let gamma = hs
        .iter()
        .zip(&intercepts)
        .map(|(h, c)| Nuisance {
            h: *h,
            re: (c.re - e0) / (h * h),
            im: c.im / (h * h),
        })
        .collect();

    let coefficients: Vec<FittedCoefficient> = monomials
        .iter()
        .enumerate()
        .map(|(i, alpha)| {
            let j = hs.len() + i;
            FittedCoefficient {
                alpha: alpha.exps().to_vec(),
                re: sr.coef[j],
                im: si.coef[j],
                se_re: (var_re * sr.unit_var[j]).sqrt(),
                se_im: (var_im * si.unit_var[j]).sqrt(),
            }
        })
        .collect();

    let ell = n - structure.d;
    let mut u = Vec::with_capacity(n);
    for j in 0..n {
        let mut unit = vec![0; n];
        unit[j] = 1;
        let c = coefficients.iter().find(|c| c.alpha == unit).expect("linear term");
        let uj = if j < ell { c.re } else { -c.im };
        if !(uj > 0.0) {
            return Err(Error::Numerical(format!("fitted frequency u_{j} = {uj} is not positive")));
        }
        u.push(uj);
    }

    let mut actions = Vec::new();
    for deg in 2..=opts.max_degree {
        let terms = coefficients
            .iter()
            .filter(|c| c.alpha.iter().sum::<u32>() == deg)
            .map(|c| (MultiIndex::new(c.alpha.clone()), Float::new(c.re, c.im)));
        actions.push(ActionPolynomial::from_terms(n, terms)?);
    }
    let nf = NormalForm {
        n,
        d: structure.d,
        e0: Real::Float(e0),
        u: u.iter().map(|&x| Real::Float(x)).collect(),
        max_order: opts.max_degree,
        actions,
        scaled: true,
    };
    let h_max = hs.last().copied().unwrap_or(0.0);
    let report = FitReport {
        e0,
        n,
        d: structure.d,
        u,
        max_degree: opts.max_degree,
        coefficients,
        gamma,
        residuals,
        residual_norm,
        max_residual,
        condition: sr.condition,
        data_points: m,
        flagged: max_residual > opts.residual_flag * h_max * h_max,
    };
    Ok((report, nf))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvertOptions {
    pub structure: StructureOptions,
    pub label: LabelOptions,
    /// Fit degree; at least the recovery order.
    pub fit_degree: Option<u32>,
    pub rcond: f64,
    pub residual_flag: f64,
    /// Admissible relative imaginary part of recovered coefficients.
    pub imag_tol: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            structure: StructureOptions::default(),
            label: LabelOptions::default(),
            fit_degree: None,
            rcond: 1e-12,
            residual_flag: 1.0,
            imag_tol: 1e-2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InversionResult {
    pub spec: PotentialSpec,
    pub report: FitReport,
    pub structure: Structure,
    pub normal_form: NormalForm<Float>,
    /// Values left unlabeled, per input list.
    pub unmatched: Vec<usize>,
}

/// Structure estimate, labeling, fit and recovery of `c_α`, `|α| ≤ n_target`.
pub fn invert_from_resonances(lists: &[ResonanceList], n_target: u32, opts: &InvertOptions) -> Result<InversionResult> {
    let structure = estimate_structure(lists, &opts.structure)?;
    let mut labeled = Vec::with_capacity(lists.len());
    let mut unmatched = Vec::with_capacity(lists.len());
    for list in lists {
        if list.labels.is_some() {
            let keep = |k: &[u32]| opts.label.k_max.map_or(true, |km| k.iter().all(|&x| x <= km));
            let (labels, values): (Vec<Vec<u32>>, Vec<Complex64>) =
                list.labeled().filter(|(k, _)| keep(k)).map(|(k, v)| (k.to_vec(), v)).unzip();
            unmatched.push(0);
            labeled.push(ResonanceList::new(list.h, values, Some(labels))?);
        } else {
            let out = label_resonances(list, &structure, &opts.label)?;
            unmatched.push(out.unmatched.len());
            labeled.push(out.list);
        }
    }
    let degree = opts.fit_degree.unwrap_or(n_target).max(n_target).max(1);
    let fit_opts = FitOptions {
        max_degree: degree,
        rcond: opts.rcond,
        residual_flag: opts.residual_flag,
    };
    let (report, normal_form) = fit_normal_form(&labeled, &structure, &fit_opts)?;
    let rec_opts = RecoveryOptions {
        imag_tol: opts.imag_tol,
        ..Default::default()
    };
    let spec = recover_taylor(&normal_form, n_target, &rec_opts)?;
    Ok(InversionResult {
        spec,
        report,
        structure,
        normal_form,
        unmatched,
    })
}
