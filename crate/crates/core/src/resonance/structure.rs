use num_complex::Complex64;

use super::fit::least_squares_real;
use super::ResonanceList;
use crate::error::{Error, Result};

/// `E₀`, signature and frequencies read off resonance data; coordinates
/// are ordered elliptic first, ascending `u` within each block (labeled
/// input keeps its own order).
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub n: usize,
    pub d: usize,
    pub e0: f64,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureOptions {
    /// Dimension, when not implied by labels.
    pub n: Option<usize>,
    /// A gap counts as elliptic (hyperbolic) when its imaginary (real) part
    /// is below this fraction of the other part.
    pub ratio_threshold: f64,
    /// Tolerance for "integer combination of earlier gaps", as a fraction of
    /// the smallest gap.
    pub combination_tol: f64,
}

impl Default for StructureOptions {
    fn default() -> Self {
        StructureOptions {
            n: None,
            ratio_threshold: 0.25,
            combination_tol: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Elliptic,
    Hyperbolic,
}

fn classify(gap: Complex64, threshold: f64) -> Result<(Kind, f64)> {
    if gap.re > 0.0 && gap.im.abs() <= threshold * gap.re {
        Ok((Kind::Elliptic, gap.re))
    } else if gap.im < 0.0 && gap.re.abs() <= threshold * -gap.im {
        Ok((Kind::Hyperbolic, -gap.im))
    } else {
        Err(Error::AmbiguousGap {
            gap: format!("{} {:+}i", gap.re, gap.im),
        })
    }
}

/// Index of the ground value: smallest `Re v + |Im v|`.
fn ground_index(values: &[Complex64]) -> Option<usize> {
    (0..values.len()).min_by(|&a, &b| {
        let ka = values[a].re + values[a].im.abs();
        let kb = values[b].re + values[b].im.abs();
        ka.total_cmp(&kb)
    })
}

fn explained(gap: Complex64, gens: &[Complex64], tol: f64) -> bool {
    fn rec(rest: Complex64, gens: &[Complex64], tol: f64, used: bool) -> bool {
        if used && rest.norm() <= tol {
            return true;
        }
        let Some((g, tail)) = gens.split_first() else {
            return false;
        };
        let max_m = (rest.norm() / g.norm()).ceil() as u32 + 1;
        (0..=max_m).any(|m| rec(rest - *g * m as f64, tail, tol, used || m > 0))
    }
    rec(gap, gens, tol, false)
}

/// Fundamental gaps `2ω_j h` of one unlabeled list, smallest first.
fn unlabeled_gaps(list: &ResonanceList, n: Option<usize>, opts: &StructureOptions) -> Result<(Complex64, Vec<Complex64>)> {
    let g_idx = ground_index(&list.values)
        .ok_or_else(|| Error::Precondition(format!("no resonances at h = {}", list.h)))?;
    let ground = list.values[g_idx];
    let mut gaps: Vec<Complex64> = list
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != g_idx)
        .map(|(_, v)| v - ground)
        .collect();
    gaps.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut gens: Vec<Complex64> = Vec::new();
    for gap in gaps {
        if n.is_some_and(|n| gens.len() >= n) {
            break;
        }
        if let Some(first) = gens.first() {
            let largest = gens.iter().map(|g| g.norm()).fold(0.0, f64::max);
            // beyond this the anharmonic drift blurs the lattice
            if n.is_none() && gap.norm() > 4.0 * largest {
                break;
            }
            if explained(gap, &gens, opts.combination_tol * first.norm()) {
                continue;
            }
        }
        if gap.norm() == 0.0 {
            return Err(Error::Precondition(format!("degenerate ground value at h = {}", list.h)));
        }
        gens.push(gap);
    }
    if let Some(n) = n {
        if gens.len() < n {
            return Err(Error::Precondition(format!(
                "found {} of {n} excitation gaps at h = {}",
                gens.len(),
                list.h
            )));
        }
    }
    Ok((ground, gens))
}

/// Ground value and `e_j` gaps of one labeled list.
fn labeled_gaps(list: &ResonanceList) -> Result<(Complex64, Vec<Complex64>)> {
    let n = list.label_dim().unwrap_or(0);
    let find = |k: &[u32]| {
        list.labeled()
            .find(|(l, _)| *l == k)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Precondition(format!("label {k:?} missing at h = {}", list.h)))
    };
    let zero = vec![0; n];
    let ground = find(&zero)?;
    let mut gaps = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = zero.clone();
        e[j] = 1;
        gaps.push(find(&e)? - ground);
    }
    Ok((ground, gaps))
}

/// Estimates `(E₀, d, u)` from lists at two or more distinct `h`.
///
/// `E₀` is extrapolated from the ground values (linear in `h`; quadratic
/// with three or more `h`), `u_j` from the gaps `≈ 2ω_j h` the same way.
pub fn estimate_structure(lists: &[ResonanceList], opts: &StructureOptions) -> Result<Structure> {
    let mut hs: Vec<f64> = lists.iter().map(|l| l.h).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    if hs.len() < 2 {
        return Err(Error::Precondition("structure estimation needs at least two distinct h".into()));
    }
    let labeled = lists.iter().all(|l| l.labels.is_some());
    let n_hint = if labeled {
        let dims: Vec<usize> = lists.iter().filter_map(ResonanceList::label_dim).collect();
        if dims.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidSpec("label dimensions differ between lists".into()));
        }
        dims.first().copied()
    } else {
        opts.n
    };

    let mut per_h = Vec::new();
    for list in lists {
        let (ground, gaps) = if labeled {
            labeled_gaps(list)?
        } else {
            unlabeled_gaps(list, n_hint, opts)?
        };
        let mut coords = gaps
            .iter()
            .map(|&g| classify(g, opts.ratio_threshold).map(|(k, s)| (k, s / (2.0 * list.h))))
            .collect::<Result<Vec<_>>>()?;
        if labeled {
            let first_hyp = coords.iter().position(|c| c.0 == Kind::Hyperbolic).unwrap_or(coords.len());
            if coords[first_hyp..].iter().any(|c| c.0 == Kind::Elliptic) {
                return Err(Error::Precondition(
                    "labels must list elliptic coordinates before hyperbolic ones".into(),
                ));
            }
        } else {
            coords.sort_by(|a, b| {
                (a.0 == Kind::Hyperbolic)
                    .cmp(&(b.0 == Kind::Hyperbolic))
                    .then(a.1.total_cmp(&b.1))
            });
        }
        per_h.push((list.h, ground, coords));
    }

    let (_, _, first) = &per_h[0];
    for (h, _, coords) in &per_h {
        let same = coords.len() == first.len() && coords.iter().zip(first).all(|(a, b)| a.0 == b.0);
        if !same {
            return Err(Error::Precondition(format!(
                "signature at h = {h} differs from h = {}",
                per_h[0].0
            )));
        }
    }
    let n = first.len();
    let d = first.iter().filter(|c| c.0 == Kind::Hyperbolic).count();

    let degree = if hs.len() >= 3 { 2 } else { 1 };
    let xs: Vec<f64> = per_h.iter().map(|p| p.0).collect();
    let extrapolate = |ys: Vec<f64>| -> Result<f64> {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&h| (0..=degree).map(|p| h.powi(p)).collect()).collect();
        Ok(least_squares_real(&rows, &ys)?[0])
    };
    let e0 = extrapolate(per_h.iter().map(|p| p.1.re).collect())?;
    let mut u = Vec::with_capacity(n);
    for j in 0..n {
        let uj = extrapolate(per_h.iter().map(|p| p.2[j].1).collect())?;
        if !(uj > 0.0) {
            return Err(Error::Numerical(format!("extrapolated frequency u_{j} = {uj} is not positive")));
        }
        u.push(uj);
    }
    Ok(Structure { n, d, e0, u })
}
