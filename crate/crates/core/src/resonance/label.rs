use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{ResonanceList, Structure};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LabelOptions {
    /// Matching radius is `tol_factor · h² · (1 + |k|²)`.
    pub tol_factor: f64,
    /// Keep only labels with `max_j k_j ≤ k_max`.
    pub k_max: Option<u32>,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            tol_factor: 1.0,
            k_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    pub list: ResonanceList,
    pub unmatched: Vec<Complex64>,
}

fn lattice_value(s: &Structure, h: f64, k: &[u32]) -> Complex64 {
    let ell = s.n - s.d;
    let mut z = Complex64::new(s.e0, 0.0);
    for (j, &kj) in k.iter().enumerate() {
        let step = s.u[j] * (2 * kj + 1) as f64 * h;
        if j < ell {
            z.re += step;
        } else {
            z.im -= step;
        }
    }
    z
}

fn radius(tol_factor: f64, h: f64, k: &[u32]) -> f64 {
    let k2: f64 = k.iter().map(|&x| (x as f64).powi(2)).sum();
    tol_factor * h * h * (1.0 + k2)
}

/// Nearest point of the leading-order lattice. A coordinate alone in its
/// block is found by rounding; blocks of several coordinates are searched.
fn nearest(s: &Structure, h: f64, v: Complex64) -> Option<(Vec<u32>, f64)> {
    let ell = s.n - s.d;
    let ranges: Vec<(u32, u32)> = (0..s.n)
        .map(|j| {
            let (span, block) = if j < ell { (v.re - s.e0, ell) } else { (-v.im, s.d) };
            let steps = span / (2.0 * s.u[j] * h);
            if block == 1 {
                let k = (steps - 0.5).round().max(0.0) as u32;
                (k.saturating_sub(1), k + 1)
            } else {
                (0, steps.max(0.0).ceil() as u32 + 1)
            }
        })
        .collect();
    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut k = vec![0u32; s.n];
    fn rec(j: usize, ranges: &[(u32, u32)], k: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if j == ranges.len() {
            f(k);
            return;
        }
        for kj in ranges[j].0..=ranges[j].1 {
            k[j] = kj;
            rec(j + 1, ranges, k, f);
        }
    }
    rec(0, &ranges, &mut k, &mut |k| {
        let dist = (lattice_value(s, h, k) - v).norm();
        if best.as_ref().map_or(true, |b| dist < b.1) {
            best = Some((k.to_vec(), dist));
        }
    });
    best
}

/// Assigns each value to its nearest point of the leading-order lattice
/// `E₀ + Σ_ell u_j(2k_j+1)h − iΣ_hyp u_j(2k_j+1)h` within the radius.
///
/// Errors: two values on one label (collision); a label below a matched
/// label in the componentwise order left unmatched (gap). Values whose
/// label exceeds `k_max` are dropped without error; values away from
/// every lattice point are reported as unmatched.
pub fn label_resonances(raw: &ResonanceList, s: &Structure, opts: &LabelOptions) -> Result<Labeling> {
    if s.u.len() != s.n || s.d > s.n {
        return Err(Error::DimensionMismatch {
            expected: s.n,
            found: s.u.len(),
        });
    }
    let h = raw.h;
    let mut by_label: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    let mut unmatched = Vec::new();
    for &v in &raw.values {
        let Some((k, dist)) = nearest(s, h, v) else {
            unmatched.push(v);
            continue;
        };
        let beyond = opts.k_max.is_some_and(|km| k.iter().any(|&x| x > km));
        if dist > radius(opts.tol_factor, h, &k) {
            unmatched.push(v);
            continue;
        }
        if beyond {
            continue;
        }
        if by_label.insert(k.clone(), v).is_some() {
            return Err(Error::LabelCollision { label: k });
        }
    }
    for k in by_label.keys() {
        for j in 0..k.len() {
            if k[j] == 0 {
                continue;
            }
            let mut below = k.clone();
            below[j] -= 1;
            if !by_label.contains_key(&below) {
                return Err(Error::LabelGap { label: below });
            }
        }
    }
    let (labels, values): (Vec<_>, Vec<_>) = by_label.into_iter().unzip();
    Ok(Labeling {
        list: ResonanceList::new(h, values, Some(labels))?,
        unmatched,
    })
}
