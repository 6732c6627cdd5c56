//! Resonance lattices: forward generation from a normal form, labeling of
//! raw values, structure estimation, least-squares fits of the action
//! polynomial, and the inverse pipeline down to Taylor coefficients.

mod fit;
mod generate;
mod label;
mod structure;

pub use fit::{
    fit_normal_form, invert_from_resonances, FitOptions, FitReport, FittedCoefficient, InversionResult, InvertOptions,
    Nuisance, Residual,
};
pub use generate::{generate_resonances, implied_delta, lattice_points};
pub use label::{label_resonances, LabelOptions, Labeling};
pub use structure::{estimate_structure, Structure, StructureOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resonances at one value of `h`, optionally labeled by `k ∈ ℕⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceList {
    pub h: f64,
    pub values: Vec<Complex64>,
    pub labels: Option<Vec<Vec<u32>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceListJson {
    pub h: f64,
    pub values: Vec<ComplexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<u32>>>,
}

impl ResonanceList {
    pub fn new(h: f64, values: Vec<Complex64>, labels: Option<Vec<Vec<u32>>>) -> Result<Self> {
        let list = ResonanceList { h, values, labels };
        list.validate()?;
        Ok(list)
    }

    pub fn unlabeled(h: f64, values: Vec<Complex64>) -> Result<Self> {
        Self::new(h, values, None)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidSpec(format!("h must be positive, got {}", self.h)));
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidSpec("non-finite resonance value".into()));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.values.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.values.len(),
                    found: labels.len(),
                });
            }
            let n = labels.first().map_or(0, Vec::len);
            if labels.iter().any(|k| k.len() != n) {
                return Err(Error::InvalidSpec("labels of different lengths".into()));
            }
            let mut seen = std::collections::BTreeSet::new();
            for k in labels {
                if !seen.insert(k) {
                    return Err(Error::LabelCollision { label: k.clone() });
                }
            }
        }
        Ok(())
    }

    /// Dimension implied by the labels.
    pub fn label_dim(&self) -> Option<usize> {
        self.labels.as_ref().and_then(|l| l.first().map(Vec::len))
    }

    /// `(k, value)` pairs; empty when unlabeled.
    pub fn labeled(&self) -> impl Iterator<Item = (&[u32], Complex64)> + '_ {
        self.labels
            .iter()
            .flat_map(|l| l.iter().map(Vec::as_slice))
            .zip(self.values.iter().copied())
    }

    pub fn to_json(&self) -> ResonanceListJson {
        ResonanceListJson {
            h: self.h,
            values: self.values.iter().map(|v| ComplexJson { re: v.re, im: v.im }).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(json: &ResonanceListJson) -> Result<Self> {
        Self::new(
            json.h,
            json.values.iter().map(|v| Complex64::new(v.re, v.im)).collect(),
            json.labels.clone(),
        )
    }
}
