use serde::{Deserialize, Serialize};

use super::{ActionPolynomial, Basis, MultiIndex, PhasePolynomial};
use crate::error::{Error, Result};
use crate::number::Coeff;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub re: String,
    pub im: String,
}

/// Wire form of a [`PhasePolynomial`]; exact coefficients are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub basis: String,
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionTermJson {
    pub alpha: Vec<u32>,
    pub re: String,
    pub im: String,
}

/// One homogeneous piece `h_N` of a normal form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionPolyJson {
    #[serde(rename = "N")]
    pub degree: u32,
    pub terms: Vec<ActionTermJson>,
}

impl<C: Coeff> PhasePolynomial<C> {
    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            basis: self.basis().name().to_string(),
            n: self.n(),
            terms: self
                .terms()
                .map(|(m, c)| {
                    let (re, im) = c.to_strings();
                    TermJson {
                        exp: m.exps().to_vec(),
                        re,
                        im,
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self> {
        let basis = match json.basis.as_str() {
            "real" => Basis::Real,
            "complex" => Basis::Complex,
            other => return Err(Error::Parse(format!("unknown basis {other:?}"))),
        };
        let terms = json
            .terms
            .iter()
            .map(|t| Ok((MultiIndex::new(t.exp.clone()), C::parse_parts(&t.re, &t.im)?)))
            .collect::<Result<Vec<_>>>()?;
        PhasePolynomial::from_terms(basis, json.n, terms)
    }
}

impl<C: Coeff> ActionPolynomial<C> {
    pub fn to_json(&self, degree: u32) -> ActionPolyJson {
        ActionPolyJson {
            degree,
            terms: self
                .terms()
                .map(|(m, c)| {
                    let (re, im) = c.to_strings();
                    ActionTermJson {
                        alpha: m.exps().to_vec(),
                        re,
                        im,
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(n: usize, json: &ActionPolyJson) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                let m = MultiIndex::new(t.alpha.clone());
                if m.degree() != json.degree {
                    return Err(Error::Parse(format!(
                        "term {:?} does not have action degree {}",
                        t.alpha, json.degree
                    )));
                }
                Ok((m, C::parse_parts(&t.re, &t.im)?))
            })
            .collect::<Result<Vec<_>>>()?;
        ActionPolynomial::from_terms(n, terms)
    }
}
