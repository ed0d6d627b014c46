use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::IndexSet;
use crate::error::{Error, Result};

use super::coeffs::HermiteCoeffs;

pub const ORDERING: &str = "graded-lex";

/// On-disk form: `{"d", "N", "ordering": "graded-lex", "coeffs": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub ordering: String,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&HermiteCoeffs> for CoeffFile {
    fn from(phi: &HermiteCoeffs) -> Self {
        Self {
            d: phi.dim(),
            n: phi.degree(),
            ordering: ORDERING.to_owned(),
            coeffs: phi.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl From<HermiteCoeffs> for CoeffFile {
    fn from(phi: HermiteCoeffs) -> Self {
        Self::from(&phi)
    }
}

impl TryFrom<CoeffFile> for HermiteCoeffs {
    type Error = Error;

    fn try_from(file: CoeffFile) -> Result<Self> {
        if file.ordering != ORDERING {
            return Err(Error::InvalidArgument(format!("unsupported ordering {:?}", file.ordering)));
        }
        let basis = Arc::new(IndexSet::new(file.d, file.n)?);
        let coeffs = file.coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        HermiteCoeffs::from_vec(basis, coeffs)
    }
}

impl HermiteCoeffs {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CoeffFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<CoeffFile>(text)?.try_into()
    }
}
