use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};
use crate::linalg::{c, CMatrix};
use crate::state::{BasisKet, DensityMatrix};

/// On-disk form of a density matrix: row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub basis: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unmeasured: Option<Vec<Vec<bool>>>,
}

impl MatrixFile {
    pub fn from_density(rho: &DensityMatrix, unmeasured: Option<&[Vec<bool>]>) -> Result<Self> {
        let n = rho.dim();
        if let Some(mask) = unmeasured {
            if mask.len() != n || mask.iter().any(|r| r.len() != n) {
                return Err(SwapError::InvalidArgument(format!("mask is not {n}x{n}")));
            }
        }
        let m = rho.matrix();
        Ok(Self {
            basis: rho.basis().iter().map(BasisKet::label).collect(),
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
            unmeasured: unmeasured.map(<[_]>::to_vec),
        })
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let n = self.basis.len();
        let square = |rows: &[Vec<f64>]| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&self.re) || !square(&self.im) {
            return Err(SwapError::Parse(format!("matrix parts are not {n}x{n}")));
        }
        let basis = self.basis.iter().map(|s| BasisKet::parse_label(s)).collect::<Result<Vec<_>>>()?;
        DensityMatrix::new(basis, CMatrix::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

pub fn matrix_to_json(rho: &DensityMatrix, unmeasured: Option<&[Vec<bool>]>) -> Result<String> {
    let file = MatrixFile::from_density(rho, unmeasured)?;
    serde_json::to_string_pretty(&file).map_err(|e| SwapError::Parse(e.to_string()))
}

pub fn matrix_from_json(text: &str) -> Result<(DensityMatrix, Option<Vec<Vec<bool>>>)> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| SwapError::Parse(e.to_string()))?;
    Ok((file.to_density()?, file.unmeasured))
}
