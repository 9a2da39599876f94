use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigendecomposition, hermiticity_residual, max_abs_diff, ComplexMatrix,
    ComplexVector, MatrixJson,
};

/// Tolerance for the Hermiticity, positivity, and trace checks on states.
pub const STATE_TOL: f64 = 1e-10;

/// Tolerance for `U^dagger U = 1`.
pub const UNITARY_TOL: f64 = 1e-10;

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `matrix`, reporting the first violated invariant.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Shape {
                context: "density operator",
                expected: "non-empty square matrix".into(),
                actual: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density operator"));
        }
        let herm = hermiticity_residual(&matrix);
        if herm >= STATE_TOL {
            return Err(Error::Constraint {
                constraint: "hermiticity",
                residual: herm,
            });
        }
        let tr = linalg::trace(&matrix);
        let tr_residual = (tr - linalg::c(1.0, 0.0)).norm();
        if tr_residual >= STATE_TOL {
            return Err(Error::Constraint {
                constraint: "unit trace",
                residual: tr_residual,
            });
        }
        let eig = hermitian_eigendecomposition(&matrix)?;
        let min = eig.values[0];
        if min <= -STATE_TOL {
            return Err(Error::Constraint {
                constraint: "positive semidefiniteness",
                residual: -min,
            });
        }
        Ok(DensityOperator { matrix })
    }

    /// `|psi><psi|` for a unit vector `psi`.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() >= STATE_TOL {
            return Err(Error::Constraint {
                constraint: "state vector normalization",
                residual: (norm - 1.0).abs(),
            });
        }
        Self::new(linalg::outer(psi))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(linalg::identity(dim).unscale(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix).re
    }

    /// `U rho U^dagger`.
    pub fn evolve(&self, u: &Unitary) -> Result<Self> {
        check_dims(self.dim(), u.dim())?;
        Self::new(u.matrix() * &self.matrix * u.matrix().adjoint())
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Self::new(linalg::tensor_product(&self.matrix, &other.matrix))
    }
}

impl TryFrom<MatrixJson> for DensityOperator {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        Self::new(ComplexMatrix::try_from(j)?)
    }
}

impl From<DensityOperator> for MatrixJson {
    fn from(d: DensityOperator) -> Self {
        MatrixJson::from(&d.matrix)
    }
}

/// A unitary matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Unitary {
    matrix: ComplexMatrix,
}

impl Unitary {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Shape {
                context: "unitary",
                expected: "non-empty square matrix".into(),
                actual: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let residual = unitarity_residual(&matrix);
        if !(residual < UNITARY_TOL) {
            return Err(Error::Constraint {
                constraint: "unitarity",
                residual,
            });
        }
        Ok(Unitary { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Unitary {
            matrix: linalg::identity(dim),
        }
    }

    /// Two-qudit swap on `C^d (x) C^d`.
    pub fn swap(d: usize) -> Self {
        let n = d * d;
        let mut m = ComplexMatrix::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                m[(b * d + a, a * d + b)] = linalg::c(1.0, 0.0);
            }
        }
        Unitary { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            matrix: self.matrix.adjoint(),
        }
    }
}

impl TryFrom<MatrixJson> for Unitary {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        Self::new(ComplexMatrix::try_from(j)?)
    }
}

impl From<Unitary> for MatrixJson {
    fn from(u: Unitary) -> Self {
        MatrixJson::from(&u.matrix)
    }
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &linalg::identity(u.ncols()))
}

pub(crate) fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag};

    #[test]
    fn rejects_each_invariant() {
        let not_herm = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.1, 0.), c(0., 0.), c(0.5, 0.)]);
        assert!(matches!(
            DensityOperator::new(not_herm),
            Err(Error::Constraint { constraint: "hermiticity", .. })
        ));
        assert!(matches!(
            DensityOperator::new(diag(&[0.5, 0.6])),
            Err(Error::Constraint { constraint: "unit trace", .. })
        ));
        match DensityOperator::new(diag(&[1.5, -0.5])) {
            Err(Error::Constraint { constraint, residual }) => {
                assert_eq!(constraint, "positive semidefiniteness");
                assert!((residual - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_load_validates() {
        let ok = r#"{"dim": 2, "entries": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}"#;
        let rho: DensityOperator = serde_json::from_str(ok).unwrap();
        assert_eq!(rho.dim(), 2);
        let bad = r#"{"dim": 2, "entries": [[[0.7, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}"#;
        let err = serde_json::from_str::<DensityOperator>(bad).unwrap_err().to_string();
        assert!(err.contains("unit trace"), "{err}");
    }

    #[test]
    fn swap_is_unitary_and_swaps() {
        let s = Unitary::swap(3);
        assert!(Unitary::new(s.matrix().clone()).is_ok());
        let a = diag(&[1.0, 2.0, 3.0]);
        let b = diag(&[5.0, 7.0, 11.0]);
        let lhs = s.matrix() * linalg::tensor_product(&a, &b) * s.matrix().adjoint();
        assert!(max_abs_diff(&lhs, &linalg::tensor_product(&b, &a)) < 1e-15);
    }

    #[test]
    fn unitary_rejects_non_unitary() {
        assert!(Unitary::new(diag(&[1.0, 2.0])).is_err());
    }
}
