//! Dense complex linear algebra shared by the quantum and entropy modules.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Tensor products use the
//! left-factor-major convention: basis vector `|a>|b>` of `C^d1 (x) C^d2` has
//! index `a * d2 + b`, so `A (x) B` is the block matrix `[A_ij * B]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

const EIGEN_MAX_SWEEPS: usize = 100_000;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |M - M^dagger|`.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `|v><v|`.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Kronecker product `A (x) B` in left-factor-major order.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Which tensor factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on `C^d1 (x) C^d2`, keeping `keep`.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    let n = d1 * d2;
    if rho.nrows() != n || rho.ncols() != n || d1 == 0 || d2 == 0 {
        return Err(Error::Shape {
            context: "partial_trace",
            expected: format!("{n}x{n} for factors ({d1}, {d2})"),
            actual: format!("{}x{}", rho.nrows(), rho.ncols()),
        });
    }
    let out = match keep {
        Subsystem::First => ComplexMatrix::from_fn(d1, d1, |a, a2| {
            (0..d2).map(|b| rho[(a * d2 + b, a2 * d2 + b)]).sum()
        }),
        Subsystem::Second => ComplexMatrix::from_fn(d2, d2, |b, b2| {
            (0..d1).map(|a| rho[(a * d2 + b, a * d2 + b2)]).sum()
        }),
    };
    Ok(out)
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }

    /// `V f(Lambda) V^dagger`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for r in 0..n {
                scaled[(r, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before factorization, so only Hermiticity within
/// `HERMITIAN_TOL * max(1, max|A|)` is required.
pub fn hermitian_eigendecomposition(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::Shape {
            context: "hermitian_eigendecomposition",
            expected: "square matrix".into(),
            actual: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("hermitian_eigendecomposition input"));
    }
    let residual = hermiticity_residual(a);
    if residual > HERMITIAN_TOL * max_abs(a).max(1.0) {
        return Err(Error::NotHermitian(residual));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or_else(|| Error::InvalidInput("eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(EigenDecomposition { values, vectors })
}

/// JSON form of a square complex matrix: `{"dim": n, "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            dim: m.nrows(),
            entries: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.entries.len() != j.dim || j.entries.iter().any(|row| row.len() != j.dim) {
            return Err(Error::Shape {
                context: "matrix json",
                expected: format!("{0}x{0} entries", j.dim),
                actual: format!(
                    "{} rows with lengths {:?}",
                    j.entries.len(),
                    j.entries.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            });
        }
        if j.entries.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix json"));
        }
        Ok(ComplexMatrix::from_fn(j.dim, j.dim, |r, k| {
            let [re, im] = j.entries[r][k];
            c(re, im)
        }))
    }
}

/// Serde adapter for `ComplexMatrix` fields using [`MatrixJson`].
pub mod json_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<ComplexMatrix>` fields.
pub mod json_matrix_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        ms: &[ComplexMatrix],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let js: Vec<MatrixJson> = ms.iter().map(MatrixJson::from).collect();
        js.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        let js = Vec::<MatrixJson>::deserialize(d)?;
        js.into_iter()
            .map(|j| ComplexMatrix::try_from(j).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eigendecomposition(&identity(3)).unwrap();
        for v in eig.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sigma_matrix_spectrum() {
        let sigma = diag(&[3.0 / 16.0, 1.0 / 16.0, 9.0 / 16.0, 3.0 / 16.0]);
        let eig = hermitian_eigendecomposition(&sigma).unwrap();
        let expected = [1.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0];
        for (v, e) in eig.values.iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn pauli_x_closed_form() {
        let x = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let eig = hermitian_eigendecomposition(&x).unwrap();
        assert_abs_diff_eq!(eig.values[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-15);
        // eigenvectors (1, -1)/sqrt2 and (1, 1)/sqrt2 up to phase
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = ComplexVector::from_vec(vec![c(s, 0.), c(-s, 0.)]);
        let plus = ComplexVector::from_vec(vec![c(s, 0.), c(s, 0.)]);
        assert_abs_diff_eq!(eig.vector(0).dotc(&minus).norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.vector(1).dotc(&plus).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            hermitian_eigendecomposition(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn kron_of_identities() {
        assert_eq!(tensor_product(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn kron_of_marginals_gives_sigma() {
        let a = diag(&[0.25, 0.75]);
        let b = diag(&[0.75, 0.25]);
        let expected = diag(&[3.0 / 16.0, 1.0 / 16.0, 9.0 / 16.0, 3.0 / 16.0]);
        assert!(max_abs_diff(&tensor_product(&a, &b), &expected) < 1e-16);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = diag(&[0.25, 0.75]);
        let b = diag(&[0.5, 0.2, 0.3]);
        let ab = tensor_product(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, (2, 3), Subsystem::First).unwrap(), &a) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&ab, (2, 3), Subsystem::Second).unwrap(), &b) < 1e-15);
        assert!(partial_trace(&ab, (3, 3), Subsystem::First).is_err());
    }

    #[test]
    fn json_shape_errors() {
        let bad = MatrixJson {
            dim: 2,
            entries: vec![vec![[1.0, 0.0], [0.0, 0.0]]],
        };
        assert!(ComplexMatrix::try_from(bad).is_err());
    }
}
