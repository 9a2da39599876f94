//! Projector-valued measures and spectral decompositions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, commutator, hermitian_eigendecomposition, hermiticity_residual, max_abs, max_abs_diff,
    ComplexMatrix, MatrixJson,
};

/// Tolerance on idempotency, orthogonality, and completeness of a family.
pub const PROJECTOR_TOL: f64 = 1e-9;

/// Allowed drift of `Tr(P)` from the nearest integer.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Default absolute tolerance for merging eigenvalues into one eigenprojection.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Largest commutator entry accepted by [`joint_eigenprojections`].
pub const COMMUTATOR_TOL: f64 = 1e-8;

const JOINT_ATTEMPTS: usize = 3;

/// A complete family of mutually orthogonal projectors; outcome labels are the
/// positions in the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MatrixJson>", into = "Vec<MatrixJson>")]
pub struct ProjectorFamily {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    degeneracies: Vec<usize>,
}

impl ProjectorFamily {
    pub fn new(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidInput("empty projector family".into()));
        };
        let dim = first.nrows();
        for p in &projectors {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::Shape {
                    context: "projector family",
                    expected: format!("{dim}x{dim}"),
                    actual: format!("{}x{}", p.nrows(), p.ncols()),
                });
            }
        }
        let mut degeneracies = Vec::with_capacity(projectors.len());
        for p in &projectors {
            let herm = hermiticity_residual(p);
            if herm >= PROJECTOR_TOL {
                return Err(Error::Constraint {
                    constraint: "projector hermiticity",
                    residual: herm,
                });
            }
            let idem = max_abs_diff(&(p * p), p);
            if idem >= PROJECTOR_TOL {
                return Err(Error::Constraint {
                    constraint: "projector idempotency",
                    residual: idem,
                });
            }
            let tr = linalg::trace(p).re;
            let rounded = tr.round();
            if (tr - rounded).abs() >= DEGENERACY_TOL || rounded < 1.0 {
                return Err(Error::Constraint {
                    constraint: "integer positive degeneracy",
                    residual: (tr - rounded).abs().max(1.0 - rounded),
                });
            }
            degeneracies.push(rounded as usize);
        }
        for a in 0..projectors.len() {
            for b in a + 1..projectors.len() {
                let overlap = max_abs(&(&projectors[a] * &projectors[b]));
                if overlap >= PROJECTOR_TOL {
                    return Err(Error::Constraint {
                        constraint: "mutual orthogonality",
                        residual: overlap,
                    });
                }
            }
        }
        let sum = projectors
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, p| acc + p);
        let completeness = max_abs_diff(&sum, &linalg::identity(dim));
        if completeness >= PROJECTOR_TOL {
            return Err(Error::Constraint {
                constraint: "completeness",
                residual: completeness,
            });
        }
        Ok(ProjectorFamily {
            dim,
            projectors,
            degeneracies,
        })
    }

    /// The one-outcome family `{1}`.
    pub fn trivial(dim: usize) -> Self {
        ProjectorFamily {
            dim,
            projectors: vec![linalg::identity(dim)],
            degeneracies: vec![dim],
        }
    }

    /// Rank-one projectors onto the standard basis.
    pub fn computational_basis(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|k| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(k, k)] = linalg::c(1.0, 0.0);
                p
            })
            .collect();
        ProjectorFamily {
            dim,
            projectors,
            degeneracies: vec![1; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> &ComplexMatrix {
        &self.projectors[k]
    }

    /// `d(k) = Tr(P_k)`.
    pub fn degeneracies(&self) -> &[usize] {
        &self.degeneracies
    }

    /// `{1 (x) P_n}` on `C^d1 (x) H`.
    pub fn lift_to_second_factor(&self, d1: usize) -> Result<Self> {
        let id = linalg::identity(d1);
        Self::new(
            self.projectors
                .iter()
                .map(|p| linalg::tensor_product(&id, p))
                .collect(),
        )
    }
}

impl TryFrom<Vec<MatrixJson>> for ProjectorFamily {
    type Error = Error;

    fn try_from(js: Vec<MatrixJson>) -> Result<Self> {
        let ms = js
            .into_iter()
            .map(ComplexMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        Self::new(ms)
    }
}

impl From<ProjectorFamily> for Vec<MatrixJson> {
    fn from(f: ProjectorFamily) -> Self {
        f.projectors.iter().map(MatrixJson::from).collect()
    }
}

/// Distinct eigenvalues (ascending) and their eigenprojections.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub family: ProjectorFamily,
}

impl SpectralDecomposition {
    /// `sum_k lambda_k P_k`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.family.dim();
        self.eigenvalues
            .iter()
            .zip(self.family.projectors())
            .fold(ComplexMatrix::zeros(d, d), |acc, (&l, p)| acc + p.scale(l))
    }

    pub fn degeneracies(&self) -> &[usize] {
        self.family.degeneracies()
    }
}

/// Groups sorted eigenvalues into clusters whose neighbouring gaps are at most `tol`.
fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            clusters.push(start..k);
            start = k;
        }
    }
    clusters
}

/// Eigenprojections of a Hermitian matrix, merging eigenvalues closer than `cluster_tol`.
pub fn spectral_projectors(a: &ComplexMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    let eig = hermitian_eigendecomposition(a)?;
    let n = eig.dim();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    for range in cluster_sorted(&eig.values, cluster_tol) {
        let block = eig.vectors.columns(range.start, range.len());
        projectors.push(block * block.adjoint());
        eigenvalues.push(eig.values[range.clone()].iter().sum::<f64>() / range.len() as f64);
    }
    debug_assert!(n == 0 || !projectors.is_empty());
    Ok(SpectralDecomposition {
        eigenvalues,
        family: ProjectorFamily::new(projectors)?,
    })
}

/// Common eigenprojections of commuting Hermitian operators.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenprojections {
    pub family: ProjectorFamily,
    /// `tuples[k][lambda]` is the eigenvalue of operator `lambda` on projector `k`.
    pub tuples: Vec<Vec<f64>>,
}

impl JointEigenprojections {
    /// `sum_k tuples[k][lambda] P_k`.
    pub fn reconstruct(&self, lambda: usize) -> ComplexMatrix {
        let d = self.family.dim();
        self.tuples
            .iter()
            .zip(self.family.projectors())
            .fold(ComplexMatrix::zeros(d, d), |acc, (t, p)| acc + p.scale(t[lambda]))
    }
}

/// Maximal common eigenprojections of mutually commuting Hermitian operators.
///
/// A random positive combination of the operators is diagonalized and its
/// eigenprojections are grouped by their eigenvalue tuples. If a cluster of
/// the combination is not a common eigenspace the coefficients are redrawn,
/// up to three attempts in total.
pub fn joint_eigenprojections<R: Rng + ?Sized>(
    ops: &[ComplexMatrix],
    cluster_tol: f64,
    rng: &mut R,
) -> Result<JointEigenprojections> {
    let Some(first) = ops.first() else {
        return Err(Error::InvalidInput("no operators given".into()));
    };
    let dim = first.nrows();
    for op in ops {
        if op.nrows() != dim || op.ncols() != dim {
            return Err(Error::DimensionMismatch(dim, op.nrows()));
        }
        let herm = hermiticity_residual(op);
        if herm > linalg::HERMITIAN_TOL * max_abs(op).max(1.0) {
            return Err(Error::NotHermitian(herm));
        }
    }
    for a in 0..ops.len() {
        for b in a + 1..ops.len() {
            let comm = max_abs(&commutator(&ops[a], &ops[b]));
            if comm >= COMMUTATOR_TOL {
                return Err(Error::NonCommuting(comm));
            }
        }
    }

    for _ in 0..JOINT_ATTEMPTS {
        let combo = ops.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, op| {
            acc + op.scale(rng.random_range(0.5..1.5))
        });
        let dec = spectral_projectors(&combo, cluster_tol)?;
        let Some(blocks) = common_blocks(ops, dec.family.projectors(), cluster_tol) else {
            continue;
        };
        let mut groups: Vec<(Vec<f64>, ComplexMatrix)> = Vec::new();
        for (tuple, p) in blocks {
            match groups.iter_mut().find(|(t, _)| {
                t.iter().zip(&tuple).all(|(a, b)| (a - b).abs() <= cluster_tol)
            }) {
                Some((_, acc)) => *acc += p,
                None => groups.push((tuple, p)),
            }
        }
        let mut groups: Vec<(Vec<f64>, ComplexMatrix)> = groups
            .into_iter()
            .map(|(_, p)| (block_tuple(ops, &p), p))
            .collect();
        groups.sort_by(|(a, _), (b, _)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let (tuples, projectors): (Vec<_>, Vec<_>) = groups.into_iter().unzip();
        return Ok(JointEigenprojections {
            family: ProjectorFamily::new(projectors)?,
            tuples,
        });
    }
    Err(Error::JointDiagonalization(JOINT_ATTEMPTS))
}

/// `Tr(A_lambda P) / Tr(P)` for each operator.
fn block_tuple(ops: &[ComplexMatrix], p: &ComplexMatrix) -> Vec<f64> {
    let rank = linalg::trace(p).re;
    ops.iter()
        .map(|op| linalg::trace_of_product(op, p).re / rank)
        .collect()
}

/// Pairs each projector with its eigenvalue tuple, or `None` if some projector
/// is not an eigenspace of every operator.
fn common_blocks(
    ops: &[ComplexMatrix],
    projectors: &[ComplexMatrix],
    cluster_tol: f64,
) -> Option<Vec<(Vec<f64>, ComplexMatrix)>> {
    let mut out = Vec::with_capacity(projectors.len());
    for p in projectors {
        let tuple = block_tuple(ops, p);
        for (op, &t) in ops.iter().zip(&tuple) {
            let scale = max_abs(op).max(1.0);
            let off = max_abs(&(op * p - p.scale(t)));
            if off > cluster_tol.max(COMMUTATOR_TOL) * scale {
                return None;
            }
        }
        out.push((tuple, p.clone()));
    }
    Some(out)
}
