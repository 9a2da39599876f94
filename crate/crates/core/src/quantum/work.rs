//! Two-point energy measurement protocol and the Jarzynski equality.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::measurement::{boltzmann_weights, build_sequential_model};
use super::projectors::{spectral_projectors, SpectralDecomposition};
use super::states::{check_dims, DensityOperator, Unitary};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecomposition, ComplexMatrix};
use crate::stat_model::{RatioObservable, SequentialModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkOutcome {
    /// Index of the initial energy cluster.
    pub first: usize,
    /// Index of the final energy cluster.
    pub second: usize,
    /// `F_j - E_i`.
    pub work: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkStatistics {
    pub outcomes: Vec<WorkOutcome>,
    /// `<e^{-beta w}>`.
    pub lhs: f64,
    /// `e^{-beta dF}`.
    pub rhs: f64,
    pub delta_free_energy: f64,
    pub model: SequentialModel,
}

impl WorkStatistics {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// `log Z = log sum_k d_k e^{-beta E_k}`, evaluated with the ground energy factored out.
fn log_partition(dec: &SpectralDecomposition, beta: f64) -> f64 {
    let e_min = dec.eigenvalues[0];
    let shifted: f64 = dec
        .eigenvalues
        .iter()
        .zip(dec.degeneracies())
        .map(|(&e, &d)| d as f64 * (-beta * (e - e_min)).exp())
        .sum();
    -beta * e_min + shifted.ln()
}

/// Gibbs state `e^{-beta H} / Z`.
pub fn boltzmann_state(h: &ComplexMatrix, beta: f64) -> Result<DensityOperator> {
    let eig = hermitian_eigendecomposition(h)?;
    let e_min = eig.values[0];
    let z: f64 = eig.values.iter().map(|&e| (-beta * (e - e_min)).exp()).sum();
    let mut rho = eig.apply_function(|e| (-beta * (e - e_min)).exp() / z);
    // exact Hermiticity of the stored matrix
    rho = (&rho + rho.adjoint()).scale(0.5);
    DensityOperator::new(rho)
}

/// Energy measurement of `h0` on its Gibbs state, evolution `u`, energy
/// measurement of `h1`.
///
/// `<e^{-beta w}>` is evaluated as a regularized expectation of
/// `c(i,j) / x(i)` with `c(i,j) = e^{-beta F_j} / Z0`, so initial levels whose
/// population underflows still contribute.
pub fn two_point_work_protocol(
    h0: &ComplexMatrix,
    h1: &ComplexMatrix,
    u: &Unitary,
    beta: f64,
    cluster_tol: f64,
) -> Result<WorkStatistics> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta = {beta} must be positive")));
    }
    check_dims(h0.nrows(), h1.nrows())?;
    check_dims(h0.nrows(), u.dim())?;

    let initial = spectral_projectors(h0, cluster_tol)?;
    let fin = spectral_projectors(h1, cluster_tol)?;
    let rho0 = boltzmann_state(h0, beta)?;
    let p_tilde = boltzmann_weights(&fin.eigenvalues, fin.degeneracies(), beta);
    let model = build_sequential_model(&rho0, &initial.family, u, &fin.family, &p_tilde)?;

    let log_z0 = log_partition(&initial, beta);
    let log_z1 = log_partition(&fin, beta);
    let delta_free_energy = -(log_z1 - log_z0) / beta;

    let numerators = DMatrix::from_fn(initial.eigenvalues.len(), fin.eigenvalues.len(), |_, j| {
        (-beta * fin.eigenvalues[j] - log_z0).exp()
    });
    let lhs = model.expectation_regularized(&RatioObservable::new(numerators)?)?;
    let rhs = (log_z1 - log_z0).exp();

    let joint = model.joint_distributions().p_forward;
    let mut outcomes = Vec::with_capacity(joint.len());
    for (i, &e) in initial.eigenvalues.iter().enumerate() {
        for (j, &f) in fin.eigenvalues.iter().enumerate() {
            outcomes.push(WorkOutcome {
                first: i,
                second: j,
                work: f - e,
                probability: joint[(i, j)],
            });
        }
    }
    Ok(WorkStatistics {
        outcomes,
        lhs,
        rhs,
        delta_free_energy,
        model,
    })
}
