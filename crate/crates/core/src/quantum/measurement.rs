//! Lüders measurements and the sequential model induced by two projective
//! measurements separated by a unitary.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::projectors::ProjectorFamily;
use super::states::{check_dims, DensityOperator, Unitary};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs_diff, ComplexMatrix};
use crate::stat_model::SequentialModel;

/// Probabilities with magnitude at most this are round-off and read as zero.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// Smallest outcome probability for which a selective update is defined.
pub const SELECTION_THRESHOLD: f64 = 1e-12;

/// Default tolerance for `rho_i = P_i / d(i)`.
pub const DEFAULT_ASSUMPTION_TOL: f64 = 1e-9;

/// Tolerance on `sum_j p~(j) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// `p(i) = Tr(rho P_i)`, clamped to `[0, 1]`.
pub fn outcome_probabilities(rho: &DensityOperator, fam: &ProjectorFamily) -> Result<Vec<f64>> {
    check_dims(rho.dim(), fam.dim())?;
    fam.projectors()
        .iter()
        .map(|p| {
            let v = linalg::trace_of_product(rho.matrix(), p).re;
            if !(-PROBABILITY_CLAMP..=1.0 + PROBABILITY_CLAMP).contains(&v) {
                return Err(Error::Constraint {
                    constraint: "outcome probability in [0, 1]",
                    residual: if v < 0.0 { -v } else { v - 1.0 },
                });
            }
            Ok(if v.abs() <= PROBABILITY_CLAMP { 0.0 } else { v.min(1.0) })
        })
        .collect()
}

/// Selective Lüders update `P rho P / Tr(rho P)`.
pub fn luders_select(rho0: &DensityOperator, projector: &ComplexMatrix) -> Result<DensityOperator> {
    check_dims(rho0.dim(), projector.nrows())?;
    let prob = linalg::trace_of_product(rho0.matrix(), projector).re;
    if !(prob > SELECTION_THRESHOLD) {
        return Err(Error::ZeroProbability(prob));
    }
    let m = (projector * rho0.matrix() * projector).unscale(prob);
    DensityOperator::new((&m + m.adjoint()).scale(0.5))
}

/// Non-selective Lüders channel `sum_i P_i rho P_i`.
pub fn luders_channel(rho: &DensityOperator, fam: &ProjectorFamily) -> Result<DensityOperator> {
    check_dims(rho.dim(), fam.dim())?;
    let d = rho.dim();
    let out = fam
        .projectors()
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, p| acc + p * rho.matrix() * p);
    DensityOperator::new(out)
}

/// Outcome of [`assumption_holds`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Every populated outcome selects `P_i / d(i)`.
    pub holds: bool,
    /// Every outcome has `p(i) > 0`.
    pub all_outcomes_populated: bool,
    pub probabilities: Vec<f64>,
    /// `max |P_i rho0 P_i - p(i) P_i/d(i)|`, or `None` when `p(i) = 0`.
    pub residuals: Vec<Option<f64>>,
}

impl AssumptionReport {
    pub fn worst(&self) -> Option<(usize, f64)> {
        self.residuals
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Checks that selecting any populated outcome of `fam` leaves `P_i / d(i)`,
/// i.e. `P_i rho0 P_i = p(i) P_i / d(i)`.
pub fn assumption_holds(
    rho0: &DensityOperator,
    fam: &ProjectorFamily,
    tol: f64,
) -> Result<AssumptionReport> {
    let probabilities = outcome_probabilities(rho0, fam)?;
    let mut residuals = Vec::with_capacity(fam.len());
    for (k, p) in fam.projectors().iter().enumerate() {
        if probabilities[k] > 0.0 {
            // compared before normalization: dividing by a small p(i)
            // would magnify round-off in P rho P by 1/p(i)
            let selected = p * rho0.matrix() * p;
            let target = p.scale(probabilities[k] / fam.degeneracies()[k] as f64);
            residuals.push(Some(max_abs_diff(&selected, &target)));
        } else {
            residuals.push(None);
        }
    }
    Ok(AssumptionReport {
        holds: residuals.iter().flatten().all(|&r| r < tol),
        all_outcomes_populated: probabilities.iter().all(|&p| p > 0.0),
        probabilities,
        residuals,
    })
}

/// Sequential model of a Lüders measurement of `first`, evolution `u`, and a
/// measurement of `second`:
/// `Pi(j|i) = Tr(Q_j U P_i U^dagger)`, `x(i) = p(i)/d(i)`, `x~(j) = p~(j)/d~(j)`.
///
/// Outcomes of `first` with `p(i) = 0` are kept and get `x(i) = 0`.
pub fn build_sequential_model(
    rho0: &DensityOperator,
    first: &ProjectorFamily,
    u: &Unitary,
    second: &ProjectorFamily,
    p_tilde: &[f64],
) -> Result<SequentialModel> {
    check_dims(rho0.dim(), first.dim())?;
    check_dims(rho0.dim(), u.dim())?;
    check_dims(rho0.dim(), second.dim())?;
    if p_tilde.len() != second.len() {
        return Err(Error::Shape {
            context: "second-outcome distribution",
            expected: format!("{} entries", second.len()),
            actual: format!("{}", p_tilde.len()),
        });
    }
    if let Some(j) = p_tilde.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "p~({j}) = {} must be strictly positive",
            p_tilde[j]
        )));
    }
    let total: f64 = p_tilde.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Constraint {
            constraint: "second-outcome distribution normalization",
            residual: (total - 1.0).abs(),
        });
    }

    let report = assumption_holds(rho0, first, DEFAULT_ASSUMPTION_TOL)?;
    if !report.holds {
        let (outcome, worst_residual) = report.worst().expect("a failing outcome exists");
        return Err(Error::AssumptionViolated {
            outcome,
            worst_residual,
        });
    }

    let uh = u.matrix().adjoint();
    let evolved: Vec<ComplexMatrix> = first
        .projectors()
        .iter()
        .map(|p| u.matrix() * p * &uh)
        .collect();
    let pi = DMatrix::from_fn(second.len(), first.len(), |j, i| {
        linalg::trace_of_product(second.projector(j), &evolved[i]).re.max(0.0)
    });
    let x = report
        .probabilities
        .iter()
        .zip(first.degeneracies())
        .map(|(&p, &d)| p / d as f64)
        .collect();
    let x_tilde = p_tilde
        .iter()
        .zip(second.degeneracies())
        .map(|(&p, &d)| p / d as f64)
        .collect();
    SequentialModel::new(pi, x, x_tilde)
}

/// `Tr(Q_j U P_i rho0 P_i U^dagger)`, indexed `(i, j)`: the joint outcome
/// probabilities computed directly from the quantum data.
pub fn induced_joint_probabilities(
    rho0: &DensityOperator,
    first: &ProjectorFamily,
    u: &Unitary,
    second: &ProjectorFamily,
) -> Result<DMatrix<f64>> {
    check_dims(rho0.dim(), first.dim())?;
    check_dims(rho0.dim(), u.dim())?;
    check_dims(rho0.dim(), second.dim())?;
    let uh = u.matrix().adjoint();
    let selected: Vec<ComplexMatrix> = first
        .projectors()
        .iter()
        .map(|p| u.matrix() * p * rho0.matrix() * p * &uh)
        .collect();
    Ok(DMatrix::from_fn(first.len(), second.len(), |i, j| {
        linalg::trace_of_product(second.projector(j), &selected[i]).re
    }))
}

/// Boltzmann weights `d(j) e^{-beta E_j} / Z` over eigenvalue clusters.
pub fn boltzmann_weights(energies: &[f64], degeneracies: &[usize], beta: f64) -> Vec<f64> {
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies
        .iter()
        .zip(degeneracies)
        .map(|(&e, &d)| d as f64 * (-beta * (e - e_min)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Minimal-case choice `p~(j) = q(j)`: the second-outcome statistics of the
/// non-selectively measured and evolved state.
pub fn minimal_weights(
    rho0: &DensityOperator,
    first: &ProjectorFamily,
    u: &Unitary,
    second: &ProjectorFamily,
) -> Result<Vec<f64>> {
    let joint = induced_joint_probabilities(rho0, first, u, second)?;
    Ok((0..second.len())
        .map(|j| joint.column(j).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag};
    use crate::stat_model::DEFAULT_TOL;
    use nalgebra::DVector;

    fn plus_state() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&DVector::from_vec(vec![c(s, 0.), c(s, 0.)])).unwrap()
    }

    #[test]
    fn probabilities() {
        let fam = ProjectorFamily::computational_basis(2);
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        assert_eq!(outcome_probabilities(&mixed, &fam).unwrap(), vec![0.5, 0.5]);
        assert_eq!(
            outcome_probabilities(&plus_state(), &ProjectorFamily::trivial(2)).unwrap(),
            vec![1.0]
        );
        assert!(outcome_probabilities(&mixed, &ProjectorFamily::trivial(3)).is_err());
    }

    #[test]
    fn selection() {
        let p = diag(&[1.0, 1.0, 0.0]);
        let rho0 = DensityOperator::new(p.unscale(2.0)).unwrap();
        let sel = luders_select(&rho0, &p).unwrap();
        assert!(max_abs_diff(sel.matrix(), rho0.matrix()) < 1e-16);

        let up = diag(&[1.0, 0.0]);
        let sel = luders_select(&plus_state(), &up).unwrap();
        assert!(max_abs_diff(sel.matrix(), &up) < 1e-15);

        let zero = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            luders_select(&zero, &diag(&[0.0, 1.0])),
            Err(Error::ZeroProbability(_))
        ));
    }

    #[test]
    fn channel_erases_coherences() {
        let out = luders_channel(&plus_state(), &ProjectorFamily::computational_basis(2)).unwrap();
        assert!(max_abs_diff(out.matrix(), &diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn assumption_cases() {
        let plus = plus_state();
        let basis = assumption_holds(&plus, &ProjectorFamily::computational_basis(2), 1e-9).unwrap();
        assert!(basis.holds && basis.all_outcomes_populated);
        let trivial = assumption_holds(&plus, &ProjectorFamily::trivial(2), 1e-9).unwrap();
        assert!(!trivial.holds);
        assert!((trivial.residuals[0].unwrap() - 0.5).abs() < 1e-15);

        // function of the measured observable
        let e = diag(&[0.0, 0.0, 1.0]);
        let g = diag(&[0.3, 0.3, 0.4]);
        let fam = crate::quantum::spectral_projectors(&e, 1e-8).unwrap().family;
        assert!(assumption_holds(&DensityOperator::new(g).unwrap(), &fam, 1e-12).unwrap().holds);
    }

    #[test]
    fn unpopulated_outcome_is_reported() {
        let rho = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        let r = assumption_holds(&rho, &ProjectorFamily::computational_basis(2), 1e-9).unwrap();
        assert!(r.holds);
        assert!(!r.all_outcomes_populated);
        assert_eq!(r.residuals[1], None);
    }

    #[test]
    fn trivial_model() {
        let rho = DensityOperator::maximally_mixed(1).unwrap();
        let fam = ProjectorFamily::trivial(1);
        let m = build_sequential_model(&rho, &fam, &Unitary::identity(1), &fam, &[1.0]).unwrap();
        assert_eq!((m.pi(0, 0), m.x()[0], m.x_tilde()[0]), (1.0, 1.0, 1.0));
    }

    #[test]
    fn qubit_basis_model() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let fam = ProjectorFamily::computational_basis(2);
        let m = build_sequential_model(&rho, &fam, &Unitary::identity(2), &fam, &[0.5, 0.5]).unwrap();
        assert_eq!(m.pi_matrix(), &DMatrix::identity(2, 2));
        assert_eq!(m.x(), &[0.5, 0.5]);
        assert_eq!(m.x_tilde(), &[0.5, 0.5]);
        let jd = m.joint_distributions().p_forward;
        let direct = induced_joint_probabilities(&rho, &fam, &Unitary::identity(2), &fam).unwrap();
        assert!((jd - direct).abs().max() < 1e-15);
    }

    #[test]
    fn rank_two_second_family_degeneracy() {
        let rho = DensityOperator::maximally_mixed(3).unwrap();
        let first = ProjectorFamily::computational_basis(3);
        let second = ProjectorFamily::new(vec![diag(&[1.0, 1.0, 0.0]), diag(&[0.0, 0.0, 1.0])]).unwrap();
        let m = build_sequential_model(&rho, &first, &Unitary::identity(3), &second, &[0.5, 0.5]).unwrap();
        let (_, d_tilde) = m.degeneracy_marginals();
        assert_eq!(d_tilde, vec![2.0, 1.0]);
        assert!(m.validate(DEFAULT_TOL).is_valid());
    }

    #[test]
    fn refuses_assumption_violation_and_bad_weights() {
        let plus = plus_state();
        let fam = ProjectorFamily::computational_basis(2);
        let u = Unitary::identity(2);
        assert!(matches!(
            build_sequential_model(&plus, &ProjectorFamily::trivial(2), &u, &fam, &[0.5, 0.5]),
            Err(Error::AssumptionViolated { outcome: 0, .. })
        ));
        assert!(build_sequential_model(&plus, &fam, &u, &fam, &[1.0, 0.0]).is_err());
        assert!(build_sequential_model(&plus, &fam, &u, &fam, &[0.6, 0.6]).is_err());
        assert!(build_sequential_model(&plus, &fam, &u, &fam, &[1.0]).is_err());
    }

    #[test]
    fn boltzmann_weights_normalize() {
        let w = boltzmann_weights(&[0.0, 1.0], &[1, 2], 1.0);
        let z = 1.0 + 2.0 * (-1.0f64).exp();
        assert!((w[0] - 1.0 / z).abs() < 1e-15);
        assert!((w[1] - 2.0 * (-1.0f64).exp() / z).abs() < 1e-15);
    }
}
