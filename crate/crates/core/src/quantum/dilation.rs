//! Measurement dilation: object coupled to a pure ancilla, Lüders measurement
//! on the ancilla, partial trace over the ancilla.

use serde::{Deserialize, Serialize};

use super::projectors::ProjectorFamily;
use super::states::{DensityOperator, Unitary};
use crate::entropy::von_neumann_entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, partial_trace, ComplexMatrix, Subsystem};

/// Purity slack accepted for the ancilla state.
pub const PURITY_TOL: f64 = 1e-10;

/// Entropy bookkeeping of one dilated measurement (all entropies in nats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    /// Object state after the instrument, `Tr_2` of the measured total state.
    pub sigma: DensityOperator,
    /// `sum_n Q_n (rho (x) P_phi) Q_n` with `Q_n = U^dagger (1 (x) P_n) U`.
    pub rho_prime: DensityOperator,
    /// `U rho' U^dagger`, the measured total state in the frame where the
    /// ancilla is read out.
    pub measured_total: DensityOperator,
    /// `S(rho) = S(rho (x) P_phi)`.
    pub s1: f64,
    /// `S(rho')`.
    pub s2: f64,
    /// Object entropy after the measurement, `S(sigma)`.
    pub s31: f64,
    /// Ancilla entropy after the measurement.
    pub s32: f64,
    /// `s31 + s32`.
    pub s3: f64,
}

impl DilationReport {
    /// `max(s1 - s2, 0)`.
    pub fn first_violation(&self) -> f64 {
        (self.s1 - self.s2).max(0.0)
    }

    /// `max(s2 - s3, 0)`.
    pub fn second_violation(&self) -> f64 {
        (self.s2 - self.s3).max(0.0)
    }
}

pub fn dilation_analysis(
    rho: &DensityOperator,
    u_total: &Unitary,
    ancilla_family: &ProjectorFamily,
    phi: &DensityOperator,
) -> Result<DilationReport> {
    let d1 = rho.dim();
    let d2 = ancilla_family.dim();
    if phi.dim() != d2 {
        return Err(Error::DimensionMismatch(phi.dim(), d2));
    }
    if u_total.dim() != d1 * d2 {
        return Err(Error::DimensionMismatch(u_total.dim(), d1 * d2));
    }
    let purity = phi.purity();
    if (purity - 1.0).abs() > PURITY_TOL {
        return Err(Error::InvalidInput(format!(
            "ancilla state is not pure (Tr(phi^2) = {purity})"
        )));
    }

    let initial = linalg::tensor_product(rho.matrix(), phi.matrix());
    let u = u_total.matrix();
    let uh = u.adjoint();
    let lifted = ancilla_family.lift_to_second_factor(d1)?;

    let n = d1 * d2;
    let mut rho_prime = ComplexMatrix::zeros(n, n);
    for p in lifted.projectors() {
        let q = &uh * p * u;
        rho_prime += &q * &initial * &q;
    }
    let evolved = u * &initial * &uh;
    let mut measured = ComplexMatrix::zeros(n, n);
    for p in lifted.projectors() {
        measured += p * &evolved * p;
    }

    let sigma = DensityOperator::new(partial_trace(&measured, (d1, d2), Subsystem::First)?)?;
    let ancilla = DensityOperator::new(partial_trace(&measured, (d1, d2), Subsystem::Second)?)?;
    let rho_prime = DensityOperator::new(rho_prime)?;
    let measured_total = DensityOperator::new(measured)?;

    let s1 = von_neumann_entropy(rho);
    let s2 = von_neumann_entropy(&rho_prime);
    let s31 = von_neumann_entropy(&sigma);
    let s32 = von_neumann_entropy(&ancilla);
    Ok(DilationReport {
        sigma,
        rho_prime,
        measured_total,
        s1,
        s2,
        s31,
        s32,
        s3: s31 + s32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, max_abs_diff};
    use std::f64::consts::LN_2;

    #[test]
    fn idle_coupling_changes_nothing() {
        let rho = DensityOperator::new(diag(&[0.2, 0.8])).unwrap();
        let phi = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        let r = dilation_analysis(
            &rho,
            &Unitary::identity(4),
            &ProjectorFamily::computational_basis(2),
            &phi,
        )
        .unwrap();
        assert!(max_abs_diff(r.sigma.matrix(), rho.matrix()) < 1e-15);
        assert!((r.s2 - r.s1).abs() < 1e-14);
        assert!((r.s3 - r.s1).abs() < 1e-14);
        assert!(r.s32.abs() < 1e-14);
    }

    #[test]
    fn swap_reset() {
        // explicit algebra: SWAP (I/2 (x) |0><0|) SWAP = |0><0| (x) I/2, which the
        // ancilla readout leaves unchanged; rho' = I/2 (x) |0><0|.
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let phi = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        let r = dilation_analysis(
            &rho,
            &Unitary::swap(2),
            &ProjectorFamily::computational_basis(2),
            &phi,
        )
        .unwrap();
        assert!(max_abs_diff(r.sigma.matrix(), &diag(&[1.0, 0.0])) < 1e-15);
        assert!(max_abs_diff(r.measured_total.matrix(), &diag(&[0.5, 0.5, 0.0, 0.0])) < 1e-15);
        assert!(max_abs_diff(r.rho_prime.matrix(), &diag(&[0.5, 0.0, 0.5, 0.0])) < 1e-15);
        assert!((r.s1 - LN_2).abs() < 1e-14);
        assert!(r.s31.abs() < 1e-14);
        assert!((r.s2 - LN_2).abs() < 1e-14);
        assert!((r.s3 - LN_2).abs() < 1e-14);
    }

    #[test]
    fn rejects_mixed_ancilla_and_bad_dims() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        let fam = ProjectorFamily::computational_basis(2);
        assert!(matches!(
            dilation_analysis(&rho, &Unitary::identity(4), &fam, &mixed),
            Err(Error::InvalidInput(_))
        ));
        let phi = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            dilation_analysis(&rho, &Unitary::identity(3), &fam, &phi),
            Err(Error::DimensionMismatch(..))
        ));
    }
}
