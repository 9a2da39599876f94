//! Random states, unitaries, projector families and Hamiltonians.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use seqmeas_core::linalg::{c, outer, ComplexMatrix, ComplexVector};
use seqmeas_core::quantum::{DensityOperator, ProjectorFamily, Unitary};
use seqmeas_core::{Error, Result};

/// Matrix of independent standard complex Gaussians (real and imaginary
/// parts each `N(0, 1)`).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `G G^dagger / Tr(G G^dagger)` with `G` of shape `dim x rank`; full rank by default.
pub fn random_density<R: Rng + ?Sized>(
    dim: usize,
    rank: Option<usize>,
    rng: &mut R,
) -> Result<DensityOperator> {
    let rank = rank.unwrap_or(dim);
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidInput(format!("rank {rank} for dimension {dim}")));
    }
    let g = complex_gaussian(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(hermitian_part(&m.unscale(tr)))
}

/// Haar unitary: QR of a complex Gaussian matrix with the diagonal of `R`
/// made positive real.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Unitary> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension 0".into()));
    }
    let (mut q, r) = complex_gaussian(dim, dim, rng).qr().unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let norm = d.norm();
        if norm > 0.0 {
            let phase = d / norm;
            let mut col = q.column_mut(k);
            col *= phase;
        }
    }
    Unitary::new(q)
}

/// Columns of a Haar unitary grouped into consecutive blocks of the given ranks.
pub fn random_pvm<R: Rng + ?Sized>(
    dim: usize,
    ranks: &[usize],
    rng: &mut R,
) -> Result<ProjectorFamily> {
    if ranks.iter().sum::<usize>() != dim || ranks.contains(&0) {
        return Err(Error::InvalidInput(format!("ranks {ranks:?} do not partition {dim}")));
    }
    let u = random_unitary(dim, rng)?;
    let mut start = 0;
    let mut projectors = Vec::with_capacity(ranks.len());
    for &r in ranks {
        let mut p = ComplexMatrix::zeros(dim, dim);
        for k in start..start + r {
            let v: ComplexVector = u.matrix().column(k).into_owned();
            p += outer(&v);
        }
        projectors.push(hermitian_part(&p));
        start += r;
    }
    ProjectorFamily::new(projectors)
}

/// Rank-1 blocks for even trials; for odd trials a random composition of
/// `dim` with at least one block of rank two or more (when `dim >= 2`).
pub fn rank_policy<R: Rng + ?Sized>(dim: usize, trial: u64, rng: &mut R) -> Vec<usize> {
    if trial.is_multiple_of(2) || dim < 2 {
        return vec![1; dim];
    }
    let big = rng.random_range(2..=dim);
    let mut ranks = vec![big];
    let mut left = dim - big;
    while left > 0 {
        let r = rng.random_range(1..=left);
        ranks.push(r);
        left -= r;
    }
    ranks.shuffle(rng);
    ranks
}

/// `V diag(e) V^dagger` with `e` uniform on `[-2, 2]` and `V` Haar.
pub fn random_hamiltonian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let e: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..=2.0)).collect();
    let v = random_unitary(dim, rng)?;
    let d = seqmeas_core::linalg::diag(&e);
    Ok(hermitian_part(&(v.matrix() * d * v.matrix().adjoint())))
}

/// `sum_i w_i P_i / d(i)` with the weights normalized.
pub fn state_of_family(fam: &ProjectorFamily, weights: &[f64]) -> Result<DensityOperator> {
    let total: f64 = weights.iter().sum();
    if weights.len() != fam.len() || !(total > 0.0) {
        return Err(Error::InvalidInput(format!("weights {weights:?}")));
    }
    let mut m = ComplexMatrix::zeros(fam.dim(), fam.dim());
    for ((p, &d), &w) in fam.projectors().iter().zip(fam.degeneracies()).zip(weights) {
        if w > 0.0 {
            m += p.scale(w / total / d as f64);
        }
    }
    DensityOperator::new(hermitian_part(&m))
}

/// Random probability vector with entries bounded away from zero.
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use seqmeas_core::entropy::von_neumann_entropy;
    use seqmeas_core::linalg::{hermitian_eigendecomposition, identity, max_abs_diff};
    use seqmeas_core::quantum::unitarity_residual;

    #[test]
    fn density_cases() {
        let mut rng = trial_rng(0, "test", 0);
        let one = random_density(1, None, &mut rng).unwrap();
        assert!((one.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let pure = random_density(4, Some(1), &mut rng).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        for _ in 0..20 {
            let full = random_density(4, None, &mut rng).unwrap();
            let min = hermitian_eigendecomposition(full.matrix()).unwrap().values[0];
            assert!(min > 1e-12);
        }
        assert!(random_density(3, Some(4), &mut rng).is_err());
        assert!(random_density(3, Some(0), &mut rng).is_err());
    }

    #[test]
    fn unitary_cases() {
        let mut rng = trial_rng(0, "test", 1);
        let u1 = random_unitary(1, &mut rng).unwrap();
        assert!((u1.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        for d in 2..9 {
            let u = random_unitary(d, &mut rng).unwrap();
            assert!(unitarity_residual(u.matrix()) < 1e-12);
        }
        let a = random_unitary(5, &mut trial_rng(9, "u", 3)).unwrap();
        let b = random_unitary(5, &mut trial_rng(9, "u", 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pvm_cases() {
        let mut rng = trial_rng(0, "test", 2);
        let trivial = random_pvm(3, &[3], &mut rng).unwrap();
        assert!(max_abs_diff(trivial.projector(0), &identity(3)) < 1e-12);
        let basis = random_pvm(3, &[1, 1, 1], &mut rng).unwrap();
        assert_eq!(basis.degeneracies(), &[1, 1, 1]);
        let pairs = random_pvm(4, &[2, 2], &mut rng).unwrap();
        let sum = pairs.projector(0) + pairs.projector(1);
        assert!(max_abs_diff(&sum, &identity(4)) < 1e-12);
        assert_eq!(pairs.degeneracies(), &[2, 2]);
        assert!(random_pvm(4, &[2, 1], &mut rng).is_err());
    }

    #[test]
    fn policy_alternates() {
        let mut rng = trial_rng(0, "test", 3);
        for dim in 2..9 {
            assert_eq!(rank_policy(dim, 0, &mut rng), vec![1; dim]);
            let r = rank_policy(dim, 1, &mut rng);
            assert_eq!(r.iter().sum::<usize>(), dim);
            assert!(r.iter().any(|&k| k >= 2));
        }
    }

    #[test]
    fn hamiltonian_spectrum_in_range() {
        let mut rng = trial_rng(0, "test", 4);
        let h = random_hamiltonian(6, &mut rng).unwrap();
        let e = hermitian_eigendecomposition(&h).unwrap().values;
        assert!(e.iter().all(|v| (-2.0 - 1e-12..=2.0 + 1e-12).contains(v)));
    }
}
