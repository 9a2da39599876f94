//! Von Neumann and relative entropy, Klein's inequality, minimal pairs, and
//! entropy increase under Lüders measurements.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::{self, hermitian_eigendecomposition, ComplexVector, Subsystem};
use crate::quantum::{luders_channel, spectral_projectors, DensityOperator, ProjectorFamily};

/// Eigenvalues in `[-EIGEN_CLAMP, 0)` count as zero.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Eigenvalues of `rho` above this count as occupied when testing for divergence.
pub const SUPPORT_RHO: f64 = 1e-12;

/// Eigenvalues of `sigma` below this count as zero when testing for divergence.
pub const SUPPORT_SIGMA: f64 = 1e-12;

/// `Tr(P_i Q_j)` above this is a real overlap rather than round-off.
pub const SUPPORT_OVERLAP: f64 = 1e-10;

/// Slack for Klein's inequality and the Lüders entropy gap.
pub const KLEIN_TOL: f64 = 1e-10;

/// Default tolerance for `Tr(sigma Q_j) = Tr(rho Q_j)`.
pub const MINIMALITY_TOL: f64 = 1e-10;

fn xlogx(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// `S(rho) = -Tr(rho log rho)` in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let eig = hermitian_eigendecomposition(rho.matrix()).expect("density operators are Hermitian");
    0.0 - eig.values.iter().map(|&v| xlogx(v)).sum::<f64>()
}

/// `S(rho || sigma)` and whether it sits close to the divergence thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeEntropy {
    pub value: ExtendedReal,
    /// Some eigenvalue or overlap lies within a factor of ten of a support
    /// threshold, so the finite/infinite verdict depends on the thresholds.
    pub near_support_boundary: bool,
}

fn near(v: f64, threshold: f64) -> bool {
    v > threshold / 10.0 && v < threshold * 10.0
}

/// `Tr(rho log rho) - Tr(rho log sigma)` from the spectral decompositions
/// `rho = sum r_i P_i` and `sigma = sum s_j Q_j`, using
/// `Tr(rho log sigma) = sum_ij r_i log(s_j) Tr(P_i Q_j)`.
pub fn relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cluster_tol: f64,
) -> Result<RelativeEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let r = spectral_projectors(rho.matrix(), cluster_tol)?;
    let s = spectral_projectors(sigma.matrix(), cluster_tol)?;

    let rho_log_rho: f64 = r
        .eigenvalues
        .iter()
        .zip(r.degeneracies())
        .map(|(&ri, &d)| xlogx(ri) * d as f64)
        .sum();

    let mut rho_log_sigma = 0.0;
    let mut divergent = false;
    let mut boundary = false;
    for (ri, pi) in r.eigenvalues.iter().zip(r.family.projectors()) {
        let ri = ri.max(0.0);
        for (&sj, qj) in s.eigenvalues.iter().zip(s.family.projectors()) {
            let overlap = linalg::trace_of_product(pi, qj).re;
            if overlap > SUPPORT_OVERLAP / 10.0 && ri > SUPPORT_RHO / 10.0 {
                boundary |= near(sj, SUPPORT_SIGMA)
                    || (sj < SUPPORT_SIGMA
                        && (near(ri, SUPPORT_RHO) || near(overlap, SUPPORT_OVERLAP)));
            }
            if sj < SUPPORT_SIGMA {
                if ri > SUPPORT_RHO && overlap > SUPPORT_OVERLAP {
                    divergent = true;
                }
                continue;
            }
            if ri > 0.0 {
                rho_log_sigma += ri * sj.ln() * overlap;
            }
        }
    }
    let value = if divergent {
        ExtendedReal::Infinite
    } else {
        ExtendedReal::Finite(rho_log_rho - rho_log_sigma)
    };
    Ok(RelativeEntropy {
        value,
        near_support_boundary: boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleinCheck {
    pub value: ExtendedReal,
    /// `max(-S(rho||sigma), 0)`, zero when divergent.
    pub residual: f64,
    pub passed: bool,
}

/// Klein's inequality `S(rho || sigma) >= 0`.
pub fn klein_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cluster_tol: f64,
) -> Result<KleinCheck> {
    let value = relative_entropy(rho, sigma, cluster_tol)?.value;
    let residual = value.finite().map_or(0.0, |v| (-v).max(0.0));
    Ok(KleinCheck {
        value,
        residual,
        passed: value.at_least(0.0, KLEIN_TOL),
    })
}

/// `Tr(sigma Q_j)` and `Tr(rho Q_j)` on one eigenprojection of `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMarginal {
    pub eigenvalue: f64,
    pub degeneracy: usize,
    /// `p~(j) = Tr(sigma Q_j)`.
    pub p_tilde: f64,
    /// `q(j) = Tr(rho Q_j)`.
    pub q: f64,
}

impl ClusterMarginal {
    pub fn residual(&self) -> f64 {
        (self.p_tilde - self.q).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityCheck {
    pub is_minimal: bool,
    pub clusters: Vec<ClusterMarginal>,
}

impl MinimalityCheck {
    pub fn max_residual(&self) -> f64 {
        self.clusters.iter().fold(0.0, |a, c| a.max(c.residual()))
    }

    /// Cluster whose eigenvalue is closest to `value`.
    pub fn cluster_near(&self, value: f64) -> Option<&ClusterMarginal> {
        self.clusters
            .iter()
            .min_by(|a, b| (a.eigenvalue - value).abs().total_cmp(&(b.eigenvalue - value).abs()))
    }
}

/// Whether `Tr(sigma Q_j) = Tr(rho Q_j)` on every eigenprojection `Q_j` of `sigma`.
pub fn is_minimal_pair(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cluster_tol: f64,
    tol: f64,
) -> Result<MinimalityCheck> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let s = spectral_projectors(sigma.matrix(), cluster_tol)?;
    let clusters: Vec<ClusterMarginal> = s
        .eigenvalues
        .iter()
        .zip(s.family.projectors())
        .zip(s.degeneracies())
        .map(|((&eigenvalue, q), &degeneracy)| ClusterMarginal {
            eigenvalue,
            degeneracy,
            p_tilde: linalg::trace_of_product(sigma.matrix(), q).re,
            q: linalg::trace_of_product(rho.matrix(), q).re,
        })
        .collect();
    Ok(MinimalityCheck {
        is_minimal: clusters.iter().all(|c| c.residual() < tol),
        clusters,
    })
}

/// `|S(rho||sigma) - (S(sigma) - S(rho))|`; an error when the relative entropy diverges.
pub fn minimal_identity_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cluster_tol: f64,
) -> Result<f64> {
    let rel = relative_entropy(rho, sigma, cluster_tol)?
        .value
        .finite()
        .ok_or(Error::DivergentRelativeEntropy)?;
    Ok((rel - (von_neumann_entropy(sigma) - von_neumann_entropy(rho))).abs())
}

/// The pure entangled state `rho = |phi><phi|` with
/// `phi = (|01> + sqrt(3) |10>) / 2`, and `sigma = Tr_2(rho) (x) Tr_1(rho)`.
///
/// `(rho, sigma)` satisfies `S(rho||sigma) = S(sigma) - S(rho)` without being
/// a minimal pair.
pub fn counterexample_pair() -> (DensityOperator, DensityOperator) {
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let phi = ComplexVector::from_vec(vec![
        linalg::c(0.0, 0.0),
        linalg::c(0.5, 0.0),
        linalg::c(half_sqrt3, 0.0),
        linalg::c(0.0, 0.0),
    ]);
    let rho = linalg::outer(&phi);
    let first = linalg::partial_trace(&rho, (2, 2), Subsystem::First).expect("4 = 2 * 2");
    let second = linalg::partial_trace(&rho, (2, 2), Subsystem::Second).expect("4 = 2 * 2");
    let sigma = linalg::tensor_product(&first, &second);
    (
        DensityOperator::new(rho).expect("pure state"),
        DensityOperator::new(sigma).expect("product of states"),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LudersEntropyCheck {
    pub s_before: f64,
    pub s_after: f64,
    /// `s_after - s_before`.
    pub gap: f64,
    pub passed: bool,
    /// Minimality of `(rho, sum_n P_n rho P_n)`.
    pub minimality: MinimalityCheck,
    /// `|S(rho||sigma) - (S(sigma) - S(rho))|` for the same pair.
    pub identity_residual: Option<f64>,
}

/// Entropy before and after the non-selective Lüders channel, together with
/// the minimal-pair argument behind the increase.
pub fn luders_entropy_check(
    rho: &DensityOperator,
    fam: &ProjectorFamily,
    cluster_tol: f64,
) -> Result<LudersEntropyCheck> {
    let sigma = luders_channel(rho, fam)?;
    let s_before = von_neumann_entropy(rho);
    let s_after = von_neumann_entropy(&sigma);
    let gap = s_after - s_before;
    let minimality = is_minimal_pair(rho, &sigma, cluster_tol, MINIMALITY_TOL)?;
    let identity_residual = match minimal_identity_check(rho, &sigma, cluster_tol) {
        Ok(r) => Some(r),
        Err(Error::DivergentRelativeEntropy) => None,
        Err(e) => return Err(e),
    };
    Ok(LudersEntropyCheck {
        s_before,
        s_after,
        gap,
        passed: gap >= -KLEIN_TOL,
        minimality,
        identity_residual,
    })
}

/// Entropy comparison of a pair of states, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s_rho: f64,
    pub s_sigma: f64,
    pub rel_entropy: ExtendedReal,
    /// `s_sigma - s_rho`.
    pub gap: f64,
    pub is_minimal: bool,
    pub residuals: BTreeMap<String, f64>,
}

pub fn entropy_report(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cluster_tol: f64,
    tol: f64,
) -> Result<EntropyReport> {
    let s_rho = von_neumann_entropy(rho);
    let s_sigma = von_neumann_entropy(sigma);
    let rel = relative_entropy(rho, sigma, cluster_tol)?;
    let minimality = is_minimal_pair(rho, sigma, cluster_tol, tol)?;
    let mut residuals = BTreeMap::new();
    residuals.insert(
        "klein".to_string(),
        rel.value.finite().map_or(0.0, |v| (-v).max(0.0)),
    );
    residuals.insert("minimality".to_string(), minimality.max_residual());
    if let Some(v) = rel.value.finite() {
        residuals.insert("identity".to_string(), (v - (s_sigma - s_rho)).abs());
    }
    residuals.insert(
        "support_boundary".to_string(),
        if rel.near_support_boundary { 1.0 } else { 0.0 },
    );
    Ok(EntropyReport {
        s_rho,
        s_sigma,
        rel_entropy: rel.value,
        gap: s_sigma - s_rho,
        is_minimal: minimality.is_minimal,
        residuals,
    })
}
