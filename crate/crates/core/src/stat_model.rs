//! Statistical model of two sequential measurements.
//!
//! A model is the conditional matrix `Pi(j|i)` together with the abstract
//! eigenvalues `x(i)` (first outcomes) and `x~(j)` (second outcomes). The
//! forward and reverse joint distributions are `P(i,j) = Pi(j|i) x(i)` and
//! `P~(j,i) = Pi(j|i) x~(j)`; a model is valid when both sum to one.
//!
//! All entropies are in nats.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

/// Default tolerance on the two normalization sums.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Magnitudes below this are treated as zero before taking logarithms.
pub const LOG_CLAMP: f64 = 1e-14;

/// The quintuple `(I, J, Pi, x, x~)` with `|I| = x.len()` and `|J| = x_tilde.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct SequentialModel {
    /// `pi[(j, i)] = Pi(j|i)`.
    pi: DMatrix<f64>,
    x: Vec<f64>,
    x_tilde: Vec<f64>,
}

/// On-disk model format; `pi` is row-major and indexed `pi[j][i]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub pi: Vec<Vec<f64>>,
    pub x: Vec<f64>,
    pub x_tilde: Vec<f64>,
}

impl TryFrom<ModelJson> for SequentialModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        SequentialModel::from_rows(j.pi, j.x, j.x_tilde)
    }
}

impl From<SequentialModel> for ModelJson {
    fn from(m: SequentialModel) -> Self {
        ModelJson {
            pi: (0..m.n_second())
                .map(|j| (0..m.n_first()).map(|i| m.pi[(j, i)]).collect())
                .collect(),
            x: m.x,
            x_tilde: m.x_tilde,
        }
    }
}

impl SequentialModel {
    /// Builds a model from `pi` of shape `(|J|, |I|)`. Only the structure is
    /// checked here; normalization is the job of [`SequentialModel::validate`].
    pub fn new(pi: DMatrix<f64>, x: Vec<f64>, x_tilde: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x_tilde.is_empty() {
            return Err(Error::Shape {
                context: "sequential model",
                expected: "non-empty outcome sets".into(),
                actual: format!("|I| = {}, |J| = {}", x.len(), x_tilde.len()),
            });
        }
        if pi.shape() != (x_tilde.len(), x.len()) {
            return Err(Error::Shape {
                context: "conditional matrix",
                expected: format!("({}, {})", x_tilde.len(), x.len()),
                actual: format!("{:?}", pi.shape()),
            });
        }
        if pi.iter().chain(&x).chain(&x_tilde).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sequential model"));
        }
        Ok(SequentialModel { pi, x, x_tilde })
    }

    /// Builds a model from rows `pi_rows[j][i]`.
    pub fn from_rows(pi_rows: Vec<Vec<f64>>, x: Vec<f64>, x_tilde: Vec<f64>) -> Result<Self> {
        let n_second = pi_rows.len();
        let n_first = x.len();
        if let Some(bad) = pi_rows.iter().position(|r| r.len() != n_first) {
            return Err(Error::Shape {
                context: "conditional matrix row",
                expected: format!("{n_first} entries"),
                actual: format!("row {bad} has {}", pi_rows[bad].len()),
            });
        }
        let pi = DMatrix::from_fn(n_second, n_first, |j, i| pi_rows[j][i]);
        Self::new(pi, x, x_tilde)
    }

    pub fn n_first(&self) -> usize {
        self.x.len()
    }

    pub fn n_second(&self) -> usize {
        self.x_tilde.len()
    }

    /// `Pi(j|i)`.
    pub fn pi(&self, j: usize, i: usize) -> f64 {
        self.pi[(j, i)]
    }

    pub fn pi_matrix(&self) -> &DMatrix<f64> {
        &self.pi
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_tilde(&self) -> &[f64] {
        &self.x_tilde
    }

    /// Same `Pi` and `x`, different second-kind eigenvalues.
    pub fn with_x_tilde(&self, x_tilde: Vec<f64>) -> Result<Self> {
        Self::new(self.pi.clone(), self.x.clone(), x_tilde)
    }

    fn forward_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n_first() {
            for j in 0..self.n_second() {
                s += self.pi[(j, i)] * self.x[i];
            }
        }
        s
    }

    fn reverse_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n_first() {
            for j in 0..self.n_second() {
                s += self.pi[(j, i)] * self.x_tilde[j];
            }
        }
        s
    }

    /// Checks non-negativity and both normalization sums against `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut violations = Vec::new();
        for j in 0..self.n_second() {
            for i in 0..self.n_first() {
                let v = self.pi[(j, i)];
                if v < 0.0 {
                    violations.push(Violation {
                        constraint: Constraint::NegativePi { j, i },
                        residual: -v,
                    });
                }
            }
        }
        for (i, &v) in self.x.iter().enumerate() {
            if v < 0.0 {
                violations.push(Violation {
                    constraint: Constraint::NegativeX { i },
                    residual: -v,
                });
            }
        }
        for (j, &v) in self.x_tilde.iter().enumerate() {
            if v < 0.0 {
                violations.push(Violation {
                    constraint: Constraint::NegativeXTilde { j },
                    residual: -v,
                });
            }
        }
        let forward = (self.forward_sum() - 1.0).abs();
        if forward > tol {
            violations.push(Violation {
                constraint: Constraint::ForwardNormalization,
                residual: forward,
            });
        }
        let reverse = (self.reverse_sum() - 1.0).abs();
        if reverse > tol {
            violations.push(Violation {
                constraint: Constraint::ReverseNormalization,
                residual: reverse,
            });
        }
        ValidationReport { violations }
    }

    /// `(d(i), d~(j))`: column and row sums of `Pi`.
    pub fn degeneracy_marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let d = (0..self.n_first())
            .map(|i| (0..self.n_second()).map(|j| self.pi[(j, i)]).sum())
            .collect();
        let d_tilde = (0..self.n_second())
            .map(|j| (0..self.n_first()).map(|i| self.pi[(j, i)]).sum())
            .collect();
        (d, d_tilde)
    }

    pub fn joint_distributions(&self) -> JointDistribution {
        let (ni, nj) = (self.n_first(), self.n_second());
        JointDistribution {
            p_forward: DMatrix::from_fn(ni, nj, |i, j| self.pi[(j, i)] * self.x[i]),
            p_reverse: DMatrix::from_fn(nj, ni, |j, i| self.pi[(j, i)] * self.x_tilde[j]),
        }
    }

    pub fn marginal_set(&self) -> MarginalSet {
        let (d, d_tilde) = self.degeneracy_marginals();
        let p = d.iter().zip(&self.x).map(|(d, x)| d * x).collect();
        let q = (0..self.n_second())
            .map(|j| (0..self.n_first()).map(|i| self.pi[(j, i)] * self.x[i]).sum())
            .collect();
        let p_tilde = d_tilde.iter().zip(&self.x_tilde).map(|(d, x)| d * x).collect();
        let q_tilde = (0..self.n_first())
            .map(|i| {
                (0..self.n_second())
                    .map(|j| self.pi[(j, i)] * self.x_tilde[j])
                    .sum()
            })
            .collect();
        MarginalSet {
            d,
            d_tilde,
            p,
            q,
            p_tilde,
            q_tilde,
        }
    }

    /// `pi(j|i) = Pi(j|i) / d(i)` for every `i` with `p(i) > 0`; other rows are
    /// left undefined.
    pub fn conditional_pi(&self) -> Result<ConditionalMatrix> {
        let (d, _) = self.degeneracy_marginals();
        let mut rows = Vec::with_capacity(self.n_first());
        for (i, (&di, &xi)) in d.iter().zip(&self.x).enumerate() {
            let p = di * xi;
            if p > 0.0 {
                if di <= 0.0 {
                    return Err(Error::Inconsistent(format!(
                        "p({i}) = {p:e} > 0 with degeneracy {}",
                        di
                    )));
                }
                rows.push(Some(
                    (0..self.n_second()).map(|j| self.pi[(j, i)] / di).collect(),
                ));
            } else {
                rows.push(None);
            }
        }
        Ok(ConditionalMatrix { rows })
    }

    /// Expectation of `X(i,j) = c(i,j) / x(i)`. Points with `x(i) = 0` contribute
    /// `c(i,j) Pi(j|i)`, the value left after cancelling `x(i)` in `P(i,j) X(i,j)`.
    pub fn expectation_regularized(&self, obs: &RatioObservable) -> Result<f64> {
        if obs.c.shape() != (self.n_first(), self.n_second()) {
            return Err(Error::Shape {
                context: "ratio observable",
                expected: format!("({}, {})", self.n_first(), self.n_second()),
                actual: format!("{:?}", obs.c.shape()),
            });
        }
        let mut total = 0.0;
        for i in 0..self.n_first() {
            let xi = self.x[i];
            for j in 0..self.n_second() {
                let pi = self.pi[(j, i)];
                total += if xi > 0.0 {
                    (pi * xi) * obs.c[(i, j)] / xi
                } else {
                    obs.c[(i, j)] * pi
                };
            }
        }
        Ok(total)
    }

    /// The observable `x~(j) / x(i)` as a [`RatioObservable`].
    pub fn j_observable(&self) -> RatioObservable {
        RatioObservable {
            c: DMatrix::from_fn(self.n_first(), self.n_second(), |_, j| self.x_tilde[j]),
        }
    }

    /// `|<x~(j)/x(i)> - 1|`.
    pub fn j_equation_residual(&self) -> f64 {
        let value = self
            .expectation_regularized(&self.j_observable())
            .expect("j_observable has model shape");
        (value - 1.0).abs()
    }

    /// `|<x(i)/x~(j)>~ - 1|` under `P~`, regularized at `x~(j) = 0`.
    pub fn j_equation_reverse_residual(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_second() {
            let xt = self.x_tilde[j];
            for i in 0..self.n_first() {
                let pi = self.pi[(j, i)];
                total += if xt > 0.0 {
                    (pi * xt) * self.x[i] / xt
                } else {
                    self.x[i] * pi
                };
            }
        }
        (total - 1.0).abs()
    }

    /// Minimal-case eigenvalues `x~(j) = q(j) / d~(j)`, which make `p~ = q`.
    pub fn minimal_x_tilde(&self) -> Result<Vec<f64>> {
        let m = self.marginal_set();
        m.q.iter()
            .zip(&m.d_tilde)
            .enumerate()
            .map(|(j, (&q, &dt))| {
                if dt > 0.0 {
                    Ok(q / dt)
                } else if q > 0.0 {
                    Err(Error::Inconsistent(format!(
                        "q({j}) = {q:e} > 0 but d~({j}) = {dt}"
                    )))
                } else {
                    Ok(0.0)
                }
            })
            .collect()
    }

    /// The model with `x~` replaced by [`SequentialModel::minimal_x_tilde`].
    pub fn minimal_case(&self) -> Result<Self> {
        self.with_x_tilde(self.minimal_x_tilde()?)
    }

    /// `(H(p), H(q), cross)` with `cross = -sum_j q(j) log(p~(j)/d~(j))`.
    pub fn entropy_chain(&self) -> Result<EntropyChain> {
        let m = self.marginal_set();
        let h_p = modified_shannon_entropy(&m.p, &m.d)?;
        let h_q = modified_shannon_entropy(&m.q, &m.d_tilde)?;
        let mut cross = 0.0;
        for j in 0..self.n_second() {
            let q = clamp_small(m.q[j]);
            if q == 0.0 {
                continue;
            }
            let pt = clamp_small(m.p_tilde[j]);
            if pt <= 0.0 {
                return Ok(EntropyChain {
                    h_p,
                    h_q,
                    cross: ExtendedReal::Infinite,
                });
            }
            cross -= q * (pt / m.d_tilde[j]).ln();
        }
        Ok(EntropyChain {
            h_p,
            h_q,
            cross: ExtendedReal::Finite(cross),
        })
    }
}

fn clamp_small(v: f64) -> f64 {
    if v.abs() < LOG_CLAMP {
        0.0
    } else {
        v
    }
}

/// `H(p) = -sum_i p(i) log(p(i)/d(i))` in nats, with `0 log 0 = 0`.
pub fn modified_shannon_entropy(p: &[f64], d: &[f64]) -> Result<f64> {
    if p.len() != d.len() {
        return Err(Error::Shape {
            context: "modified_shannon_entropy",
            expected: format!("degeneracies of length {}", p.len()),
            actual: format!("{}", d.len()),
        });
    }
    let mut h = 0.0;
    for (i, (&pi, &di)) in p.iter().zip(d).enumerate() {
        if pi <= -LOG_CLAMP || !pi.is_finite() {
            return Err(Error::InvalidInput(format!("probability p({i}) = {pi:e}")));
        }
        let pi = clamp_small(pi);
        if pi == 0.0 {
            continue;
        }
        if !(di > 0.0) {
            return Err(Error::InvalidInput(format!(
                "degeneracy d({i}) = {di} with p({i}) = {pi:e} > 0"
            )));
        }
        h -= pi * (pi / di).ln();
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Constraint {
    NegativePi { j: usize, i: usize },
    NegativeX { i: usize },
    NegativeXTilde { j: usize },
    /// `sum P(i,j) = 1`
    ForwardNormalization,
    /// `sum P~(j,i) = 1`
    ReverseNormalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.violations.iter().fold(0.0, |a, v| a.max(v.residual))
    }
}

/// `P(i,j)` indexed `(i, j)` and `P~(j,i)` indexed `(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub p_forward: DMatrix<f64>,
    pub p_reverse: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSet {
    pub d: Vec<f64>,
    pub d_tilde: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub p_tilde: Vec<f64>,
    pub q_tilde: Vec<f64>,
}

/// `pi(j|i)`, one optional row per first outcome `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMatrix {
    pub rows: Vec<Option<Vec<f64>>>,
}

impl ConditionalMatrix {
    pub fn get(&self, j: usize, i: usize) -> Option<f64> {
        self.rows[i].as_ref().map(|r| r[j])
    }

    /// `max_j |sum_i pi(j|i) d(i) - sum_i Pi(j|i)|` over the defined rows.
    pub fn double_stochasticity_residual(&self, model: &SequentialModel) -> f64 {
        let (d, _) = model.degeneracy_marginals();
        let mut worst: f64 = 0.0;
        for j in 0..model.n_second() {
            let mut weighted = 0.0;
            let mut direct = 0.0;
            for (i, row) in self.rows.iter().enumerate() {
                if let Some(row) = row {
                    weighted += row[j] * d[i];
                    direct += model.pi(j, i);
                }
            }
            worst = worst.max((weighted - direct).abs());
        }
        worst
    }
}

/// Random variable `X(i,j) = c(i,j) / x(i)`, stored by its numerator.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioObservable {
    /// Indexed `(i, j)`.
    pub c: DMatrix<f64>,
}

impl RatioObservable {
    pub fn new(c: DMatrix<f64>) -> Result<Self> {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ratio observable"));
        }
        Ok(RatioObservable { c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyChain {
    pub h_p: f64,
    pub h_q: f64,
    pub cross: ExtendedReal,
}

impl EntropyChain {
    /// `max(H(p) - H(q), 0)`.
    pub fn lower_gap_violation(&self) -> f64 {
        (self.h_p - self.h_q).max(0.0)
    }

    /// `max(H(q) - cross, 0)`; zero when the cross term diverges.
    pub fn upper_gap_violation(&self) -> f64 {
        match self.cross {
            ExtendedReal::Finite(c) => (self.h_q - c).max(0.0),
            ExtendedReal::Infinite => 0.0,
        }
    }
}
