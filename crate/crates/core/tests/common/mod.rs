#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use seqmeas_core::linalg::{c, outer, ComplexMatrix, ComplexVector};
use seqmeas_core::quantum::{DensityOperator, ProjectorFamily, Unitary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn density(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = gaussian(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m.unscale(tr);
    DensityOperator::new((&m + m.adjoint()).scale(0.5)).unwrap()
}

pub fn unitary(dim: usize, rng: &mut impl Rng) -> Unitary {
    let qr = gaussian(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    Unitary::new(q).unwrap()
}

pub fn pvm(ranks: &[usize], rng: &mut impl Rng) -> ProjectorFamily {
    let dim: usize = ranks.iter().sum();
    let u = unitary(dim, rng);
    let mut start = 0;
    let mut out = Vec::new();
    for &r in ranks {
        let mut p = ComplexMatrix::zeros(dim, dim);
        for k in start..start + r {
            let v: ComplexVector = u.matrix().column(k).into_owned();
            p += outer(&v);
        }
        out.push(p);
        start += r;
    }
    ProjectorFamily::new(out).unwrap()
}

/// Random composition of `dim` into positive parts.
pub fn ranks(dim: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut left = dim;
    let mut out = Vec::new();
    while left > 0 {
        let r = rng.random_range(1..=left);
        out.push(r);
        left -= r;
    }
    out
}

/// `sum_i w_i P_i / d_i` for normalized positive weights.
pub fn state_of_family(fam: &ProjectorFamily, weights: &[f64]) -> DensityOperator {
    let total: f64 = weights.iter().sum();
    let mut m = ComplexMatrix::zeros(fam.dim(), fam.dim());
    for ((p, &d), &w) in fam.projectors().iter().zip(fam.degeneracies()).zip(weights) {
        m += p.scale(w / total / d as f64);
    }
    DensityOperator::new((&m + m.adjoint()).scale(0.5)).unwrap()
}
