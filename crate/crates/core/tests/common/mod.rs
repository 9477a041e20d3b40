//! Random quantum objects for the property tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use stochbell::linalg::{c, eig_hermitian, validate_density, DensityOperator, Ket, Operator, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut impl Rng, factor_dims: &[usize]) -> Operator {
    let d: usize = factor_dims.iter().product();
    Operator::new(factor_dims.to_vec(), (0..d * d).map(|_| gaussian(rng)).collect()).unwrap()
}

pub fn random_ket(rng: &mut impl Rng, d: usize) -> Ket {
    Ket::normalized((0..d).map(|_| gaussian(rng)).collect()).unwrap()
}

/// Ginibre ensemble `G G† / Tr(G G†)`, optionally rank-deficient.
pub fn random_density(rng: &mut impl Rng, factor_dims: &[usize], rank: usize) -> DensityOperator {
    let d: usize = factor_dims.iter().product();
    let mut acc = Operator::zeros(factor_dims);
    for _ in 0..rank.clamp(1, d) {
        let k = random_ket(rng, d);
        acc = acc.add(&k.projector().with_factors(factor_dims).unwrap()).unwrap();
    }
    let t = acc.trace().re;
    validate_density(acc.scale(c(1.0 / t, 0.0))).unwrap()
}

/// Gram-Schmidt on Gaussian columns.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> Operator {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    let entries = (0..d * d).map(|k| cols[k % d][k / d]).collect();
    Operator::new(vec![d], entries).unwrap()
}

/// Hermitian `f(A)` through the eigendecomposition.
pub fn spectral_map(a: &Operator, f: impl Fn(f64) -> f64) -> Operator {
    let (vals, vecs) = eig_hermitian(a).unwrap();
    let mut out = Operator::zeros(a.factor_dims());
    for (l, v) in vals.iter().zip(&vecs) {
        out = out.add(&v.projector().with_factors(a.factor_dims()).unwrap().scale(c(f(*l), 0.0))).unwrap();
    }
    out
}

/// Random Kraus operators normalised so that `Σ K†K = I`.
pub fn random_kraus(rng: &mut impl Rng, d: usize, count: usize) -> Vec<Operator> {
    let raw: Vec<Operator> = (0..count).map(|_| random_matrix(rng, &[d])).collect();
    let mut s = Operator::zeros(&[d]);
    for m in &raw {
        s = s.add(&m.adjoint().matmul(m).unwrap()).unwrap();
    }
    let inv_sqrt = spectral_map(&s, |x| 1.0 / x.sqrt());
    raw.iter().map(|m| m.matmul(&inv_sqrt).unwrap()).collect()
}

pub fn min_eigenvalue(op: &Operator) -> f64 {
    eig_hermitian(op).unwrap().0[0]
}
