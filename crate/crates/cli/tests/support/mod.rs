//! Random states, a dense conditioning oracle and a CHSH model generator.
#![allow(dead_code)]

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use stochbell::gates::Angle;
use stochbell::linalg::{c, validate_density, DensityOperator, Ket, Operator, C64};
use stochbell::measure::ChshAngles;
use stochbell::process::bell_like_with_visibility;
use stochbell::sheaf::{chsh_scenario, induce_model, EmpiricalModel, Provenance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn random_ket(r: &mut impl Rng, d: usize) -> Ket {
    Ket::normalized((0..d).map(|_| c(r.sample(StandardNormal), r.sample(StandardNormal))).collect()).unwrap()
}

/// Normalized sum of `rank` random pure projectors.
pub fn random_density(r: &mut impl Rng, factor_dims: &[usize], rank: usize) -> DensityOperator {
    let d: usize = factor_dims.iter().product();
    let mut acc = Operator::zeros(factor_dims);
    for _ in 0..rank.clamp(1, d) {
        acc = acc.add(&random_ket(r, d).projector().with_factors(factor_dims).unwrap()).unwrap();
    }
    let t = acc.trace().re;
    validate_density(acc.scale(c(1.0 / t, 0.0))).unwrap()
}

pub fn random_angles(r: &mut impl Rng) -> ChshAngles {
    let mut a = || Angle::rad(r.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    ChshAngles {
        theta: a(),
        theta_prime: a(),
        phi: a(),
        phi_prime: a(),
    }
}

/// `Tr_E[(I ⊗ e) ρ]` by explicit index contraction over the last factor of
/// dimension `de`; returns the normalized state and its trace.
pub fn contraction_oracle(rho: &Operator, e: &Operator, de: usize) -> (Vec<C64>, f64) {
    let d = rho.dim() / de;
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            for f in 0..de {
                for g in 0..de {
                    out[i * d + j] += e.get(f, g) * rho.get(i * de + g, j * de + f);
                }
            }
        }
    }
    let p: f64 = (0..d).map(|i| out[i * d + i].re).sum();
    if p.abs() > 0.0 {
        for z in &mut out {
            *z /= p;
        }
    }
    (out, p)
}

pub fn pr_box() -> EmpiricalModel {
    let corr = vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)];
    let anti = vec![q(0, 1), q(1, 2), q(1, 2), q(0, 1)];
    EmpiricalModel::from_rationals(chsh_scenario(), vec![corr.clone(), corr.clone(), corr, anti], Provenance::Analytic)
        .unwrap()
}

pub fn deterministic_mixture(r: &mut impl Rng) -> EmpiricalModel {
    let mut weights = [0i64; 16];
    for _ in 0..r.random_range(1..=5) {
        weights[r.random_range(0..16)] += r.random_range(1..=9);
    }
    let total: i64 = weights.iter().sum();
    let global: Vec<BigRational> = weights.iter().map(|&w| q(w, total)).collect();
    EmpiricalModel::from_global(&chsh_scenario(), &global, Provenance::Analytic).unwrap()
}

pub fn mix_exact(a: &EmpiricalModel, b: &EmpiricalModel, lambda: &BigRational) -> EmpiricalModel {
    let one = q(1, 1);
    let tables = a
        .exact_tables()
        .iter()
        .zip(b.exact_tables())
        .map(|(x, y)| x.iter().zip(y).map(|(p, s)| lambda * p + (&one - lambda) * s).collect())
        .collect();
    EmpiricalModel::from_rationals(chsh_scenario(), tables, Provenance::Analytic).unwrap()
}

/// Compatible CHSH models: deterministic mixtures (feasible by
/// construction), visibility-scaled Φ+ at random angles, and PR-box
/// admixtures with rational weights.
pub fn generated_model(r: &mut impl Rng) -> EmpiricalModel {
    match r.random_range(0..3) {
        0 => deterministic_mixture(r),
        1 => {
            let v = r.random_range(0.0..=1.0);
            induce_model(&bell_like_with_visibility(v).unwrap(), &random_angles(r)).unwrap()
        }
        _ => {
            let lambda = q(r.random_range(0..=100), 100);
            mix_exact(&pr_box(), &deterministic_mixture(r), &lambda)
        }
    }
}
