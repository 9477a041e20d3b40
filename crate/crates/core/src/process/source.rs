//! Stochastic Jones-vector sources and ensemble averaging through a
//! unitary network.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::rng::{substream, StreamRng};
use crate::error::{Error, Result};
use crate::gates::Angle;
use crate::linalg::{c, re, validate_density, DensityOperator, Ket, Operator, C64, VALIDITY_TOL};

/// Distribution of the beam-A polarization state per realization.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceDistribution {
    Fixed(Ket),
    /// Linear polarization with angle uniform on `[min, max)`.
    UniformLinear { min: Angle, max: Angle },
    /// Linear polarization whose doubled angle follows a von Mises law
    /// centred on `2 * mean`; polarization angles are π-periodic.
    VonMisesLinear { mean: Angle, concentration: f64 },
    /// With probability `weight` emit `ket`, otherwise a Haar-random ket.
    DepolarizedMix { weight: f64, ket: Ket },
}

#[derive(Clone, Debug, PartialEq)]
pub struct JonesSource {
    distribution: SourceDistribution,
    seed: u64,
}

impl JonesSource {
    pub fn new(distribution: SourceDistribution, seed: u64) -> Result<Self> {
        match &distribution {
            SourceDistribution::Fixed(ket) | SourceDistribution::DepolarizedMix { ket, .. } if ket.dim() != 2 => {
                return Err(Error::dims("2-dim Jones vector", ket.dim()));
            }
            SourceDistribution::UniformLinear { min, max } if min.radians() >= max.radians() => {
                return Err(Error::OutOfRange {
                    what: "uniform_linear max angle".into(),
                    value: max.radians(),
                    min: min.radians(),
                    max: f64::INFINITY,
                });
            }
            SourceDistribution::VonMisesLinear { concentration, .. }
                if !(concentration.is_finite() && *concentration >= 0.0) =>
            {
                return Err(Error::OutOfRange {
                    what: "von_mises concentration".into(),
                    value: *concentration,
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
            SourceDistribution::DepolarizedMix { weight, .. } if !(0.0..=1.0).contains(weight) => {
                return Err(Error::OutOfRange {
                    what: "depolarized_mix weight".into(),
                    value: *weight,
                    min: 0.0,
                    max: 1.0,
                });
            }
            _ => {}
        }
        Ok(JonesSource { distribution, seed })
    }

    pub fn fixed(ket: Ket) -> Result<Self> {
        JonesSource::new(SourceDistribution::Fixed(ket), 0)
    }

    pub fn distribution(&self) -> &SourceDistribution {
        &self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Jones vector of realization `index`.
    pub fn draw(&self, index: u64) -> Ket {
        let mut rng = substream(self.seed, index);
        match &self.distribution {
            SourceDistribution::Fixed(ket) => ket.clone(),
            SourceDistribution::UniformLinear { min, max } => {
                let theta = rng.random_range(min.radians()..max.radians());
                linear(theta)
            }
            SourceDistribution::VonMisesLinear { mean, concentration } => {
                let doubled = sample_von_mises(&mut rng, *concentration);
                linear(mean.radians() + 0.5 * doubled)
            }
            SourceDistribution::DepolarizedMix { weight, ket } => {
                if rng.random::<f64>() < *weight {
                    ket.clone()
                } else {
                    haar_ket(&mut rng)
                }
            }
        }
    }
}

/// Linearly polarized Jones vector `cos θ |H> + sin θ |V>`.
pub fn linear(theta: f64) -> Ket {
    let (s, cs) = theta.sin_cos();
    Ket::normalized(vec![re(cs), re(s)]).expect("unit circle point")
}

fn haar_ket(rng: &mut StreamRng) -> Ket {
    loop {
        let amps: Vec<C64> = (0..2)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::normalized(amps) {
            return k;
        }
    }
}

/// Best–Fisher rejection sampler for a zero-mean von Mises angle.
fn sample_von_mises(rng: &mut StreamRng, kappa: f64) -> f64 {
    if kappa < 1e-8 {
        return rng.random_range(-PI..PI);
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let cc = kappa * (r - f);
        if cc * (2.0 - cc) - u2 > 0.0 || (cc / u2).ln() + 1.0 - cc >= 0.0 {
            let angle = f.clamp(-1.0, 1.0).acos();
            return if u3 < 0.5 { -angle } else { angle };
        }
    }
}

pub fn sample_source(src: &JonesSource, n: usize) -> Result<Vec<Ket>> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sample count".into(),
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    Ok((0..n as u64).into_par_iter().map(|i| src.draw(i)).collect())
}

const LEAF: u64 = 64;

fn add_into(acc: &mut [C64], other: &[C64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// Sum of `f(i)` over `lo..hi` with a fixed binary-split topology, so the
/// result is bit-identical whether the halves run in parallel or not.
fn tree_sum<F>(lo: u64, hi: u64, len: usize, f: &F, parallel: bool) -> Vec<C64>
where
    F: Fn(u64) -> Vec<C64> + Sync,
{
    if hi - lo <= LEAF {
        let mut acc = vec![C64::new(0.0, 0.0); len];
        for i in lo..hi {
            add_into(&mut acc, &f(i));
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    let (mut left, right) = if parallel {
        rayon::join(|| tree_sum(lo, mid, len, f, true), || tree_sum(mid, hi, len, f, true))
    } else {
        (tree_sum(lo, mid, len, f, false), tree_sum(mid, hi, len, f, false))
    };
    add_into(&mut left, &right);
    left
}

/// `(1/n) Σ_i U (|ψ_i> ⊗ |anc>)(<ψ_i| ⊗ <anc|) U†` over `n` source draws.
pub fn ensemble_state(src: &JonesSource, network: &Operator, ancilla: &Ket, n: usize) -> Result<DensityOperator> {
    ensemble_state_with(src, network, ancilla, n, true)
}

pub fn ensemble_state_with(
    src: &JonesSource,
    network: &Operator,
    ancilla: &Ket,
    n: usize,
    parallel: bool,
) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "realization count".into(),
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    if network.dim() != 2 * ancilla.dim() {
        return Err(Error::dims(
            format!("network dim {} = 2 x ancilla dim", 2 * ancilla.dim()),
            network.dim(),
        ));
    }
    network.ensure_unitary(VALIDITY_TOL)?;
    let dim = network.dim();
    let realization = |i: u64| -> Vec<C64> {
        let input = src.draw(i).tensor(ancilla);
        let out = network.apply(&input).expect("dimension checked");
        let mut rho = Vec::with_capacity(dim * dim);
        for a in &out {
            for b in &out {
                rho.push(a * b.conj());
            }
        }
        rho
    };
    let sum = tree_sum(0, n as u64, dim * dim, &realization, parallel);
    let trace: f64 = (0..dim).map(|i| sum[i * dim + i].re).sum();
    let entries = sum.into_iter().map(|z| z / trace).collect();
    let op = Operator::new(network.factor_dims().to_vec(), entries)?;
    validate_density(op)
}
