//! Polarization-analyzer statistics on one or two beams: outcome tables,
//! Malus-law contrasts, correlations and CHSH values.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{projector, sigma_theta, Angle, Sign};
use crate::linalg::{DensityOperator, IDENTITY_TOL};
use crate::process::rng::{derive_seed, substream};
use crate::sheaf::{chsh_scenario, EmpiricalModel, Provenance};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingPair {
    pub alice: Angle,
    pub bob: Angle,
}

impl SettingPair {
    pub fn new(alice: Angle, bob: Angle) -> Self {
        SettingPair { alice, bob }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshAngles {
    pub theta: Angle,
    pub theta_prime: Angle,
    pub phi: Angle,
    pub phi_prime: Angle,
}

impl ChshAngles {
    /// `θ = 0, θ' = π/4, φ = π/8, φ' = −π/8`, where `|Φ+>` reaches `2√2`.
    pub fn tsirelson() -> Self {
        ChshAngles {
            theta: Angle::rad(0.0),
            theta_prime: Angle::rad(PI / 4.0),
            phi: Angle::rad(PI / 8.0),
            phi_prime: Angle::rad(-PI / 8.0),
        }
    }

    /// Setting pairs in context order `(θ,φ), (θ,φ'), (θ',φ), (θ',φ')`.
    pub fn pairs(&self) -> [SettingPair; 4] {
        [
            SettingPair::new(self.theta, self.phi),
            SettingPair::new(self.theta, self.phi_prime),
            SettingPair::new(self.theta_prime, self.phi),
            SettingPair::new(self.theta_prime, self.phi_prime),
        ]
    }
}

/// `p(o, o')` indexed `[alice][bob]` with `+` first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointTable(pub [[f64; 2]; 2]);

impl JointTable {
    pub fn get(&self, alice: Sign, bob: Sign) -> f64 {
        self.0[alice as usize][bob as usize]
    }

    /// Row-major `[++, +-, -+, --]`.
    pub fn flatten(&self) -> [f64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    /// `Σ o o' p(o, o')`.
    pub fn correlator(&self) -> f64 {
        self.0[0][0] - self.0[0][1] - self.0[1][0] + self.0[1][1]
    }
}

fn require_two_beams(rho: &DensityOperator) -> Result<()> {
    if rho.factor_dims() != [2, 2] {
        return Err(Error::dims("factor dims [2, 2]", format!("{:?}", rho.factor_dims())));
    }
    Ok(())
}

fn require_one_beam(rho: &DensityOperator) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::dims("single-beam 2x2 state", format!("{:?}", rho.factor_dims())));
    }
    Ok(())
}

/// `p(o, o' | θ, φ) = Tr(ρ (Π_{o|θ} ⊗ Π_{o'|φ}))`.
pub fn outcome_probs(rho: &DensityOperator, s: &SettingPair) -> Result<JointTable> {
    require_two_beams(rho)?;
    let mut t = [[0.0; 2]; 2];
    for (i, &a) in Sign::BOTH.iter().enumerate() {
        for (j, &b) in Sign::BOTH.iter().enumerate() {
            let effect = projector(s.alice, a).tensor(&projector(s.bob, b));
            t[i][j] = rho.expectation(&effect)?;
        }
    }
    Ok(JointTable(t))
}

/// `(p(+|θ), p(−|θ))` for a single beam.
pub fn local_probs(rho: &DensityOperator, theta: Angle) -> Result<(f64, f64)> {
    require_one_beam(rho)?;
    Ok((
        rho.expectation(&projector(theta, Sign::Plus))?,
        rho.expectation(&projector(theta, Sign::Minus))?,
    ))
}

/// Malus-law contrast `p(+|θ) − p(−|θ)`, cross-checked against `Tr(ρ σ_θ)`.
pub fn contrast(rho: &DensityOperator, theta: Angle) -> Result<f64> {
    let (plus, minus) = local_probs(rho, theta)?;
    let from_probs = plus - minus;
    let from_operator = rho.expectation(&sigma_theta(theta))?;
    debug_assert!(
        (from_probs - from_operator).abs() <= IDENTITY_TOL,
        "contrast formulas disagree: {from_probs} vs {from_operator}"
    );
    Ok(from_operator)
}

/// `E(θ, φ) = Tr(ρ (σ_θ ⊗ σ_φ))`.
pub fn correlation(rho: &DensityOperator, s: &SettingPair) -> Result<f64> {
    require_two_beams(rho)?;
    let observable = sigma_theta(s.alice).tensor(&sigma_theta(s.bob));
    rho.expectation(&observable)
}

/// `S = E(θ,φ) + E(θ,φ') + E(θ',φ) − E(θ',φ')`.
pub fn chsh(rho: &DensityOperator, a: &ChshAngles) -> Result<f64> {
    let [p1, p2, p3, p4] = a.pairs();
    Ok(correlation(rho, &p1)? + correlation(rho, &p2)? + correlation(rho, &p3)? - correlation(rho, &p4)?)
}

/// Draws multinomial counts for `probs` with `shots` trials by chaining
/// conditional binomials.
fn multinomial<R: rand::Rng>(rng: &mut R, shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = Vec::with_capacity(probs.len());
    let mut remaining = shots;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            counts.push(remaining);
            break;
        }
        let p = p.max(0.0);
        let cond = if mass <= 0.0 { 0.0 } else { (p / mass).clamp(0.0, 1.0) };
        let n = if remaining == 0 || cond == 0.0 {
            0
        } else {
            Binomial::new(remaining, cond).expect("valid binomial").sample(rng)
        };
        counts.push(n);
        remaining -= n;
        mass -= p;
    }
    counts
}

/// Finite-statistics CHSH model: `shots_per_context` draws from
/// `outcome_probs` per context, each context on its own random stream.
pub fn monte_carlo_model(rho: &DensityOperator, a: &ChshAngles, shots_per_context: u64, seed: u64) -> Result<EmpiricalModel> {
    if shots_per_context == 0 {
        return Err(Error::OutOfRange {
            what: "shots per context".into(),
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let probs = a
        .pairs()
        .iter()
        .map(|p| outcome_probs(rho, p))
        .collect::<Result<Vec<_>>>()?;
    let stream_seed = derive_seed(seed, "monte_carlo_model");
    let tables: Vec<Vec<BigRational>> = probs
        .par_iter()
        .enumerate()
        .map(|(k, table)| {
            let mut rng = substream(stream_seed, k as u64);
            multinomial(&mut rng, shots_per_context, &table.flatten())
                .into_iter()
                .map(|c| BigRational::new(BigInt::from(c), BigInt::from(shots_per_context)))
                .collect()
        })
        .collect();
    EmpiricalModel::from_rationals(
        chsh_scenario(),
        tables,
        Provenance::Sampled {
            shots: shots_per_context,
            seed,
        },
    )
}

/// Standard error of the empirical CHSH value with `shots` per context,
/// from the per-shot variance `1 − E²` of each correlator.
pub fn chsh_standard_error(correlators: &[f64; 4], shots: u64) -> f64 {
    (correlators.iter().map(|e| 1.0 - e * e).sum::<f64>() / shots as f64).sqrt()
}
