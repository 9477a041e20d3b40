//! Fixed operators of the two-beam network: Hadamard, CNOT, polarization
//! projectors and the dichotomic analyzer observable.
//!
//! Basis convention: `|0>` is horizontal and `|1>` vertical polarization;
//! in two-beam operators beam A is the leading tensor factor.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{re, DensityOperator, Operator};

/// Analyzer angle in radians.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub fn from_radians(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::NonFinite("angle".into()));
        }
        Ok(Angle(radians))
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Angle::from_radians(degrees.to_radians())
    }

    /// Constructor for literal angles known to be finite.
    pub const fn rad(radians: f64) -> Self {
        Angle(radians)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

/// Outcome of a dichotomic polarization measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

pub fn hadamard() -> Operator {
    let h = FRAC_1_SQRT_2;
    Operator::from_real_rows(&[&[h, h], &[h, -h]]).expect("static 2x2")
}

/// CNOT with beam A as control and beam B as target.
pub fn cnot() -> Operator {
    Operator::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
    .and_then(|op| op.with_factors(&[2, 2]))
    .expect("static 4x4")
}

pub fn sigma_z() -> Operator {
    Operator::diag(&[1.0, -1.0])
}

pub fn sigma_x() -> Operator {
    Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("static 2x2")
}

/// Analyzer eigenvector `|±_θ>` as real amplitudes.
fn analyzer_vector(theta: Angle, sign: Sign) -> [f64; 2] {
    let (s, cs) = theta.0.sin_cos();
    match sign {
        Sign::Plus => [cs, s],
        Sign::Minus => [-s, cs],
    }
}

/// Rank-one projector `|±_θ><±_θ|`.
pub fn projector(theta: Angle, sign: Sign) -> Operator {
    let v = analyzer_vector(theta, sign);
    Operator::from_real_rows(&[&[v[0] * v[0], v[0] * v[1]], &[v[1] * v[0], v[1] * v[1]]])
        .expect("static 2x2")
}

/// `σ_θ = Π_{+|θ} − Π_{−|θ} = cos 2θ σ_z + sin 2θ σ_x`.
pub fn sigma_theta(theta: Angle) -> Operator {
    let (s2, c2) = (2.0 * theta.0).sin_cos();
    Operator::from_real_rows(&[&[c2, s2], &[s2, -c2]]).expect("static 2x2")
}

/// `CNOT · (H ⊗ I)`.
pub fn bell_unitary() -> Operator {
    let h_i = hadamard().tensor(&Operator::identity(&[2]));
    cnot().matmul(&h_i).expect("both 4x4")
}

/// Conjugates a two-beam state by `CNOT · (H ⊗ I)`.
pub fn prepare_bell(rho_in: &DensityOperator) -> Result<DensityOperator> {
    if rho_in.factor_dims() != [2, 2] {
        return Err(Error::dims("factor dims [2, 2]", format!("{:?}", rho_in.factor_dims())));
    }
    let out = rho_in.operator().conjugate_by(&bell_unitary())?;
    crate::linalg::validate_density(out)
}

/// `|Φ+> = (|00> + |11>)/√2` as a density operator on A⊗B.
pub fn phi_plus() -> DensityOperator {
    let h = FRAC_1_SQRT_2;
    let ket = crate::linalg::Ket::new(vec![re(h), re(0.0), re(0.0), re(h)]).expect("normalized");
    DensityOperator::pure_with_factors(&ket, &[2, 2]).expect("4 = 2x2")
}
