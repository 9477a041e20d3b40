//! Kraus-form CP maps, flagged instruments and conditioning on a flag
//! effect.
//!
//! The flag system E is always the last tensor factor of a prepared state.

pub mod rng;
pub mod source;

pub use source::{ensemble_state, ensemble_state_with, linear, sample_source, JonesSource, SourceDistribution};

use crate::error::{Error, Result};
use crate::gates::phi_plus;
use crate::linalg::{
    eig_hermitian, partial_trace_operator, re, tensor, validate_density, DensityOperator, Operator, VALIDITY_TOL,
};

/// Branch probabilities below this are treated as events that never occur.
pub const BRANCH_CUTOFF: f64 = 1e-12;

/// `ρ ↦ Σ K ρ K†`, trace non-increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    ops: Vec<Operator>,
}

impl KrausMap {
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidKraus("empty Kraus family".into()))?;
        if ops.iter().any(|k| k.factor_dims() != first.factor_dims()) {
            return Err(Error::InvalidKraus("Kraus operators disagree on factor dims".into()));
        }
        let map = KrausMap { ops };
        let (vals, _) = eig_hermitian(&map.completeness())?;
        let top = *vals.last().expect("nonempty");
        if top > 1.0 + VALIDITY_TOL {
            return Err(Error::InvalidKraus(format!(
                "sum of K^dagger K has eigenvalue {top} > 1 (trace increasing)"
            )));
        }
        Ok(map)
    }

    pub fn identity(factor_dims: &[usize]) -> Self {
        KrausMap {
            ops: vec![Operator::identity(factor_dims)],
        }
    }

    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn factor_dims(&self) -> &[usize] {
        self.ops[0].factor_dims()
    }

    /// `Σ K† K`.
    pub fn completeness(&self) -> Operator {
        let mut acc = Operator::zeros(self.factor_dims());
        for k in &self.ops {
            acc = acc.add(&k.adjoint().matmul(k).expect("same dims")).expect("same dims");
        }
        acc
    }

    /// max |Σ K†K − I|
    pub fn completeness_defect(&self) -> f64 {
        self.completeness().max_abs_diff(&Operator::identity(self.factor_dims()))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_defect() <= VALIDITY_TOL
    }
}

/// Returns the unnormalized output `Σ K ρ K†` and its trace.
pub fn apply_kraus(map: &KrausMap, rho: &DensityOperator) -> Result<(Operator, f64)> {
    if map.factor_dims().iter().product::<usize>() != rho.dim() {
        return Err(Error::dims(format!("{:?}", map.factor_dims()), format!("{:?}", rho.factor_dims())));
    }
    let mut out = Operator::zeros(rho.factor_dims());
    for k in &map.ops {
        let k = k.clone().with_factors(rho.factor_dims())?;
        out = out.add(&rho.operator().conjugate_by(&k)?)?;
    }
    let prob = out.trace().re;
    Ok((out, prob))
}

/// Family of CP maps labelled by flag values whose sum is trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    branches: Vec<(String, KrausMap)>,
}

impl Instrument {
    pub fn new(branches: Vec<(String, KrausMap)>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidKraus("instrument has no branches".into()))?;
        let dims = first.1.factor_dims().to_vec();
        for (i, (label, map)) in branches.iter().enumerate() {
            if map.factor_dims() != dims.as_slice() {
                return Err(Error::InvalidKraus(format!("branch {label:?} has mismatched dims")));
            }
            if branches[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidKraus(format!("duplicate flag label {label:?}")));
            }
        }
        let total = KrausMap {
            ops: branches.iter().flat_map(|(_, m)| m.ops.iter().cloned()).collect(),
        };
        let defect = total.completeness_defect();
        if defect > VALIDITY_TOL {
            return Err(Error::InvalidKraus(format!(
                "instrument total map is not trace preserving (defect {defect:e})"
            )));
        }
        Ok(Instrument { branches })
    }

    /// Two-outcome projective instrument from a single-beam analyzer.
    pub fn projective(projectors: Vec<(String, Operator)>) -> Result<Self> {
        let branches = projectors
            .into_iter()
            .map(|(label, p)| Ok((label, KrausMap::new(vec![p])?)))
            .collect::<Result<Vec<_>>>()?;
        Instrument::new(branches)
    }

    pub fn branches(&self) -> &[(String, KrausMap)] {
        &self.branches
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub flag: String,
    pub probability: f64,
    /// `None` when the branch probability is below [`BRANCH_CUTOFF`].
    pub state: Option<DensityOperator>,
}

pub fn run_instrument(inst: &Instrument, rho: &DensityOperator) -> Result<Vec<Branch>> {
    inst.branches
        .iter()
        .map(|(flag, map)| {
            let (out, probability) = apply_kraus(map, rho)?;
            let state = if probability < BRANCH_CUTOFF {
                None
            } else {
                Some(validate_density(out.scale(re(1.0 / probability)))?)
            };
            Ok(Branch {
                flag: flag.clone(),
                probability,
                state,
            })
        })
        .collect()
}

/// Hermitian operator with spectrum in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    op: Operator,
}

impl Effect {
    pub fn new(op: Operator) -> Result<Self> {
        let (vals, _) = eig_hermitian(&op).map_err(|e| Error::InvalidEffect(e.to_string()))?;
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        if lo < -VALIDITY_TOL || hi > 1.0 + VALIDITY_TOL {
            return Err(Error::InvalidEffect(format!("spectrum [{lo}, {hi}] not within [0, 1]")));
        }
        Ok(Effect { op })
    }

    /// `|k><k|` on a `dim`-level flag.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidEffect(format!("flag value {k} out of range for dim {dim}")));
        }
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Effect::new(Operator::diag(&diag))
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }
}

/// Conditions the leading subsystems on the flag effect `e` acting on the
/// last factor: returns `(id ⊗ e)(ρ) / Tr[(id ⊗ e)(ρ)]` and the trace.
pub fn condition(rho: &DensityOperator, e: &Effect) -> Result<(DensityOperator, f64)> {
    let dims = rho.factor_dims();
    let flag_dim = *dims.last().expect("nonempty factor dims");
    if dims.len() < 2 || flag_dim != e.op.dim() {
        return Err(Error::dims(
            format!("at least two factors with last factor of dim {}", e.op.dim()),
            format!("{dims:?}"),
        ));
    }
    let rest = &dims[..dims.len() - 1];
    let lifted = tensor(&Operator::identity(rest), &e.op.clone().with_factors(&[flag_dim])?);
    let weighted = lifted.matmul(rho.operator())?;
    let keep: Vec<usize> = (0..rest.len()).collect();
    let reduced = partial_trace_operator(&weighted, &keep)?;
    let probability = reduced.trace().re;
    if probability < BRANCH_CUTOFF {
        return Err(Error::ZeroProbabilityEvent {
            probability,
            cutoff: BRANCH_CUTOFF,
        });
    }
    let state = validate_density(reduced.scale(re(1.0 / probability)))?;
    Ok((state, probability))
}

/// `v |Φ+><Φ+| + (1 − v) I/4`: a Bell-like state with white noise.
pub fn bell_like_with_visibility(v: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            what: "visibility".into(),
            value: v,
            min: 0.0,
            max: 1.0,
        });
    }
    let bell = phi_plus().into_operator().scale(re(v));
    let noise = Operator::identity(&[2, 2]).scale(re((1.0 - v) / 4.0));
    validate_density(bell.add(&noise)?)
}
