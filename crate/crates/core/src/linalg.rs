//! Dense complex linear algebra over small tensor-product Hilbert spaces.
//!
//! Every [`Operator`] carries its tensor factorization (`factor_dims`), so
//! partial traces and conditioning never have to guess which subsystem is
//! which. Subsystem order is fixed at construction time and preserved by
//! every operation in this module.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for the Hermitian, trace and positivity gates on states.
pub const VALIDITY_TOL: f64 = 1e-10;
/// Tolerance for algebraic identities (tensor traces, idempotence, unitarity).
pub const IDENTITY_TOL: f64 = 1e-12;
/// Norm tolerance for kets.
pub const KET_NORM_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_finite(values: &[C64], what: &str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Dense square complex matrix in row-major order with tensor bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    factor_dims: Vec<usize>,
    entries: Vec<C64>,
}

impl Operator {
    pub fn new(factor_dims: Vec<usize>, entries: Vec<C64>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::dims("nonempty positive factor dims", format!("{factor_dims:?}")));
        }
        let dim: usize = factor_dims.iter().product();
        if entries.len() != dim * dim {
            return Err(Error::dims(
                format!("{} entries ({dim}x{dim})", dim * dim),
                entries.len(),
            ));
        }
        check_finite(&entries, "operator entries")?;
        Ok(Operator {
            dim,
            factor_dims,
            entries,
        })
    }

    /// Builds a single-factor operator from rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::dims(format!("{n} columns per row"), "ragged rows"));
        }
        Operator::new(vec![n], rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| re(x)).collect()).collect();
        Operator::from_rows(&rows)
    }

    pub fn zeros(factor_dims: &[usize]) -> Self {
        let dim: usize = factor_dims.iter().product();
        Operator {
            dim,
            factor_dims: factor_dims.to_vec(),
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(factor_dims: &[usize]) -> Self {
        let mut op = Operator::zeros(factor_dims);
        for i in 0..op.dim {
            op.entries[i * op.dim + i] = ONE;
        }
        op
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut op = Operator::zeros(&[values.len()]);
        for (i, &v) in values.iter().enumerate() {
            op.entries[i * op.dim + i] = re(v);
        }
        op
    }

    /// |a><b|
    pub fn outer(a: &Ket, b: &Ket) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::dims(a.dim(), b.dim()));
        }
        let n = a.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(a.amplitudes[i] * b.amplitudes[j].conj());
            }
        }
        Ok(Operator {
            dim: n,
            factor_dims: vec![n],
            entries,
        })
    }

    /// Reinterprets the tensor factorization; the product must match `dim`.
    pub fn with_factors(mut self, factor_dims: &[usize]) -> Result<Self> {
        let prod: usize = factor_dims.iter().product();
        if prod != self.dim || factor_dims.contains(&0) {
            return Err(Error::dims(
                format!("factors with product {}", self.dim),
                format!("{factor_dims:?}"),
            ));
        }
        self.factor_dims = factor_dims.to_vec();
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Operator::zeros(&self.factor_dims);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Operator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::dims(
                format!("{:?}", self.factor_dims),
                format!("{:?}", other.factor_dims),
            ));
        }
        Ok(())
    }

    /// Matrix product; keeps the factorization of `self`.
    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        let n = self.dim;
        let mut out = Operator::zeros(&self.factor_dims);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|z| *z *= factor);
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Entrywise max |self - other|.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// max |U^dagger U - I|
    pub fn unitary_deviation(&self) -> f64 {
        let prod = self
            .adjoint()
            .matmul(self)
            .expect("adjoint has the same shape");
        prod.max_abs_diff(&Operator::identity(&self.factor_dims))
    }

    pub fn ensure_unitary(&self, bound: f64) -> Result<()> {
        let deviation = self.unitary_deviation();
        if deviation > bound {
            return Err(Error::NotUnitary { deviation, bound });
        }
        Ok(())
    }

    /// U · self · U^dagger, keeping the factorization of `self`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        let out = u.matmul(self)?.matmul(&u.adjoint())?;
        Ok(Operator {
            factor_dims: self.factor_dims.clone(),
            ..out
        })
    }

    pub fn apply(&self, ket: &Ket) -> Result<Vec<C64>> {
        if ket.dim() != self.dim {
            return Err(Error::dims(self.dim, ket.dim()));
        }
        let n = self.dim;
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * ket.amplitudes[j]).sum())
            .collect())
    }

    pub fn tensor(&self, other: &Operator) -> Self {
        tensor(self, other)
    }

    /// Symmetrized copy (A + A^dagger)/2.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            out.set(i, i, re(self.get(i, i).re));
            for j in (i + 1)..n {
                let v = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out.set(i, j, v);
                out.set(j, i, v.conj());
            }
        }
        out
    }
}

/// Kronecker product `a ⊗ b`; `a` indexes the slow (leading) factors.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut entries = vec![ZERO; n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a.get(i, j);
            for k in 0..nb {
                let row = i * nb + k;
                for l in 0..nb {
                    entries[row * n + j * nb + l] = aij * b.get(k, l);
                }
            }
        }
    }
    let mut factor_dims = a.factor_dims.clone();
    factor_dims.extend_from_slice(&b.factor_dims);
    Operator {
        dim: n,
        factor_dims,
        entries,
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: Vec<C64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidKet("empty amplitude list".into()));
        }
        check_finite(&amplitudes, "ket amplitudes")?;
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidKet(format!("norm {norm} is not 1")));
        }
        Ok(Ket { amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        check_finite(&amplitudes, "ket amplitudes")?;
        let norm = norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidKet("cannot normalize zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Ket { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ket { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ket { amplitudes }
    }

    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> Operator {
        Operator::outer(self, self).expect("same dimension")
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn pure(ket: &Ket) -> Self {
        DensityOperator { op: ket.projector() }
    }

    pub fn pure_with_factors(ket: &Ket, factor_dims: &[usize]) -> Result<Self> {
        Ok(DensityOperator {
            op: ket.projector().with_factors(factor_dims)?,
        })
    }

    pub fn maximally_mixed(factor_dims: &[usize]) -> Self {
        let id = Operator::identity(factor_dims);
        let n = id.dim as f64;
        DensityOperator {
            op: id.scale(re(1.0 / n)),
        }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.op.factor_dims
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            op: tensor(&self.op, &other.op),
        }
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> f64 {
        let n = self.op.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.op.get(i, j) * self.op.get(j, i)).re;
            }
        }
        acc
    }

    /// Tr(ρ A), real part.
    pub fn expectation(&self, observable: &Operator) -> Result<f64> {
        self.op.check_same_shape(observable)?;
        let n = self.op.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.op.get(i, k) * observable.get(k, i);
            }
        }
        Ok(acc.re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.op)
            .map(|(vals, _)| vals)
            .expect("density operators are Hermitian")
    }
}

/// Wraps `op` as a density operator if it is Hermitian, unit-trace and PSD
/// within [`VALIDITY_TOL`].
pub fn validate_density(op: Operator) -> Result<DensityOperator> {
    let deviation = op.hermitian_deviation();
    if deviation > VALIDITY_TOL {
        return Err(Error::NotHermitian {
            deviation,
            bound: VALIDITY_TOL,
        });
    }
    let trace = op.trace().re;
    if (trace - 1.0).abs() > VALIDITY_TOL {
        return Err(Error::NotUnitTrace {
            trace,
            bound: VALIDITY_TOL,
        });
    }
    let (eigenvalues, _) = eig_hermitian(&op)?;
    let min_eigenvalue = eigenvalues[0];
    if min_eigenvalue < -VALIDITY_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue,
            bound: VALIDITY_TOL,
        });
    }
    Ok(DensityOperator { op })
}

/// Splits a flat index into per-factor digits (most significant first).
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_keep(keep: &[usize], factor_dims: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let bad = sorted.is_empty()
        || sorted.len() != keep.len()
        || sorted.len() >= factor_dims.len()
        || sorted.iter().any(|&k| k >= factor_dims.len());
    if bad {
        return Err(Error::InvalidSubsystem {
            keep: keep.to_vec(),
            factor_dims: factor_dims.to_vec(),
        });
    }
    Ok(sorted)
}

/// Partial trace of an arbitrary operator over every factor not in `keep`.
///
/// Kept factors retain their original relative order. The output is filled
/// on and above the diagonal and mirrored, so Hermitian input yields an
/// exactly conjugate-symmetric result.
pub fn partial_trace_operator(op: &Operator, keep: &[usize]) -> Result<Operator> {
    let keep = check_keep(keep, &op.factor_dims)?;
    let dims = &op.factor_dims;
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let n_keep: usize = kept_dims.iter().product();
    let n_trace: usize = traced_dims.iter().product();

    let mut full = vec![0usize; dims.len()];
    let mut kd = vec![0usize; keep.len()];
    let mut td = vec![0usize; traced.len()];
    let mut full_index = |k: usize, t: usize| {
        digits(k, &kept_dims, &mut kd);
        digits(t, &traced_dims, &mut td);
        for (pos, &f) in keep.iter().enumerate() {
            full[f] = kd[pos];
        }
        for (pos, &f) in traced.iter().enumerate() {
            full[f] = td[pos];
        }
        compose(&full, dims)
    };

    let mut out = Operator::zeros(&kept_dims);
    for r in 0..n_keep {
        for col in r..n_keep {
            let mut acc = ZERO;
            for t in 0..n_trace {
                let i = full_index(r, t);
                let j = full_index(col, t);
                acc += op.get(i, j);
            }
            out.set(r, col, acc);
            if col != r {
                out.set(col, r, acc.conj());
            }
        }
    }
    Ok(out)
}

/// Reduced state on the factors listed in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let mut op = partial_trace_operator(&rho.op, keep)?;
    for i in 0..op.dim {
        let d = op.get(i, i);
        op.set(i, i, re(d.re));
    }
    Ok(DensityOperator { op })
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian operator by cyclic complex Jacobi
/// rotations. Eigenvalues are returned in ascending order together with
/// matching unit eigenvectors.
pub fn eig_hermitian(op: &Operator) -> Result<(Vec<f64>, Vec<Ket>)> {
    let deviation = op.hermitian_deviation();
    if deviation > VALIDITY_TOL {
        return Err(Error::NotHermitian {
            deviation,
            bound: VALIDITY_TOL,
        });
    }
    let n = op.dim;
    let mut a = op.hermitian_part();
    let mut v = Operator::identity(&[n]);
    let scale: f64 = a.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a.get(p, q).norm_sqr())
            .sum();
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a.get(p, q);
                let magnitude = b.norm();
                if magnitude == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let phase = C64::from_polar(1.0, -b.arg());
                let theta = 0.5 * (2.0 * magnitude).atan2(aqq - app);
                let (s, cs) = theta.sin_cos();
                // W = diag(1, e^{-i arg b}) · [[c, s], [-s, c]]
                let w = [[re(cs), re(s)], [phase * -s, phase * cs]];
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * w[0][0] + akq * w[1][0]);
                    a.set(k, q, akp * w[0][1] + akq * w[1][1]);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, w[0][0].conj() * apk + w[1][0].conj() * aqk);
                    a.set(q, k, w[0][1].conj() * apk + w[1][1].conj() * aqk);
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
                let (dp, dq) = (a.get(p, p).re, a.get(q, q).re);
                a.set(p, p, re(dp));
                a.set(q, q, re(dq));
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * w[0][0] + vkq * w[1][0]);
                    v.set(k, q, vkp * w[0][1] + vkq * w[1][1]);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = order
        .iter()
        .map(|&col| Ket::normalized((0..n).map(|row| v.get(row, col)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_z() -> Operator {
        Operator::diag(&[1.0, -1.0])
    }

    fn sigma_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn phi_plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ket = Ket::new(vec![re(s), ZERO, ZERO, re(s)]).unwrap();
        DensityOperator::pure_with_factors(&ket, &[2, 2]).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = Operator::identity(&[2]);
        let i4 = tensor(&i2, &i2);
        assert_eq!(i4.entries(), Operator::identity(&[4]).entries());
        assert_eq!(i4.factor_dims(), &[2, 2]);
    }

    #[test]
    fn sigma_z_tensor_identity_is_diagonal() {
        let out = tensor(&sigma_z(), &Operator::identity(&[2]));
        assert_eq!(out.entries(), Operator::diag(&[1.0, 1.0, -1.0, -1.0]).entries());
    }

    #[test]
    fn bell_marginals_are_maximally_mixed() {
        // Hand contraction: Tr_B |Φ+><Φ+| = (|00><00| + |11><11|)_AA-block = I/2.
        let half = Operator::diag(&[0.5, 0.5]);
        let rho = phi_plus();
        let a = partial_trace(&rho, &[0]).unwrap();
        let b = partial_trace(&rho, &[1]).unwrap();
        assert!(a.operator().max_abs_diff(&half) < IDENTITY_TOL);
        assert!(b.operator().max_abs_diff(&half) < IDENTITY_TOL);
    }

    #[test]
    fn partial_trace_rejects_bad_subsets() {
        let rho = phi_plus();
        for keep in [&[][..], &[0, 1][..], &[2][..], &[0, 0][..]] {
            assert!(matches!(
                partial_trace(&rho, keep),
                Err(Error::InvalidSubsystem { .. })
            ));
        }
    }

    #[test]
    fn partial_trace_keeps_relative_order() {
        let a = Operator::diag(&[0.7, 0.3]);
        let b = Operator::diag(&[0.2, 0.8]);
        let cc = Operator::diag(&[0.25, 0.25, 0.25, 0.25]);
        let rho = validate_density(tensor(&tensor(&a, &b), &cc)).unwrap();
        let ac = partial_trace(&rho, &[2, 0]).unwrap();
        assert_eq!(ac.factor_dims(), &[2, 4]);
        assert!(ac.operator().max_abs_diff(&tensor(&a, &cc)) < IDENTITY_TOL);
    }

    #[test]
    fn validate_density_gates() {
        assert!(validate_density(Operator::diag(&[0.5, 0.5])).is_ok());
        match validate_density(Operator::diag(&[1.5, -0.5])) {
            Err(Error::NotPsd { min_eigenvalue, .. }) => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("expected NotPsd, got {other:?}"),
        }
        match validate_density(Operator::diag(&[0.6, 0.6])) {
            Err(Error::NotUnitTrace { trace, .. }) => assert!((trace - 1.2).abs() < 1e-12),
            other => panic!("expected NotUnitTrace, got {other:?}"),
        }
        let skew = Operator::from_rows(&[vec![re(0.5), c(0.0, 0.1)], vec![c(0.0, 0.1), re(0.5)]]).unwrap();
        assert!(matches!(validate_density(skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_pauli_matrices() {
        let (vals, _) = eig_hermitian(&sigma_z()).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);

        let (vals, vecs) = eig_hermitian(&sigma_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = Ket::new(vec![re(s), re(-s)]).unwrap();
        let plus = Ket::new(vec![re(s), re(s)]).unwrap();
        // up to global phase
        assert!((vecs[0].inner(&minus).norm() - 1.0).abs() < 1e-12);
        assert!((vecs[1].inner(&plus).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let op = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eig_hermitian(&op), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn operator_rejects_non_finite() {
        let r = Operator::new(vec![1], vec![re(f64::NAN)]);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
