//! Phase-one simplex for `A x = b, x ≥ 0` over `f64` (with tolerances) or
//! exact rationals.
//!
//! Dense tableau, one artificial variable per row, Bland's rule for both
//! the entering and the leaving variable. On infeasibility the final
//! objective row yields a Farkas vector `y` with `yᵀA ≤ 0` and `yᵀb > 0`.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Arithmetic needed by the solver.
pub trait LpScalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Sign with `eps` treated as zero (ignored by exact types).
    fn sign(&self, eps: f64) -> Ordering;
    fn cmp_value(&self, other: &Self) -> Ordering;
    fn to_f64(&self) -> f64;
}

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self, eps: f64) -> Ordering {
        if *self > eps {
            Ordering::Greater
        } else if *self < -eps {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn cmp_value(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self, _eps: f64) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn cmp_value(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn to_f64(&self) -> f64 {
        super::rational::to_f64(self)
    }
}

#[derive(Clone, Debug)]
pub struct PhaseOne<T> {
    pub feasible: bool,
    /// Optimal sum of artificial variables.
    pub infeasibility: T,
    /// Primal point (original variables only).
    pub x: Vec<T>,
    /// Farkas vector for the original rows, present when infeasible.
    pub farkas: Option<Vec<T>>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    /// Pivot and reduced-cost threshold (ignored in exact arithmetic).
    pub pivot_eps: f64,
    /// Infeasibility above this is reported as infeasible.
    pub feasibility_tol: f64,
    pub max_iterations: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            pivot_eps: 1e-12,
            feasibility_tol: 1e-8,
            max_iterations: 1_000_000,
        }
    }
}

/// Decides feasibility of `A x = b, x ≥ 0` with `A` given row-major.
pub fn phase_one<T: LpScalar>(a: &[Vec<T>], b: &[T], opts: LpOptions) -> PhaseOne<T> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let eps = opts.pivot_eps;

    // Rows with negative right-hand side are negated so artificials start feasible.
    let flipped: Vec<bool> = b.iter().map(|v| v.sign(0.0) == Ordering::Less).collect();
    let width = n + m + 1;
    let mut tab: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            for v in &a[i] {
                row.push(if flipped[i] { v.neg() } else { v.clone() });
            }
            for k in 0..m {
                row.push(if k == i { T::one() } else { T::zero() });
            }
            row.push(if flipped[i] { b[i].neg() } else { b[i].clone() });
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of `min Σ artificials`, objective value in the last slot.
    let mut cost = vec![T::zero(); width];
    for row in &tab {
        for j in 0..n {
            cost[j] = cost[j].sub(&row[j]);
        }
        cost[width - 1] = cost[width - 1].sub(&row[width - 1]);
    }

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let Some(enter) = (0..n + m).find(|&j| cost[j].sign(eps) == Ordering::Less) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if tab[i][enter].sign(eps) != Ordering::Greater {
                continue;
            }
            let ratio = tab[i][width - 1].div(&tab[i][enter]);
            leave = match leave {
                None => Some(i),
                Some(best) => {
                    let best_ratio = tab[best][width - 1].div(&tab[best][enter]);
                    match ratio.cmp_value(&best_ratio) {
                        Ordering::Less => Some(i),
                        Ordering::Equal if basis[i] < basis[best] => Some(i),
                        _ => Some(best),
                    }
                }
            };
        }
        // Phase one is bounded below by zero, so an entering column always has
        // a positive entry in exact arithmetic; in floating point a column can
        // fall under the pivot threshold, which ends the search.
        let Some(row) = leave else {
            break;
        };
        pivot(&mut tab, &mut cost, row, enter);
        basis[row] = enter;
        iterations += 1;
    }

    let infeasibility = cost[width - 1].neg();
    let feasible = infeasibility.sign(opts.feasibility_tol) != Ordering::Greater;
    let mut x = vec![T::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tab[i][width - 1].clone();
        }
    }
    let farkas = (!feasible).then(|| {
        // Reduced cost of artificial i is 1 − y_i.
        (0..m)
            .map(|i| {
                let y = T::one().sub(&cost[n + i]);
                if flipped[i] {
                    y.neg()
                } else {
                    y
                }
            })
            .collect()
    });
    PhaseOne {
        feasible,
        infeasibility,
        x,
        farkas,
        iterations,
    }
}

fn pivot<T: LpScalar>(tab: &mut [Vec<T>], cost: &mut [T], row: usize, col: usize) {
    let p = tab[row][col].clone();
    let pivot_row: Vec<T> = tab[row].iter().map(|v| v.div(&p)).collect();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = r[col].clone();
        if factor.sign(0.0) == Ordering::Equal {
            continue;
        }
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            *v = v.sub(&factor.mul(pv));
        }
    }
    let factor = cost[col].clone();
    if factor.sign(0.0) != Ordering::Equal {
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v = v.sub(&factor.mul(pv));
        }
    }
    tab[row] = pivot_row;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn feasible_simplex_system() {
        // x + y = 1, x - y = 0.5
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let res = phase_one(&a, &[1.0, 0.5], LpOptions::default());
        assert!(res.feasible);
        assert!((res.x[0] - 0.75).abs() < 1e-12 && (res.x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn infeasible_with_farkas_vector() {
        // x + y = 1, x + y = 2
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        let b = vec![q(1, 1), q(2, 1)];
        let res = phase_one(&a, &b, LpOptions::default());
        assert!(!res.feasible);
        let y = res.farkas.unwrap();
        for j in 0..2 {
            let col: BigRational = y.iter().zip(&a).map(|(yi, row)| yi * &row[j]).sum();
            assert!(col <= q(0, 1));
        }
        let yb: BigRational = (0..2).map(|i| &y[i] * &b[i]).sum();
        assert!(yb > q(0, 1));
    }

    #[test]
    fn negative_rhs_rows_are_handled() {
        // -x = -0.5  => x = 0.5; y unconstrained except y >= 0 and x + y = 1
        let a = vec![vec![-1.0, 0.0], vec![1.0, 1.0]];
        let res = phase_one(&a, &[-0.5, 1.0], LpOptions::default());
        assert!(res.feasible);
        assert!((res.x[0] - 0.5).abs() < 1e-12);

        // x = -1 is infeasible for x >= 0
        let res = phase_one(&[vec![q(1, 1)]], &[q(-1, 1)], LpOptions::default());
        assert!(!res.feasible);
        let y = res.farkas.unwrap();
        assert!(&y[0] * q(1, 1) <= q(0, 1));
        assert!(&y[0] * q(-1, 1) > q(0, 1));
    }

    #[test]
    fn redundant_rows_do_not_break_feasibility() {
        let a = vec![vec![q(1, 1), q(1, 1), q(0, 1)], vec![q(1, 1), q(1, 1), q(0, 1)], vec![q(0, 1), q(0, 1), q(1, 1)]];
        let b = vec![q(1, 2), q(1, 2), q(1, 2)];
        let res = phase_one(&a, &b, LpOptions::default());
        assert!(res.feasible);
        assert_eq!(res.infeasibility, q(0, 1));
    }
}
