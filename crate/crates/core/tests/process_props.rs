mod common;

use common::*;
use proptest::prelude::*;
use stochbell::linalg::{c, validate_density, DensityOperator, Operator, C64};
use stochbell::process::{apply_kraus, condition, run_instrument, Effect, Instrument, KrausMap};
use stochbell::Error;

/// `Tr_E[(I ⊗ e) ρ] / p` by explicit index contraction, E the last factor
/// of dimension `de`.
fn contraction_oracle(rho: &Operator, e: &Operator, de: usize) -> (Vec<C64>, f64) {
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
    (out.into_iter().map(|z| z / p).collect(), p)
}

fn max_diff(a: &[C64], b: &Operator) -> f64 {
    a.iter().zip(b.entries()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn flagged(rho: &DensityOperator, flag: usize) -> DensityOperator {
    let mut diag = [0.0, 0.0];
    diag[flag] = 1.0;
    rho.tensor(&validate_density(Operator::diag(&diag)).unwrap())
}

fn mix(a: &DensityOperator, b: &DensityOperator, w: f64) -> DensityOperator {
    let op = a.operator().scale(c(w, 0.0)).add(&b.operator().scale(c(1.0 - w, 0.0))).unwrap();
    validate_density(op).unwrap()
}

#[test]
fn deterministic_flag_matches_oracle() {
    let mut r = rng(11);
    let rho_ab = random_density(&mut r, &[2, 2], 3);
    let rho = flagged(&rho_ab, 0);
    let e = Effect::basis(2, 0).unwrap();
    let (state, p) = condition(&rho, &e).unwrap();
    let (oracle, q) = contraction_oracle(rho.operator(), e.operator(), 2);
    assert!((p - 1.0).abs() <= 1e-12 && (p - q).abs() <= 1e-12);
    assert!(max_diff(&oracle, state.operator()) <= 1e-12);
    assert!(state.operator().max_abs_diff(rho_ab.operator()) <= 1e-12);
}

#[test]
fn zero_probability_flag_is_rejected() {
    let mut r = rng(12);
    let rho = flagged(&random_density(&mut r, &[2, 2], 4), 0);
    let e = Effect::basis(2, 1).unwrap();
    let (_, q) = contraction_oracle(rho.operator(), e.operator(), 2);
    assert!(q.abs() <= 1e-12);
    assert!(matches!(condition(&rho, &e), Err(Error::ZeroProbabilityEvent { .. })));
}

#[test]
fn two_branch_mixture_matches_oracle() {
    let mut r = rng(13);
    let rho1 = random_density(&mut r, &[2, 2], 2);
    let rho2 = random_density(&mut r, &[2, 2], 4);
    let rho = mix(&flagged(&rho1, 0), &flagged(&rho2, 1), 0.5);
    let e = Effect::basis(2, 0).unwrap();
    let (state, p) = condition(&rho, &e).unwrap();
    let (oracle, q) = contraction_oracle(rho.operator(), e.operator(), 2);
    assert!((p - 0.5).abs() <= 1e-12 && (p - q).abs() <= 1e-12);
    assert!(max_diff(&oracle, state.operator()) <= 1e-12);
    assert!(state.operator().max_abs_diff(rho1.operator()) <= 1e-12);
}

fn random_effect(r: &mut impl rand::Rng, d: usize) -> Effect {
    let h = random_matrix(r, &[d]).hermitian_part();
    let (lo, hi) = {
        let (vals, _) = stochbell::linalg::eig_hermitian(&h).unwrap();
        (vals[0], vals[d - 1])
    };
    // affine map of the spectrum into [0.05, 0.95]
    let shifted = h.sub(&Operator::identity(&[d]).scale(c(lo, 0.0))).unwrap();
    let scaled = shifted.scale(c(0.9 / (hi - lo), 0.0)).add(&Operator::identity(&[d]).scale(c(0.05, 0.0))).unwrap();
    Effect::new(scaled).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn general_effects_match_oracle(seed in any::<u64>(), de in 2usize..=3) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, &[2, 2, de], 6);
        let e = random_effect(&mut r, de);
        let (state, p) = condition(&rho, &e).unwrap();
        let (oracle, q) = contraction_oracle(rho.operator(), e.operator(), de);
        prop_assert!((p - q).abs() <= 1e-12);
        prop_assert!(max_diff(&oracle, state.operator()) <= 1e-12);
    }

    #[test]
    fn instrument_probabilities_sum_to_one(seed in any::<u64>(), branches in 1usize..=4, d in 2usize..=4) {
        let mut r = rng(seed);
        let ops = random_kraus(&mut r, d, branches * 2);
        let inst = Instrument::new(
            ops.chunks(2)
                .enumerate()
                .map(|(i, k)| (format!("f{i}"), KrausMap::new(k.to_vec()).unwrap()))
                .collect(),
        )
        .unwrap();
        let rho = random_density(&mut r, &[d], d);
        let out = run_instrument(&inst, &rho).unwrap();
        let total: f64 = out.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for b in &out {
            if let Some(s) = &b.state {
                prop_assert!(min_eigenvalue(s.operator()) >= -1e-10);
            }
        }
    }

    #[test]
    fn kraus_output_is_positive(seed in any::<u64>(), count in 1usize..=5) {
        let mut r = rng(seed);
        let ops = random_kraus(&mut r, 4, count);
        let map = KrausMap::new(ops[..count.max(2) - 1].to_vec()).unwrap();
        let rho = random_density(&mut r, &[4], 1 + (seed % 4) as usize);
        let (out, p) = apply_kraus(&map, &rho).unwrap();
        prop_assert!(min_eigenvalue(&out) >= -1e-10);
        prop_assert!((out.trace().re - p).abs() <= 1e-12);
        prop_assert!(p <= 1.0 + 1e-10);
    }

    #[test]
    fn conditioning_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, &[2, 2, 2], 5);
        let e = Effect::basis(2, 0).unwrap();
        let (once, _) = condition(&rho, &e).unwrap();
        // re-attach the retained flag and condition on it again
        let (twice, p) = condition(&flagged(&once, 0), &e).unwrap();
        prop_assert!((p - 1.0).abs() <= 1e-12);
        prop_assert!(twice.operator().max_abs_diff(once.operator()) <= 1e-12);
    }

    #[test]
    fn conditioning_is_linear_in_flagged_branches(seed in any::<u64>(), w in 0.05f64..0.95) {
        let mut r = rng(seed);
        let e = random_effect(&mut r, 2);
        let rho1 = random_density(&mut r, &[2, 2, 2], 3);
        let rho2 = random_density(&mut r, &[2, 2, 2], 8);
        let (s1, p1) = condition(&rho1, &e).unwrap();
        let (s2, p2) = condition(&rho2, &e).unwrap();
        let (s, p) = condition(&mix(&rho1, &rho2, w), &e).unwrap();
        prop_assert!((p - (w * p1 + (1.0 - w) * p2)).abs() <= 1e-12);
        let expected = s1
            .operator()
            .scale(c(w * p1 / p, 0.0))
            .add(&s2.operator().scale(c((1.0 - w) * p2 / p, 0.0)))
            .unwrap();
        prop_assert!(s.operator().max_abs_diff(&expected) <= 1e-12);
    }
}
