mod common;

use common::*;
use qhe_core::hashing::HashFunction;
use qhe_core::linalg::CMatrix;
use qhe_core::random;
use qhe_core::sim::half_trace_norm;
use qhe_core::verification::{check_weak_security, collision_bound, SecurityMode};
use qhe_core::{DensityMatrix, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Brute force over dense matrices: for every `r` vector average the padded
/// state over the family, then sum the per-`r` block distances.
fn oracle_distance(kappa: usize, k: usize, a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let m = a.num_qubits();
    let family: Vec<HashFunction> = HashFunction::enumerate_family(kappa, k).unwrap().collect();
    let space = 1u32 << kappa;
    let vectors = (space as usize).pow(m as u32);
    let mut total = 0.0;
    for idx in 0..vectors {
        let rs: Vec<u32> = (0..m)
            .map(|q| ((idx / (space as usize).pow(q as u32)) % space as usize) as u32)
            .collect();
        let mut diff = CMatrix::zeros(1 << m);
        for h in &family {
            let pads: Vec<u8> = rs.iter().map(|&r| h.eval(r).unwrap()).collect();
            let u = pads_unitary(&pads);
            let d = &conjugate(&u, a.matrix()) - &conjugate(&u, b.matrix());
            diff = &diff + &d.scale(c(1.0 / family.len() as f64, 0.0));
        }
        total += half_trace_norm(&diff) / vectors as f64;
    }
    total
}

fn one() -> DensityMatrix {
    state(proj(1))
}

#[test]
fn zero_versus_plus_is_one_half() {
    let params = SchemeParams::new(3, 1, 3).unwrap();
    for mode in [SecurityMode::Exact, SecurityMode::Analytic] {
        let rep = check_weak_security(
            &params,
            &DensityMatrix::zero_state(1),
            &DensityMatrix::plus_state(1),
            mode,
        )
        .unwrap();
        assert!((rep.distance - 0.5).abs() < 1e-12);
    }
}

#[test]
fn zero_versus_one_is_fully_distinguishable() {
    let params = SchemeParams::new(3, 1, 3).unwrap();
    let rep = check_weak_security(
        &params,
        &DensityMatrix::zero_state(1),
        &one(),
        SecurityMode::Exact,
    )
    .unwrap();
    assert!((rep.distance - 1.0).abs() < 1e-12);
}

#[test]
fn xy_states_are_hidden_when_r_values_differ() {
    let mut r = rng(1);
    let params = SchemeParams::new(3, 2, 3).unwrap();
    for _ in 0..10 {
        let a = random::xy_state(2, &mut r);
        let b = random::xy_state(2, &mut r);
        let rep = check_weak_security(&params, &a, &b, SecurityMode::Exact).unwrap();
        assert!(rep.distinct_r_distance < 1e-12);
        assert!(rep.distance <= rep.distance_bound + 1e-12);
        assert!((rep.collision_probability - 0.125).abs() < 1e-15);
        assert!((rep.collision_bound - 0.125).abs() < 1e-15);
    }
}

#[test]
fn collision_leaks_xx_correlation() {
    // (II ± XX)/4: the ± sign survives only when both qubits share a pad.
    let xx = kron_all(&[x(), x()]).scale(c(0.25, 0.0));
    let quarter = CMatrix::identity(4).scale(c(0.25, 0.0));
    let a = state(&quarter + &xx);
    let b = state(&quarter - &xx);
    let params = SchemeParams::new(2, 2, 2).unwrap();
    let rep = check_weak_security(&params, &a, &b, SecurityMode::Exact).unwrap();
    assert!((rep.distance - 0.25).abs() < 1e-12);
    assert!((rep.distance - collision_bound(&params)).abs() < 1e-12);
    assert!(rep.distinct_r_distance < 1e-12);
    assert!((oracle_distance(2, 2, &a, &b) - 0.25).abs() < 1e-12);
}

#[test]
fn exact_matches_dense_oracle() {
    let mut r = rng(2);
    for (kappa, k, m) in [(2, 2, 2), (2, 3, 2), (3, 2, 1), (3, 3, 2), (2, 3, 3)] {
        let params = SchemeParams::new(kappa, m, k).unwrap();
        for _ in 0..3 {
            let a = random::density(m, &mut r);
            let b = random::density(m, &mut r);
            let rep = check_weak_security(&params, &a, &b, SecurityMode::Exact).unwrap();
            let oracle = oracle_distance(kappa, k, &a, &b);
            assert!(
                (rep.distance - oracle).abs() < 1e-12,
                "κ={kappa} k={k}: {} vs {oracle}",
                rep.distance
            );
        }
    }
}

#[test]
fn exact_and_analytic_agree() {
    let mut r = rng(3);
    for (kappa, k, m) in [(2, 2, 2), (3, 3, 3), (4, 2, 2), (2, 4, 4)] {
        let params = SchemeParams::new(kappa, m, k).unwrap();
        for _ in 0..3 {
            let a = random::density(m, &mut r);
            let b = random::xy_state(m, &mut r);
            let ex = check_weak_security(&params, &a, &b, SecurityMode::Exact).unwrap();
            let an = check_weak_security(&params, &a, &b, SecurityMode::Analytic).unwrap();
            assert!((ex.distance - an.distance).abs() < 1e-12);
            assert!((ex.distinct_r_distance - an.distinct_r_distance).abs() < 1e-12);
            assert!((ex.collision_probability - an.collision_probability).abs() < 1e-12);
        }
    }
}

#[test]
fn analytic_scales_past_exact_caps() {
    let mut r = rng(4);
    let params = SchemeParams::new(16, 4, 16).unwrap();
    let a = random::xy_state(4, &mut r);
    let b = random::xy_state(4, &mut r);
    assert!(check_weak_security(&params, &a, &b, SecurityMode::Exact).is_err());
    let rep = check_weak_security(&params, &a, &b, SecurityMode::Analytic).unwrap();
    assert!(rep.distance <= rep.collision_bound + 1e-12);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let params = SchemeParams::new(3, 1, 3).unwrap();
    let two = DensityMatrix::plus_state(2);
    assert!(check_weak_security(&params, &two, &two, SecurityMode::Exact).is_err());
    assert!(check_weak_security(
        &params,
        &DensityMatrix::plus_state(1),
        &two,
        SecurityMode::Exact
    )
    .is_err());
}
