use qhe_core::verification::{
    amplify_weak_to_strong, binary_entropy, collision_bound, qpir_lower_bound,
    qpir_reduction_audit, QpirBoundInput,
};
use qhe_core::SchemeParams;

/// Natural-log form of the binary entropy.
fn entropy_oracle(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / std::f64::consts::LN_2
}

fn grid(steps: usize) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |i| i as f64 / steps as f64)
}

#[test]
fn entropy_values() {
    assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
    assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
    assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
    for p in grid(1000) {
        assert!((binary_entropy(p).unwrap() - entropy_oracle(p)).abs() < 1e-14);
    }
    assert!(binary_entropy(-0.1).is_err());
    assert!(binary_entropy(1.5).is_err());
    assert!(binary_entropy(f64::NAN).is_err());
}

#[test]
fn entropy_is_symmetric_and_concave() {
    let h = |p| binary_entropy(p).unwrap();
    for p in grid(500) {
        assert!((h(p) - h(1.0 - p)).abs() < 1e-14);
    }
    let pts: Vec<f64> = grid(200).collect();
    for w in pts.windows(3) {
        assert!(h(w[1]) + 1e-14 >= (h(w[0]) + h(w[2])) / 2.0);
    }
}

#[test]
fn lower_bound_at_small_error() {
    let inp = QpirBoundInput {
        n: 1000,
        delta: 1e-4,
        epsilon: 1e-4,
    };
    let arg = 1.0 - 1e-4 - 2.0 * (1e-4f64 * (1.0 - 1e-4)).sqrt();
    assert!((inp.entropy_argument() - arg).abs() < 1e-15);
    let coeff = 1.0 - entropy_oracle(arg);
    assert!((inp.coefficient().unwrap() - coeff).abs() < 1e-14);
    assert!((0.8..=0.87).contains(&coeff));
    assert!((qpir_lower_bound(&inp).unwrap() - 1000.0 * coeff).abs() < 1e-10);
}

#[test]
fn lower_bound_is_monotone_decreasing_in_errors() {
    let steps = 50;
    for i in 0..=steps {
        let fixed = 0.1 * i as f64 / steps as f64;
        let mut prev_d = f64::INFINITY;
        let mut prev_e = f64::INFINITY;
        for j in 0..=steps {
            let moving = 0.1 * j as f64 / steps as f64;
            let by_delta = QpirBoundInput {
                n: 100,
                delta: moving,
                epsilon: fixed,
            };
            let by_eps = QpirBoundInput {
                n: 100,
                delta: fixed,
                epsilon: moving,
            };
            for (inp, prev) in [(by_delta, &mut prev_d), (by_eps, &mut prev_e)] {
                if let Ok(b) = qpir_lower_bound(&inp) {
                    assert!(b <= *prev + 1e-12, "{inp:?}");
                    *prev = b;
                }
            }
        }
    }
}

#[test]
fn lower_bound_domain() {
    assert!(qpir_lower_bound(&QpirBoundInput {
        n: 0,
        delta: 0.0,
        epsilon: 0.0
    })
    .is_err());
    assert!(qpir_lower_bound(&QpirBoundInput {
        n: 10,
        delta: 0.6,
        epsilon: 0.0
    })
    .is_err());
    assert!(qpir_lower_bound(&QpirBoundInput {
        n: 10,
        delta: 0.0,
        epsilon: -0.1
    })
    .is_err());
    // Perfect protocol: the full database must be sent.
    let exact = QpirBoundInput {
        n: 10,
        delta: 0.0,
        epsilon: 0.0,
    };
    assert_eq!(qpir_lower_bound(&exact).unwrap(), 10.0);
    // Large errors push the entropy argument below 1/2.
    assert!(qpir_lower_bound(&QpirBoundInput {
        n: 10,
        delta: 0.5,
        epsilon: 0.5
    })
    .is_err());
}

#[test]
fn reduction_contradicts_for_small_p() {
    for p in 1..=64u64 {
        let a = qpir_reduction_audit(p, 1e-4, 1e-4).unwrap();
        assert_eq!(a.n, 100 * p * p);
        let n = a.n as f64;
        let communicated = p as f64 * (1.0 + n.log2());
        assert!((a.communicated - communicated).abs() < 1e-9);
        assert!(
            (a.communicated - a.communicated_as_printed - p as f64 * 10f64.log2()).abs() < 1e-9
        );
        assert!(a.entropy < 0.2);
        assert!(a.contradiction, "p = {p}");
    }
    assert!(qpir_reduction_audit(0, 1e-4, 1e-4).is_err());
}

#[test]
fn amplification_is_exact_power_of_two() {
    assert_eq!(amplify_weak_to_strong(2f64.powi(-40), 10), 2f64.powi(-19));
    for n in 0..20usize {
        for e in 2 * n as i32 + 1..60 {
            let eps = 2f64.powi(-e);
            assert_eq!(
                amplify_weak_to_strong(eps, n),
                2f64.powi(2 * n as i32 + 1 - e)
            );
        }
    }
    assert_eq!(amplify_weak_to_strong(0.0, 5), 0.0);
    assert_eq!(amplify_weak_to_strong(0.3, 1), 1.0);
    assert_eq!(amplify_weak_to_strong(1e-300, 600), 1.0);
}

#[test]
fn amplification_is_monotone() {
    let eps: Vec<f64> = (0..40).map(|i| 2f64.powi(-i) * 0.7).rev().collect();
    for n in 0..12 {
        for w in eps.windows(2) {
            assert!(amplify_weak_to_strong(w[0], n) <= amplify_weak_to_strong(w[1], n));
        }
    }
    for &e in &eps {
        for n in 0..12 {
            assert!(amplify_weak_to_strong(e, n) <= amplify_weak_to_strong(e, n + 1));
        }
    }
}

#[test]
fn collision_bound_values() {
    assert_eq!(collision_bound(&SchemeParams::new(3, 2, 3).unwrap()), 0.125);
    assert_eq!(collision_bound(&SchemeParams::new(2, 2, 2).unwrap()), 0.25);
    assert_eq!(collision_bound(&SchemeParams::new(8, 1, 8).unwrap()), 0.0);
    assert_eq!(
        collision_bound(&SchemeParams::new(10, 4, 10).unwrap()),
        6.0 / 1024.0
    );
}

#[test]
fn verification_drivers() {
    use qhe_core::verification::{
        verify_bounds, verify_correctness, verify_security, SecurityMode,
    };

    let rep = verify_correctness(&SchemeParams::new(6, 3, 6).unwrap(), 30, 1).unwrap();
    assert!(rep.passed && rep.correctness_residual.unwrap() <= 1e-9);
    assert_eq!(rep.trials, 30);

    let params = SchemeParams::new(3, 2, 3).unwrap();
    let rep = verify_security(&params, 6, 2, SecurityMode::Exact).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.security.len(), 6);
    let worst = rep.security_distance.unwrap();
    assert_eq!(
        rep.amplified_bound.unwrap(),
        amplify_weak_to_strong(worst, 2)
    );
    let analytic = verify_security(&params, 6, 2, SecurityMode::Analytic).unwrap();
    assert!((analytic.security_distance.unwrap() - worst).abs() < 1e-12);

    let rep = verify_bounds(1e-4, 1e-4, &[1, 10, 64]).unwrap();
    assert!(rep.passed && rep.audits.len() == 3);
    assert!(!verify_bounds(0.05, 0.05, &[1]).unwrap().passed);
    assert!(!verify_bounds(1e-4, 1e-4, &[]).unwrap().passed);
}
