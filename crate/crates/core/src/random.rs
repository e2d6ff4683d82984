//! Random states and circuits for test suites and the verification driver.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::IqpCircuit;
use crate::linalg::CMatrix;
use crate::pauli::{BlochVector, Pauli, PauliOperator};
use crate::sim::{DensityMatrix, DiagonalGate, GateKind};

/// Single-qubit state in the xy-plane of the Bloch ball.
pub fn xy_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let radius: f64 = rng.gen_range(0.0..=1.0);
    let phi = rng.gen_range(0.0..TAU);
    DensityMatrix::from_matrix_unchecked(
        BlochVector {
            r1: radius * phi.cos(),
            r2: radius * phi.sin(),
            r3: 0.0,
        }
        .to_matrix(),
    )
}

/// Tensor product of `n` independent [`xy_qubit`]s.
pub fn xy_product<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    (1..n).fold(xy_qubit(rng), |acc, _| acc.tensor(&xy_qubit(rng)))
}

/// Correlated xy-plane state `(I + Σ a_P P) / 2^n`, `P ∈ {I,X,Y}^n \ {I}`,
/// with `Σ|a_P| ≤ 1` so the result is positive semidefinite.
pub fn xy_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1usize << n;
    let mut terms = Vec::new();
    let mut labels = vec![Pauli::I; n];
    for idx in 1..3usize.pow(n as u32) {
        let mut x = idx;
        for slot in labels.iter_mut() {
            *slot = [Pauli::I, Pauli::X, Pauli::Y][x % 3];
            x /= 3;
        }
        terms.push((labels.clone(), rng.gen_range(-1.0..1.0f64)));
    }
    let l1: f64 = terms.iter().map(|(_, a)| a.abs()).sum();
    let budget: f64 = rng.gen_range(0.0..=1.0);
    let mut m = CMatrix::identity(dim);
    for (factors, a) in terms {
        let p = PauliOperator::from_paulis(&factors).expect("n <= 64");
        let w = a * budget / l1;
        m = &m
            + &p.matrix()
                .expect("within cap")
                .scale(Complex64::new(w, 0.0));
    }
    DensityMatrix::from_matrix_unchecked(m.scale(Complex64::new(1.0 / dim as f64, 0.0)))
}

/// Single-qubit state with a nonzero Z component (`|r3| ≥ 0.05`).
pub fn non_xy_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
        ];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 || v[2].abs() < 0.05 {
            continue;
        }
        return DensityMatrix::from_matrix_unchecked(
            BlochVector {
                r1: v[0],
                r2: v[1],
                r3: v[2],
            }
            .to_matrix(),
        );
    }
}

/// `G G† / Tr(G G†)` for a complex Gaussian-like `G` (uniform entries).
pub fn density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1usize << n;
    let g = CMatrix::from_vec(
        dim,
        (0..dim * dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    );
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    let mut m = gg.scale(Complex64::new(1.0 / tr, 0.0));
    // exact Hermitian symmetry
    for i in 0..dim {
        m[(i, i)].im = 0.0;
        for j in i + 1..dim {
            let v = m[(i, j)];
            m[(j, i)] = v.conj();
        }
    }
    DensityMatrix::from_matrix_unchecked(m)
}

pub fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))
}

/// A random diagonal gate on distinct qubits of an `n`-qubit register,
/// drawn from the built-in set and `DIAG`.
pub fn diagonal_gate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DiagonalGate {
    let kinds: Vec<GateKind> = [
        GateKind::Z,
        GateKind::S,
        GateKind::T,
        GateKind::CZ,
        GateKind::CS,
        GateKind::CCZ,
        GateKind::DIAG,
    ]
    .into_iter()
    .filter(|k| k.arity().unwrap_or(1) <= n)
    .collect();
    let kind = *kinds.choose(rng).expect("n >= 1");
    let arity = kind.arity().unwrap_or_else(|| rng.gen_range(1..=n.min(3)));
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    qubits.truncate(arity);
    match kind {
        GateKind::DIAG => {
            let phases = (0..1 << arity).map(|_| unit_phase(rng)).collect();
            DiagonalGate::diag(&qubits, phases).expect("valid diagonal")
        }
        k => DiagonalGate::named(k, &qubits).expect("valid gate"),
    }
}

/// Circuit with up to `max_gates` random gates and a random measured subset.
pub fn circuit<R: Rng + ?Sized>(n: usize, max_gates: usize, rng: &mut R) -> IqpCircuit {
    let count = rng.gen_range(0..=max_gates);
    let gates = (0..count).map(|_| diagonal_gate(n, rng)).collect();
    let measured = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    IqpCircuit::new(n, gates, measured).expect("valid circuit")
}
