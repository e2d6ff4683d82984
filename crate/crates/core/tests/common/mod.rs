//! Dense-matrix oracles built from 2x2 Kronecker products only, independent
//! of the simulator's bit-index arithmetic.
#![allow(dead_code)]

use num_complex::Complex64;
use qhe_core::linalg::{CMatrix, I, ONE, ZERO};
use qhe_core::{DensityMatrix, DiagonalGate};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn id2() -> CMatrix {
    CMatrix::identity(2)
}

pub fn x() -> CMatrix {
    CMatrix::from_vec(2, vec![ZERO, ONE, ONE, ZERO])
}

pub fn y() -> CMatrix {
    CMatrix::from_vec(2, vec![ZERO, -I, I, ZERO])
}

pub fn z() -> CMatrix {
    CMatrix::from_diagonal(&[ONE, -ONE])
}

pub fn proj(bit: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2);
    m[(bit, bit)] = ONE;
    m
}

/// `(I ± X)/2` on one qubit.
pub fn x_proj(bit: u8) -> CMatrix {
    let s = if bit == 0 { 0.5 } else { -0.5 };
    CMatrix::from_vec(2, vec![c(0.5, 0.0), c(s, 0.0), c(s, 0.0), c(0.5, 0.0)])
}

/// Tensor product of per-qubit factors, qubit 0 leftmost.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, f| acc.kron(f))
}

/// `op` on `qubit`, identity elsewhere.
pub fn embed(n: usize, qubit: usize, op: &CMatrix) -> CMatrix {
    let factors: Vec<CMatrix> = (0..n)
        .map(|q| if q == qubit { op.clone() } else { id2() })
        .collect();
    kron_all(&factors)
}

/// `U = Σ_l phase_l ⊗_q Π_q(l)` for a diagonal gate.
pub fn gate_unitary(n: usize, gate: &DiagonalGate) -> CMatrix {
    let k = gate.support().len();
    let mut u = CMatrix::zeros(1 << n);
    for (l, phase) in gate.phases().iter().enumerate() {
        let factors: Vec<CMatrix> = (0..n)
            .map(|q| match gate.support().iter().position(|&s| s == q) {
                Some(j) => proj((l >> (k - 1 - j)) & 1),
                None => id2(),
            })
            .collect();
        u = &u + &kron_all(&factors).scale(*phase);
    }
    u
}

pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    &(u * rho) * &u.adjoint()
}

pub fn pads_unitary(pads: &[u8]) -> CMatrix {
    let factors: Vec<CMatrix> = pads
        .iter()
        .map(|&b| if b == 1 { z() } else { id2() })
        .collect();
    kron_all(&factors)
}

pub fn state(m: CMatrix) -> DensityMatrix {
    DensityMatrix::new(m).expect("valid state")
}
