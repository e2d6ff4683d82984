//! n-fold Pauli operators in the binary form `i^c Z^u X^v`, Pauli
//! decomposition of density matrices and single-qubit Bloch vectors.
//!
//! Bit convention: qubit `j` of an `n`-qubit register is bit `n - 1 - j` of
//! a computational-basis index (qubit 0 is the leftmost tensor factor). The
//! `u` and `v` masks use the same convention, so `(Z^u X^v)|a⟩ =
//! (-1)^{|u ∧ (a ⊕ v)|} |a ⊕ v⟩`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};
use crate::sim::{DensityMatrix, MAX_QUBITS};

/// Coefficients below this magnitude count as zero in [`is_xy_state`].
pub const XY_TOLERANCE: f64 = 1e-10;

/// Tolerance on Hermiticity for [`pauli_decompose`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Pauli factor on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(u, v)` bits of the factor in `Z^u X^v` form.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (false, true),
            Pauli::Y => (true, true),
            Pauli::Z => (true, false),
        }
    }

    pub fn from_bits(z: bool, x: bool) -> Self {
        match (z, x) {
            (false, false) => Pauli::I,
            (false, true) => Pauli::X,
            (true, true) => Pauli::Y,
            (true, false) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^c Z^u X^v` on `n ≤ 64` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: usize,
    u: u64,
    v: u64,
    c: u8,
}

impl PauliOperator {
    pub fn new(n: usize, u: u64, v: u64, c: u8) -> Result<Self> {
        if n > 64 {
            return Err(Error::DimensionCap { qubits: n, cap: 64 });
        }
        let mask = full_mask(n);
        if u & !mask != 0 || v & !mask != 0 {
            return Err(Error::InvalidParams(format!(
                "Pauli masks exceed {n} qubits"
            )));
        }
        Ok(PauliOperator { n, u, v, c: c % 4 })
    }

    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            u: 0,
            v: 0,
            c: 0,
        }
    }

    /// Single-qubit factor `p` on `qubit`, identity elsewhere. For `p = Y` the
    /// phase is chosen so the operator equals the Hermitian matrix Y.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitIndex {
                index: qubit,
                qubits: n,
            });
        }
        let mut labels = vec![Pauli::I; n];
        labels[qubit] = p;
        Self::from_paulis(&labels)
    }

    /// Tensor product of Hermitian factors, e.g. `[X, I, Y]` = X⊗I⊗Y.
    pub fn from_paulis(factors: &[Pauli]) -> Result<Self> {
        let n = factors.len();
        let mut u = 0u64;
        let mut v = 0u64;
        for (j, f) in factors.iter().enumerate() {
            let (z, x) = f.bits();
            let bit = 1u64 << (n - 1 - j);
            if z {
                u |= bit;
            }
            if x {
                v |= bit;
            }
        }
        let p = Self::new(n, u, v, 0)?;
        Ok(p.hermitian())
    }

    /// Parses labels like `"XIZ"` into the Hermitian tensor product.
    pub fn from_label(label: &str) -> Result<Self> {
        let factors = label
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidParams(format!("bad Pauli label {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_paulis(&factors)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn z_mask(&self) -> u64 {
        self.u
    }

    pub fn x_mask(&self) -> u64 {
        self.v
    }

    pub fn phase(&self) -> u8 {
        self.c
    }

    pub fn with_phase(self, c: u8) -> Self {
        PauliOperator { c: c % 4, ..self }
    }

    /// Same `(u, v)` with the phase making the operator Hermitian: each Y
    /// factor is `i·X·Z = i³·Z·X`, so `c = 3·|u ∧ v| mod 4`.
    pub fn hermitian(self) -> Self {
        let y_count = (self.u & self.v).count_ones() as u8;
        self.with_phase((3 * (y_count % 4)) % 4)
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.hermitian() || *self == self.hermitian().with_phase(self.hermitian().c + 2)
    }

    pub fn factor(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << (self.n - 1 - qubit);
        Pauli::from_bits(self.u & bit != 0, self.v & bit != 0)
    }

    /// Product `self · other` with phase tracked mod 4:
    /// `Z^{u1}X^{v1} Z^{u2}X^{v2} = (-1)^{|v1 ∧ u2|} Z^{u1⊕u2} X^{v1⊕v2}`.
    pub fn compose(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let sign = ((self.v & other.u).count_ones() % 2) as u8;
        Ok(PauliOperator {
            n: self.n,
            u: self.u ^ other.u,
            v: self.v ^ other.v,
            c: (self.c + other.c + 2 * sign) % 4,
        })
    }

    /// Symplectic inner product `u_P·v_Q + v_P·u_Q mod 2`; zero iff the two
    /// operators commute.
    pub fn symplectic_product(&self, other: &PauliOperator) -> u32 {
        ((self.u & other.v).count_ones() + (self.v & other.u).count_ones()) % 2
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        self.symplectic_product(other) == 0
    }

    /// Dense `2^n × 2^n` matrix `i^c Z^u X^v`.
    pub fn matrix(&self) -> Result<CMatrix> {
        if self.n > MAX_QUBITS {
            return Err(Error::DimensionCap {
                qubits: self.n,
                cap: MAX_QUBITS,
            });
        }
        let dim = 1usize << self.n;
        let phase = i_pow(self.c);
        let mut m = CMatrix::zeros(dim);
        for col in 0..dim {
            let row = col ^ self.v as usize;
            let sign = if (self.u as usize & row).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            m[(row, col)] = phase * sign;
        }
        Ok(m)
    }

    /// Recovers the operator from its dense matrix, or `None` if the matrix
    /// is not a phased Pauli within `1e-12`.
    pub fn from_matrix(m: &CMatrix) -> Option<PauliOperator> {
        let dim = m.dim();
        if !dim.is_power_of_two() {
            return None;
        }
        let n = dim.trailing_zeros() as usize;
        // Column 0 has its single nonzero entry at row v, equal to
        // i^c (-1)^{u·v}.
        let v = (0..dim).find(|&r| m[(r, 0)].norm() > 0.5)? as u64;
        let lead = m[(v as usize, 0)];
        let lead_phase = (0..4u8).find(|&c| (i_pow(c) - lead).norm() < 1e-12)?;
        // Relative to the lead, column e_j carries (-1)^{u_j}.
        let mut u = 0u64;
        for j in 0..n {
            let col = 1usize << j;
            let entry = m[(col ^ v as usize, col)] / lead;
            if (entry + ONE).norm() < 1e-12 {
                u |= 1u64 << j;
            }
        }
        let c = (lead_phase + 2 * ((u & v).count_ones() % 2) as u8) % 4;
        let p = PauliOperator::new(n, u, v, c).ok()?;
        let built = p.matrix().ok()?;
        (built.max_abs_diff(m) < 1e-12).then_some(p)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Relative to the Hermitian representative.
        let rel = (self.c + 4 - self.hermitian().c) % 4;
        let prefix = ["", "i", "-", "-i"][rel as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.factor(q).symbol())?;
        }
        Ok(())
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn i_pow(c: u8) -> Complex64 {
    match c % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Real coefficient of each Hermitian Pauli term, `α_P = Tr(P ρ) / 2^n`.
pub type PauliDecomposition = BTreeMap<PauliOperator, f64>;

/// Decomposes `rho` over the Hermitian Pauli basis by direct trace inner
/// products. All `4^n` terms are returned, zeros included.
pub fn pauli_decompose(rho: &DensityMatrix) -> Result<PauliDecomposition> {
    decompose_matrix(rho.matrix())
}

pub(crate) fn decompose_matrix(m: &CMatrix) -> Result<PauliDecomposition> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let dim = m.dim();
    let n = dim.trailing_zeros() as usize;
    let mut out = BTreeMap::new();
    for u in 0..dim as u64 {
        for v in 0..dim as u64 {
            let p = PauliOperator { n, u, v, c: 0 }.hermitian();
            // Tr(P m) = Σ_col P[row, col] m[col, row], one nonzero per column.
            let phase = i_pow(p.c);
            let mut tr = ZERO;
            for col in 0..dim {
                let row = col ^ v as usize;
                let sign = if (u as usize & row).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                tr += phase * sign * m[(col, row)];
            }
            out.insert(p, tr.re / dim as f64);
        }
    }
    Ok(out)
}

/// Σ α_P · P.
pub fn reconstruct(n: usize, coefficients: &PauliDecomposition) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(1 << n);
    for (p, a) in coefficients {
        if *a == 0.0 {
            continue;
        }
        m = &m + &p.matrix()?.scale(Complex64::new(*a, 0.0));
    }
    Ok(m)
}

/// True iff no term with `|α| > 1e-10` carries a bare Z factor on any of the
/// `message_qubits`. Y factors are allowed.
pub fn is_xy_state(rho: &DensityMatrix, message_qubits: &[usize]) -> Result<bool> {
    let n = rho.num_qubits();
    let mut forbidden = 0u64;
    for &q in message_qubits {
        if q >= n {
            return Err(Error::QubitIndex {
                index: q,
                qubits: n,
            });
        }
        forbidden |= 1u64 << (n - 1 - q);
    }
    let coeffs = pauli_decompose(rho)?;
    Ok(coeffs
        .iter()
        .filter(|(_, a)| a.abs() > XY_TOLERANCE)
        .all(|(p, _)| p.u & !p.v & forbidden == 0))
}

/// [`is_xy_state`] with every qubit treated as a message qubit.
pub fn is_xy(rho: &DensityMatrix) -> bool {
    let all: Vec<usize> = (0..rho.num_qubits()).collect();
    is_xy_state(rho, &all).unwrap_or(false)
}

/// Bloch vector `(Tr Xρ, Tr Yρ, Tr Zρ)` of a single-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl BlochVector {
    pub fn norm_sqr(&self) -> f64 {
        self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3
    }

    /// `(I + r·σ) / 2`.
    pub fn to_matrix(&self) -> CMatrix {
        let half = 0.5;
        CMatrix::from_vec(
            2,
            vec![
                Complex64::new(half * (1.0 + self.r3), 0.0),
                Complex64::new(half * self.r1, -half * self.r2),
                Complex64::new(half * self.r1, half * self.r2),
                Complex64::new(half * (1.0 - self.r3), 0.0),
            ],
        )
    }
}

pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: rho.num_qubits(),
        });
    }
    let m = rho.matrix();
    Ok(BlochVector {
        r1: 2.0 * m[(0, 1)].re,
        r2: -2.0 * m[(0, 1)].im,
        r3: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn x() -> CMatrix {
        CMatrix::from_vec(2, vec![ZERO, ONE, ONE, ZERO])
    }
    fn y() -> CMatrix {
        CMatrix::from_vec(2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }
    fn z() -> CMatrix {
        CMatrix::from_diagonal(&[ONE, -ONE])
    }

    #[test]
    fn identity_matrix() {
        let p = PauliOperator::new(1, 0, 0, 0).unwrap();
        assert_eq!(p.matrix().unwrap(), CMatrix::identity(2));
    }

    #[test]
    fn y_is_i_x_z() {
        // Y = iXZ = i³ZX, so in Z^u X^v form Y carries c = 3 and c = 1 gives -Y.
        let ixz = (&x() * &z()).scale(I);
        assert!(ixz.max_abs_diff(&y()) < 1e-15);
        let p3 = PauliOperator::new(1, 1, 1, 3).unwrap();
        assert!(p3.matrix().unwrap().max_abs_diff(&y()) < 1e-15);
        let p1 = PauliOperator::new(1, 1, 1, 1).unwrap();
        assert!(p1.matrix().unwrap().max_abs_diff(&y().scale(-ONE)) < 1e-15);
        assert_eq!(PauliOperator::from_label("Y").unwrap(), p3);
    }

    #[test]
    fn z_tensor_x_against_kron() {
        // u = 10, v = 01 on two qubits.
        let p = PauliOperator::new(2, 0b10, 0b01, 0).unwrap();
        let expect = z().kron(&x());
        assert!(p.matrix().unwrap().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn labels_match_kron() {
        let singles = [
            ("I", CMatrix::identity(2)),
            ("X", x()),
            ("Y", y()),
            ("Z", z()),
        ];
        for (la, ma) in &singles {
            for (lb, mb) in &singles {
                for (lc, mc) in &singles {
                    let label = format!("{la}{lb}{lc}");
                    let p = PauliOperator::from_label(&label).unwrap();
                    let expect = ma.kron(mb).kron(mc);
                    assert!(p.matrix().unwrap().max_abs_diff(&expect) < 1e-15, "{label}");
                    assert_eq!(p.to_string(), label);
                }
            }
        }
    }

    #[test]
    fn from_matrix_round_trip_one_and_two_qubits() {
        for n in 1..=2usize {
            let dim = 1u64 << n;
            for u in 0..dim {
                for v in 0..dim {
                    for c in 0..4 {
                        let p = PauliOperator::new(n, u, v, c).unwrap();
                        let back = PauliOperator::from_matrix(&p.matrix().unwrap());
                        assert_eq!(back, Some(p));
                    }
                }
            }
        }
        let h = CMatrix::from_vec(2, vec![ONE, ONE, ONE, -ONE]).scale(c(0.5f64.sqrt(), 0.0));
        assert_eq!(PauliOperator::from_matrix(&h), None);
    }

    #[test]
    fn unitary() {
        for u in 0..8 {
            for v in 0..8 {
                let m = PauliOperator::new(3, u, v, 1).unwrap().matrix().unwrap();
                assert!((&m * &m.adjoint()).max_abs_diff(&CMatrix::identity(8)) < 1e-15);
            }
        }
    }

    #[test]
    fn compose_matches_matrix_product() {
        for n in 1..=2usize {
            let dim = 1u64 << n;
            for (u1, v1, u2, v2) in itertools(dim) {
                let a = PauliOperator::new(n, u1, v1, 1).unwrap();
                let b = PauliOperator::new(n, u2, v2, 2).unwrap();
                let ab = a.compose(&b).unwrap();
                let dense = &a.matrix().unwrap() * &b.matrix().unwrap();
                assert!(ab.matrix().unwrap().max_abs_diff(&dense) < 1e-15);
            }
        }
    }

    fn itertools(dim: u64) -> impl Iterator<Item = (u64, u64, u64, u64)> {
        (0..dim).flat_map(move |a| {
            (0..dim)
                .flat_map(move |b| (0..dim).flat_map(move |c| (0..dim).map(move |d| (a, b, c, d))))
        })
    }

    #[test]
    fn commutation_sign_is_symplectic() {
        for n in 1..=2usize {
            let dim = 1u64 << n;
            for (u1, v1, u2, v2) in itertools(dim) {
                let p = PauliOperator::new(n, u1, v1, 0).unwrap();
                let q = PauliOperator::new(n, u2, v2, 0).unwrap();
                let (mp, mq) = (p.matrix().unwrap(), q.matrix().unwrap());
                let pq = &mp * &mq;
                let qp = &mq * &mp;
                let sign = if p.commutes_with(&q) { ONE } else { -ONE };
                assert!(pq.max_abs_diff(&qp.scale(sign)) < 1e-15);
            }
        }
    }

    #[test]
    fn decompose_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(1);
        let d = pauli_decompose(&rho).unwrap();
        for (p, a) in &d {
            let expect = if p.z_mask() == 0 && p.x_mask() == 0 {
                0.5
            } else {
                0.0
            };
            assert!((a - expect).abs() < 1e-15, "{p}: {a}");
        }
    }

    #[test]
    fn decompose_plus() {
        let d = pauli_decompose(&DensityMatrix::plus_state(1)).unwrap();
        assert!((d[&PauliOperator::from_label("I").unwrap()] - 0.5).abs() < 1e-15);
        assert!((d[&PauliOperator::from_label("X").unwrap()] - 0.5).abs() < 1e-15);
        assert!(d[&PauliOperator::from_label("Y").unwrap()].abs() < 1e-15);
        assert!(d[&PauliOperator::from_label("Z").unwrap()].abs() < 1e-15);
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let m = CMatrix::from_vec(2, vec![ONE, ONE, ZERO, ZERO]);
        assert!(matches!(
            decompose_matrix(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn xy_predicate_examples() {
        assert!(is_xy(&DensityMatrix::plus_state(1)));
        assert!(!is_xy(&DensityMatrix::zero_state(1)));
        let theta = std::f64::consts::PI / 3.0;
        let s = 0.5f64.sqrt();
        let psi = [c(s, 0.0), Complex64::from_polar(s, theta)];
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!(is_xy(&rho));
        assert!(bloch_vector(&rho).unwrap().r3.abs() < 1e-15);
    }

    #[test]
    fn xy_predicate_only_checks_message_qubits() {
        // |+⟩⟨+| ⊗ |0⟩⟨0|: Z appears only on qubit 1.
        let rho = DensityMatrix::plus_state(1).tensor(&DensityMatrix::zero_state(1));
        assert!(is_xy_state(&rho, &[0]).unwrap());
        assert!(!is_xy_state(&rho, &[0, 1]).unwrap());
        assert!(is_xy_state(&rho, &[2]).is_err());
    }

    #[test]
    fn bloch_examples() {
        let b = bloch_vector(&DensityMatrix::maximally_mixed(1)).unwrap();
        assert_eq!((b.r1, b.r2, b.r3), (0.0, 0.0, 0.0));
        let b = bloch_vector(&DensityMatrix::plus_state(1)).unwrap();
        assert!((b.r1 - 1.0).abs() < 1e-15 && b.r2.abs() < 1e-15 && b.r3.abs() < 1e-15);
        let b = bloch_vector(&DensityMatrix::zero_state(1)).unwrap();
        assert_eq!((b.r1, b.r2, b.r3), (0.0, 0.0, 1.0));
        assert!((b.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(bloch_vector(&DensityMatrix::zero_state(2)).is_err());
    }

    #[test]
    fn bloch_y_sign() {
        // |+i⟩ = (|0⟩ + i|1⟩)/√2 has Bloch vector (0, 1, 0).
        let s = 0.5f64.sqrt();
        let rho = DensityMatrix::from_pure(&[c(s, 0.0), c(0.0, s)]).unwrap();
        let b = bloch_vector(&rho).unwrap();
        assert!((b.r2 - 1.0).abs() < 1e-15);
        assert!(b.to_matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }
}
