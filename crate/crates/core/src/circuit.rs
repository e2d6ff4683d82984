//! IQP circuits: diagonal gates followed by X-basis measurement of a qubit
//! subset, and the admissibility check that turns an arbitrary gate list
//! into one.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::sim::{check_qubits, DiagonalGate, GateKind, MAX_QUBITS, UNIT_MODULUS_TOLERANCE};

/// Off-diagonal entries above this magnitude make a gate inadmissible.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;

/// A validated IQP circuit on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct IqpCircuit {
    n: usize,
    gates: Vec<DiagonalGate>,
    measured: Vec<usize>,
}

impl IqpCircuit {
    /// `measured` is sorted; duplicates and out-of-range indices are errors.
    pub fn new(n: usize, gates: Vec<DiagonalGate>, mut measured: Vec<usize>) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::DimensionCap {
                qubits: n,
                cap: MAX_QUBITS,
            });
        }
        for g in &gates {
            g.check_on(n)?;
        }
        check_qubits(&measured, n)?;
        measured.sort_unstable();
        Ok(IqpCircuit { n, gates, measured })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[DiagonalGate] {
        &self.gates
    }

    /// Measured qubits in ascending order.
    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn unmeasured(&self) -> Vec<usize> {
        (0..self.n).filter(|q| !self.measured.contains(q)).collect()
    }
}

/// A gate as supplied from outside, before admissibility checking.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSpec {
    /// A gate by name. Besides the diagonal set this recognizes `H`, `X`,
    /// `Y` and `CNOT` so they can be rejected as non-diagonal.
    Named { name: String, support: Vec<usize> },
    /// Explicit diagonal (`DIAG`).
    Diagonal {
        support: Vec<usize>,
        phases: Vec<Complex64>,
    },
    /// Explicit dense matrix on `support`.
    Matrix {
        support: Vec<usize>,
        matrix: CMatrix,
    },
}

impl GateSpec {
    pub fn named(name: &str, support: &[usize]) -> Self {
        GateSpec::Named {
            name: name.to_string(),
            support: support.to_vec(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GateSpec::Named { name, .. } => name.clone(),
            GateSpec::Diagonal { .. } => "DIAG".into(),
            GateSpec::Matrix { .. } => "MATRIX".into(),
        }
    }

    pub fn support(&self) -> &[usize] {
        match self {
            GateSpec::Named { support, .. }
            | GateSpec::Diagonal { support, .. }
            | GateSpec::Matrix { support, .. } => support,
        }
    }
}

/// An unvalidated circuit description.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub n: usize,
    pub gates: Vec<GateSpec>,
    pub measured: Vec<usize>,
}

fn non_diagonal_matrix(name: &str) -> Option<CMatrix> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, 1.0);
    Some(match name {
        "H" => CMatrix::from_vec(2, vec![h, h, h, -h]),
        "X" => CMatrix::from_vec(2, vec![ZERO, ONE, ONE, ZERO]),
        "Y" => CMatrix::from_vec(2, vec![ZERO, -i, i, ZERO]),
        "CNOT" | "CX" => {
            let mut m = CMatrix::identity(4);
            m[(2, 2)] = ZERO;
            m[(3, 3)] = ZERO;
            m[(2, 3)] = ONE;
            m[(3, 2)] = ONE;
            m
        }
        _ => return None,
    })
}

/// Accepts `spec` iff every gate is diagonal within `1e-12` with unit-modulus
/// entries and all indices are well formed. The error names the first
/// offending gate.
pub fn validate_iqp(spec: &CircuitSpec) -> Result<IqpCircuit> {
    if spec.n > MAX_QUBITS {
        return Err(Error::DimensionCap {
            qubits: spec.n,
            cap: MAX_QUBITS,
        });
    }
    let mut gates = Vec::with_capacity(spec.gates.len());
    for (index, g) in spec.gates.iter().enumerate() {
        let reject = |reason: String| Error::NotAdmissible {
            index,
            label: g.label(),
            reason,
        };
        check_qubits(g.support(), spec.n).map_err(|e| reject(e.to_string()))?;
        let gate = match g {
            GateSpec::Named { name, support } => match GateKind::from_name(name) {
                Some(GateKind::DIAG) => {
                    return Err(reject("DIAG needs an explicit phase list".into()))
                }
                Some(kind) => DiagonalGate::named(kind, support),
                None if non_diagonal_matrix(name).is_some() => {
                    return Err(reject("not diagonal in the computational basis".into()))
                }
                None => return Err(reject(format!("unknown gate {name:?}"))),
            },
            GateSpec::Diagonal { support, phases } => DiagonalGate::diag(support, phases.clone()),
            GateSpec::Matrix { support, matrix } => {
                if matrix.dim() != 1 << support.len() {
                    return Err(reject(format!(
                        "{}x{} matrix on {} qubits",
                        matrix.dim(),
                        matrix.dim(),
                        support.len()
                    )));
                }
                if !matrix.is_diagonal(DIAGONAL_TOLERANCE) {
                    return Err(reject("not diagonal in the computational basis".into()));
                }
                DiagonalGate::diag(support, matrix.diagonal())
            }
        };
        gates.push(gate.map_err(|e| reject(e.to_string()))?);
    }
    IqpCircuit::new(spec.n, gates, spec.measured.clone())
}

/// Dense `2^n` unitary of a named non-diagonal gate, for tests that need to
/// show the validator's verdict agrees with the matrix.
pub fn reference_matrix(name: &str) -> Option<CMatrix> {
    match GateKind::from_name(name) {
        Some(kind) => kind.diagonal().map(|d| CMatrix::from_diagonal(&d)),
        None => non_diagonal_matrix(name),
    }
}

/// True iff `m` is diagonal and unitary within tolerance.
pub fn is_diagonal_unitary(m: &CMatrix) -> bool {
    m.is_diagonal(DIAGONAL_TOLERANCE)
        && m.diagonal()
            .iter()
            .all(|d| (d.norm() - 1.0).abs() <= UNIT_MODULUS_TOLERANCE)
}
