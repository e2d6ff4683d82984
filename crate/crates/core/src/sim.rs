//! Dense density-matrix simulation of diagonal-gate circuits with X-basis
//! measurement, and the trace distance.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::IqpCircuit;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};
use crate::pauli::PauliOperator;

/// Largest register the dense simulator accepts (matrix side 1024).
pub const MAX_QUBITS: usize = 10;

/// Hermiticity and unit-trace tolerance on loaded states.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Most negative eigenvalue tolerated in a loaded state.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Branches below this probability carry no conditional state.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// A `2^n × 2^n` density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps `m`.
    pub fn new(m: CMatrix) -> Result<Self> {
        let dim = m.dim();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "side {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_cap(n)?;
        let rho = DensityMatrix { n, m };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        let n = m.dim().trailing_zeros() as usize;
        DensityMatrix { n, m }
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let deviation = self.m.hermitian_deviation();
        if deviation > STATE_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = self.m.trace();
        if (tr - ONE).norm() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = self
            .m
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n: usize) -> Self {
        let mut m = CMatrix::zeros(1 << n);
        m[(0, 0)] = ONE;
        DensityMatrix { n, m }
    }

    /// `|+⟩⟨+|^{⊗n}`, the IQP input.
    pub fn plus_state(n: usize) -> Self {
        let dim = 1usize << n;
        let v = Complex64::new(1.0 / dim as f64, 0.0);
        DensityMatrix {
            n,
            m: CMatrix::from_vec(dim, vec![v; dim * dim]),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            m: CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalized.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let dim = psi.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "length {dim} is not a power of two"
            )));
        }
        check_cap(dim.trailing_zeros() as usize)?;
        let unit: Vec<Complex64> = psi.iter().map(|a| a / norm).collect();
        Ok(Self::from_matrix_unchecked(CMatrix::outer(&unit, &unit)))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// `self ⊗ other`; `self` holds the leading qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n: self.n + other.n,
            m: self.m.kron(&other.m),
        }
    }

    /// Convex mixture `Σ w_i ρ_i`. Weights are not renormalized.
    pub fn mixture<'a>(items: impl IntoIterator<Item = (f64, &'a DensityMatrix)>) -> Result<Self> {
        let mut acc: Option<CMatrix> = None;
        for (w, rho) in items {
            let term = rho.m.scale(Complex64::new(w, 0.0));
            acc = Some(match acc {
                None => term,
                Some(a) => {
                    if a.dim() != term.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: a.dim(),
                            actual: term.dim(),
                        });
                    }
                    &a + &term
                }
            });
        }
        acc.map(Self::from_matrix_unchecked)
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))
    }

    /// Traces out every qubit not listed in `keep`. Kept qubits retain their
    /// relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        check_qubits(&keep, self.n)?;
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let mut out = CMatrix::zeros(1 << k);
        let compose = |kept: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (j, &q) in keep.iter().enumerate() {
                if kept >> (k - 1 - j) & 1 == 1 {
                    idx |= bit(self.n, q);
                }
            }
            for (j, &q) in traced.iter().enumerate() {
                if env >> (traced.len() - 1 - j) & 1 == 1 {
                    idx |= bit(self.n, q);
                }
            }
            idx
        };
        for a in 0..1usize << k {
            for b in 0..1usize << k {
                let mut s = ZERO;
                for e in 0..1usize << traced.len() {
                    s += self.m[(compose(a, e), compose(b, e))];
                }
                out[(a, b)] = s;
            }
        }
        Ok(DensityMatrix { n: k, m: out })
    }

    /// `U ρ U†` for a diagonal gate extended by identity.
    pub fn apply_diagonal(&self, gate: &DiagonalGate) -> Result<DensityMatrix> {
        gate.check_on(self.n)?;
        let diag = gate.expand(self.n);
        let dim = self.dim();
        let mut m = self.m.clone();
        for a in 0..dim {
            for b in 0..dim {
                m[(a, b)] = diag[a] * m[(a, b)] * diag[b].conj();
            }
        }
        Ok(DensityMatrix { n: self.n, m })
    }

    /// `P ρ P†`; the phase of `P` cancels.
    pub fn apply_pauli(&self, p: &PauliOperator) -> Result<DensityMatrix> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: p.num_qubits(),
            });
        }
        let (u, v) = (p.z_mask() as usize, p.x_mask() as usize);
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                let flips = (u & a).count_ones() + (u & b).count_ones();
                let x = self.m[(a ^ v, b ^ v)];
                m[(a, b)] = if flips % 2 == 0 { x } else { -x };
            }
        }
        Ok(DensityMatrix { n: self.n, m })
    }

    /// Conjugates by `Z` on every qubit `q` whose entry in `pads` is 1.
    pub fn apply_z_pads(&self, pads: &[u8]) -> Result<DensityMatrix> {
        if pads.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: pads.len(),
            });
        }
        let u = pads
            .iter()
            .enumerate()
            .filter(|(_, b)| **b & 1 == 1)
            .fold(0u64, |acc, (q, _)| acc | bit(self.n, q) as u64);
        self.apply_pauli(&PauliOperator::new(self.n, u, 0, 0)?)
    }

    /// Unnormalized `Π_b ρ Π_b` with `Π_b = (I + (-1)^b X_q) / 2`.
    fn project_x(&self, qubit: usize, outcome: u8) -> CMatrix {
        let mask = bit(self.n, qubit);
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                let v = self.m[(a, b)]
                    + s * self.m[(a ^ mask, b)]
                    + s * self.m[(a, b ^ mask)]
                    + self.m[(a ^ mask, b ^ mask)];
                m[(a, b)] = v * 0.25;
            }
        }
        m
    }

    /// X-basis measurement of one qubit: Born probabilities of `|+⟩` (bit 0)
    /// and `|−⟩` (bit 1) with the normalized post-measurement states.
    pub fn measure_x(&self, qubit: usize) -> Result<XMeasurement> {
        check_qubits(&[qubit], self.n)?;
        let mut outcomes = [MeasurementOutcome {
            qubit,
            bit: 0,
            probability: 0.0,
        }; 2];
        let mut post: [Option<DensityMatrix>; 2] = [None, None];
        for b in 0..2u8 {
            let proj = self.project_x(qubit, b);
            let p = proj.trace().re.clamp(0.0, 1.0);
            outcomes[b as usize] = MeasurementOutcome {
                qubit,
                bit: b,
                probability: p,
            };
            if p > ZERO_PROBABILITY {
                post[b as usize] = Some(DensityMatrix {
                    n: self.n,
                    m: proj.scale(Complex64::new(1.0 / p, 0.0)),
                });
            }
        }
        Ok(XMeasurement { outcomes, post })
    }

    /// Trace distance to `other`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        trace_distance(self, other)
    }
}

/// One outcome of a single-qubit X measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub qubit: usize,
    pub bit: u8,
    pub probability: f64,
}

#[derive(Clone, Debug)]
pub struct XMeasurement {
    pub outcomes: [MeasurementOutcome; 2],
    /// Normalized post-measurement state per outcome; `None` when the
    /// outcome has probability zero.
    pub post: [Option<DensityMatrix>; 2],
}

/// `½ Σ|λ_i|` over the eigenvalues of `a − b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(half_trace_norm(&(&a.m - &b.m)))
}

/// `½ Tr|X|` for Hermitian `X`.
pub fn half_trace_norm(x: &CMatrix) -> f64 {
    if x.dim() == 1 {
        return 0.5 * x[(0, 0)].re.abs();
    }
    0.5 * x.hermitian_trace_norm()
}

/// Named diagonal gates plus an explicit-diagonal escape hatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Z,
    S,
    T,
    CZ,
    CS,
    CCZ,
    DIAG,
}

impl GateKind {
    pub const BUILT_IN: [GateKind; 6] = [
        GateKind::Z,
        GateKind::S,
        GateKind::T,
        GateKind::CZ,
        GateKind::CS,
        GateKind::CCZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::CZ => "CZ",
            GateKind::CS => "CS",
            GateKind::CCZ => "CCZ",
            GateKind::DIAG => "DIAG",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "Z" => GateKind::Z,
            "S" | "P" => GateKind::S,
            "T" => GateKind::T,
            "CZ" => GateKind::CZ,
            "CS" => GateKind::CS,
            "CCZ" => GateKind::CCZ,
            "DIAG" => GateKind::DIAG,
            _ => return None,
        })
    }

    /// Arity of a named gate; `None` for `DIAG`.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Z | GateKind::S | GateKind::T => Some(1),
            GateKind::CZ | GateKind::CS => Some(2),
            GateKind::CCZ => Some(3),
            GateKind::DIAG => None,
        }
    }

    /// Standard diagonal of a named gate. T is `diag(1, e^{iπ/4})`, i.e.
    /// `e^{iπ/8} diag(e^{-iπ/8}, e^{iπ/8})` without the global phase.
    pub fn diagonal(self) -> Option<Vec<Complex64>> {
        let neg = -ONE;
        Some(match self {
            GateKind::Z => vec![ONE, neg],
            GateKind::S => vec![ONE, I],
            GateKind::T => vec![ONE, Complex64::from_polar(1.0, FRAC_PI_4)],
            GateKind::CZ => vec![ONE, ONE, ONE, neg],
            GateKind::CS => vec![ONE, ONE, ONE, I],
            GateKind::CCZ => {
                let mut d = vec![ONE; 8];
                d[7] = neg;
                d
            }
            GateKind::DIAG => return None,
        })
    }
}

/// Unitary diagonal in the computational basis, acting on 1–3 qubits.
///
/// `phases[i]` is the diagonal entry for local index `i`, where `support[0]`
/// is the most significant local bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalGate {
    kind: GateKind,
    support: Vec<usize>,
    phases: Vec<Complex64>,
}

pub const UNIT_MODULUS_TOLERANCE: f64 = 1e-12;

impl DiagonalGate {
    pub fn named(kind: GateKind, support: &[usize]) -> Result<Self> {
        let phases = kind
            .diagonal()
            .ok_or_else(|| Error::InvalidGate("DIAG needs an explicit phase list".into()))?;
        if Some(support.len()) != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} acts on {} qubits, got {}",
                kind.name(),
                kind.arity().unwrap_or(0),
                support.len()
            )));
        }
        Self::build(kind, support, phases)
    }

    /// Explicit diagonal on `support`.
    pub fn diag(support: &[usize], phases: Vec<Complex64>) -> Result<Self> {
        Self::build(GateKind::DIAG, support, phases)
    }

    fn build(kind: GateKind, support: &[usize], phases: Vec<Complex64>) -> Result<Self> {
        if support.is_empty() || support.len() > 3 {
            return Err(Error::InvalidGate(format!(
                "support size {} outside 1..=3",
                support.len()
            )));
        }
        for (i, q) in support.iter().enumerate() {
            if support[..i].contains(q) {
                return Err(Error::DuplicateQubit(*q));
            }
        }
        if phases.len() != 1 << support.len() {
            return Err(Error::InvalidGate(format!(
                "{} phases for {} qubits",
                phases.len(),
                support.len()
            )));
        }
        if let Some(p) = phases
            .iter()
            .find(|p| (p.norm() - 1.0).abs() > UNIT_MODULUS_TOLERANCE)
        {
            return Err(Error::InvalidGate(format!("phase {p} is not unit modulus")));
        }
        Ok(DiagonalGate {
            kind,
            support: support.to_vec(),
            phases,
        })
    }

    pub fn z(q: usize) -> Self {
        Self::named(GateKind::Z, &[q]).expect("valid")
    }

    pub fn s(q: usize) -> Self {
        Self::named(GateKind::S, &[q]).expect("valid")
    }

    pub fn t(q: usize) -> Self {
        Self::named(GateKind::T, &[q]).expect("valid")
    }

    /// Panics if `a == b`.
    pub fn cz(a: usize, b: usize) -> Self {
        Self::named(GateKind::CZ, &[a, b]).expect("distinct qubits")
    }

    /// Panics if `a == b`.
    pub fn cs(a: usize, b: usize) -> Self {
        Self::named(GateKind::CS, &[a, b]).expect("distinct qubits")
    }

    /// Panics unless the three qubits are distinct.
    pub fn ccz(a: usize, b: usize, c: usize) -> Self {
        Self::named(GateKind::CCZ, &[a, b, c]).expect("distinct qubits")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn label(&self) -> String {
        let qs: Vec<String> = self.support.iter().map(|q| q.to_string()).collect();
        format!("{} {}", self.kind.name(), qs.join(" "))
    }

    /// Local `2^k × 2^k` matrix.
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.phases)
    }

    /// Re-checks the structural invariants.
    pub fn is_well_formed(&self) -> bool {
        Self::build(self.kind, &self.support, self.phases.clone()).is_ok()
    }

    pub(crate) fn check_on(&self, n: usize) -> Result<()> {
        check_qubits(&self.support, n)
    }

    /// Same gate with every support index passed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        DiagonalGate {
            kind: self.kind,
            support: self.support.iter().map(|&q| map(q)).collect(),
            phases: self.phases.clone(),
        }
    }

    /// The full `2^n` diagonal.
    pub fn expand(&self, n: usize) -> Vec<Complex64> {
        let k = self.support.len();
        (0..1usize << n)
            .map(|a| {
                let local = self
                    .support
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (j, &q)| {
                        if a & bit(n, q) != 0 {
                            acc | 1 << (k - 1 - j)
                        } else {
                            acc
                        }
                    });
                self.phases[local]
            })
            .collect()
    }
}

/// One joint outcome of the measured qubits.
#[derive(Clone, Debug)]
pub struct OutcomeBranch {
    /// One bit per measured qubit, in the circuit's measured order.
    pub bits: Vec<u8>,
    pub probability: f64,
    /// Normalized state of the unmeasured qubits given this outcome; `None`
    /// when the probability is zero.
    pub state: Option<DensityMatrix>,
}

/// Exact result of [`run_circuit`].
#[derive(Clone, Debug)]
pub struct CircuitRun {
    /// State after all gates, before measurement.
    pub evolved: DensityMatrix,
    /// All `2^{|measured|}` outcomes in lexicographic order.
    pub branches: Vec<OutcomeBranch>,
}

impl CircuitRun {
    /// Outcome probabilities indexed by the outcome string read as a binary
    /// number, first measured qubit most significant.
    pub fn distribution(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.probability).collect()
    }
}

/// Applies every gate of `circuit`, then measures its measured subset in the
/// X basis, enumerating every joint outcome by sequential projection.
pub fn run_circuit(rho: &DensityMatrix, circuit: &IqpCircuit) -> Result<CircuitRun> {
    let evolved = apply_gates(rho, circuit)?;
    let branches = measure_all(&evolved, circuit.measured())?;
    Ok(CircuitRun { evolved, branches })
}

/// Applies the gates of `circuit` to `rho`.
pub fn apply_gates(rho: &DensityMatrix, circuit: &IqpCircuit) -> Result<DensityMatrix> {
    if circuit.num_qubits() != rho.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rho.num_qubits(),
            actual: circuit.num_qubits(),
        });
    }
    let mut state = rho.clone();
    for gate in circuit.gates() {
        if !gate.is_well_formed() {
            return Err(Error::InvalidGate(format!(
                "{} is not a diagonal unitary",
                gate.label()
            )));
        }
        state = state.apply_diagonal(gate)?;
    }
    Ok(state)
}

/// Enumerates the X-basis outcomes of `measured` on `state`.
pub fn measure_all(state: &DensityMatrix, measured: &[usize]) -> Result<Vec<OutcomeBranch>> {
    check_qubits(measured, state.num_qubits())?;
    let keep: Vec<usize> = (0..state.num_qubits())
        .filter(|q| !measured.contains(q))
        .collect();
    let mut out = Vec::with_capacity(1 << measured.len());
    let mut bits = Vec::with_capacity(measured.len());
    enumerate_branches(state.clone(), measured, &keep, &mut bits, &mut out)?;
    Ok(out)
}

fn enumerate_branches(
    unnormalized: DensityMatrix,
    remaining: &[usize],
    keep: &[usize],
    bits: &mut Vec<u8>,
    out: &mut Vec<OutcomeBranch>,
) -> Result<()> {
    let Some((&q, rest)) = remaining.split_first() else {
        let p = unnormalized.m.trace().re.clamp(0.0, 1.0);
        let state = if p > ZERO_PROBABILITY {
            let reduced = unnormalized.partial_trace(keep)?;
            Some(DensityMatrix {
                n: reduced.n,
                m: reduced.m.scale(Complex64::new(1.0 / p, 0.0)),
            })
        } else {
            None
        };
        out.push(OutcomeBranch {
            bits: bits.clone(),
            probability: p,
            state,
        });
        return Ok(());
    };
    for b in 0..2u8 {
        let projected = DensityMatrix {
            n: unnormalized.n,
            m: unnormalized.project_x(q, b),
        };
        bits.push(b);
        enumerate_branches(projected, rest, keep, bits, out)?;
        bits.pop();
    }
    Ok(())
}

/// One sampled execution: the measured bits and the collapsed state of the
/// unmeasured qubits.
#[derive(Clone, Debug)]
pub struct SampledRun {
    pub bits: Vec<u8>,
    pub state: DensityMatrix,
}

/// Runs `circuit` once, sampling each X measurement with `rng`.
pub fn sample_circuit<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    circuit: &IqpCircuit,
    rng: &mut R,
) -> Result<SampledRun> {
    let evolved = apply_gates(rho, circuit)?;
    sample_measurements(&evolved, circuit.measured(), rng)
}

/// Measures `measured` in order, sampling outcomes, then traces them out.
pub fn sample_measurements<R: Rng + ?Sized>(
    state: &DensityMatrix,
    measured: &[usize],
    rng: &mut R,
) -> Result<SampledRun> {
    check_qubits(measured, state.num_qubits())?;
    let mut current = state.clone();
    let mut bits = Vec::with_capacity(measured.len());
    for &q in measured {
        let m = current.measure_x(q)?;
        let p0 = m.outcomes[0].probability;
        let drawn: usize = if rng.gen::<f64>() < p0 { 0 } else { 1 };
        // A zero-probability outcome can only be drawn through rounding.
        let b = if m.post[drawn].is_some() {
            drawn
        } else {
            1 - drawn
        };
        let [post0, post1] = m.post;
        current = if b == 0 { post0 } else { post1 }
            .ok_or_else(|| Error::InvalidState("measurement with no outcome".into()))?;
        bits.push(b as u8);
    }
    let keep: Vec<usize> = (0..state.num_qubits())
        .filter(|q| !measured.contains(q))
        .collect();
    Ok(SampledRun {
        bits,
        state: current.partial_trace(&keep)?,
    })
}

#[inline]
pub(crate) fn bit(n: usize, qubit: usize) -> usize {
    1usize << (n - 1 - qubit)
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::DimensionCap {
            qubits: n,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

pub(crate) fn check_qubits(qubits: &[usize], n: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::QubitIndex {
                index: q,
                qubits: n,
            });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}
