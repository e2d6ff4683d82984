//! The Z one-time-pad scheme for IQP circuits.
//!
//! * key generation samples a k-wise independent hash `h: {0,1}^κ → {0,1}`;
//! * encryption pads each qubit `q` with `Z^{h(r_q)}` for a fresh public
//!   `r_q`;
//! * evaluation applies the diagonal gates straight to the padded state and
//!   measures in the X basis, storing the masked bit `μ_q`;
//! * decryption removes `Z^{h(r_q)}` from unmeasured qubits and returns
//!   `h(r_q) ⊕ μ_q` for measured ones.
//!
//! There is no evaluation key, and [`evaluate`] never receives the secret
//! key.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::IqpCircuit;
use crate::error::{Error, Result};
use crate::hashing::{sample_hash, HashFunction, MAX_KAPPA};
use crate::pauli::is_xy;
use crate::sim::{apply_gates, measure_all, sample_measurements, DensityMatrix, MAX_QUBITS};

/// `κ` (bits per `r`), `n` (maximum message qubits) and `k` (hash
/// independence order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    pub kappa: usize,
    pub n: usize,
    pub k: usize,
}

impl SchemeParams {
    /// Requires `1 ≤ κ ≤ 16`, `1 ≤ n ≤ 10`, `k ≥ n`.
    pub fn new(kappa: usize, n: usize, k: usize) -> Result<Self> {
        let p = SchemeParams { kappa, n, k };
        p.validate()?;
        Ok(p)
    }

    /// `k = max(κ, n)`.
    pub fn with_default_k(kappa: usize, n: usize) -> Result<Self> {
        Self::new(kappa, n, kappa.max(n))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 || self.kappa > MAX_KAPPA {
            return Err(Error::InvalidParams(format!(
                "kappa must be in 1..={MAX_KAPPA}, got {}",
                self.kappa
            )));
        }
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::InvalidParams(format!(
                "n must be in 1..={MAX_QUBITS}, got {}",
                self.n
            )));
        }
        if self.k < self.n {
            return Err(Error::InvalidParams(format!(
                "independence order k = {} is below n = {}",
                self.k, self.n
            )));
        }
        Ok(())
    }
}

/// The classical secret key: one hash function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    params: SchemeParams,
    h: HashFunction,
}

impl SecretKey {
    pub fn new(params: SchemeParams, h: HashFunction) -> Result<Self> {
        params.validate()?;
        if h.kappa() != params.kappa || h.k() != params.k {
            return Err(Error::ParamsMismatch(format!(
                "hash has kappa {} k {}, params want kappa {} k {}",
                h.kappa(),
                h.k(),
                params.kappa,
                params.k
            )));
        }
        Ok(SecretKey { params, h })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn hash(&self) -> &HashFunction {
        &self.h
    }

    /// `k·κ`.
    pub fn key_bits(&self) -> usize {
        self.h.description_bits()
    }

    /// The pad bit `h(r)`.
    pub fn pad(&self, r: u32) -> Result<u8> {
        self.h.eval(r)
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Result<SecretKey> {
    params.validate()?;
    SecretKey::new(*params, sample_hash(params.kappa, params.k, rng)?)
}

/// Classical register `μ ∈ {⊥, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<u8>", into = "Option<u8>")]
pub enum Register {
    Unset,
    Bit(u8),
}

impl From<Option<u8>> for Register {
    fn from(v: Option<u8>) -> Self {
        v.map_or(Register::Unset, |b| Register::Bit(b & 1))
    }
}

impl From<Register> for Option<u8> {
    fn from(r: Register) -> Self {
        match r {
            Register::Unset => None,
            Register::Bit(b) => Some(b),
        }
    }
}

impl Register {
    pub fn is_set(&self) -> bool {
        matches!(self, Register::Bit(_))
    }
}

/// Public per-qubit record: the pad index `r` and the register `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitRecord {
    pub r: u32,
    pub mu: Register,
}

/// Sizes that witness compactness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CiphertextSize {
    pub qubits: usize,
    pub classical_bits: usize,
    pub registers: usize,
}

/// A ciphertext: one record per message qubit and the joint padded state of
/// the qubits whose register is still `⊥`, in ascending qubit order.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciphertext {
    params: SchemeParams,
    records: Vec<QubitRecord>,
    state: DensityMatrix,
}

impl Ciphertext {
    /// Checks that `state` covers exactly the unset registers.
    pub fn from_parts(
        params: SchemeParams,
        records: Vec<QubitRecord>,
        state: DensityMatrix,
    ) -> Result<Self> {
        params.validate()?;
        if records.is_empty() || records.len() > params.n {
            return Err(Error::TooManyQubits {
                qubits: records.len(),
                max: params.n,
            });
        }
        let limit = 1u64 << params.kappa;
        if let Some(rec) = records.iter().find(|rec| u64::from(rec.r) >= limit) {
            return Err(Error::LengthMismatch {
                expected: params.kappa,
                actual: (32 - rec.r.leading_zeros()) as usize,
            });
        }
        let open = records.iter().filter(|rec| !rec.mu.is_set()).count();
        if state.num_qubits() != open {
            return Err(Error::DimensionMismatch {
                expected: open,
                actual: state.num_qubits(),
            });
        }
        Ok(Ciphertext {
            params,
            records,
            state,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn records(&self) -> &[QubitRecord] {
        &self.records
    }

    pub fn num_qubits(&self) -> usize {
        self.records.len()
    }

    /// Padded state of the unmeasured qubits.
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// Qubits whose register is `⊥`, ascending.
    pub fn open_qubits(&self) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&q| !self.records[q].mu.is_set())
            .collect()
    }

    pub fn is_fresh(&self) -> bool {
        self.records.iter().all(|rec| !rec.mu.is_set())
    }

    pub fn size(&self) -> CiphertextSize {
        CiphertextSize {
            qubits: self.state.num_qubits(),
            classical_bits: self.records.len() * self.params.kappa,
            registers: self.records.len(),
        }
    }
}

/// Raised when a plaintext lies outside the xy-plane input space, where the
/// pad gives no security guarantee.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecurityAdvisory {
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Encryption {
    pub ciphertext: Ciphertext,
    pub advisory: Option<SecurityAdvisory>,
}

/// Encrypts with fresh uniform `r` values drawn from `rng`.
pub fn encrypt<R: Rng + ?Sized>(
    sk: &SecretKey,
    rho: &DensityMatrix,
    rng: &mut R,
) -> Result<Encryption> {
    let rs: Vec<u32> = (0..rho.num_qubits())
        .map(|_| rng.gen_range(0..1u32 << sk.params.kappa))
        .collect();
    encrypt_with_randomness(sk, rho, &rs)
}

/// Encrypts with caller-chosen `r` values, one per qubit.
pub fn encrypt_with_randomness(
    sk: &SecretKey,
    rho: &DensityMatrix,
    rs: &[u32],
) -> Result<Encryption> {
    let n = rho.num_qubits();
    if n == 0 || n > sk.params.n {
        return Err(Error::TooManyQubits {
            qubits: n,
            max: sk.params.n,
        });
    }
    if rs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rs.len(),
        });
    }
    let pads = rs.iter().map(|&r| sk.pad(r)).collect::<Result<Vec<u8>>>()?;
    let state = rho.apply_z_pads(&pads)?;
    let advisory = (!is_xy(rho)).then(|| {
        let message = "plaintext has a Z component on a message qubit; \
                       the one-time pad does not hide it"
            .to_string();
        log::warn!("{message}");
        SecurityAdvisory { message }
    });
    let records = rs
        .iter()
        .map(|&r| QubitRecord {
            r,
            mu: Register::Unset,
        })
        .collect();
    Ok(Encryption {
        ciphertext: Ciphertext {
            params: sk.params,
            records,
            state,
        },
        advisory,
    })
}

/// Applies the circuit's gates to the open qubits and returns the evolved
/// local state with the local positions of the qubits to measure.
fn evolve(circuit: &IqpCircuit, ct: &Ciphertext) -> Result<(DensityMatrix, Vec<usize>)> {
    if circuit.num_qubits() != ct.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: ct.num_qubits(),
            actual: circuit.num_qubits(),
        });
    }
    for &q in circuit.measured() {
        if ct.records[q].mu.is_set() {
            return Err(Error::RegisterAlreadySet(q));
        }
    }
    let open = ct.open_qubits();
    let local = |q: usize| open.binary_search(&q);
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for g in circuit.gates() {
        if let Some(&q) = g.support().iter().find(|&&q| local(q).is_err()) {
            return Err(Error::InvalidGate(format!(
                "{} acts on already measured qubit {q}",
                g.label()
            )));
        }
        gates.push(g.remapped(|q| local(q).expect("checked")));
    }
    let measured: Vec<usize> = circuit
        .measured()
        .iter()
        .map(|&q| local(q).expect("register unset"))
        .collect();
    let local_circuit = IqpCircuit::new(open.len(), gates, measured.clone())?;
    Ok((apply_gates(&ct.state, &local_circuit)?, measured))
}

fn with_outcome(
    ct: &Ciphertext,
    circuit: &IqpCircuit,
    bits: &[u8],
    state: DensityMatrix,
) -> Ciphertext {
    let mut records = ct.records.clone();
    for (&q, &b) in circuit.measured().iter().zip(bits) {
        records[q].mu = Register::Bit(b);
    }
    Ciphertext {
        params: ct.params,
        records,
        state,
    }
}

/// Homomorphic evaluation with sampled X measurements. Uses no key material.
pub fn evaluate<R: Rng + ?Sized>(
    circuit: &IqpCircuit,
    ct: &Ciphertext,
    rng: &mut R,
) -> Result<Ciphertext> {
    let (evolved, measured) = evolve(circuit, ct)?;
    let run = sample_measurements(&evolved, &measured, rng)?;
    Ok(with_outcome(ct, circuit, &run.bits, run.state))
}

/// One measurement branch of an exact evaluation.
#[derive(Clone, Debug)]
pub struct EvaluatedBranch {
    pub probability: f64,
    pub ciphertext: Ciphertext,
}

/// Homomorphic evaluation enumerating every masked outcome with its Born
/// probability. Zero-probability branches are dropped.
pub fn evaluate_exact(circuit: &IqpCircuit, ct: &Ciphertext) -> Result<Vec<EvaluatedBranch>> {
    let (evolved, measured) = evolve(circuit, ct)?;
    Ok(measure_all(&evolved, &measured)?
        .into_iter()
        .filter_map(|b| {
            let state = b.state?;
            Some(EvaluatedBranch {
                probability: b.probability,
                ciphertext: with_outcome(ct, circuit, &b.bits, state),
            })
        })
        .collect())
}

/// Decrypted output: the un-padded state of unmeasured qubits and the
/// plaintext bit of every measured qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct Decrypted {
    pub state: DensityMatrix,
    /// `None` for qubits that stayed quantum.
    pub bits: Vec<Option<u8>>,
}

impl Decrypted {
    /// Measured bits in qubit order, skipping unmeasured qubits.
    pub fn measured_bits(&self) -> Vec<u8> {
        self.bits.iter().flatten().copied().collect()
    }
}

pub fn decrypt(sk: &SecretKey, ct: &Ciphertext) -> Result<Decrypted> {
    if sk.params != ct.params {
        return Err(Error::ParamsMismatch(format!(
            "key {:?} vs ciphertext {:?}",
            sk.params, ct.params
        )));
    }
    let mut pads = Vec::with_capacity(ct.state.num_qubits());
    let mut bits = Vec::with_capacity(ct.records.len());
    for rec in &ct.records {
        let pad = sk.pad(rec.r)?;
        match rec.mu {
            Register::Unset => {
                pads.push(pad);
                bits.push(None);
            }
            Register::Bit(mu) => bits.push(Some(pad ^ mu)),
        }
    }
    Ok(Decrypted {
        state: ct.state.apply_z_pads(&pads)?,
        bits,
    })
}
