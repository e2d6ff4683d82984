//! Versioned JSON file formats for keys, circuits, ciphertexts and plain
//! states.
//!
//! Every file carries a `format` tag and `version: 1`. The canonical form is
//! `serde_json` pretty printing with a trailing newline; floats use the
//! shortest representation that round-trips, so parse-then-write of a
//! canonical file reproduces it byte for byte.
//!
//! Ciphertext files carry the quantum share as a dense matrix and are marked
//! `"simulation_only": true`: a real deployment sends qubits, not amplitudes.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circuit::{validate_iqp, CircuitSpec, GateSpec, IqpCircuit};
use crate::error::{Error, Result};
use crate::hashing::HashFunction;
use crate::linalg::CMatrix;
use crate::scheme::{Ciphertext, QubitRecord, Register, SchemeParams, SecretKey};
use crate::sim::{DensityMatrix, GateKind};

pub const VERSION: u32 = 1;
pub const KEY_FORMAT: &str = "qhe-key";
pub const CIRCUIT_FORMAT: &str = "qhe-circuit";
pub const CIPHERTEXT_FORMAT: &str = "qhe-ciphertext";
pub const STATE_FORMAT: &str = "qhe-state";

fn canonical<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::Format(format!(
            "expected format {expected:?}, found {format:?}"
        )));
    }
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported {expected} version {version}"
        )));
    }
    Ok(())
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub qubits: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixData {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        MatrixData {
            qubits: rho.num_qubits(),
            data: rho
                .matrix()
                .as_slice()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    /// Rebuilds the matrix and checks the density-matrix invariants.
    pub fn to_state(&self) -> Result<DensityMatrix> {
        let dim = 1usize
            .checked_shl(self.qubits as u32)
            .ok_or_else(|| Error::Format("qubit count too large".into()))?;
        if self.data.len() != dim * dim {
            return Err(Error::Format(format!(
                "{} entries for a {dim}x{dim} matrix",
                self.data.len()
            )));
        }
        let m = CMatrix::from_vec(
            dim,
            self.data
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
        );
        DensityMatrix::new(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyFile {
    pub format: String,
    pub version: u32,
    pub params: SchemeParams,
    pub key_bits: usize,
    /// `k·κ` coefficient bits, big-endian per coefficient, packed MSB-first.
    pub coefficients_hex: String,
}

impl KeyFile {
    pub fn from_key(sk: &SecretKey) -> Self {
        KeyFile {
            format: KEY_FORMAT.into(),
            version: VERSION,
            params: *sk.params(),
            key_bits: sk.key_bits(),
            coefficients_hex: hex::encode(sk.hash().to_packed_bits()),
        }
    }

    pub fn to_key(&self) -> Result<SecretKey> {
        check_header(&self.format, self.version, KEY_FORMAT)?;
        let p = self.params;
        p.validate()?;
        if self.key_bits != p.k * p.kappa {
            return Err(Error::Format(format!(
                "key_bits {} but k·kappa = {}",
                self.key_bits,
                p.k * p.kappa
            )));
        }
        let bytes = hex::decode(&self.coefficients_hex)
            .map_err(|e| Error::Format(format!("coefficients_hex: {e}")))?;
        SecretKey::new(p, HashFunction::from_packed_bits(p.kappa, p.k, &bytes)?)
    }
}

pub fn write_key(sk: &SecretKey) -> String {
    canonical(&KeyFile::from_key(sk))
}

pub fn read_key(text: &str) -> Result<SecretKey> {
    parse::<KeyFile>(text)?.to_key()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateEntry {
    pub name: String,
    pub support: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub gates: Vec<GateEntry>,
    pub measured: Vec<usize>,
}

impl CircuitFile {
    pub fn from_circuit(c: &IqpCircuit) -> Self {
        CircuitFile {
            format: CIRCUIT_FORMAT.into(),
            version: VERSION,
            n: c.num_qubits(),
            gates: c
                .gates()
                .iter()
                .map(|g| GateEntry {
                    name: g.kind().name().into(),
                    support: g.support().to_vec(),
                    phases: (g.kind() == GateKind::DIAG)
                        .then(|| g.phases().iter().map(|z| [z.re, z.im]).collect()),
                })
                .collect(),
            measured: c.measured().to_vec(),
        }
    }

    /// The unvalidated description. Names are passed through so that the
    /// validator, not the parser, rejects non-diagonal gates.
    pub fn to_spec(&self) -> Result<CircuitSpec> {
        check_header(&self.format, self.version, CIRCUIT_FORMAT)?;
        let gates = self
            .gates
            .iter()
            .map(|g| match (&g.phases, g.name.as_str()) {
                (Some(phases), "DIAG") => Ok(GateSpec::Diagonal {
                    support: g.support.clone(),
                    phases: phases
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect(),
                }),
                (Some(_), name) => Err(Error::Format(format!(
                    "only DIAG gates take a phase list, found one on {name}"
                ))),
                (None, name) => Ok(GateSpec::named(name, &g.support)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircuitSpec {
            n: self.n,
            gates,
            measured: self.measured.clone(),
        })
    }
}

pub fn write_circuit(c: &IqpCircuit) -> String {
    canonical(&CircuitFile::from_circuit(c))
}

/// Parses and validates.
pub fn read_circuit(text: &str) -> Result<IqpCircuit> {
    validate_iqp(&parse::<CircuitFile>(text)?.to_spec()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitEntry {
    /// κ-bit `r` as lowercase hex, `⌈κ/4⌉` digits.
    pub r: String,
    pub mu: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiphertextFile {
    pub format: String,
    pub version: u32,
    pub simulation_only: bool,
    pub params: SchemeParams,
    pub qubits: Vec<QubitEntry>,
    pub state: MatrixData,
}

fn r_to_hex(r: u32, kappa: usize) -> String {
    format!("{r:0width$x}", width = kappa.div_ceil(4))
}

fn r_from_hex(s: &str, kappa: usize) -> Result<u32> {
    if s.len() != kappa.div_ceil(4) {
        return Err(Error::Format(format!(
            "r {s:?} should have {} hex digits",
            kappa.div_ceil(4)
        )));
    }
    let r = u32::from_str_radix(s, 16).map_err(|e| Error::Format(format!("r {s:?}: {e}")))?;
    if u64::from(r) >= 1u64 << kappa {
        return Err(Error::LengthMismatch {
            expected: kappa,
            actual: (32 - r.leading_zeros()) as usize,
        });
    }
    Ok(r)
}

impl CiphertextFile {
    pub fn from_ciphertext(ct: &Ciphertext) -> Self {
        let kappa = ct.params().kappa;
        CiphertextFile {
            format: CIPHERTEXT_FORMAT.into(),
            version: VERSION,
            simulation_only: true,
            params: *ct.params(),
            qubits: ct
                .records()
                .iter()
                .map(|rec| QubitEntry {
                    r: r_to_hex(rec.r, kappa),
                    mu: rec.mu.into(),
                })
                .collect(),
            state: MatrixData::from_state(ct.state()),
        }
    }

    pub fn to_ciphertext(&self) -> Result<Ciphertext> {
        check_header(&self.format, self.version, CIPHERTEXT_FORMAT)?;
        if !self.simulation_only {
            return Err(Error::Format(
                "ciphertext files must be marked simulation_only".into(),
            ));
        }
        let kappa = self.params.kappa;
        let records = self
            .qubits
            .iter()
            .map(|q| {
                if matches!(q.mu, Some(b) if b > 1) {
                    return Err(Error::Format(format!("register value {:?}", q.mu)));
                }
                Ok(QubitRecord {
                    r: r_from_hex(&q.r, kappa)?,
                    mu: Register::from(q.mu),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ciphertext::from_parts(self.params, records, self.state.to_state()?)
    }
}

pub fn write_ciphertext(ct: &Ciphertext) -> String {
    canonical(&CiphertextFile::from_ciphertext(ct))
}

pub fn read_ciphertext(text: &str) -> Result<Ciphertext> {
    parse::<CiphertextFile>(text)?.to_ciphertext()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub format: String,
    pub version: u32,
    pub state: MatrixData,
}

pub fn write_state(rho: &DensityMatrix) -> String {
    canonical(&StateFile {
        format: STATE_FORMAT.into(),
        version: VERSION,
        state: MatrixData::from_state(rho),
    })
}

pub fn read_state(text: &str) -> Result<DensityMatrix> {
    let f: StateFile = parse(text)?;
    check_header(&f.format, f.version, STATE_FORMAT)?;
    f.state.to_state()
}
