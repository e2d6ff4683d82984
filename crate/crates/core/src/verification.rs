//! Correctness and security distances for the pad scheme, and the bound
//! arithmetic around it: collision union bound, weak-to-strong security
//! amplification, binary entropy and the QPIR communication lower bound.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::circuit::IqpCircuit;
use crate::error::{Error, Result};
use crate::hashing::HashFunction;
use crate::linalg::CMatrix;
use crate::random;
use crate::scheme::{
    decrypt, encrypt_with_randomness, evaluate_exact, keygen, SchemeParams, SecretKey,
};
use crate::sim::{half_trace_norm, run_circuit, DensityMatrix};

/// Classical-quantum state: one unnormalized block `p_m σ_m` per classical
/// outcome `m`.
pub type CqState = BTreeMap<Vec<u8>, CMatrix>;

/// `Σ_m ½‖A_m − B_m‖₁`, missing blocks read as zero.
pub fn cq_distance(a: &CqState, b: &CqState) -> f64 {
    let mut total = 0.0;
    for (key, block) in a {
        total += match b.get(key) {
            Some(other) => half_trace_norm(&(block - other)),
            None => half_trace_norm(block),
        };
    }
    for (key, block) in b {
        if !a.contains_key(key) {
            total += half_trace_norm(block);
        }
    }
    total
}

fn add_block(cq: &mut CqState, key: Vec<u8>, weight: f64, state: &DensityMatrix) {
    let term = state.matrix().scale(Complex64::new(weight, 0.0));
    match cq.get_mut(&key) {
        Some(block) => *block = &*block + &term,
        None => {
            cq.insert(key, term);
        }
    }
}

/// The plaintext reference: measured bits with the conditional state of the
/// unmeasured qubits.
pub fn plaintext_output(circuit: &IqpCircuit, rho: &DensityMatrix) -> Result<CqState> {
    let run = run_circuit(rho, circuit)?;
    let mut cq = CqState::new();
    for branch in run.branches {
        if let Some(state) = &branch.state {
            add_block(&mut cq, branch.bits, branch.probability, state);
        }
    }
    Ok(cq)
}

/// Encrypt, evaluate every measurement branch exactly, decrypt, and collect
/// the decrypted output as a cq-state.
pub fn pipeline_output(
    sk: &SecretKey,
    circuit: &IqpCircuit,
    rho: &DensityMatrix,
    rs: &[u32],
) -> Result<CqState> {
    let ct = encrypt_with_randomness(sk, rho, rs)?.ciphertext;
    let mut cq = CqState::new();
    for branch in evaluate_exact(circuit, &ct)? {
        let out = decrypt(sk, &branch.ciphertext)?;
        add_block(&mut cq, out.measured_bits(), branch.probability, &out.state);
    }
    Ok(cq)
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectnessReport {
    /// Largest residual over all trials.
    pub residual: f64,
    pub trials: usize,
    /// Key coefficients and `r` values of the worst trial.
    pub worst_case_witness: String,
}

/// Distance between the decrypted pipeline output and the plaintext run,
/// maximized over `trials` fresh keys and encryption randomness. Quantum
/// and classical outputs are compared jointly as cq-states, so for fully
/// measured circuits this is the total-variation distance.
pub fn check_correctness<R: Rng + ?Sized>(
    params: &SchemeParams,
    circuit: &IqpCircuit,
    rho: &DensityMatrix,
    trials: usize,
    rng: &mut R,
) -> Result<CorrectnessReport> {
    let reference = plaintext_output(circuit, rho)?;
    let mut report = CorrectnessReport {
        residual: 0.0,
        trials,
        worst_case_witness: String::new(),
    };
    for trial in 0..trials {
        let sk = keygen(params, rng)?;
        let rs: Vec<u32> = (0..rho.num_qubits())
            .map(|_| rng.gen_range(0..1u32 << params.kappa))
            .collect();
        let residual = cq_distance(&pipeline_output(&sk, circuit, rho, &rs)?, &reference);
        if trial == 0 || residual > report.residual {
            report.residual = residual;
            report.worst_case_witness = format!(
                "trial {trial}: key {:?}, r {:?}",
                sk.hash().coefficients(),
                rs
            );
        }
    }
    Ok(report)
}

/// `N(N−1)/2 · 2^{−κ}`: union bound on a collision among `N` independent
/// κ-bit `r` values.
pub fn collision_bound(params: &SchemeParams) -> f64 {
    let n = params.n as f64;
    n * (n - 1.0) / 2.0 * (-(params.kappa as f64)).exp2()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SecurityMode {
    /// Enumerate every `r` vector and every hash function in the family.
    Exact,
    /// Sum over collision patterns of the `r` vector with their exact
    /// probabilities, using k-wise independence for the pad law. Valid for
    /// any κ since `n ≤ k`.
    Analytic,
}

/// Exact-mode limits: `κ·n ≤ 16` for the `r` space and `κ·k ≤ 16` for the
/// hash family.
pub const EXACT_R_BITS: usize = 16;
pub const EXACT_FAMILY_BITS: usize = 16;
/// Analytic-mode limit on message qubits (Bell number of partitions).
pub const ANALYTIC_MAX_QUBITS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct SecurityReport {
    pub mode: SecurityMode,
    /// Trace distance between the two ciphertext ensembles, `r` included.
    pub distance: f64,
    /// The same distance conditioned on all `r` values being distinct.
    pub distinct_r_distance: f64,
    /// Exact probability that some `r` values coincide.
    pub collision_probability: f64,
    /// [`collision_bound`] for the parameters.
    pub collision_bound: f64,
    /// `distinct_r_distance + collision_bound`, an upper bound on `distance`.
    pub distance_bound: f64,
}

/// `Z^b Δ Z^b` for every pad pattern `b`, indexed by `b` read MSB-first.
fn padded_differences(delta: &DensityMatrix) -> Result<Vec<CMatrix>> {
    let m = delta.num_qubits();
    (0..1usize << m)
        .map(|b| {
            let pads: Vec<u8> = (0..m).map(|q| (b >> (m - 1 - q) & 1) as u8).collect();
            Ok(delta.apply_z_pads(&pads)?.into_matrix())
        })
        .collect()
}

fn weighted_norm(diffs: &[CMatrix], weights: &[f64]) -> f64 {
    let mut acc = CMatrix::zeros(diffs[0].dim());
    for (d, &w) in diffs.iter().zip(weights) {
        if w != 0.0 {
            acc = &acc + &d.scale(Complex64::new(w, 0.0));
        }
    }
    half_trace_norm(&acc)
}

/// Pad-pattern law when qubits sharing a class get the same pad bit and the
/// classes' bits are uniform.
fn tied_pad_weights(classes: &[usize]) -> Vec<f64> {
    let m = classes.len();
    let d = classes.iter().copied().max().map_or(0, |c| c + 1);
    let mut w = vec![0.0; 1 << m];
    for beta in 0..1usize << d {
        let b = classes.iter().enumerate().fold(0usize, |acc, (q, &c)| {
            acc | ((beta >> c & 1) << (m - 1 - q))
        });
        w[b] += 1.0 / (1u64 << d) as f64;
    }
    w
}

/// Canonical class labels of `rs` (first occurrence order).
fn collision_classes(rs: &[u32]) -> Vec<usize> {
    let mut seen: Vec<u32> = Vec::new();
    rs.iter()
        .map(|r| match seen.iter().position(|s| s == r) {
            Some(i) => i,
            None => {
                seen.push(*r);
                seen.len() - 1
            }
        })
        .collect()
}

/// Every set partition of `m` elements as restricted-growth label vectors.
fn set_partitions(m: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, m: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            grow(prefix, max.max(c), m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        return vec![vec![]];
    }
    let mut prefix = vec![0];
    grow(&mut prefix, 0, m, &mut out);
    out
}

/// Trace distance between the ciphertext ensembles of `rho` and
/// `rho_prime` (no circuit applied), in the chosen mode.
pub fn check_weak_security(
    params: &SchemeParams,
    rho: &DensityMatrix,
    rho_prime: &DensityMatrix,
    mode: SecurityMode,
) -> Result<SecurityReport> {
    params.validate()?;
    let m = rho.num_qubits();
    if rho_prime.num_qubits() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: rho_prime.num_qubits(),
        });
    }
    if m == 0 || m > params.n {
        return Err(Error::TooManyQubits {
            qubits: m,
            max: params.n,
        });
    }
    let delta = DensityMatrix::from_matrix_unchecked(rho.matrix() - rho_prime.matrix());
    let diffs = padded_differences(&delta)?;
    let (distance, distinct, collision_probability) = match mode {
        SecurityMode::Exact => exact_distances(params, m, &diffs)?,
        SecurityMode::Analytic => analytic_distances(params, m, &diffs)?,
    };
    let bound = collision_bound(params);
    Ok(SecurityReport {
        mode,
        distance,
        distinct_r_distance: distinct,
        collision_probability,
        collision_bound: bound,
        distance_bound: distinct + bound,
    })
}

fn exact_distances(params: &SchemeParams, m: usize, diffs: &[CMatrix]) -> Result<(f64, f64, f64)> {
    let kappa = params.kappa;
    if kappa * m > EXACT_R_BITS {
        return Err(Error::Infeasible(format!(
            "2^{} r vectors exceed the exact-mode cap 2^{EXACT_R_BITS}",
            kappa * m
        )));
    }
    if kappa * params.k > EXACT_FAMILY_BITS {
        return Err(Error::Infeasible(format!(
            "2^{} hash functions exceed the exact-mode cap 2^{EXACT_FAMILY_BITS}",
            kappa * params.k
        )));
    }
    let family: Vec<HashFunction> = HashFunction::enumerate_family(kappa, params.k)?.collect();
    let family_weight = 1.0 / family.len() as f64;
    let r_space = 1usize << kappa;
    let vectors = 1usize << (kappa * m);
    let mut total = 0.0;
    let mut distinct_total = 0.0;
    let mut distinct_count = 0usize;
    let mut rs = vec![0u32; m];
    for idx in 0..vectors {
        for (q, r) in rs.iter_mut().enumerate() {
            *r = ((idx >> ((m - 1 - q) * kappa)) % r_space) as u32;
        }
        let mut weights = vec![0.0; 1 << m];
        for h in &family {
            let b = rs
                .iter()
                .fold(0usize, |acc, &r| (acc << 1) | h.eval_unchecked(r) as usize);
            weights[b] += family_weight;
        }
        let block = weighted_norm(diffs, &weights);
        total += block;
        if collision_classes(&rs).iter().max().map_or(0, |c| c + 1) == m {
            distinct_total += block;
            distinct_count += 1;
        }
    }
    let distinct = if distinct_count > 0 {
        distinct_total / distinct_count as f64
    } else {
        0.0
    };
    let collision_probability = 1.0 - distinct_count as f64 / vectors as f64;
    Ok((total / vectors as f64, distinct, collision_probability))
}

fn analytic_distances(
    params: &SchemeParams,
    m: usize,
    diffs: &[CMatrix],
) -> Result<(f64, f64, f64)> {
    if m > ANALYTIC_MAX_QUBITS {
        return Err(Error::Infeasible(format!(
            "{m} message qubits exceed the analytic-mode cap {ANALYTIC_MAX_QUBITS}"
        )));
    }
    let space = (params.kappa as f64).exp2();
    let mut total = 0.0;
    let mut distinct = 0.0;
    let mut collision_probability = 0.0;
    for classes in set_partitions(m) {
        let d = classes.iter().max().map_or(0, |c| c + 1);
        // P(r pattern = this partition) = (2^κ)_d / 2^{κm}
        let prob = (0..d).map(|i| (space - i as f64) / space).product::<f64>()
            / space.powi((m - d) as i32);
        if prob == 0.0 {
            continue;
        }
        let block = weighted_norm(diffs, &tied_pad_weights(&classes));
        total += prob * block;
        if d == m {
            distinct = block;
        } else {
            collision_probability += prob;
        }
    }
    Ok((total, distinct, collision_probability))
}

/// `min(1, 2^{2N+1} ε)`.
pub fn amplify_weak_to_strong(eps_weak: f64, n: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&eps_weak));
    if eps_weak <= 0.0 {
        return 0.0;
    }
    let exponent = 2 * n as i64 + 1;
    if exponent > 1023 {
        return 1.0;
    }
    (eps_weak * 2f64.powi(exponent as i32)).min(1.0)
}

/// `H(p) = −p log₂ p − (1−p) log₂(1−p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary entropy of {p}")));
    }
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// Database size and error parameters of a QPIR protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QpirBoundInput {
    pub n: u64,
    pub delta: f64,
    pub epsilon: f64,
}

impl QpirBoundInput {
    /// `1 − δ − 2√(ε(1−ε))`.
    pub fn entropy_argument(&self) -> f64 {
        1.0 - self.delta - 2.0 * (self.epsilon * (1.0 - self.epsilon)).sqrt()
    }

    /// `1 − H(1 − δ − 2√(ε(1−ε)))`, for entropy arguments in `[1/2, 1]`.
    pub fn coefficient(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Domain("database size must be at least 1".into()));
        }
        for (name, v) in [("delta", self.delta), ("epsilon", self.epsilon)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1/2]")));
            }
        }
        let arg = self.entropy_argument();
        if !(0.5..=1.0).contains(&arg) {
            return Err(Error::Domain(format!(
                "entropy argument {arg} outside [1/2, 1]"
            )));
        }
        Ok(1.0 - binary_entropy(arg)?)
    }
}

/// Minimum number of communicated qubits,
/// `(1 − H(1 − δ − 2√(ε(1−ε)))) · n`.
pub fn qpir_lower_bound(inp: &QpirBoundInput) -> Result<f64> {
    Ok(inp.coefficient()? * inp.n as f64)
}

/// Communication accounting of the QPIR protocol built from a compact QFHE
/// scheme whose decryption circuit has `p` gates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpirAudit {
    pub p: u64,
    pub delta: f64,
    pub epsilon: f64,
    /// `100 p²`.
    pub n: u64,
    /// `p (1 + log₂ n)`.
    pub communicated: f64,
    /// `p (1 + log₂ 10 + 2 log₂ p)`, the expression as literally printed;
    /// it undercounts `log₂ n` by `log₂ 10`.
    pub communicated_as_printed: f64,
    pub entropy: f64,
    pub coefficient: f64,
    pub lower_bound: f64,
    /// `communicated < lower_bound`.
    pub contradiction: bool,
}

pub fn qpir_reduction_audit(p: u64, delta: f64, epsilon: f64) -> Result<QpirAudit> {
    if p == 0 {
        return Err(Error::Domain("p must be at least 1".into()));
    }
    let n = 100 * p * p;
    let inp = QpirBoundInput { n, delta, epsilon };
    let coefficient = inp.coefficient()?;
    let lower_bound = coefficient * n as f64;
    let pf = p as f64;
    let communicated = pf * (1.0 + (n as f64).log2());
    Ok(QpirAudit {
        p,
        delta,
        epsilon,
        n,
        communicated,
        communicated_as_printed: pf * (1.0 + 10f64.log2() + 2.0 * pf.log2()),
        entropy: 1.0 - coefficient,
        coefficient,
        lower_bound,
        contradiction: communicated < lower_bound,
    })
}

/// Summary emitted by the verification driver.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mode: String,
    pub seed: u64,
    pub params: Option<SchemeParams>,
    pub trials: usize,
    pub correctness_residual: Option<f64>,
    pub security_distance: Option<f64>,
    pub worst_case_witness: Option<String>,
    pub security: Vec<SecurityReport>,
    pub audits: Vec<QpirAudit>,
    pub amplified_bound: Option<f64>,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// Correctness residual tolerance used by the drivers.
pub const CORRECTNESS_TOLERANCE: f64 = 1e-9;
/// Slack on security comparisons used by the drivers.
pub const SECURITY_TOLERANCE: f64 = 1e-9;

/// `cases` random circuits (up to 10 gates) on random xy-plane product
/// inputs of 1..=n qubits, one fresh key per case.
pub fn verify_correctness(
    params: &SchemeParams,
    cases: usize,
    seed: u64,
) -> Result<VerificationReport> {
    params.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut witness = String::new();
    for case in 0..cases {
        let n = 1 + case % params.n;
        let rho = random::xy_product(n, &mut rng);
        let circuit = random::circuit(n, 10, &mut rng);
        let rep = check_correctness(params, &circuit, &rho, 1, &mut rng)?;
        if case == 0 || rep.residual > worst {
            worst = rep.residual;
            witness = format!("case {case}, {n} qubits, {}", rep.worst_case_witness);
        }
    }
    Ok(VerificationReport {
        mode: "correctness".into(),
        seed,
        params: Some(*params),
        trials: cases,
        correctness_residual: Some(worst),
        security_distance: None,
        worst_case_witness: Some(witness),
        security: Vec::new(),
        audits: Vec::new(),
        amplified_bound: None,
        notes: vec![format!("residual tolerance {CORRECTNESS_TOLERANCE:e}")],
        passed: worst <= CORRECTNESS_TOLERANCE,
    })
}

/// Weak security on `pairs` random pairs of n-qubit xy-plane inputs.
/// Passes when every distance is within the collision bound and every
/// distinct-`r` distance vanishes.
pub fn verify_security(
    params: &SchemeParams,
    pairs: usize,
    seed: u64,
    mode: SecurityMode,
) -> Result<VerificationReport> {
    params.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = params.n;
    let mut reports = Vec::with_capacity(pairs);
    let mut worst = 0.0f64;
    let mut witness = String::new();
    let mut passed = true;
    for i in 0..pairs {
        let (a, b) = if i % 2 == 0 {
            (random::xy_state(n, &mut rng), random::xy_state(n, &mut rng))
        } else {
            (
                random::xy_product(n, &mut rng),
                random::xy_product(n, &mut rng),
            )
        };
        let rep = check_weak_security(params, &a, &b, mode)?;
        passed &= rep.distance <= rep.collision_bound + SECURITY_TOLERANCE
            && rep.distinct_r_distance <= SECURITY_TOLERANCE;
        if i == 0 || rep.distance > worst {
            worst = rep.distance;
            witness = format!("pair {i}");
        }
        reports.push(rep);
    }
    Ok(VerificationReport {
        mode: "security".into(),
        seed,
        params: Some(*params),
        trials: pairs,
        correctness_residual: None,
        security_distance: Some(worst),
        worst_case_witness: Some(witness),
        security: reports,
        audits: Vec::new(),
        amplified_bound: Some(amplify_weak_to_strong(worst.min(1.0), n)),
        notes: vec![
            "collision_bound is the construction-level surrogate for the scheme's security parameter".into(),
        ],
        passed,
    })
}

/// QPIR audits for every `p` in `ps`. Passes when each one reaches the
/// contradiction.
pub fn verify_bounds(delta: f64, epsilon: f64, ps: &[u64]) -> Result<VerificationReport> {
    let audits = ps
        .iter()
        .map(|&p| qpir_reduction_audit(p, delta, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let passed = !audits.is_empty() && audits.iter().all(|a| a.contradiction);
    Ok(VerificationReport {
        mode: "bounds".into(),
        seed: 0,
        params: None,
        trials: audits.len(),
        correctness_residual: None,
        security_distance: None,
        worst_case_witness: None,
        security: Vec::new(),
        audits,
        amplified_bound: None,
        notes: vec![
            "communicated = p(1 + log2(100 p^2)); communicated_as_printed = p(1 + log2 10 + 2 log2 p) undercounts by p log2 10".into(),
        ],
        passed,
    })
}
