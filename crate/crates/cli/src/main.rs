//! `qhe`: command-line front end for the Z-pad IQP homomorphic encryption
//! simulator.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 bound
//! violation.

use std::fmt;
use std::fs;
use std::io::Write;
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qhe_core::delegation::{run_demo, serve_tcp, DemoConfig, Transport};
use qhe_core::formats::{
    read_ciphertext, read_circuit, read_key, read_state, write_ciphertext, write_key, write_state,
};
use qhe_core::verification::{
    verify_bounds, verify_correctness, verify_security, SecurityMode, VerificationReport,
};
use qhe_core::{
    decrypt, encrypt, evaluate, keygen, DensityMatrix, DiagonalGate, IqpCircuit, SchemeParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BOUND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qhe",
    version,
    about = "Z one-time-pad homomorphic encryption for IQP circuits (simulation)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a secret key.
    Keygen {
        #[arg(long)]
        kappa: usize,
        /// Maximum number of message qubits.
        #[arg(long)]
        n: usize,
        /// Independence order; defaults to max(kappa, n).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a state file.
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an IQP circuit to a ciphertext. Takes no key.
    Evaluate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        ciphertext: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, hide = true)]
        key: Option<PathBuf>,
    },
    /// Decrypt a ciphertext; prints measured bits.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ciphertext: PathBuf,
        /// Where to write the state of unmeasured qubits.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and report.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        #[arg(long)]
        kappa: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Random cases (correctness) or input pairs (security).
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long, value_enum, default_value = "exact")]
        security_mode: SecurityArg,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Decryption circuit sizes to audit; defaults to 1..=64.
        #[arg(long = "p")]
        p: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Delegate a circuit to a server over a local transport.
    Demo {
        #[arg(long, value_enum, default_value = "in-process")]
        transport: TransportArg,
        /// Address of a running `qhe serve` (tcp only).
        #[arg(long)]
        connect: Option<SocketAddr>,
        /// Circuit file; defaults to T on q0, CZ on q0 q1, measure both.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Plaintext state file; defaults to |+>^n.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        kappa: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted total-variation distance from the exact distribution.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Serve evaluation requests on loopback TCP.
    Serve {
        #[arg(long, default_value_t = 0)]
        port: u16,
        #[arg(long)]
        sessions: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Correctness,
    Security,
    Bounds,
}

#[derive(Clone, Copy, ValueEnum)]
enum SecurityArg {
    Exact,
    Analytic,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    InProcess,
    Tcp,
}

#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn params(kappa: usize, n: usize, k: Option<usize>) -> Result<SchemeParams> {
    Ok(match k {
        Some(k) => SchemeParams::new(kappa, n, k)?,
        None => SchemeParams::with_default_k(kappa, n)?,
    })
}

/// Writes `value` as JSON to `path`, or to stdout without one.
fn emit(value: &Value, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => write(p, &text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Keygen {
            kappa,
            n,
            k,
            seed,
            out,
        } => {
            let sk = keygen(&params(kappa, n, k)?, &mut rng(seed))?;
            write(&out, &write_key(&sk))?;
            println!(
                "wrote {} ({} bits of key material)",
                out.display(),
                sk.key_bits()
            );
        }
        Command::Encrypt {
            key,
            state,
            seed,
            out,
        } => {
            let sk = read_key(&read(&key)?)?;
            let rho = read_state(&read(&state)?)?;
            let enc = encrypt(&sk, &rho, &mut rng(seed))?;
            if let Some(adv) = &enc.advisory {
                eprintln!("warning: {}", adv.message);
            }
            write(&out, &write_ciphertext(&enc.ciphertext))?;
        }
        Command::Evaluate {
            circuit,
            ciphertext,
            seed,
            out,
            key,
        } => {
            if key.is_some() {
                return Err(usage(
                    "evaluate must not be given a key; evaluation uses only public data",
                ));
            }
            let circuit = read_circuit(&read(&circuit)?)?;
            let ct = read_ciphertext(&read(&ciphertext)?)?;
            let evaluated = evaluate(&circuit, &ct, &mut rng(seed))?;
            write(&out, &write_ciphertext(&evaluated))?;
        }
        Command::Decrypt {
            key,
            ciphertext,
            out,
        } => {
            let sk = read_key(&read(&key)?)?;
            let ct = read_ciphertext(&read(&ciphertext)?)?;
            let dec = decrypt(&sk, &ct)?;
            let bits: Vec<String> = dec
                .bits
                .iter()
                .enumerate()
                .filter_map(|(q, b)| b.map(|b| format!("q{q}={b}")))
                .collect();
            println!("bits: {}", bits.join(" "));
            if let Some(out) = out {
                write(&out, &write_state(&dec.state))?;
            }
        }
        Command::Verify {
            mode,
            kappa,
            n,
            k,
            cases,
            security_mode,
            delta,
            epsilon,
            p,
            seed,
            report,
        } => {
            let rep: VerificationReport = match mode {
                VerifyMode::Correctness => {
                    let params = params(kappa.unwrap_or(8), n.unwrap_or(4), k)?;
                    verify_correctness(&params, cases.unwrap_or(200), seed)?
                }
                VerifyMode::Security => {
                    let params = params(kappa.unwrap_or(3), n.unwrap_or(2), k)?;
                    let mode = match security_mode {
                        SecurityArg::Exact => SecurityMode::Exact,
                        SecurityArg::Analytic => SecurityMode::Analytic,
                    };
                    verify_security(&params, cases.unwrap_or(20), seed, mode)?
                }
                VerifyMode::Bounds => {
                    let ps = if p.is_empty() { (1..=64).collect() } else { p };
                    verify_bounds(delta, epsilon, &ps)?
                }
            };
            emit(&serde_json::to_value(&rep)?, report.as_deref())?;
            if report.is_some() {
                println!(
                    "{} {}",
                    rep.mode,
                    if rep.passed { "passed" } else { "FAILED" }
                );
            }
            if !rep.passed {
                return Ok(EXIT_BOUND);
            }
        }
        Command::Demo {
            transport,
            connect,
            circuit,
            state,
            kappa,
            k,
            runs,
            seed,
            tolerance,
            report,
        } => {
            let transport = match (transport, connect) {
                (TransportArg::InProcess, Some(_)) => {
                    return Err(usage("--connect requires --transport tcp"));
                }
                (TransportArg::InProcess, None) => Transport::InProcess,
                (TransportArg::Tcp, addr) => Transport::Tcp(addr),
            };
            let circuit = match circuit {
                Some(path) => read_circuit(&read(&path)?)?,
                None => IqpCircuit::new(
                    2,
                    vec![DiagonalGate::t(0), DiagonalGate::cz(0, 1)],
                    vec![0, 1],
                )?,
            };
            let plaintext = match state {
                Some(path) => read_state(&read(&path)?)?,
                None => DensityMatrix::plus_state(circuit.num_qubits()),
            };
            let config = DemoConfig {
                params: params(kappa, circuit.num_qubits(), k)?,
                circuit,
                plaintext,
                runs,
                seed,
                transport,
            };
            let outcome = run_demo(&config)?;
            let mut doc = serde_json::to_value(&outcome)?;
            doc["tolerance"] = Value::from(tolerance);
            emit(&doc, report.as_deref())?;
            if outcome.total_variation > tolerance || !outcome.audit.passed() {
                return Ok(EXIT_BOUND);
            }
        }
        Command::Serve {
            port,
            sessions,
            seed,
        } => {
            let listener = TcpListener::bind(("127.0.0.1", port))?;
            println!("listening on {}", listener.local_addr()?);
            std::io::stdout().flush()?;
            let served = serve_tcp(&listener, seed, sessions)?;
            println!("served {served} sessions");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
    }
}
