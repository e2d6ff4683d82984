//! Client/server delegation over length-prefixed frames.
//!
//! Every message is a 4-byte big-endian length followed by that many bytes.
//! Per request the client sends two frames, a circuit file and a ciphertext
//! file, and the server answers with one frame holding either the evaluated
//! ciphertext file or an error document (`"format": "qhe-error"`). A session
//! is any number of requests on one connection; the server closes it when
//! the client hangs up.
//!
//! The server side never holds a [`SecretKey`]. The client records every
//! byte it exchanges so the transcript can be audited for key material.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::IqpCircuit;
use crate::error::{Error, Result};
use crate::formats::{read_ciphertext, read_circuit, write_ciphertext, write_circuit, write_key};
use crate::scheme::{decrypt, encrypt, evaluate, keygen, Decrypted, SchemeParams, SecretKey};
use crate::sim::{run_circuit, DensityMatrix};

/// Frames above this size are treated as malformed.
pub const MAX_FRAME: usize = 64 << 20;

pub const ERROR_FORMAT: &str = "qhe-error";

pub fn write_frame<W: Write + ?Sized>(w: &mut W, payload: &[u8]) -> Result<Vec<u8>> {
    if payload.len() > MAX_FRAME {
        return Err(Error::Protocol(format!(
            "frame of {} bytes is too large",
            payload.len()
        )));
    }
    let mut frame = Vec::with_capacity(4 + payload.len());
    frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    frame.extend_from_slice(payload);
    w.write_all(&frame)?;
    w.flush()?;
    Ok(frame)
}

/// Reads one frame; `Ok(None)` on a clean end of stream before the prefix.
pub fn read_frame<R: Read + ?Sized>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut prefix = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut prefix[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(Error::Protocol("truncated length prefix".into())),
            k => got += k,
        }
    }
    let len = u32::from_be_bytes(prefix) as usize;
    if len > MAX_FRAME {
        return Err(Error::Protocol(format!(
            "frame length {len} exceeds {MAX_FRAME}"
        )));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Protocol("truncated frame".into()),
        _ => Error::Io(e),
    })?;
    Ok(Some(payload))
}

#[derive(Debug, Serialize, Deserialize)]
struct ErrorDoc {
    format: String,
    version: u32,
    message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

/// One frame as it appeared on the wire, length prefix included.
#[derive(Clone, Debug, Serialize)]
pub struct WireFrame {
    pub direction: Direction,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Transcript {
    pub frames: Vec<WireFrame>,
}

impl Transcript {
    pub fn total_bytes(&self) -> usize {
        self.frames.iter().map(|f| f.bytes.len()).sum()
    }

    fn push(&mut self, direction: Direction, bytes: Vec<u8>) {
        self.frames.push(WireFrame { direction, bytes });
    }
}

/// Server side of a session: evaluates each request, never sees a key.
pub struct Server<R> {
    rng: R,
}

impl Server<ChaCha20Rng> {
    pub fn seeded(seed: u64) -> Self {
        Server {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl<R: Rng> Server<R> {
    pub fn new(rng: R) -> Self {
        Server { rng }
    }

    /// Parses, validates and evaluates one request.
    pub fn handle(&mut self, circuit_bytes: &[u8], ciphertext_bytes: &[u8]) -> Result<Vec<u8>> {
        let circuit = read_circuit(utf8(circuit_bytes)?)?;
        let ct = read_ciphertext(utf8(ciphertext_bytes)?)?;
        let evaluated = evaluate(&circuit, &ct, &mut self.rng)?;
        Ok(write_ciphertext(&evaluated).into_bytes())
    }

    /// Serves requests until the peer closes the stream. Returns the number
    /// of requests answered.
    pub fn serve<S: Read + Write>(&mut self, stream: &mut S) -> Result<usize> {
        let mut answered = 0;
        loop {
            let Some(circuit) = read_frame(stream)? else {
                return Ok(answered);
            };
            let ciphertext = read_frame(stream)?
                .ok_or_else(|| Error::Protocol("missing ciphertext frame".into()))?;
            let reply = match self.handle(&circuit, &ciphertext) {
                Ok(bytes) => bytes,
                Err(e) => {
                    log::warn!("rejecting request: {e}");
                    serde_json::to_vec(&ErrorDoc {
                        format: ERROR_FORMAT.into(),
                        version: 1,
                        message: e.to_string(),
                    })?
                }
            };
            write_frame(stream, &reply)?;
            answered += 1;
        }
    }
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Protocol(format!("frame is not UTF-8: {e}")))
}

/// Client side: holds the key, encrypts, ships requests, decrypts replies.
pub struct Client<R> {
    sk: SecretKey,
    rng: R,
    transcript: Transcript,
}

impl<R: Rng> Client<R> {
    pub fn new(sk: SecretKey, rng: R) -> Self {
        Client {
            sk,
            rng,
            transcript: Transcript::default(),
        }
    }

    pub fn key(&self) -> &SecretKey {
        &self.sk
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Sends already serialized circuit bytes with a fresh encryption of
    /// `rho`.
    pub fn request_raw<S: Read + Write>(
        &mut self,
        stream: &mut S,
        circuit_bytes: &[u8],
        rho: &DensityMatrix,
    ) -> Result<Decrypted> {
        let ct = encrypt(&self.sk, rho, &mut self.rng)?.ciphertext;
        let frame = write_frame(stream, circuit_bytes)?;
        self.transcript.push(Direction::ClientToServer, frame);
        let frame = write_frame(stream, write_ciphertext(&ct).as_bytes())?;
        self.transcript.push(Direction::ClientToServer, frame);

        let reply = read_frame(stream)?
            .ok_or_else(|| Error::Protocol("server closed the session".into()))?;
        let mut wire = (reply.len() as u32).to_be_bytes().to_vec();
        wire.extend_from_slice(&reply);
        self.transcript.push(Direction::ServerToClient, wire);

        let text = utf8(&reply)?;
        if let Ok(doc) = serde_json::from_str::<ErrorDoc>(text) {
            if doc.format == ERROR_FORMAT {
                return Err(Error::Protocol(format!(
                    "server rejected request: {}",
                    doc.message
                )));
            }
        }
        let evaluated = read_ciphertext(text)?;
        if evaluated.records().len() != ct.records().len()
            || evaluated
                .records()
                .iter()
                .zip(ct.records())
                .any(|(a, b)| a.r != b.r)
        {
            return Err(Error::Protocol("reply does not match the request".into()));
        }
        decrypt(&self.sk, &evaluated)
    }

    pub fn request<S: Read + Write>(
        &mut self,
        stream: &mut S,
        circuit: &IqpCircuit,
        rho: &DensityMatrix,
    ) -> Result<Decrypted> {
        self.request_raw(stream, write_circuit(circuit).as_bytes(), rho)
    }
}

/// One end of an in-memory byte pipe.
pub struct PipeEnd {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    pending: Vec<u8>,
    offset: usize,
}

/// Connected pair of in-memory streams.
pub fn pipe() -> (PipeEnd, PipeEnd) {
    let (tx_a, rx_b) = channel();
    let (tx_b, rx_a) = channel();
    let end = |tx, rx| PipeEnd {
        tx,
        rx,
        pending: Vec::new(),
        offset: 0,
    };
    (end(tx_a, rx_a), end(tx_b, rx_b))
}

impl Read for PipeEnd {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.offset == self.pending.len() {
            match self.rx.recv() {
                Ok(chunk) => {
                    self.pending = chunk;
                    self.offset = 0;
                }
                Err(_) => return Ok(0),
            }
        }
        let k = buf.len().min(self.pending.len() - self.offset);
        buf[..k].copy_from_slice(&self.pending[self.offset..self.offset + k]);
        self.offset += k;
        Ok(k)
    }
}

impl Write for PipeEnd {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.tx
            .send(buf.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer closed"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Result of scanning a transcript for key material.
#[derive(Clone, Debug, Serialize)]
pub struct WireAudit {
    pub bytes_scanned: usize,
    pub patterns_checked: usize,
    pub occurrences: usize,
}

impl WireAudit {
    pub fn passed(&self) -> bool {
        self.occurrences == 0
    }
}

fn count_occurrences(haystack: &[u8], needle: &[u8]) -> usize {
    if needle.is_empty() || needle.len() > haystack.len() {
        return 0;
    }
    haystack
        .windows(needle.len())
        .filter(|w| *w == needle)
        .count()
}

/// Searches every frame for the serialized key file, its coefficient hex
/// string, and the packed coefficient bytes. Packed byte strings shorter
/// than 4 bytes are skipped since they match text by chance.
pub fn audit_transcript(transcript: &Transcript, sk: &SecretKey) -> WireAudit {
    let key_file = write_key(sk);
    let packed = sk.hash().to_packed_bits();
    let hex_upper = hex::encode_upper(&packed);
    let hex_lower = hex::encode(&packed);
    let mut patterns: Vec<&[u8]> = vec![
        key_file.as_bytes(),
        hex_lower.as_bytes(),
        hex_upper.as_bytes(),
    ];
    if packed.len() >= 4 {
        patterns.push(&packed);
    }
    let occurrences = transcript
        .frames
        .iter()
        .map(|f| {
            patterns
                .iter()
                .map(|p| count_occurrences(&f.bytes, p))
                .sum::<usize>()
        })
        .sum();
    WireAudit {
        bytes_scanned: transcript.total_bytes(),
        patterns_checked: patterns.len(),
        occurrences,
    }
}

#[derive(Clone, Debug)]
pub enum Transport {
    InProcess,
    /// Loopback TCP. With `None` a server thread is started on an ephemeral
    /// port; otherwise the client connects to the given server.
    Tcp(Option<SocketAddr>),
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub params: SchemeParams,
    pub circuit: IqpCircuit,
    pub plaintext: DensityMatrix,
    pub runs: usize,
    pub seed: u64,
    pub transport: Transport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoOutcome {
    pub runs: usize,
    pub measured: Vec<usize>,
    /// Exact plaintext distribution over measured-bit strings.
    pub exact: Vec<f64>,
    /// Empirical distribution of decrypted bits.
    pub empirical: Vec<f64>,
    pub total_variation: f64,
    pub audit: WireAudit,
    pub transcript_frames: usize,
    pub transcript_bytes: usize,
}

fn outcome_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

fn run_client<S: Read + Write>(
    config: &DemoConfig,
    stream: &mut S,
) -> Result<(Vec<f64>, Transcript, SecretKey)> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let sk = keygen(&config.params, &mut rng)?;
    let mut client = Client::new(sk, rng);
    let mut counts = vec![0usize; 1 << config.circuit.measured().len()];
    for _ in 0..config.runs {
        let out = client.request(stream, &config.circuit, &config.plaintext)?;
        counts[outcome_index(&out.measured_bits())] += 1;
    }
    let empirical = counts
        .iter()
        .map(|&c| c as f64 / config.runs.max(1) as f64)
        .collect();
    let sk = client.key().clone();
    Ok((empirical, client.into_transcript(), sk))
}

/// Runs `config.runs` delegated evaluations and compares the decrypted
/// outcome frequencies with the exact plaintext distribution.
pub fn run_demo(config: &DemoConfig) -> Result<DemoOutcome> {
    let server_seed = config.seed ^ 0x5eed_5e7e;
    let (empirical, transcript, sk) = match &config.transport {
        Transport::InProcess => {
            let (mut client_end, mut server_end) = pipe();
            let server = thread::spawn(move || Server::seeded(server_seed).serve(&mut server_end));
            let result = run_client(config, &mut client_end);
            drop(client_end);
            join_server(server)?;
            result?
        }
        Transport::Tcp(None) => {
            let listener = TcpListener::bind("127.0.0.1:0")?;
            let addr = listener.local_addr()?;
            let server = thread::spawn(move || serve_tcp(&listener, server_seed, Some(1)));
            let mut stream = TcpStream::connect(addr)?;
            stream.set_nodelay(true)?;
            let result = run_client(config, &mut stream);
            drop(stream);
            join_server(server)?;
            result?
        }
        Transport::Tcp(Some(addr)) => {
            let mut stream = TcpStream::connect(addr)?;
            stream.set_nodelay(true)?;
            run_client(config, &mut stream)?
        }
    };
    let exact = run_circuit(&config.plaintext, &config.circuit)?.distribution();
    let total_variation = 0.5
        * exact
            .iter()
            .zip(&empirical)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();
    Ok(DemoOutcome {
        runs: config.runs,
        measured: config.circuit.measured().to_vec(),
        exact,
        empirical,
        total_variation,
        audit: audit_transcript(&transcript, &sk),
        transcript_frames: transcript.frames.len(),
        transcript_bytes: transcript.total_bytes(),
    })
}

fn join_server<T>(handle: thread::JoinHandle<Result<T>>) -> Result<T> {
    handle
        .join()
        .map_err(|_| Error::Protocol("server thread panicked".into()))?
}

/// Accepts sessions on `listener` one at a time; stops after `sessions`
/// sessions when given.
pub fn serve_tcp(listener: &TcpListener, seed: u64, sessions: Option<usize>) -> Result<usize> {
    let mut server = Server::seeded(seed);
    let mut served = 0;
    for stream in listener.incoming() {
        let mut stream = stream?;
        stream.set_nodelay(true)?;
        match server.serve(&mut stream) {
            Ok(n) => log::info!("session {served} answered {n} requests"),
            Err(e) => log::warn!("session {served} aborted: {e}"),
        }
        served += 1;
        if sessions.is_some_and(|s| served >= s) {
            break;
        }
    }
    Ok(served)
}
