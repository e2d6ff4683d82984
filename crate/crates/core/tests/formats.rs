use std::path::PathBuf;

use proptest::prelude::*;
use qhe_core::formats::{
    read_ciphertext, read_circuit, read_key, read_state, write_ciphertext, write_circuit,
    write_key, write_state,
};
use qhe_core::hashing::HashFunction;
use qhe_core::random;
use qhe_core::scheme::encrypt_with_randomness;
use qhe_core::{
    decrypt, evaluate, DensityMatrix, DiagonalGate, Error, IqpCircuit, SchemeParams, SecretKey,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn fixture_key() -> SecretKey {
    SecretKey::new(
        SchemeParams::new(3, 2, 3).unwrap(),
        HashFunction::from_coefficients(3, vec![0b101, 0b011, 0b110]).unwrap(),
    )
    .unwrap()
}

#[test]
fn golden_state() {
    let text = fixture("plus2.state.json");
    let rho = read_state(&text).unwrap();
    assert_eq!(rho, DensityMatrix::plus_state(2));
    assert_eq!(write_state(&rho), text);
}

#[test]
fn golden_circuit() {
    let text = fixture("t_cz.circuit.json");
    let c = read_circuit(&text).unwrap();
    assert_eq!(c.gates(), &[DiagonalGate::t(0), DiagonalGate::cz(0, 1)]);
    assert_eq!(c.measured(), &[0, 1]);
    assert_eq!(write_circuit(&c), text);
}

#[test]
fn golden_diag_circuit() {
    let text = fixture("diag.circuit.json");
    let c = read_circuit(&text).unwrap();
    assert_eq!(c.gates().len(), 2);
    assert_eq!(c.unmeasured(), vec![1]);
    assert_eq!(write_circuit(&c), text);
}

#[test]
fn golden_key() {
    let text = fixture("k3.key.json");
    let sk = read_key(&text).unwrap();
    assert_eq!(sk, fixture_key());
    assert_eq!(sk.key_bits(), 9);
    assert_eq!(write_key(&sk), text);
}

#[test]
fn golden_ciphertext() {
    let text = fixture("plus2.ciphertext.json");
    let ct = read_ciphertext(&text).unwrap();
    let expect = encrypt_with_randomness(&fixture_key(), &DensityMatrix::plus_state(2), &[1, 6])
        .unwrap()
        .ciphertext;
    assert_eq!(ct, expect);
    assert_eq!(write_ciphertext(&ct), text);
    let dec = decrypt(&fixture_key(), &ct).unwrap();
    assert!(
        dec.state
            .matrix()
            .max_abs_diff(DensityMatrix::plus_state(2).matrix())
            < 1e-9
    );
}

#[test]
fn ciphertext_must_be_marked_simulation_only() {
    let text = fixture("plus2.ciphertext.json")
        .replace("\"simulation_only\": true", "\"simulation_only\": false");
    assert!(matches!(read_ciphertext(&text), Err(Error::Format(_))));
    let text = fixture("plus2.ciphertext.json").replace("  \"simulation_only\": true,\n", "");
    assert!(read_ciphertext(&text).is_err());
}

#[test]
fn malformed_inputs_are_rejected() {
    let ct = fixture("plus2.ciphertext.json");
    assert!(read_ciphertext(&ct.replace("\"r\": \"6\"", "\"r\": \"8\"")).is_err());
    assert!(read_ciphertext(&ct.replace("\"r\": \"6\"", "\"r\": \"06\"")).is_err());
    assert!(read_ciphertext(&ct.replace("\"version\": 1", "\"version\": 2")).is_err());
    assert!(read_ciphertext(&fixture("t_cz.circuit.json")).is_err());
    assert!(read_state(&fixture("plus2.state.json").replace("0.25", "0.3")).is_err());
    assert!(read_key(&fixture("k3.key.json").replace("af00", "af01")).is_err());
    assert!(
        read_key(&fixture("k3.key.json").replace("\"key_bits\": 9", "\"key_bits\": 8")).is_err()
    );

    let circuit = fixture("t_cz.circuit.json");
    assert!(matches!(
        read_circuit(&circuit.replace("\"T\"", "\"H\"")),
        Err(Error::NotAdmissible { index: 0, .. })
    ));
    assert!(read_circuit(&circuit.replace("\"CZ\"", "\"CNOT\"")).is_err());
    assert!(read_circuit(&circuit.replace("\"T\"", "\"RX\"")).is_err());
    assert!(read_circuit("not json").is_err());
}

fn ciphertext_strategy() -> impl Strategy<Value = qhe_core::Ciphertext> {
    (1usize..=16, 1usize..=3, any::<u64>(), any::<bool>()).prop_map(|(kappa, n, seed, measure)| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = SchemeParams::with_default_k(kappa, n).unwrap();
        let sk = qhe_core::keygen(&params, &mut rng).unwrap();
        let rho = random::density(n, &mut rng);
        let ct = qhe_core::encrypt(&sk, &rho, &mut rng).unwrap().ciphertext;
        if measure {
            let c = IqpCircuit::new(n, vec![DiagonalGate::t(0)], vec![0]).unwrap();
            evaluate(&c, &ct, &mut rng).unwrap()
        } else {
            ct
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn key_round_trip(kappa in 1usize..=16, n in 1usize..=10, extra in 0usize..4, seed in any::<u64>()) {
        let params = SchemeParams::new(kappa, n, n + extra).unwrap();
        let sk = qhe_core::keygen(&params, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let text = write_key(&sk);
        let back = read_key(&text).unwrap();
        prop_assert_eq!(&back, &sk);
        prop_assert_eq!(write_key(&back), text);
    }

    #[test]
    fn circuit_round_trip(n in 1usize..=5, seed in any::<u64>()) {
        let c = random::circuit(n, 10, &mut ChaCha20Rng::seed_from_u64(seed));
        let text = write_circuit(&c);
        let back = read_circuit(&text).unwrap();
        prop_assert_eq!(write_circuit(&back), text);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn ciphertext_round_trip(ct in ciphertext_strategy()) {
        let text = write_ciphertext(&ct);
        let back = read_ciphertext(&text).unwrap();
        prop_assert_eq!(write_ciphertext(&back), text);
        prop_assert_eq!(back, ct);
    }

    #[test]
    fn state_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let rho = random::density(n, &mut ChaCha20Rng::seed_from_u64(seed));
        let text = write_state(&rho);
        let back = read_state(&text).unwrap();
        prop_assert_eq!(write_state(&back), text);
        prop_assert_eq!(back, rho);
    }
}
