//! k-wise independent hash functions `{0,1}^κ → {0,1}`: degree-(k−1)
//! polynomials over GF(2^κ), evaluated by Horner's rule, keeping the least
//! significant bit of the result.

use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported field degree.
pub const MAX_KAPPA: usize = 16;

/// Irreducible modulus for GF(2^κ), κ = 1..=16, with the `x^κ` term included.
const IRREDUCIBLE: [u32; MAX_KAPPA + 1] = [
    0, 0b11,    // x + 1
    0b111,   // x^2 + x + 1
    0b1011,  // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11B,   // x^8 + x^4 + x^3 + x + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1002B, // x^16 + x^5 + x^3 + x + 1
];

/// GF(2^κ) with elements stored as bit-polynomials in a `u32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2k {
    kappa: usize,
    modulus: u32,
}

impl Gf2k {
    pub fn new(kappa: usize) -> Result<Self> {
        if kappa == 0 || kappa > MAX_KAPPA {
            return Err(Error::InvalidParams(format!(
                "kappa must be in 1..={MAX_KAPPA}, got {kappa}"
            )));
        }
        Ok(Gf2k {
            kappa,
            modulus: IRREDUCIBLE[kappa],
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u32 {
        1 << self.kappa
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    /// Shift-and-add multiplication reduced by the modulus.
    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let top = 1u32 << self.kappa;
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, a: u32, mut e: u32) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^{2^κ − 2}`; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }
}

/// One member of the hash family: `h(r) = lsb(Σ_i c_i r^i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HashFunction {
    field: Gf2k,
    k: usize,
    coefficients: Vec<u32>,
}

impl HashFunction {
    /// `coefficients[i]` multiplies `r^i`; there must be exactly `k ≥ 1`.
    pub fn from_coefficients(kappa: usize, coefficients: Vec<u32>) -> Result<Self> {
        let field = Gf2k::new(kappa)?;
        if coefficients.is_empty() {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if let Some(c) = coefficients.iter().find(|&&c| c >= field.order()) {
            return Err(Error::InvalidParams(format!(
                "coefficient {c:#x} is not an element of GF(2^{kappa})"
            )));
        }
        Ok(HashFunction {
            field,
            k: coefficients.len(),
            coefficients,
        })
    }

    pub fn kappa(&self) -> usize {
        self.field.kappa
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.coefficients
    }

    /// Description length, `k·κ`.
    pub fn description_bits(&self) -> usize {
        self.k * self.field.kappa
    }

    /// Evaluates on `r`, given as an integer below `2^κ`.
    pub fn eval(&self, r: u32) -> Result<u8> {
        if r >= self.field.order() {
            return Err(Error::LengthMismatch {
                expected: self.field.kappa,
                actual: (32 - r.leading_zeros()) as usize,
            });
        }
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: u32) -> u8 {
        let acc = self
            .coefficients
            .iter()
            .rev()
            .fold(0u32, |acc, &c| self.field.mul(acc, r) ^ c);
        (acc & 1) as u8
    }

    /// Evaluates on a bit-string, most significant bit first.
    pub fn eval_bits(&self, r: &[u8]) -> Result<u8> {
        if r.len() != self.field.kappa {
            return Err(Error::LengthMismatch {
                expected: self.field.kappa,
                actual: r.len(),
            });
        }
        let x = r.iter().fold(0u32, |acc, b| (acc << 1) | u32::from(*b & 1));
        self.eval(x)
    }

    /// Coefficients as κ-bit big-endian fields, concatenated (`k·κ` bits),
    /// then packed MSB-first into bytes with zero padding at the end.
    pub fn to_packed_bits(&self) -> Vec<u8> {
        let total = self.description_bits();
        let mut out = vec![0u8; total.div_ceil(8)];
        let mut pos = 0usize;
        for &c in &self.coefficients {
            for j in (0..self.field.kappa).rev() {
                if c >> j & 1 == 1 {
                    out[pos / 8] |= 0x80 >> (pos % 8);
                }
                pos += 1;
            }
        }
        out
    }

    pub fn from_packed_bits(kappa: usize, k: usize, bytes: &[u8]) -> Result<Self> {
        let total = k * kappa;
        if bytes.len() != total.div_ceil(8) {
            return Err(Error::Format(format!(
                "expected {} bytes of key material, got {}",
                total.div_ceil(8),
                bytes.len()
            )));
        }
        let bit_at = |pos: usize| (bytes[pos / 8] >> (7 - pos % 8)) & 1;
        if (total..bytes.len() * 8).any(|pos| bit_at(pos) != 0) {
            return Err(Error::Format("nonzero padding in key material".into()));
        }
        let coefficients = (0..k)
            .map(|i| (0..kappa).fold(0u32, |acc, j| (acc << 1) | u32::from(bit_at(i * kappa + j))))
            .collect();
        Self::from_coefficients(kappa, coefficients)
    }

    /// Every member of the family in lexicographic coefficient order
    /// (`2^{kκ}` functions). Refuses families above `2^24` members.
    pub fn enumerate_family(kappa: usize, k: usize) -> Result<impl Iterator<Item = HashFunction>> {
        let field = Gf2k::new(kappa)?;
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        let bits = k * kappa;
        if bits > 24 {
            return Err(Error::Infeasible(format!(
                "family of 2^{bits} functions is too large to enumerate"
            )));
        }
        let mask = field.order() - 1;
        Ok((0u32..1 << bits).map(move |idx| HashFunction {
            field,
            k,
            coefficients: (0..k)
                .map(|i| (idx >> ((k - 1 - i) * kappa)) & mask)
                .collect(),
        }))
    }
}

/// Draws `k` uniform coefficients from GF(2^κ).
pub fn sample_hash<R: Rng + ?Sized>(kappa: usize, k: usize, rng: &mut R) -> Result<HashFunction> {
    let field = Gf2k::new(kappa)?;
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let coefficients = (0..k).map(|_| rng.gen_range(0..field.order())).collect();
    HashFunction::from_coefficients(kappa, coefficients)
}
