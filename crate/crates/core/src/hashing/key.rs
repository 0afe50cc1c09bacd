use crate::{Error, Result};

/// Fixed-width bit vector produced by a hash function.
///
/// Bits are packed LSB-first into 64-bit words; padding bits past `len` are
/// always zero so derived equality compares exactly the `len` code bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    words: Vec<u64>,
    len: usize,
}

impl BinaryCode {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if bit {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    /// The code as a 0/1 real vector.
    pub fn to_unit_vector(&self) -> Vec<f64> {
        (0..self.len).map(|i| f64::from(u8::from(self.bit(i)))).collect()
    }

    pub fn hamming(&self, other: &Self) -> u32 {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub(crate) fn packed_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        let n = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(n)
    }
}

/// Output of a hash function, before key encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Code {
    Binary(BinaryCode),
    Integers(Vec<i64>),
    /// Raw canonical observation bytes (identity hash).
    Raw(Vec<u8>),
}

impl Code {
    pub fn is_empty(&self) -> bool {
        match self {
            Code::Binary(c) => c.is_empty(),
            Code::Integers(v) => v.is_empty(),
            Code::Raw(v) => v.is_empty(),
        }
    }
}

impl From<BinaryCode> for Code {
    fn from(c: BinaryCode) -> Self {
        Code::Binary(c)
    }
}

impl From<Vec<i64>> for Code {
    fn from(v: Vec<i64>) -> Self {
        Code::Integers(v)
    }
}

const TAG_BINARY: u8 = 0x01;
const TAG_INTEGERS: u8 = 0x02;
const TAG_RAW: u8 = 0x03;
const NO_ACTION: u8 = 0x00;
const WITH_ACTION: u8 = 0x01;

/// Canonical byte encoding of a code, optionally paired with an action.
///
/// Layout (all integers little-endian):
///
/// ```text
/// tag:u8  len:u32  payload  action_marker:u8  [action:u64]
/// ```
///
/// * tag `0x01` binary code: `len` bits, packed LSB-first into `ceil(len/8)` bytes
/// * tag `0x02` integer vector: `len` entries, each `i64`
/// * tag `0x03` raw bytes: `len` bytes
///
/// The action marker is `0x00` for no action and `0x01` followed by the
/// action id otherwise, so `(code, None)` and `(code, Some(0))` differ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountKey {
    bytes: Vec<u8>,
}

impl CountKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self { bytes }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// The action id carried by the key, if any.
    pub fn action(&self) -> Option<u64> {
        let n = self.bytes.len();
        if n >= 9 && self.bytes[n - 9] == WITH_ACTION && self.payload_end() == Some(n - 9) {
            let mut a = [0u8; 8];
            a.copy_from_slice(&self.bytes[n - 8..]);
            Some(u64::from_le_bytes(a))
        } else {
            None
        }
    }

    fn payload_end(&self) -> Option<usize> {
        let tag = *self.bytes.first()?;
        let len = u32::from_le_bytes(self.bytes.get(1..5)?.try_into().ok()?) as usize;
        let payload = match tag {
            TAG_BINARY => len.div_ceil(8),
            TAG_INTEGERS => len * 8,
            TAG_RAW => len,
            _ => return None,
        };
        Some(5 + payload)
    }
}

pub fn encode_key(code: &Code, action: Option<u64>) -> Result<CountKey> {
    if code.is_empty() {
        return Err(Error::EmptyCode);
    }
    let mut bytes = Vec::new();
    match code {
        Code::Binary(c) => {
            bytes.push(TAG_BINARY);
            bytes.extend_from_slice(&(c.len() as u32).to_le_bytes());
            bytes.extend(c.packed_bytes());
        }
        Code::Integers(v) => {
            bytes.push(TAG_INTEGERS);
            bytes.extend_from_slice(&(v.len() as u32).to_le_bytes());
            for x in v {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        Code::Raw(v) => {
            bytes.push(TAG_RAW);
            bytes.extend_from_slice(&(v.len() as u32).to_le_bytes());
            bytes.extend_from_slice(v);
        }
    }
    match action {
        None => bytes.push(NO_ACTION),
        Some(a) => {
            bytes.push(WITH_ACTION);
            bytes.extend_from_slice(&a.to_le_bytes());
        }
    }
    Ok(CountKey { bytes })
}
