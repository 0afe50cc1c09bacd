//! Flat binary counter snapshots.
//!
//! ```text
//! magic    4 bytes  "HCNT"
//! version  u16      1
//! backend  u8       0 = exact table, 1 = count-min sketch
//! exact:   entries:u64, then per entry (ascending key bytes)
//!          key_len:u32  key:[u8; key_len]  count:u64
//! sketch:  rows:u32, primes:[u64; rows], then each row's p_j cells as u64
//! ```
//!
//! All integers are little-endian.

use super::{CountMinSketch, Counter, ExactCounter};
use crate::hashing::CountKey;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HCNT";
const VERSION: u16 = 1;
const BACKEND_EXACT: u8 = 0;
const BACKEND_SKETCH: u8 = 1;

pub(super) fn encode(counter: &Counter) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    match counter {
        Counter::Exact(c) => {
            out.push(BACKEND_EXACT);
            let mut entries: Vec<_> = c.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
            for (k, n) in entries {
                out.extend_from_slice(&(k.as_bytes().len() as u32).to_le_bytes());
                out.extend_from_slice(k.as_bytes());
                out.extend_from_slice(&n.to_le_bytes());
            }
        }
        Counter::Sketch(s) => {
            out.push(BACKEND_SKETCH);
            out.extend_from_slice(&(s.depth() as u32).to_le_bytes());
            for p in s.primes() {
                out.extend_from_slice(&p.to_le_bytes());
            }
            for j in 0..s.depth() {
                for cell in s.row(j) {
                    out.extend_from_slice(&cell.to_le_bytes());
                }
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Snapshot("truncated".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub(super) fn decode(bytes: &[u8]) -> Result<Counter> {
    let mut r = Reader { buf: bytes };
    if r.take(4)? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let counter = match r.u8()? {
        BACKEND_EXACT => {
            let n = r.u64()?;
            let mut c = ExactCounter::new();
            for _ in 0..n {
                let len = r.u32()? as usize;
                let key = CountKey::from_bytes(r.take(len)?.to_vec());
                let count = r.u64()?;
                c.insert_raw(key, count);
            }
            Counter::Exact(c)
        }
        BACKEND_SKETCH => {
            let depth = r.u32()? as usize;
            let primes = (0..depth).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::with_capacity(depth);
            for &p in &primes {
                if r.buf.len() / 8 < p as usize {
                    return Err(Error::Snapshot("truncated".into()));
                }
                rows.push((0..p).map(|_| r.u64()).collect::<Result<Vec<_>>>()?);
            }
            Counter::Sketch(CountMinSketch::from_parts(primes, rows)?)
        }
        tag => return Err(Error::Snapshot(format!("unknown backend {tag}"))),
    };
    if !r.buf.is_empty() {
        return Err(Error::Snapshot("trailing bytes".into()));
    }
    Ok(counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::VisitCounter;
    use crate::hashing::{encode_key, Code};
    use proptest::prelude::*;

    fn key(i: i64) -> CountKey {
        encode_key(&Code::Integers(vec![i]), None).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = Counter::Exact(ExactCounter::new()).to_snapshot();
        assert_eq!(&bytes[..4], b"HCNT");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(bytes[6], 0);
        assert_eq!(&bytes[7..], &[0; 8]);
    }

    #[test]
    fn rejects_corruption() {
        let mut s = CountMinSketch::new(&[2, 3]).unwrap();
        s.increment(&key(1)).unwrap();
        let bytes = Counter::Sketch(s).to_snapshot();
        assert!(Counter::from_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Counter::from_snapshot(&bad).is_err());
        let mut bad = bytes.clone();
        bad[6] = 9;
        assert!(Counter::from_snapshot(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(Counter::from_snapshot(&long).is_err());
    }

    proptest! {
        #[test]
        fn snapshot_round_trip(ops in prop::collection::vec(0i64..30, 0..100), sketch in any::<bool>()) {
            let mut c: Counter = if sketch {
                CountMinSketch::new(&[11, 13, 17]).unwrap().into()
            } else {
                ExactCounter::new().into()
            };
            for op in ops {
                c.increment(&key(op)).unwrap();
            }
            let bytes = c.to_snapshot();
            let back = Counter::from_snapshot(&bytes).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_snapshot(), bytes);
        }
    }
}
