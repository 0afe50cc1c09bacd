//! Flat binary model checkpoints.
//!
//! ```text
//! magic        4 bytes "HCAE"
//! version      u16     1
//! input_dim    u32
//! hidden_count u32, then hidden widths as u32 (encoder order)
//! code_dim     u32
//! noise        f64
//! lambda       f64
//! per layer, input to output: weights (row-major outputs x inputs) then bias, all f64
//! ```
//!
//! Little-endian throughout.

use super::AutoencoderModel;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HCAE";
const VERSION: u16 = 1;

impl AutoencoderModel {
    pub fn to_checkpoint(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.input_dim() as u32).to_le_bytes());
        let hidden = self.hidden_sizes();
        out.extend_from_slice(&(hidden.len() as u32).to_le_bytes());
        for h in hidden {
            out.extend_from_slice(&(h as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.code_dim() as u32).to_le_bytes());
        out.extend_from_slice(&self.noise_amplitude().to_le_bytes());
        out.extend_from_slice(&self.lambda().to_le_bytes());
        for p in self.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { buf: bytes };
        if r.take(4)? != MAGIC {
            return Err(Error::Snapshot("bad checkpoint magic".into()));
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let input_dim = r.u32()?;
        let hidden_count = r.u32()?;
        let mut sizes = vec![input_dim];
        for _ in 0..hidden_count {
            sizes.push(r.u32()?);
        }
        let code_dim = r.u32()?;
        let noise = r.f64()?;
        let lambda = r.f64()?;
        let mut model = AutoencoderModel::zeros(&sizes, code_dim, noise, lambda)?;
        if r.buf.len() != model.param_count() * 8 {
            return Err(Error::Snapshot(format!(
                "expected {} weight bytes, found {}",
                model.param_count() * 8,
                r.buf.len()
            )));
        }
        let params: Vec<f64> = r
            .buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        model.set_params(&params);
        Ok(model)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Snapshot("truncated checkpoint".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
