//! Binary model file.
//!
//! Layout, all integers little-endian: the 8 magic bytes, `u32` dimension,
//! `u32` vocabulary size, `u32` window, `u64` seed, the target table and
//! the context table as row-major `f32`, the label order as a `u32` count of
//! `u32`-length-prefixed UTF-8 strings, and finally the known words of the
//! vocabulary in the same string-list form. The hashed band size is the
//! vocabulary size minus the number of known words.

use std::fs;
use std::path::Path;

use super::encoder::ReferenceEncoder;
use super::vocab::Vocabulary;
use super::BiEncoder;
use crate::error::{Error, Result};
use crate::tagset::{CategoryLabel, SenseInventory};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"USASBEM1";

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_strings<'a>(out: &mut Vec<u8>, items: impl ExactSizeIterator<Item = &'a str>) {
    put_u32(out, items.len());
    for s in items {
        put_u32(out, s.len());
        out.extend_from_slice(s.as_bytes());
    }
}

pub fn encode_checkpoint(model: &BiEncoder) -> Vec<u8> {
    let enc = model.encoder();
    let mut out = Vec::with_capacity(32 + 8 * enc.target.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, enc.dim);
    put_u32(&mut out, enc.vocab_size());
    put_u32(&mut out, enc.window);
    out.extend_from_slice(&enc.seed.to_le_bytes());
    for x in enc.target.iter().chain(&enc.context) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    put_strings(&mut out, model.label_order().iter().map(CategoryLabel::as_str));
    put_strings(&mut out, enc.vocab.words().iter().map(String::as_str));
    out
}

pub fn write_checkpoint(model: &BiEncoder, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Checkpoint(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::Checkpoint("table too large".into()))?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn strings(&mut self) -> Result<Vec<String>> {
        let n = self.u32()?;
        let mut out = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let len = self.u32()?;
            let s = std::str::from_utf8(self.take(len)?)
                .map_err(|_| Error::Checkpoint("string is not UTF-8".into()))?;
            out.push(s.to_owned());
        }
        Ok(out)
    }
}

/// Rebuilds a model; `inventory` supplies the gloss tokens of every label in
/// the stored label order.
pub fn decode_checkpoint(bytes: &[u8], inventory: &SenseInventory) -> Result<BiEncoder> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let dim = r.u32()?;
    let vocab_size = r.u32()?;
    let window = r.u32()?;
    let seed = r.u64()?;
    if dim == 0 {
        return Err(Error::Checkpoint("zero embedding dimension".into()));
    }
    let n = vocab_size
        .checked_mul(dim)
        .ok_or_else(|| Error::Checkpoint("table too large".into()))?;
    let target = r.floats(n)?;
    let context = r.floats(n)?;
    let labels = r
        .strings()?
        .into_iter()
        .map(|s| CategoryLabel::new(&s))
        .collect::<Result<Vec<_>>>()?;
    let words = r.strings()?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    if words.len() >= vocab_size {
        return Err(Error::Checkpoint(format!(
            "{} known words leave no hashed band in a vocabulary of {vocab_size}",
            words.len()
        )));
    }
    if target.iter().chain(&context).any(|x| !x.is_finite()) {
        return Err(Error::Checkpoint("non-finite parameter".into()));
    }
    let oov = vocab_size - words.len();
    let encoder = ReferenceEncoder {
        dim,
        window,
        seed,
        vocab: Vocabulary::from_words(words, oov),
        target,
        context,
    };
    BiEncoder::from_parts(encoder, labels, inventory)
}

pub fn read_checkpoint(path: &Path, inventory: &SenseInventory) -> Result<BiEncoder> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, inventory)
}
