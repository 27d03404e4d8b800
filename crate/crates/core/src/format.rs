//! Binary containers for arrays and tensors.
//!
//! Array layout:
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"FPNA0001"
//! 8       8     n      u64, little-endian
//! 16      8n    values f64, little-endian IEEE-754 bit patterns
//! ```
//!
//! Tensor layout:
//!
//! ```text
//! offset    size  field
//! 0         8     magic  b"FPNT0001"
//! 8         8     rank   u64, little-endian (1 or 2)
//! 16        8r    dims   u64 each, little-endian, outermost first
//! 16+8r     8d    data   f64, little-endian, row-major, d = product of dims
//! ```
//!
//! Both round-trip every bit pattern, including signed zeros. Trailing bytes
//! are rejected.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::tensor::Tensor;
use crate::{Error, FpArray, Result};

pub const ARRAY_MAGIC: &[u8; 8] = b"FPNA0001";
pub const TENSOR_MAGIC: &[u8; 8] = b"FPNT0001";

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_values(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * values.len());
    out.extend_from_slice(ARRAY_MAGIC);
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    put_f64s(&mut out, values);
    out
}

pub fn encode_array(a: &FpArray) -> Vec<u8> {
    encode_values(a.values())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(alloc::format!("truncated {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn magic(&mut self, expected: &[u8; 8]) -> Result<()> {
        if self.take(8, "magic")? != expected {
            return Err(Error::Format("bad magic".to_string()));
        }
        Ok(())
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        usize::try_from(self.u64(what)?).map_err(|_| Error::Format(alloc::format!("{what} too large")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format("length overflow".to_string()))?;
        let raw = self.take(len, "payload")?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(alloc::format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

/// Decodes the raw values without checking finiteness.
pub fn decode_values(bytes: &[u8]) -> Result<Vec<f64>> {
    let mut r = Reader { bytes, pos: 0 };
    r.magic(ARRAY_MAGIC)?;
    let n = r.count("length")?;
    let v = r.f64s(n)?;
    r.finish()?;
    Ok(v)
}

pub fn decode_array(bytes: &[u8]) -> Result<FpArray> {
    FpArray::new(decode_values(bytes)?)
}

pub fn encode_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * (t.rank() + t.data().len()));
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&(t.rank() as u64).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    put_f64s(&mut out, t.data());
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor> {
    let mut r = Reader { bytes, pos: 0 };
    r.magic(TENSOR_MAGIC)?;
    let rank = r.count("rank")?;
    if !(1..=2).contains(&rank) {
        return Err(Error::Format(alloc::format!("unsupported rank {rank}")));
    }
    let dims = (0..rank).map(|_| r.count("dims")).collect::<Result<Vec<_>>>()?;
    let d = dims
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x))
        .ok_or_else(|| Error::Format("element count overflow".to_string()))?;
    let data = r.f64s(d)?;
    r.finish()?;
    Tensor::new(dims, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn array_layout() {
        let b = encode_values(&[1.0, -0.0]);
        assert_eq!(&b[..8], b"FPNA0001");
        assert_eq!(&b[8..16], &2u64.to_le_bytes());
        assert_eq!(&b[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&b[24..32], &(-0.0f64).to_le_bytes());
        assert_eq!(b.len(), 32);
    }

    #[test]
    fn array_round_trip_keeps_bits() {
        let v = vec![-0.0, 0.0, f64::MIN_POSITIVE / 4.0, 1e308, 0.1];
        let back = decode_values(&encode_values(&v)).unwrap();
        assert!(v.iter().zip(&back).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(decode_values(&encode_values(&[])).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn array_rejects_malformed() {
        let mut b = encode_values(&[1.0, 2.0]);
        assert!(decode_values(&b[..b.len() - 1]).is_err());
        b.push(0);
        assert!(decode_values(&b).is_err());
        b[0] = b'X';
        assert!(decode_values(&b).is_err());
        let mut huge = ARRAY_MAGIC.to_vec();
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_values(&huge).is_err());
        assert!(decode_array(&encode_values(&[f64::NAN])).is_err());
    }

    #[test]
    fn tensor_layout_and_round_trip() {
        let t = Tensor::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, -0.0]).unwrap();
        let b = encode_tensor(&t);
        assert_eq!(&b[..8], b"FPNT0001");
        assert_eq!(&b[8..16], &2u64.to_le_bytes());
        assert_eq!(&b[16..24], &2u64.to_le_bytes());
        assert_eq!(&b[24..32], &3u64.to_le_bytes());
        assert_eq!(b.len(), 32 + 48);
        let back = decode_tensor(&b).unwrap();
        assert_eq!(back.canonical_bytes(), t.canonical_bytes());
        assert_eq!(back.dims(), t.dims());
    }

    #[test]
    fn tensor_rejects_bad_rank() {
        let mut b = TENSOR_MAGIC.to_vec();
        b.extend_from_slice(&3u64.to_le_bytes());
        assert!(decode_tensor(&b).is_err());
    }
}
