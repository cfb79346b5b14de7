//! Binary instance files, little-endian:
//!
//! ```text
//! offset  size        field
//! 0       8           magic "SPCPINS1"
//! 8       8           rows (u64)
//! 16      8           cols (u64)
//! 24      8           nnz = |Omega| (u64)
//! 32      8           delta (f64)
//! 40      8           xi (f64)
//! 48      24 * nnz    (row u64, col u64, value f64), column-major order
//! ```

use std::path::Path;

use admip::{DenseMatrix, ObservationMask, SpcpInstance};

use crate::error::{config_err, Result};

pub const MAGIC: &[u8; 8] = b"SPCPINS1";

pub fn encode_instance(inst: &SpcpInstance) -> Vec<u8> {
    let (m, n) = inst.shape();
    let mask = inst.mask();
    let mut out = Vec::with_capacity(48 + 24 * mask.len());
    out.extend_from_slice(MAGIC);
    for v in [m as u64, n as u64, mask.len() as u64] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&inst.delta().to_le_bytes());
    out.extend_from_slice(&inst.xi().to_le_bytes());
    for &o in mask.offsets() {
        out.extend_from_slice(&((o % m) as u64).to_le_bytes());
        out.extend_from_slice(&((o / m) as u64).to_le_bytes());
        out.extend_from_slice(&inst.data().as_slice()[o].to_le_bytes());
    }
    out
}

pub fn decode_instance(bytes: &[u8]) -> Result<SpcpInstance> {
    let bad = |msg: &str| config_err(format!("instance file: {msg}"));
    if bytes.len() < 48 || &bytes[..8] != MAGIC {
        return Err(bad("missing header"));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8 bytes") };
    let (m, n, nnz) = (
        u64::from_le_bytes(word(8)) as usize,
        u64::from_le_bytes(word(16)) as usize,
        u64::from_le_bytes(word(24)) as usize,
    );
    let delta = f64::from_le_bytes(word(32));
    let xi = f64::from_le_bytes(word(40));
    if m.checked_mul(n).is_none() || nnz.checked_mul(24).map(|b| b + 48) != Some(bytes.len()) {
        return Err(bad("size does not match header"));
    }
    let mut d = DenseMatrix::zeros(m, n);
    let mut idx = Vec::with_capacity(nnz);
    for k in 0..nnz {
        let at = 48 + 24 * k;
        let (i, j) = (u64::from_le_bytes(word(at)) as usize, u64::from_le_bytes(word(at + 8)) as usize);
        if i >= m || j >= n {
            return Err(bad("index out of range"));
        }
        d[(i, j)] = f64::from_le_bytes(word(at + 16));
        idx.push((i, j));
    }
    let mask = ObservationMask::new(m, n, idx)?;
    Ok(SpcpInstance::new(d, mask, delta, xi)?)
}

pub fn write_instance(path: &Path, inst: &SpcpInstance) -> Result<()> {
    std::fs::write(path, encode_instance(inst))?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<SpcpInstance> {
    decode_instance(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let d = DenseMatrix::from_rows(&[&[1.0, -2.5], &[0.25, 7.0], &[3.0, 0.0]]);
        let mask = ObservationMask::new(3, 2, vec![(0, 0), (2, 0), (1, 1), (2, 1)]).unwrap();
        let inst = SpcpInstance::new(d, mask, 0.3, 0.7).unwrap();
        let bytes = encode_instance(&inst);
        assert_eq!(bytes.len(), 48 + 4 * 24);
        let back = decode_instance(&bytes).unwrap();
        assert_eq!(back.data(), inst.data());
        assert_eq!(back.mask(), inst.mask());
        assert_eq!((back.delta(), back.xi()), (0.3, 0.7));
        assert!(decode_instance(&bytes[..50]).is_err());
    }
}
