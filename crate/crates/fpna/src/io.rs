//! File IO for the binary array and tensor containers.

use std::fs;
use std::path::Path;

use fpna_core::format::{decode_array, decode_tensor, encode_array, encode_tensor};
use fpna_core::tensor::Tensor;
use fpna_core::FpArray;

use crate::error::{HarnessError, Result};

pub fn write_array(path: &Path, a: &FpArray) -> Result<()> {
    fs::write(path, encode_array(a)).map_err(|e| HarnessError::io(path, e))
}

pub fn read_array(path: &Path) -> Result<FpArray> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(decode_array(&bytes)?)
}

pub fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    fs::write(path, encode_tensor(t)).map_err(|e| HarnessError::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(decode_tensor(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = FpArray::new(vec![0.1, -0.0, 3e300]).unwrap();
        let p = dir.path().join("a.bin");
        write_array(&p, &a).unwrap();
        let back = read_array(&p).unwrap();
        assert!(a.iter().zip(back.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));

        let t = Tensor::matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = dir.path().join("t.bin");
        write_tensor(&p, &t).unwrap();
        assert_eq!(read_tensor(&p).unwrap(), t);
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_array(Path::new("/nonexistent/x.bin")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.bin"));
    }
}
