//! Run-to-run variability metrics.
//!
//! * `V_s = 1 - f_nd / f_d` for scalars,
//! * `V_ermv`, the elementwise relative mean absolute variation of two arrays,
//! * `V_c`, the fraction of elements that are not bitwise equal.
//!
//! All three are zero exactly when the compared outputs are bitwise identical.

use alloc::vec::Vec;

use crate::tensor::Tensor;
use crate::{Error, Result};

/// Scalar variability of `f_nd` against the reference `f_d`.
///
/// Evaluated as `(f_d - f_nd) / f_d`. The subtraction is exact when the two
/// values are within a factor of two of each other, so the result carries a
/// single rounding and is not snapped to the `2^-53` grid of `1 - q`.
pub fn v_s(f_d: f64, f_nd: f64) -> Result<f64> {
    if f_d == 0.0 {
        return Err(Error::ZeroReference);
    }
    if f_d.to_bits() == f_nd.to_bits() {
        return Ok(0.0);
    }
    Ok((f_d - f_nd) / f_d)
}

/// Two equally shaped arrays, `a` being the reference.
#[derive(Debug, Clone, Copy)]
pub struct ArrayPair<'a> {
    dims: &'a [usize],
    a: &'a [f64],
    b: &'a [f64],
}

impl<'a> ArrayPair<'a> {
    pub fn new(
        dims_a: &'a [usize],
        a: &'a [f64],
        dims_b: &'a [usize],
        b: &'a [f64],
    ) -> Result<Self> {
        if dims_a != dims_b {
            return Err(Error::ShapeMismatch {
                left: dims_a.to_vec(),
                right: dims_b.to_vec(),
            });
        }
        let d: usize = dims_a.iter().product();
        if a.len() != d || b.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: if a.len() != d { a.len() } else { b.len() },
            });
        }
        if d == 0 {
            return Err(Error::Degenerate("arrays have no elements"));
        }
        Ok(ArrayPair { dims: dims_a, a, b })
    }

    pub fn from_tensors(a: &'a Tensor, b: &'a Tensor) -> Result<Self> {
        Self::new(a.dims(), a.data(), b.dims(), b.data())
    }

    pub fn dims(&self) -> &[usize] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn swapped(&self) -> ArrayPair<'a> {
        ArrayPair { dims: self.dims, a: self.b, b: self.a }
    }
}

/// `V_ermv` plus the number of positions left out because `A` was zero there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeVariation {
    pub value: f64,
    pub excluded: usize,
}

/// Mean of `|A - B| / |A|` over positions where `A != 0`.
pub fn v_ermv(p: &ArrayPair<'_>) -> RelativeVariation {
    let mut total = 0.0;
    let mut included = 0usize;
    for (&a, &b) in p.a.iter().zip(p.b) {
        if a == 0.0 {
            continue;
        }
        included += 1;
        if a.to_bits() != b.to_bits() {
            total += (a - b).abs() / a.abs();
        }
    }
    RelativeVariation {
        value: if included == 0 { 0.0 } else { total / included as f64 },
        excluded: p.len() - included,
    }
}

/// Fraction of positions whose bit patterns differ.
pub fn v_c(p: &ArrayPair<'_>) -> f64 {
    let differing = p
        .a
        .iter()
        .zip(p.b)
        .filter(|(a, b)| a.to_bits() != b.to_bits())
        .count();
    differing as f64 / p.len() as f64
}

/// `V_s` of every observation against one reference.
pub fn v_s_all(f_d: f64, observations: &[f64]) -> Result<Vec<f64>> {
    observations.iter().map(|&f| v_s(f_d, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat<'a>(dims: &'a [usize], a: &'a [f64], b: &'a [f64]) -> ArrayPair<'a> {
        ArrayPair::new(dims, a, dims, b).unwrap()
    }

    #[test]
    fn scalar_variability() {
        assert_eq!(v_s(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(v_s(2.0, 1.0).unwrap(), 0.5);
        assert_eq!(v_s(0.0, 1.0), Err(Error::ZeroReference));
        assert_eq!(v_s(-0.0, 1.0), Err(Error::ZeroReference));
        let f = 0.1 + 0.2;
        assert_eq!(v_s(f, f).unwrap().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn ermv_examples() {
        let d = [2];
        assert_eq!(v_ermv(&flat(&d, &[2.0, 4.0], &[2.0, 4.0])).value, 0.0);
        assert_eq!(v_ermv(&flat(&d, &[2.0, 4.0], &[1.0, 4.0])).value, 0.25);
    }

    #[test]
    fn ermv_zero_denominator_is_excluded() {
        let d = [3];
        let r = v_ermv(&flat(&d, &[0.0, 2.0, 4.0], &[1.0, 1.0, 4.0]));
        assert_eq!(r.excluded, 1);
        assert_eq!(r.value, 0.25);
        let all_zero = v_ermv(&flat(&[2], &[0.0, 0.0], &[1.0, 2.0]));
        assert_eq!(all_zero, RelativeVariation { value: 0.0, excluded: 2 });
    }

    #[test]
    fn ermv_is_not_symmetric() {
        let d = [1];
        let ab = v_ermv(&flat(&d, &[2.0], &[1.0])).value;
        let ba = v_ermv(&flat(&d, &[1.0], &[2.0])).value;
        assert_eq!(ab, 0.5);
        assert_eq!(ba, 1.0);
    }

    #[test]
    fn count_variability() {
        let d = [3];
        assert_eq!(v_c(&flat(&d, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0])), 0.0);
        assert_eq!(v_c(&flat(&d, &[1.0, 2.0, 3.0], &[1.0, 5.0, 3.0])), 1.0 / 3.0);
        assert_eq!(v_c(&flat(&d, &[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0])), 1.0);
        assert_eq!(v_c(&flat(&[1], &[0.0], &[-0.0])), 1.0);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            ArrayPair::new(&[2, 2], &[1.0; 4], &[4], &[1.0; 4]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            ArrayPair::new(&[3], &[1.0; 3], &[3], &[1.0; 2]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(ArrayPair::new(&[0], &[], &[0], &[]).is_err());
    }
}
