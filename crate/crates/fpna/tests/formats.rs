//! Round trips of the on-disk formats written by the harness.

use fpna::io::{read_array, read_tensor, write_array, write_tensor};
use fpna::report::{table_csv, Cell, Table};
use fpna_core::tensor::Tensor;
use fpna_core::FpArray;
use proptest::prelude::*;
use tempfile::TempDir;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 2.0),
        Just(f64::MAX),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_cells_survive_csv(values in prop::collection::vec(finite(), 1..40), ints in prop::collection::vec(any::<u64>(), 1..40)) {
        let mut t = Table::new("t", &["x", "k"]);
        for (v, k) in values.iter().zip(&ints) {
            t.push(vec![Cell::from(*v), Cell::from(*k)]);
        }
        let bytes = table_csv(&t).unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let mut n = 0;
        for (rec, (v, k)) in r.records().zip(values.iter().zip(&ints)) {
            let rec = rec.unwrap();
            prop_assert_eq!(rec[0].parse::<f64>().unwrap().to_bits(), v.to_bits());
            prop_assert_eq!(rec[1].parse::<u64>().unwrap(), *k);
            n += 1;
        }
        prop_assert_eq!(n, values.len().min(ints.len()));
    }

    #[test]
    fn arrays_survive_files(values in prop::collection::vec(finite(), 0..200)) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("a.bin");
        let a = FpArray::new(values.clone()).unwrap();
        write_array(&path, &a).unwrap();
        let b = read_array(&path).unwrap();
        prop_assert_eq!(b.len(), values.len());
        for (x, y) in b.iter().zip(&values) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn matrices_survive_files(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("t.bin");
        let data: Vec<f64> = (0..rows * cols).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 11) as f64 * 1e-3).collect();
        let t = Tensor::matrix(rows, cols, data).unwrap();
        write_tensor(&path, &t).unwrap();
        prop_assert_eq!(read_tensor(&path).unwrap(), t);
    }
}

#[test]
fn truncated_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("a.bin");
    write_array(&path, &FpArray::new(vec![1.0, 2.0]).unwrap()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(read_array(&path).is_err());
}
