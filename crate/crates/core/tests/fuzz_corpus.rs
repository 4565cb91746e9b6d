// Replays the checked-in fuzz seeds through the same entry points as the fuzz targets.

use std::path::{Path, PathBuf};

use htype_xray::algebra::HTypeStructure;
use htype_xray::fock::FockBasis;
use htype_xray::io::{decode_operator, encode_operator, operator_from_csv};
use nalgebra::DMatrix;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).map(|p| (p.clone(), std::fs::read(p).unwrap())).collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn operator_text_seeds() {
    let mut decoded = 0;
    for (path, data) in seeds("decode_operator") {
        let text = std::str::from_utf8(&data).unwrap();
        match decode_operator(text) {
            Ok(op) => {
                assert_eq!(decode_operator(&encode_operator(&op)).unwrap(), op);
                decoded += 1;
            }
            Err(e) => assert!(path.ends_with("bad_rows.fock"), "{}: {e}", path.display()),
        }
    }
    assert_eq!(decoded, 3);
}

#[test]
fn operator_csv_seeds() {
    for (path, data) in seeds("operator_csv") {
        let (&sel, rest) = data.split_first().unwrap();
        let basis = FockBasis::new(1 + (sel as usize & 1), (sel as usize >> 1) % 4).unwrap();
        let op = operator_from_csv(std::str::from_utf8(rest).unwrap(), &basis).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if path.ends_with("nonfinite.csv") {
            // non-finite values are carried through, not rejected
            assert!(op.entries[(0, 0)].re.is_nan() && op.entries[(0, 0)].im == f64::INFINITY);
        } else {
            assert!(op.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        }
    }
}

#[test]
fn custom_structure_seeds() {
    let mut accepted = Vec::new();
    for (path, data) in seeds("custom_structure") {
        let (&head, rest) = data.split_first().unwrap();
        let n = 1 + (head as usize & 3);
        let m = 1 + ((head as usize >> 2) & 7);
        let d = 2 * n;
        let vals: Vec<f64> = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let gens: Vec<DMatrix<f64>> = (0..m).map(|k| DMatrix::from_row_slice(d, d, &vals[k * d * d..(k + 1) * d * d])).collect();
        if HTypeStructure::custom(n, gens, 1e-10).is_ok() {
            accepted.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    assert_eq!(accepted, ["h1.bin", "quaternionic.bin"]);
}
