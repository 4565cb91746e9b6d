#![no_main]

// Raw little-endian f64 entries for J_{Z_k}; the H-type check must reject garbage cleanly.
use htype_xray::algebra::HTypeStructure;
use libfuzzer_sys::fuzz_target;
use nalgebra::DMatrix;

fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let n = 1 + (head as usize & 3);
    let m = 1 + ((head as usize >> 2) & 7);
    let d = 2 * n;
    let vals: Vec<f64> = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if vals.len() < m * d * d {
        return;
    }
    let gens: Vec<DMatrix<f64>> = (0..m).map(|k| DMatrix::from_row_slice(d, d, &vals[k * d * d..(k + 1) * d * d])).collect();
    if let Ok(s) = HTypeStructure::custom(n, gens, 1e-10) {
        let mu = vec![1.0; s.m];
        let j = s.j_map(&mu).unwrap();
        assert!((&j * &j + DMatrix::identity(d, d) * s.m as f64).amax() < 1e-6);
    }
});
