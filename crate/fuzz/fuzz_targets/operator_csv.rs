#![no_main]

use htype_xray::fock::FockBasis;
use htype_xray::io::operator_from_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let basis = FockBasis::new(1 + (sel as usize & 1), (sel as usize >> 1) % 4).expect("small basis");
    let _ = operator_from_csv(text, &basis);
});
