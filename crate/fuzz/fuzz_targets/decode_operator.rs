#![no_main]

use htype_xray::io::{decode_operator, encode_operator};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(op) = decode_operator(text) {
        // whatever decodes must survive a round trip
        let again = decode_operator(&encode_operator(&op)).expect("re-decoding an encoded operator");
        assert_eq!(again.basis, op.basis);
    }
});
