#![no_main]

use libfuzzer_sys::fuzz_target;
use specbench::io::{decode_cube, encode_cube};

fuzz_target!(|data: &[u8]| {
    if let Ok(cube) = decode_cube(data) {
        let again = encode_cube(&cube).expect("decoded cube re-encodes");
        assert_eq!(decode_cube(&again).expect("re-encoded cube decodes"), cube);
    }
});
