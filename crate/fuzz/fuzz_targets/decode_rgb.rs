#![no_main]

use libfuzzer_sys::fuzz_target;
use specbench::io::{decode_rgb, encode_rgb};

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_rgb(data) {
        assert_eq!(encode_rgb(&img).unwrap(), data);
    }
});
