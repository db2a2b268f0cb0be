#![no_main]

use libfuzzer_sys::fuzz_target;
use specbench::io::{parse_css, write_css_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(css) = parse_css(text) {
        let back = parse_css(&write_css_string(&css)).expect("written CSS parses");
        assert_eq!(back.weights(), css.weights());
    }
});
