#![no_main]

use libfuzzer_sys::fuzz_target;
use specbench::io::parse_manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_manifest(text, "/") {
        let back = parse_manifest(&m.to_jsonl(), "/").expect("written manifest parses");
        assert_eq!(back.records, m.records);
    }
});
