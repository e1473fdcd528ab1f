#![no_main]

use bfseg_core::uam::{format_entropy_manifest, parse_entropy_manifest};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_entropy_manifest(text) {
        assert_eq!(
            parse_entropy_manifest(&format_entropy_manifest(&rows)).unwrap(),
            rows
        );
    }
});
