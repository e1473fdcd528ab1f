#![no_main]

use bfseg_core::bundle::{parse_manifest, CHANNEL_ORDER};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = parse_manifest(data) {
        let names: Vec<&str> = m.channels.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, CHANNEL_ORDER);
    }
});
