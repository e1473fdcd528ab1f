#![no_main]

use bfseg_core::bvol::{decode, encode, parse_header};
use libfuzzer_sys::fuzz_target;

// Input layout: header JSON, one NUL byte, then the raw payload.
fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else {
        return;
    };
    let Ok(header) = parse_header(&data[..split]) else {
        return;
    };
    let raw = &data[split + 1..];
    if let Ok(v) = decode(&header, raw) {
        let (_, bytes) = encode(&v);
        assert_eq!(bytes, raw);
    }
});
