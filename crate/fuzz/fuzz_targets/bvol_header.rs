#![no_main]

use bfseg_core::bvol::{encode, parse_header};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(header) = parse_header(data) else {
        return;
    };
    // An accepted header always describes a grid whose payload size fits.
    let (dims, _) = header.grid().expect("accepted header has a valid grid");
    assert_eq!(header.payload_len().unwrap(), dims.len() * 4);
    if dims.len() <= 1 << 16 {
        let v =
            bfseg_core::Volume::filled(dims, header.grid().unwrap().1, header.kind, 0.0).unwrap();
        let (text, _) = encode(&v);
        assert_eq!(parse_header(text.as_bytes()).unwrap(), header);
    }
});
