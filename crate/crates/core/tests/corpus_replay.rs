//! Replays the checked-in fuzz seeds through the parsers. Seeds listed in
//! `VALID` must parse; every other seed must be rejected without panicking.

use std::path::PathBuf;

use bfseg_core::bundle::parse_manifest;
use bfseg_core::bvol::{decode, parse_header};
use bfseg_core::uam::{parse_entropy_manifest, UamStats};

const VALID: &[&str] = &[
    "image_2x2x2",
    "label_anisotropic",
    "probability_line",
    "image_ramp",
    "label_bits",
    "valid",
    "fitted",
    "two_sided",
    "two_cases",
    "tabs_and_blanks",
];

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn replay(target: &str, parse: impl Fn(&[u8]) -> bool) {
    for (name, bytes) in seeds(target) {
        assert_eq!(
            parse(&bytes),
            VALID.contains(&name.as_str()),
            "{target}/{name}"
        );
    }
}

#[test]
fn bvol_header_seeds() {
    replay("bvol_header", |b| parse_header(b).is_ok());
}

#[test]
fn bvol_decode_seeds() {
    replay("bvol_decode", |b| {
        let split = b
            .iter()
            .position(|&x| x == 0)
            .expect("seed has a NUL separator");
        parse_header(&b[..split])
            .and_then(|h| decode(&h, &b[split + 1..]))
            .is_ok()
    });
}

#[test]
fn bundle_manifest_seeds() {
    replay("bundle_manifest", |b| parse_manifest(b).is_ok());
}

#[test]
fn uam_stats_seeds() {
    replay("uam_stats", |b| UamStats::from_json(b).is_ok());
}

#[test]
fn entropy_manifest_seeds() {
    replay("entropy_manifest", |b| {
        parse_entropy_manifest(std::str::from_utf8(b).unwrap()).is_ok()
    });
}
