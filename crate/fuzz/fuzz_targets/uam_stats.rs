#![no_main]

use bfseg_core::uam::UamStats;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(stats) = UamStats::from_json(data) {
        let t = stats.threshold_for(stats.mean);
        assert!(t > 0.0 && t < 1.0);
        assert_eq!(
            UamStats::from_json(stats.to_json().as_bytes()).unwrap(),
            stats
        );
    }
});
