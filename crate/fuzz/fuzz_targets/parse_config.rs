#![no_main]

use libfuzzer_sys::fuzz_target;
use nematic_core::io::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            // accepted configs must survive their own canonical form
            let again = parse_config(&cfg.canonical()).expect("canonical text parses");
            assert_eq!(again.canonical(), cfg.canonical());
            let _ = cfg.warnings();
        }
    }
});
