#![no_main]

use libfuzzer_sys::fuzz_target;
use nematic_core::io::parse_report_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = parse_report_json(text) {
            let written = report.to_json();
            let back = parse_report_json(&written).expect("written report parses");
            assert_eq!(back.to_json(), written);
        }
    }
});
