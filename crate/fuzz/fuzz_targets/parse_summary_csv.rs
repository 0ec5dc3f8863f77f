#![no_main]

use libfuzzer_sys::fuzz_target;
use nematic_core::io::parse_summary_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = parse_summary_csv(text) {
            for h in &table.header {
                let _ = table.column(h);
            }
        }
    }
});
