#![no_main]

use libfuzzer_sys::fuzz_target;
use rankscope::io::{read_logits_csv, write_logits_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = read_logits_csv(text) {
        if let Some(labels) = &table.labels {
            assert!(labels.iter().all(|&l| l < table.categories.len()));
        }
        // ids containing separators cannot round-trip; everything else must
        if table.categories.iter().all(|c| !c.contains(',') && c.trim() == c) {
            assert_eq!(read_logits_csv(&write_logits_csv(&table)).expect("written table parses"), table);
        }
    }
});
