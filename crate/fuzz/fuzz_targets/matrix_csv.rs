#![no_main]

use libfuzzer_sys::fuzz_target;
use rankscope::io::{read_matrix_csv, write_matrix_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = read_matrix_csv(text) {
        let back = read_matrix_csv(&write_matrix_csv(&m)).expect("written matrix parses");
        assert_eq!(back, m);
    }
});
