#![no_main]

use libfuzzer_sys::fuzz_target;
use rankscope::net::{layer_jacobian, LayerSpec};

fuzz_target!(|data: &[u8]| {
    if data.is_empty() {
        return;
    }
    let width = 1 + (data[0] % 16) as usize;
    let Ok(text) = std::str::from_utf8(&data[1..]) else { return };
    let Ok(spec) = serde_json::from_str::<LayerSpec>(text) else { return };
    if let Ok(out) = spec.output_width(width) {
        if out <= 64 {
            let x: Vec<f64> = (0..width).map(|i| i as f64 - 3.0).collect();
            if let Ok(j) = layer_jacobian(&spec, &x, 1) {
                assert_eq!(j.shape(), (out, width));
            }
        }
    }
});
