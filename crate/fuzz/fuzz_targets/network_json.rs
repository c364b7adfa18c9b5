#![no_main]

use libfuzzer_sys::fuzz_target;
use rankscope::net::{Network, NetworkSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = NetworkSpec::from_json(text) else { return };
    let widths = spec.widths().expect("parsed spec validates");
    // keep materialization cheap; large specs are valid but slow
    if widths.iter().any(|&w| w > 64) || spec.layers.len() > 16 {
        return;
    }
    let Ok(net) = Network::from_spec(&spec) else { return };
    let x = vec![0.5; net.input_dim()];
    if let Ok(out) = net.forward_to(&x, net.depth()) {
        assert_eq!(out.len(), *widths.last().unwrap());
    }
    let _ = net.jacobian(&x, net.depth());
});
