#![no_main]

use libfuzzer_sys::fuzz_target;
use qtransfer_core::sweep::{parse_f64_list, parse_initial_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = parse_f64_list(text) {
        assert_eq!(values.len(), text.split(',').count());
        assert!(values.iter().all(|v| v.is_finite()));
    }
    let _ = parse_initial_list(text);
});
