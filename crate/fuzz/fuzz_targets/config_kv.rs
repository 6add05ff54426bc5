#![no_main]

use libfuzzer_sys::fuzz_target;
use qtransfer_core::sweep::{ConfigOverrides, SweepConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(overrides) = ConfigOverrides::parse_kv(text) {
        let mut config = SweepConfig::default();
        overrides.apply(&mut config);
        if config.validate().is_ok() {
            assert!(config.lambda_t.steps >= 1);
            assert!(config.lambda_t.stop >= config.lambda_t.start);
            assert!(config.r_values.iter().all(|r| (0.0..=1.0).contains(r)));
            assert!(config.s_values.iter().all(|s| s.is_finite() && *s >= 0.0));
        }
    }
});
