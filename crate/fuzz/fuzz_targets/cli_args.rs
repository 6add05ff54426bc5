#![no_main]

use libfuzzer_sys::fuzz_target;
use qtransfer_core::sweep::ConfigOverrides;

// Feeds each `key=value` line through the same setter the command line uses.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut overrides = ConfigOverrides::default();
    for line in text.lines() {
        if let Some((key, value)) = line.split_once('=') {
            let _ = overrides.set(&key.replace('-', "_"), value);
        }
    }
});
