#![no_main]

use libfuzzer_sys::fuzz_target;
use sigfree::experiments::SweepConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = SweepConfig::from_json(text) {
        if let Ok(spec) = config.resolve() {
            assert!(!spec.lambda1_grid.is_empty() && !spec.lambda2_grid.is_empty());
            assert!(spec.sim.replications >= 1);
        }
    }
});
