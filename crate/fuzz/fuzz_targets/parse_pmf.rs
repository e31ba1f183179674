#![no_main]

use libfuzzer_sys::fuzz_target;
use sigfree::CrossingTimeDistribution;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(dist) = text.parse::<CrossingTimeDistribution>() {
        // anything accepted must survive a display round trip
        let again: CrossingTimeDistribution = dist.to_string().parse().expect("round trip");
        assert_eq!(dist.atoms().len(), again.atoms().len());
        assert!(dist.min() > 0.0 && dist.min() <= dist.max());
    }
});
