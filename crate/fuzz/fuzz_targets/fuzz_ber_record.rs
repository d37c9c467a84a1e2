#![no_main]

use libfuzzer_sys::fuzz_target;
use uwoc::BerEstimate;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(est) = BerEstimate::from_json(text) {
        let back = BerEstimate::from_json(&est.to_json()).expect("own output parses");
        assert_eq!(back.to_json(), est.to_json());
    }
});
