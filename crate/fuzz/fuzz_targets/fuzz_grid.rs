#![no_main]

use libfuzzer_sys::fuzz_target;
use uwoc::grid::parse_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = parse_grid(spec) {
        assert!(!grid.is_empty());
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.iter().all(|v| v.is_finite()));
    }
});
