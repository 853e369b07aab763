#![no_main]

use libfuzzer_sys::fuzz_target;

use listved::config::{parse_ebno_grid, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = parse_ebno_grid(text) {
        assert!(!grid.is_empty());
        assert!(grid.len() <= MAX_GRID_POINTS);
        assert!(grid.iter().all(|x| x.is_finite()));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
});
