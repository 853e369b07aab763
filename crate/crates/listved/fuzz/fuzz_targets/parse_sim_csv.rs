#![no_main]

use libfuzzer_sys::fuzz_target;

use listved::report::{format_sim_csv, parse_sim_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_sim_csv(text) {
        // Anything accepted must survive a format/parse cycle unchanged.
        let emitted = format_sim_csv(&rows);
        let again = parse_sim_csv(&emitted).unwrap();
        assert_eq!(format_sim_csv(&again), emitted);
    }
});
