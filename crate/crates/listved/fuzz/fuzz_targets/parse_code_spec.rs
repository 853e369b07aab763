#![no_main]

use libfuzzer_sys::fuzz_target;

use listved::codes::{build_trellis, encode, enumerate_events_capped, ConvCode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(code) = ConvCode::from_spec(text) else {
        return;
    };
    // Accepted specs must round-trip and drive the encoder and trellis.
    let canonical = code.spec_string();
    assert_eq!(ConvCode::from_spec(&canonical).unwrap(), code);

    let bits = [true, false, true, true];
    let out = encode(&code, &bits, true);
    assert_eq!(out.len(), (bits.len() + code.memory()) * code.n0());

    if let Ok(trellis) = build_trellis(&code) {
        assert_eq!(trellis.num_states(), 1 << code.memory());
        if code.memory() <= 8 {
            let _ = enumerate_events_capped(&code, 6, 10, true, 10_000);
        }
    }
});
