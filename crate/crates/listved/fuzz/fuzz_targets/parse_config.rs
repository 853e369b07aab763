#![no_main]

use libfuzzer_sys::fuzz_target;

use listved::config::ConfigFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ConfigFile::parse(text) else {
        return;
    };
    for key in ["code", "trials", "ebno_grid", "seed"] {
        let _ = cfg.get(key);
    }
    let _ = cfg.validate_keys(&["code", "trials", "seed"]);
    let _ = cfg.keys().count();
});
