#![no_main]
use libfuzzer_sys::fuzz_target;
use sirbf::mcmc::McmcConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = McmcConfig::from_json(text) {
            config.validate().expect("parsed configs are valid");
        }
    }
});
