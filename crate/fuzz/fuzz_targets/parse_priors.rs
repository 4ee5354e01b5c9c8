#![no_main]
use libfuzzer_sys::fuzz_target;
use sirbf::PriorSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(priors) = PriorSpec::from_json(text) {
            priors.validate().expect("parsed priors are valid");
        }
    }
});
