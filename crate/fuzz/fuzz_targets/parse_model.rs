#![no_main]
use libfuzzer_sys::fuzz_target;
use sirbf::ModelSpec;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(model) = text.parse::<ModelSpec>() {
        model.validate().expect("parsed models are valid");
        let shown = model.to_string();
        assert_eq!(shown.parse::<ModelSpec>().expect("display parses"), model);
    }
});
