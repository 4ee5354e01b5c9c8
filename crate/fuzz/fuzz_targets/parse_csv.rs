#![no_main]
use libfuzzer_sys::fuzz_target;
use sirbf::io::{parse_csv_str, to_csv_string};
use sirbf::mcmc::EpidemicData;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(parsed) = parse_csv_str(text, None) else {
        return;
    };
    // whatever parses must survive a round trip unchanged
    let again = parse_csv_str(&to_csv_string(&parsed), None).expect("round trip");
    match (&parsed, &again) {
        (EpidemicData::Complete(a), EpidemicData::Complete(b)) => {
            assert_eq!(a.infection_times(), b.infection_times());
            assert_eq!(a.removal_times(), b.removal_times());
        }
        (EpidemicData::Removals(a), EpidemicData::Removals(b)) => {
            assert_eq!(a.removal_times(), b.removal_times());
        }
        _ => panic!("dataset kind changed"),
    }
});
