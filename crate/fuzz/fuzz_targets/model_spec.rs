#![no_main]

use landslide_gam::model::ModelSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ModelSpec::from_json(text) {
        assert_eq!(ModelSpec::from_json(&spec.to_json()).expect("written spec parses"), spec);
    }
});
