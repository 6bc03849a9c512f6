#![no_main]

use landslide_gam::simulate::SusceptibilitySummary;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = SusceptibilitySummary::read_csv("fuzz", data) {
        assert_eq!(s.mean.len(), s.su_ids.len());
    }
});
