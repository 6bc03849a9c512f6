#![no_main]

use landslide_gam::ingest::read_scenario_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((ids, pga)) = read_scenario_csv(data) {
        assert_eq!(ids.len(), pga.len());
    }
});
