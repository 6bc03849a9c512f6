#![no_main]

use landslide_gam::ingest::SlopeUnitTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = SlopeUnitTable::read_csv(data) {
        assert!(table.labels().iter().all(|&y| y <= 1));
        let mut out = Vec::new();
        table.write_csv(&mut out).expect("in-memory write");
        let again = SlopeUnitTable::read_csv(out.as_slice()).expect("written table parses");
        assert_eq!(again.su_ids(), table.su_ids());
    }
});
