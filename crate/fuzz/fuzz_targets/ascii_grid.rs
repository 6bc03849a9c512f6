#![no_main]

use landslide_gam::ingest::parse_ascii_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_ascii_grid(text) {
        // serialization is a fixed point of parsing
        let again = parse_ascii_grid(&grid.to_ascii()).expect("serialized grid parses");
        assert_eq!(again.to_ascii(), grid.to_ascii());
    }
});
