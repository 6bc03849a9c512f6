#![no_main]

use landslide_gam::ingest::{parse_shakemap_grid, write_shakemap_grid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(xml) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_shakemap_grid(xml) {
        assert_eq!(grid.values.len(), grid.ncols() * grid.nrows());
        let _ = parse_shakemap_grid(&write_shakemap_grid(&grid, "fuzz"));
    }
});
