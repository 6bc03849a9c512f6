#![no_main]

use landslide_gam::ingest::read_centroids;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_centroids(data);
});
