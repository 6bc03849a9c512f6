#![no_main]

use landslide_gam::inference::{PosteriorSamples, SamplerMeta};
use libfuzzer_sys::fuzz_target;

// input: sampler sidecar JSON, a NUL byte, then the draws CSV
fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else { return };
    let Ok(meta) = serde_json::from_slice::<SamplerMeta>(&data[..split]) else { return };
    if let Ok(s) = PosteriorSamples::read_csv(&data[split + 1..], meta) {
        assert_eq!(s.meta.chain_lengths.iter().sum::<usize>(), s.n_draws());
    }
});
