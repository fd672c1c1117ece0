//! Fixtures shared by the benchmarks.

use mvdfq_core::{fit_uniform_quantizer, synth, DiscreteSequence, Result, SynthParams};

/// `sequences` synthetic sequences of `dims` dimensions and `length` steps,
/// quantized into `bins` uniform bins per dimension.
pub fn discrete_fixture(
    sequences: usize,
    dims: usize,
    length: usize,
    bins: u32,
    seed: u64,
) -> Result<Vec<DiscreteSequence>> {
    let data = synth::generate(&SynthParams {
        classes: 2,
        per_class: sequences.div_ceil(2),
        dims,
        length,
        seed,
    })?;
    let data = &data[..sequences];
    let q = fit_uniform_quantizer(data, bins)?;
    data.iter().map(|s| q.apply(s)).collect()
}
