use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator behind every Monte Carlo draw.
pub type SimRng = ChaCha12Rng;

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream for one realization.
///
/// The 256-bit ChaCha key is four successive SplitMix64 outputs seeded by
/// `master_seed` mixed with `fold`; the realization index selects the
/// 64-bit ChaCha stream under that key. Sweeps pass the axis-value index
/// as `fold` when the axis changes the channel law, and 0 otherwise.
pub fn realization_rng(master_seed: u64, fold: u64, realization: u64) -> SimRng {
    let mut state = master_seed ^ splitmix64(fold.wrapping_add(0x5851_f42d_4c95_7f2d));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = SimRng::from_seed(key);
    rng.set_stream(realization);
    rng
}
