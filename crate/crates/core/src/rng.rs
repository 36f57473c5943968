//! Counter-based hashing used wherever a reproducible random draw is keyed
//! by coordinates instead of drawn from sequential generator state. Keyed
//! draws make results independent of enumeration order and worker count.

/// SplitMix64 finalizer; full-avalanche mixing of a 64-bit word.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a seed plus three coordinates into one well-mixed 64-bit value.
#[inline]
pub(crate) fn hash3(seed: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    h
}

/// Map a hash to a double in `[0, 1)` using the top 53 bits.
#[inline]
pub(crate) fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}
