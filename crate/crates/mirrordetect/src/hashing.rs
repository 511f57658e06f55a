//! Stable hashes used across the pipeline.
//!
//! All hashing here must stay fixed forever: feature indices, dedup keys,
//! and derived seeds are persisted in artifacts, so we use FNV-1a with the
//! published parameters instead of `std`'s randomized hasher.

/// FNV-1a, 64-bit. Used for feature hashing and seed derivation.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// FNV-1a, 128-bit. Used as the content hash for exact dedup.
pub fn fnv1a_128(bytes: &[u8]) -> u128 {
    let mut h: u128 = 0x6c62272e07bb014262b821756295c58d;
    for &b in bytes {
        h ^= u128::from(b);
        h = h.wrapping_mul(0x0000000001000000000000000000013b);
    }
    h
}

/// splitmix64 finalizer; decorrelates derived seeds.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derive an independent seed from a root seed, a purpose tag, and an index.
///
/// Each (tag, index) pair gets its own RNG stream, so resuming a run at
/// round k reproduces exactly the stream an uninterrupted run would use.
pub fn derive_seed(root: u64, tag: &str, index: u64) -> u64 {
    splitmix64(root ^ fnv1a_64(tag.as_bytes()).rotate_left(17) ^ splitmix64(index))
}
