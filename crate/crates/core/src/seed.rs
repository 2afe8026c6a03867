//! Seed derivation: one global seed fans out to stable per-module streams.

/// Derive a module seed from the global seed by FNV-1a hashing of the seed
/// bytes and the module name. Stable across platforms and releases, unlike
/// the std hasher.
pub fn derive_seed(global: u64, module: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in global.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    for b in module.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}
