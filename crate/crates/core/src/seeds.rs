//! Named sub-streams from a single root seed.
//!
//! Everything random in a run (cloud coordinates, seeded tie breaks, seeded
//! orthogonal draws, trial sweeps) derives its generator seed from one root
//! via a label and indices. Streams are therefore independent of iteration
//! order and stable across processes and platforms.

/// splitmix64 finalizer; good avalanche for cheap seed derivation.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `root`, a stream label, and indices.
///
/// `derive(s, "cloud", &[i])` and `derive(s, "tie", &[t, p])` never collide
/// for distinct labels or indices except by 64-bit accident.
pub fn derive(root: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = mix(root ^ 0x6d79_6f70_6963_5f73); // constant domain separator
    for &b in label.as_bytes() {
        h = mix(h ^ u64::from(b));
    }
    for &i in indices {
        h = mix(h ^ i);
    }
    h
}
