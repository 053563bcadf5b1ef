//! Deterministic keyed streams.
//!
//! Every process/channel pair owns one [`Stream`] seeded by its subkey. The
//! generator is SplitMix64; bounded draws use rejection sampling so that
//! [`keyed_permutation`] realizes each of the `L!` orders with equal
//! probability. Not a cryptographic generator.

/// SplitMix64 state plus a count of values emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    state: u64,
    draws: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            draws: 0,
        }
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        self.draws += 1;
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound`. Draws at or above the largest multiple
    /// of `bound` below 2^64 are rejected.
    ///
    /// # Panics
    ///
    /// If `bound` is zero.
    pub fn next_bounded(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let limit = (1u128 << 64) / bound as u128 * bound as u128;
        loop {
            let v = self.next_u64();
            if (v as u128) < limit {
                return v % bound;
            }
        }
    }
}

impl Iterator for Stream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.next_u64())
    }
}

/// Fisher-Yates permutation of `0..len` driven by `seed`. Consumes exactly
/// `len - 1` bounded draws.
pub fn keyed_permutation(seed: u64, len: usize) -> Vec<usize> {
    let mut stream = Stream::new(seed);
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = stream.next_bounded(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

/// `inv[perm[i]] = i`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}
