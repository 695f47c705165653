//! Deterministic pseudo-randomness built on SplitMix64.
//!
//! Reproducibility across runs and platforms is a hard requirement for both
//! circuit generation and stochastic path search, so this module avoids
//! floating point in state updates and derives every stream from explicit
//! integer seeds. The generator is the SplitMix64 sequence of Steele,
//! Lea and Flood; `mix` is its output finalizer used as a hash.

/// SplitMix64 output finalizer: a bijective 64-bit mix.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash three seed components into one word, used for keyed sub-streams
/// such as (seed, layer, qubit) rotation angles.
pub fn mix3(a: u64, b: u64, c: u64) -> u64 {
    mix(mix(mix(a).wrapping_add(b)).wrapping_add(c))
}

/// Map 64 random bits to a double in `[0, 1)` using the top 53 bits.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform integer in `[0, bound)` by rejection-free modulo; bias is
    /// negligible for the small bounds used here.
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// Standard Gumbel(0, 1) sample, used for perturbed-score sampling.
    pub fn next_gumbel(&mut self) -> f64 {
        // Keep u strictly inside (0, 1) so both logs are finite.
        let u = self.next_f64().max(f64::MIN_POSITIVE);
        -(-(u.ln())).ln()
    }
}
