//! Seeded pseudo-random numbers for the verification suites.
//!
//! Reproducibility of every randomized check matters more than statistical
//! sophistication here, so the generator is SplitMix64 (Steele, Lea &
//! Flood, "Fast splittable pseudorandom number generators", OOPSLA 2014):
//! 64 bits of state, one additive constant, two xor-shift-multiply mixing
//! steps. The whole algorithm is below, so a failing probe can be replayed
//! in any language from just the seed.

/// SplitMix64 generator. State advances by the golden-ratio increment; the
/// output is the mixed state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits scaled by 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn vector(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }
}

/// Generator for the `index`-th probe of a check. Derivation is pure
/// arithmetic on the seed, so probes can be evaluated in any order (or in
/// parallel) without changing their inputs.
pub fn probe_rng(seed: u64, index: u64) -> SplitMix64 {
    let mut boot = SplitMix64::new(seed ^ index.wrapping_mul(0xA24B_AED4_963E_E407));
    let s = boot.next_u64();
    SplitMix64::new(s)
}

/// FNV-1a hash of a name, used to give every named check its own stream.
pub fn salt(name: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
