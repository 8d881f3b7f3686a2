//! Seeded, portable random number generation.
//!
//! Corrupted datasets must be byte-identical across platforms and runs, so
//! nothing here uses the platform RNG. The generator is xoshiro256**
//! (Blackman & Vigna), seeded by expanding a 64-bit seed with the
//! splitmix64 finalizer. Child streams are derived from `(seed, tag)` with
//! the same finalizer, which makes per-image streams independent of
//! processing order.
//!
//! Draw conventions (all documented because tests replay them):
//! - `uniform` maps the top 53 bits of one `next_u64` into `[0, 1)`.
//! - `normal` is one Box–Muller cosine draw (two `next_u64` per call).
//! - `uniform_int` is the multiply-shift range map of one `next_u64`.
//! - `poisson` uses CDF inversion for mean <= 30 and a rounded normal
//!   approximation above.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output finalizer; also used to mix tags into seeds.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic 64-bit stream with order-independent child derivation.
#[derive(Debug, Clone)]
pub struct SeededRng {
    state: [u64; 4],
    seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        // splitmix64 expansion of the seed into the xoshiro state; an
        // all-zero state is impossible because mix64 of distinct inputs
        // cannot all be zero.
        let mut s = seed;
        let mut state = [0u64; 4];
        for slot in &mut state {
            s = s.wrapping_add(GOLDEN_GAMMA);
            *slot = mix64(s);
        }
        SeededRng { state, seed }
    }

    /// The seed this stream was constructed with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for `(seed, tag)`. Deriving the same tag
    /// twice yields the same stream; distinct tags yield unrelated streams.
    pub fn derive(&self, tag: u64) -> SeededRng {
        SeededRng::new(mix64(self.seed ^ mix64(tag.wrapping_add(GOLDEN_GAMMA))))
    }

    /// Child stream keyed by a string tag (FNV-1a 64 over the UTF-8 bytes).
    pub fn derive_str(&self, tag: &str) -> SeededRng {
        self.derive(fnv1a64(tag.as_bytes()))
    }

    /// xoshiro256** next value.
    pub fn next_u64(&mut self) -> u64 {
        let result = self.state[1]
            .wrapping_mul(5)
            .rotate_left(7)
            .wrapping_mul(9);
        let t = self.state[1] << 17;
        self.state[2] ^= self.state[0];
        self.state[3] ^= self.state[1];
        self.state[1] ^= self.state[2];
        self.state[0] ^= self.state[3];
        self.state[2] ^= t;
        self.state[3] = self.state[3].rotate_left(45);
        result
    }

    /// Uniform draw in `[lo, hi)`; `lo == hi` returns `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi, "uniform requires lo <= hi");
        let u = (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0); // 2^-53
        lo + u * (hi - lo)
    }

    /// Normal draw via Box–Muller (cosine branch). `std == 0` returns `mean`.
    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        debug_assert!(std >= 0.0, "normal requires std >= 0");
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        mean + std * z
    }

    /// Uniform integer in `[lo, hi]` inclusive, by multiply-shift.
    pub fn uniform_int(&mut self, lo: u32, hi: u32) -> u32 {
        debug_assert!(lo <= hi, "uniform_int requires lo <= hi");
        let range = (hi - lo) as u64 + 1;
        lo + (((self.next_u64() as u128 * range as u128) >> 64) as u64) as u32
    }

    /// True with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform(0.0, 1.0) < p
    }

    /// Poisson draw. CDF inversion below mean 30, rounded normal above.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0, "poisson requires mean >= 0");
        if mean <= 0.0 {
            return 0;
        }
        if mean <= 30.0 {
            let u = self.uniform(0.0, 1.0);
            let mut k = 0u64;
            let mut p = (-mean).exp();
            let mut cdf = p;
            // The loop bound guards against u landing in the tiny tail mass
            // beyond the accumulated CDF.
            while u > cdf && k < 1024 {
                k += 1;
                p *= mean / k as f64;
                cdf += p;
            }
            k
        } else {
            let draw = self.normal(mean, mean.sqrt()).round();
            if draw < 0.0 {
                0
            } else {
                draw as u64
            }
        }
    }
}

/// FNV-1a 64-bit hash, used only for string-tag stream derivation.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
