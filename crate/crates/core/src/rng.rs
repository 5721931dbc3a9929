//! Per-sample random streams.
//!
//! Every Monte Carlo sample owns one [`RngStream`]: a 64-bit Mersenne Twister
//! seeded from `(root_seed, stream_id)` through a fixed splitmix64 mix, so the
//! draw sequence of sample `k` does not depend on which worker runs it.

const NN: usize = 312;
const MM: usize = 156;
const MATRIX_A: u64 = 0xB502_6F5A_A966_19E9;
const UPPER_MASK: u64 = 0xFFFF_FFFF_8000_0000;
const LOWER_MASK: u64 = 0x7FFF_FFFF;

/// Source of raw 64-bit draws consumed by the stochastic backends.
pub trait RandomSource {
    fn next_u64(&mut self) -> u64;

    /// Uniform value in `[-1/2, 1/2)` with 53-bit granularity.
    #[inline]
    fn next_unit_centered(&mut self) -> f64 {
        unit_centered(self.next_u64())
    }
}

/// `((raw >> 11) * 2^-53) - 1/2`. Exact in binary64.
#[inline]
pub fn unit_centered(raw: u64) -> f64 {
    (raw >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5
}

/// The splitmix64 output function applied to `x + golden`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed actually fed to the Mersenne Twister for a stream.
#[inline]
pub fn derive_seed(root_seed: u64, stream_id: u64) -> u64 {
    splitmix64(root_seed ^ splitmix64(stream_id))
}

/// MT19937-64 generator.
#[derive(Clone)]
pub struct Mt19937_64 {
    mt: Box<[u64; NN]>,
    mti: usize,
}

impl Mt19937_64 {
    pub fn new(seed: u64) -> Self {
        let mut mt = Box::new([0u64; NN]);
        mt[0] = seed;
        for i in 1..NN {
            mt[i] = 6_364_136_223_846_793_005u64
                .wrapping_mul(mt[i - 1] ^ (mt[i - 1] >> 62))
                .wrapping_add(i as u64);
        }
        Self { mt, mti: NN }
    }

    fn twist(&mut self) {
        let mt = &mut self.mt;
        let mag = |x: u64| if x & 1 == 0 { 0 } else { MATRIX_A };
        for i in 0..NN - MM {
            let x = (mt[i] & UPPER_MASK) | (mt[i + 1] & LOWER_MASK);
            mt[i] = mt[i + MM] ^ (x >> 1) ^ mag(x);
        }
        for i in NN - MM..NN - 1 {
            let x = (mt[i] & UPPER_MASK) | (mt[i + 1] & LOWER_MASK);
            mt[i] = mt[i + MM - NN] ^ (x >> 1) ^ mag(x);
        }
        let x = (mt[NN - 1] & UPPER_MASK) | (mt[0] & LOWER_MASK);
        mt[NN - 1] = mt[MM - 1] ^ (x >> 1) ^ mag(x);
        self.mti = 0;
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.mti >= NN {
            self.twist();
        }
        let mut x = self.mt[self.mti];
        self.mti += 1;
        x ^= (x >> 29) & 0x5555_5555_5555_5555;
        x ^= (x << 17) & 0x71D6_7FFF_EDA6_0000;
        x ^= (x << 37) & 0xFFF7_EEE0_0000_0000;
        x ^= x >> 43;
        x
    }
}

impl std::fmt::Debug for Mt19937_64 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mt19937_64").field("mti", &self.mti).finish_non_exhaustive()
    }
}

/// Random stream of one Monte Carlo sample.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: Mt19937_64,
    stream_id: u64,
    root_seed: u64,
}

impl RngStream {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        Self {
            state: Mt19937_64::new(derive_seed(root_seed, stream_id)),
            stream_id,
            root_seed,
        }
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }
}

impl RandomSource for RngStream {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state.next_u64()
    }
}

/// A source that always returns the same raw word. `ConstantSource::zero_xi()`
/// makes every centered draw exactly 0, which turns all MCA modes into plain
/// round-to-nearest arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSource(pub u64);

impl ConstantSource {
    pub const fn zero_xi() -> Self {
        ConstantSource(1 << 63)
    }
}

impl RandomSource for ConstantSource {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0
    }
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }
}
