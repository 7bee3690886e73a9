//! Small numeric helpers shared across the crate.

/// Kahan compensated accumulator. Quadratures and Monte-Carlo reductions run
/// in a fixed order, so results are reproducible; the compensation keeps the
/// rounding error independent of the number of terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of an iterator.
pub fn ksum(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Kahan::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

/// SplitMix64 finalizer. Used to key deterministic per-(seed, mode, step)
/// streams and to generate reproducible test fields without pulling in an
/// RNG dependency.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a word into a hash state.
#[inline]
pub fn mix64(state: u64, word: u64) -> u64 {
    splitmix64(state ^ word.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Map a u64 to the open interval (0, 1); never returns 0 or 1, so it is
/// safe under `ln`. Uses 52 bits so the offset stays exactly representable.
#[inline]
pub fn unit_open(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Tiny deterministic generator for test data and jittered mode placement.
#[derive(Clone, Debug)]
pub struct SmallRng {
    state: u64,
}

impl SmallRng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: splitmix64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = splitmix64(self.state);
        self.state
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = unit_open(self.next_u64());
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
