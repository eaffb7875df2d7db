//! Seeded permutations from a 64-bit multiplicative congruential generator.
//!
//! The generator and the Fisher-Yates walk are fixed here so that a given
//! seed yields the same order on every platform and toolchain.

const MULTIPLIER: u64 = 0xd134_2543_de82_ef95;

#[derive(Debug, Clone)]
pub struct Mcg64 {
    state: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Mcg64 {
    pub fn new(seed: u64) -> Self {
        // MCG state must be odd
        Self {
            state: splitmix64(seed) | 1,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER);
        self.state
    }

    /// Uniform-ish value in `0..bound` from the high bits.
    pub fn below(&mut self, bound: usize) -> usize {
        ((u128::from(self.next_u64()) * bound as u128) >> 64) as usize
    }
}

/// A permutation of `0..n` determined by `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Mcg64::new(seed);
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        order.swap(i, j);
    }
    order
}
