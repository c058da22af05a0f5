//! Deterministic RNG substreams.
//!
//! Work is cut into fixed blocks of gates; each block draws from its own
//! ChaCha8 stream keyed by `(seed, domain, block)`. The block size does not
//! depend on the thread count, so parallel and serial runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Gates per RNG block.
pub const BLOCK_GATES: u64 = 65_536;

/// Substream domains, one per stochastic stage.
pub mod domain {
    pub const SOURCE: u64 = 1;
    pub const ROUTE: u64 = 2;
    pub const DETECT: u64 = 3;
    pub const SCAN: u64 = 4;
}

pub fn substream(seed: u64, domain: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(block);
    rng
}

/// Run `f(block, first_gate, n)` over every block of `n_gates` in parallel and
/// concatenate the per-block outputs in gate order.
pub(crate) fn par_blocks<T, F>(n_gates: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64, u64) -> Vec<T> + Sync,
{
    let blocks = n_gates.div_ceil(BLOCK_GATES);
    let parts: Vec<Vec<T>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let first = b * BLOCK_GATES;
            f(b, first, BLOCK_GATES.min(n_gates - first))
        })
        .collect();
    parts.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = substream(7, domain::SOURCE, 0).random();
        let b: u64 = substream(7, domain::SOURCE, 1).random();
        let c: u64 = substream(7, domain::DETECT, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, substream(7, domain::SOURCE, 0).random::<u64>());
    }

    #[test]
    fn blocks_cover_all_gates_in_order() {
        let out = par_blocks(3 * BLOCK_GATES + 5, |_, first, n| (first..first + n).collect());
        assert_eq!(out.len() as u64, 3 * BLOCK_GATES + 5);
        assert!(out.windows(2).all(|w| w[1] == w[0] + 1));
    }
}
