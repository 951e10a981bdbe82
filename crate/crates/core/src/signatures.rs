//! Key signatures and the hash families derived from them.
//!
//! Every key is reduced to a 128-bit [`Signature`] computed with XXH3-128
//! (seeded). The upper 64 bits choose the bucket by fixed-point
//! multiplication; the lower 64 bits drive every split and bijection search
//! inside the bucket.
//!
//! The function family used by the searches is
//!
//! ```text
//! phi(sig_lo, j) = mix(sig_lo + j * 0x9E3779B97F4A7C15)
//! ```
//!
//! i.e. the `j`-th output of a SplitMix64 stream seeded with `sig_lo`,
//! reduced into `[0, range)` by taking the high 64 bits of `phi * range`.
//! Both the hash and the mixer are part of the serialized format.

use xxhash_rust::xxh3::xxh3_128_with_seed;

/// SplitMix64 increment (2^64 / golden ratio).
pub(crate) const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 128-bit key signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Signature {
    /// Bucket selector.
    pub hi: u64,
    /// Input to the in-bucket function family.
    pub lo: u64,
}

impl Signature {
    pub const fn new(hi: u64, lo: u64) -> Self {
        Self { hi, lo }
    }

    /// The signature as one integer, `hi` in the upper half. Sorting by this
    /// value sorts by bucket.
    #[inline]
    pub const fn as_u128(self) -> u128 {
        (self.hi as u128) << 64 | self.lo as u128
    }

    #[inline]
    pub const fn from_u128(v: u128) -> Self {
        Self {
            hi: (v >> 64) as u64,
            lo: v as u64,
        }
    }
}

/// Hashes `key` to its signature under `seed`.
#[inline]
pub fn sign(key: &[u8], seed: u64) -> Signature {
    Signature::from_u128(xxh3_128_with_seed(key, seed))
}

/// Fixed-point inversion: `floor(hi * nbuckets / 2^64)`.
#[inline]
pub fn bucket_of(sig: Signature, nbuckets: usize) -> usize {
    debug_assert!(nbuckets >= 1);
    ((sig.hi as u128 * nbuckets as u128) >> 64) as usize
}

/// SplitMix64 finalizer.
#[inline]
pub const fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Evaluates function number `func_index` of the family on `sig_lo`,
/// reduced into `[0, range)`.
#[inline]
pub fn remap(sig_lo: u64, func_index: u64, range: usize) -> usize {
    let x = mix(sig_lo.wrapping_add(func_index.wrapping_mul(GOLDEN_GAMMA)));
    ((x as u128 * range as u128) >> 64) as usize
}

/// First function index searched by a node at `depth` in a splitting tree.
///
/// Each depth owns a disjoint window of 2^32 indices, so a node never reuses
/// a function already searched by one of its ancestors.
#[inline]
pub const fn depth_base(depth: usize) -> u64 {
    (depth as u64) << 32
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn sign_is_deterministic_and_seed_sensitive() {
        for key in [&b""[..], b"a", b"hello world", &[0u8; 100]] {
            assert_eq!(sign(key, 42), sign(key, 42));
            assert_ne!(sign(key, 1), sign(key, 2));
        }
    }

    #[test]
    fn signature_bits_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0u32; 128];
        let samples = 1_000_000;
        for _ in 0..samples {
            let key: [u8; 16] = rng.gen();
            let v = sign(&key, 0x5eed).as_u128();
            for (bit, c) in counts.iter_mut().enumerate() {
                *c += (v >> bit & 1) as u32;
            }
        }
        for (bit, &c) in counts.iter().enumerate() {
            let freq = c as f64 / samples as f64;
            assert!((freq - 0.5).abs() <= 0.01, "bit {bit} set with frequency {freq}");
        }
    }

    #[test]
    fn bucket_of_edge_values() {
        assert_eq!(bucket_of(Signature::new(0, 0), 100), 0);
        assert_eq!(bucket_of(Signature::new(u64::MAX, 0), 100), 99);
        assert_eq!(bucket_of(Signature::new(1 << 63, 0), 100), 50);
        assert_eq!(bucket_of(Signature::new(u64::MAX, 0), 1), 0);
    }

    #[test]
    fn bucket_of_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let (a, b): (u64, u64) = rng.gen();
            let (lo, hi) = (a.min(b), a.max(b));
            let n = rng.gen_range(1..1_000_000usize);
            assert!(bucket_of(Signature::new(lo, 0), n) <= bucket_of(Signature::new(hi, 0), n));
        }
    }

    #[test]
    fn remap_range_one_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(remap(rng.gen(), rng.gen(), 1), 0);
        }
    }

    #[test]
    fn remap_is_deterministic() {
        assert_eq!(remap(12345, 7, 13), remap(12345, 7, 13));
    }

    #[test]
    fn remap_chi_square_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let range = 16;
        let samples = 1_000_000;
        let mut counts = [0u64; 16];
        for i in 0..samples {
            // Mix of fresh keys and successive function indices on one key.
            let lo: u64 = rng.gen();
            counts[remap(lo, i % 1000, range)] += 1;
        }
        let expected = samples as f64 / range as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let critical = ChiSquared::new((range - 1) as f64).unwrap().inverse_cdf(0.999);
        assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
    }

    #[test]
    fn successive_functions_look_independent() {
        // For a fixed key, values under consecutive indices should be
        // uncorrelated: the joint distribution over a 4x4 grid is uniform.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut grid = [0u64; 16];
        let samples = 200_000;
        for _ in 0..samples {
            let lo: u64 = rng.gen();
            let j: u64 = rng.gen_range(0..1 << 20);
            grid[remap(lo, j, 4) * 4 + remap(lo, j + 1, 4)] += 1;
        }
        let expected = samples as f64 / 16.0;
        let chi2: f64 = grid.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(0.999);
        assert!(chi2 < critical, "chi2 {chi2}");
    }
}
