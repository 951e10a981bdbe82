//! Lookup: signature, bucket, descent to a leaf, bijection value.

use crate::builder::{self, BuildConfig};
use crate::eliasfano::DoubleEliasFano;
use crate::ricecodec::{RiceBitVector, RiceReader};
use crate::signatures::{bucket_of, depth_base, remap, sign, Signature};
use crate::strategy::SplitStrategy;
use crate::Result;

/// An immutable minimal perfect hash function.
///
/// Lookups of keys that were not in the construction set return arbitrary
/// values in `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecSplit {
    leaf_size: usize,
    bucket_size: usize,
    seed: u64,
    n: u64,
    n_buckets: usize,
    strategy: SplitStrategy,
    ef: DoubleEliasFano,
    trees: RiceBitVector,
}

/// Where a descent ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Descent {
    /// Keys of the bucket placed left of the leaf.
    pub offset: usize,
    pub leaf_size: usize,
    /// Bijection index of the leaf (0 for a leaf of one key).
    pub leaf_index: u64,
    pub depth: usize,
    /// Codes decoded on the way, leaf included.
    pub codes_read: usize,
}

/// Position of one bucket in the structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BucketInfo {
    pub first_rank: u64,
    pub size: usize,
    pub bit_offset: usize,
}

impl RecSplit {
    /// Builds over `keys`; see [`builder::build`].
    pub fn build<K: AsRef<[u8]> + Sync>(keys: &[K], config: &BuildConfig) -> Result<Self> {
        builder::build(keys, config)
    }

    pub(crate) fn from_parts(
        leaf_size: usize,
        bucket_size: usize,
        seed: u64,
        n: u64,
        strategy: SplitStrategy,
        ef: DoubleEliasFano,
        trees: RiceBitVector,
    ) -> Self {
        Self {
            leaf_size,
            bucket_size,
            seed,
            n,
            n_buckets: ef.len() - 1,
            strategy,
            ef,
            trees,
        }
    }

    /// Rank of `key`. An empty structure answers 0.
    #[inline]
    pub fn lookup<K: AsRef<[u8]> + ?Sized>(&self, key: &K) -> usize {
        self.lookup_signature(sign(key.as_ref(), self.seed))
    }

    #[inline]
    pub fn lookup_signature(&self, sig: Signature) -> usize {
        if self.n == 0 {
            return 0;
        }
        let bucket = bucket_of(sig, self.n_buckets);
        let (first, next, offset) = self.ef.get_pair(bucket);
        let m = (next - first) as usize;
        if m == 0 {
            // Only reachable for keys outside the set.
            return first.min(self.n - 1) as usize;
        }
        let mut reader = self.trees.reader(offset as usize, self.strategy.skip_info(m).0);
        first as usize + self.descend(&mut reader, sig.lo, m).rank(sig.lo)
    }

    /// See [`descend`].
    #[inline]
    pub fn descend(&self, reader: &mut RiceReader<'_>, sig_lo: u64, m: usize) -> Descent {
        descend(&self.strategy, reader, sig_lo, m)
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn beta(&self) -> u64 {
        self.ef.beta()
    }

    pub fn bucket_count(&self) -> usize {
        self.n_buckets
    }

    pub fn bucket(&self, i: usize) -> BucketInfo {
        let (first, next, offset) = self.ef.get_pair(i);
        BucketInfo {
            first_rank: first,
            size: (next - first) as usize,
            bit_offset: offset as usize,
        }
    }

    pub fn strategy(&self) -> &SplitStrategy {
        &self.strategy
    }

    pub fn elias_fano(&self) -> &DoubleEliasFano {
        &self.ef
    }

    pub fn trees(&self) -> &RiceBitVector {
        &self.trees
    }

    /// Bits in the fixed parts of all codes.
    pub fn fixed_bits(&self) -> usize {
        (0..self.n_buckets)
            .map(|i| self.strategy.skip_info(self.bucket(i).size).0)
            .sum()
    }

    /// Bits in the unary parts of all codes.
    pub fn unary_bits(&self) -> usize {
        self.trees.len() - self.fixed_bits()
    }

    /// Serialized size excluding the fixed header, per key.
    pub fn bits_per_key(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.serialized_len() - crate::format::HEADER_LEN) as f64 * 8.0 / self.n as f64
    }

    /// Serialized size including the header, per key.
    pub fn bits_per_key_with_header(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.serialized_len() as f64 * 8.0 / self.n as f64
    }
}

/// Walks the tree of a bucket of `m >= 1` keys from the reader's current
/// node down to the leaf containing `sig_lo`, skipping the subtrees of the
/// parts to its left.
#[inline]
pub fn descend(strategy: &SplitStrategy, reader: &mut RiceReader<'_>, sig_lo: u64, m: usize) -> Descent {
    let leaf = strategy.leaf_size();
    let mut m = m;
    let mut offset = 0;
    let mut depth = 0;
    let mut codes_read = 0;
    while m > leaf {
        let (fanout, unit, last) = strategy.shape(m);
        let index = reader.read_next(strategy.split_rice(m));
        codes_read += 1;
        let part = remap(sig_lo, depth_base(depth) + index, m) / unit;
        if part > 0 {
            let (fixed, nodes) = strategy.skip_info(unit);
            reader.skip_subtree(part * fixed, part * nodes);
            offset += part * unit;
        }
        m = if part + 1 == fanout { last } else { unit };
        depth += 1;
    }
    let leaf_index = if m > 1 {
        codes_read += 1;
        reader.read_next(strategy.leaf_rice(m))
    } else {
        0
    };
    Descent {
        offset,
        leaf_size: m,
        leaf_index,
        depth,
        codes_read,
    }
}

impl Descent {
    /// Bucket-local rank of the key whose low signature half is `sig_lo`.
    #[inline]
    pub fn rank(&self, sig_lo: u64) -> usize {
        self.offset + remap(sig_lo, depth_base(self.depth) + self.leaf_index, self.leaf_size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("k{i}")).collect()
    }

    fn assert_permutation(mphf: &RecSplit, keys: &[String]) {
        let mut seen = vec![false; keys.len()];
        for k in keys {
            let r = mphf.lookup(k);
            assert!(r < keys.len() && !seen[r], "rank {r}");
            seen[r] = true;
        }
    }

    #[test]
    fn empty_and_single() {
        let empty = RecSplit::build(&keys(0), &BuildConfig::new(8, 100)).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.lookup("anything"), 0);
        let one = RecSplit::build(&keys(1), &BuildConfig::new(8, 100)).unwrap();
        assert_eq!(one.lookup("k0"), 0);
        assert_eq!(one.lookup("other"), 0);
    }

    #[test]
    fn permutation_small_configs() {
        for (leaf, bucket) in [(1, 1), (2, 5), (5, 5), (8, 100), (12, 9), (3, 1000)] {
            for n in [2, 3, 17, 100, 2500] {
                let k = keys(n);
                let mphf = RecSplit::build(&k, &BuildConfig::new(leaf, bucket)).unwrap();
                assert_permutation(&mphf, &k);
            }
        }
    }

    #[test]
    fn ranks_stay_in_bucket() {
        let k = keys(5000);
        let mphf = RecSplit::build(&k, &BuildConfig::new(6, 50)).unwrap();
        for key in &k {
            let sig = sign(key.as_bytes(), mphf.seed());
            let b = mphf.bucket(bucket_of(sig, mphf.bucket_count()));
            let r = mphf.lookup(key) as u64;
            assert!(r >= b.first_rank && r < b.first_rank + b.size as u64);
        }
    }

    #[test]
    fn non_members_in_range() {
        let k = keys(3000);
        let mphf = RecSplit::build(&k, &BuildConfig::new(8, 100)).unwrap();
        for i in 0..10_000 {
            assert!(mphf.lookup(&format!("absent{i}")) < k.len());
        }
        // Tiny buckets leave many of them empty.
        let sparse = RecSplit::build(&keys(10), &BuildConfig::new(2, 1)).unwrap();
        for i in 0..1000 {
            assert!(sparse.lookup(&format!("absent{i}")) < 10);
        }
    }

    #[test]
    fn decode_count_bounded_by_depth() {
        let k = keys(20_000);
        let mphf = RecSplit::build(&k, &BuildConfig::new(5, 500)).unwrap();
        for key in &k {
            let sig = sign(key.as_bytes(), mphf.seed());
            let b = mphf.bucket(bucket_of(sig, mphf.bucket_count()));
            let s = mphf.strategy();
            let mut reader = mphf.trees().reader(b.bit_offset, s.skip_info(b.size).0);
            let d = mphf.descend(&mut reader, sig.lo, b.size);
            assert!(d.codes_read <= s.depth(b.size) + 1);
            assert!(d.offset + d.leaf_size <= b.size);
        }
    }

    #[test]
    fn seeds_give_different_structures() {
        let k = keys(1000);
        let a = RecSplit::build(&k, &BuildConfig::new(8, 100).with_seed(1)).unwrap();
        let b = RecSplit::build(&k, &BuildConfig::new(8, 100).with_seed(2)).unwrap();
        assert_ne!(a.trees(), b.trees());
        assert_permutation(&b, &k);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let k = keys(20_000);
        let a = RecSplit::build(&k, &BuildConfig::new(8, 100).with_threads(1)).unwrap();
        let b = RecSplit::build(&k, &BuildConfig::new(8, 100).with_threads(3)).unwrap();
        assert_eq!(a, b);
    }
}
