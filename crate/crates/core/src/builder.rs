//! Construction: bucket the signatures, then search splittings and leaf
//! bijections bucket by bucket.

use rayon::prelude::*;

use crate::eliasfano::{DoubleEliasFano, BETA_FRAC_BITS};
use crate::evaluator::RecSplit;
use crate::ricecodec::{RiceBuilder, RiceCode};
use crate::signatures::{bucket_of, depth_base, remap, sign, Signature};
use crate::strategy::{table_size, SplitStrategy, MAX_FANOUT, MAX_LEAF_SIZE};
use crate::{Error, Result};

/// Default bound on the index of any single search.
pub const DEFAULT_MAX_SEARCH_INDEX: u64 = 1 << 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    /// Largest set on which a bijection is searched directly (1..=24).
    pub leaf_size: usize,
    /// Expected number of keys per bucket.
    pub bucket_size: usize,
    pub seed: u64,
    /// A search reaching this index aborts the build.
    pub max_search_index: u64,
    pub threads: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            leaf_size: 8,
            bucket_size: 100,
            seed: 0,
            max_search_index: DEFAULT_MAX_SEARCH_INDEX,
            threads: default_threads(),
        }
    }
}

impl BuildConfig {
    pub fn new(leaf_size: usize, bucket_size: usize) -> Self {
        Self {
            leaf_size,
            bucket_size,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_max_search_index(mut self, max: u64) -> Self {
        self.max_search_index = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEAF_SIZE).contains(&self.leaf_size) {
            return Err(Error::InvalidConfig(format!(
                "leaf size {} not in 1..={MAX_LEAF_SIZE}",
                self.leaf_size
            )));
        }
        if self.bucket_size == 0 || self.bucket_size > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "bucket size {} not in 1..=2^32-1",
                self.bucket_size
            )));
        }
        if self.max_search_index == 0 || self.max_search_index > 1 << 32 {
            return Err(Error::InvalidConfig("max search index must be in 1..=2^32".into()));
        }
        Ok(())
    }
}

/// `RECSPLIT_THREADS` if set and valid, otherwise the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("RECSPLIT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t: &usize| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// First index `i` at which function `base + i` sends exactly `unit` keys
/// into each of the consecutive intervals `[0, unit)`, `[unit, 2 unit)`, ...
/// of `[0, m)`; the last interval receives the remainder.
pub fn find_split(keys: &[u64], unit: usize, base: u64, max_index: u64) -> Option<u64> {
    let m = keys.len();
    let fanout = m.div_ceil(unit);
    debug_assert!(fanout <= MAX_FANOUT);
    if fanout <= 1 {
        return Some(0);
    }
    #[cfg(target_arch = "x86_64")]
    if m < 1 << 32 && crate::simd::available() {
        // SAFETY: the required CPU features were detected at runtime.
        return unsafe { crate::simd::find_split(keys, unit, base, max_index) };
    }
    find_split_scalar(keys, unit, base, max_index)
}

fn find_split_scalar(keys: &[u64], unit: usize, base: u64, max_index: u64) -> Option<u64> {
    let m = keys.len();
    let fanout = m.div_ceil(unit);
    if fanout == 2 {
        (0..max_index).find(|&i| {
            let f = base + i;
            keys.iter().filter(|&&k| remap(k, f, m) < unit).count() == unit
        })
    } else {
        let div = Divisor::new(unit, m);
        (0..max_index).find(|&i| {
            let f = base + i;
            let mut counts = [0u32; MAX_FANOUT];
            for &k in keys {
                counts[div.apply(remap(k, f, m))] += 1;
            }
            counts[..fanout - 1].iter().all(|&c| c as usize == unit)
        })
    }
}

/// Division by `unit` of values below `m`, by multiplication when both are
/// below 2^16 (then `(v * (floor(2^32 / unit) + 1)) >> 32` is exact).
#[derive(Clone, Copy)]
struct Divisor {
    unit: usize,
    inverse: u64,
}

impl Divisor {
    fn new(unit: usize, m: usize) -> Self {
        let inverse = if unit < 1 << 16 && m <= 1 << 16 { (1u64 << 32) / unit as u64 + 1 } else { 0 };
        Self { unit, inverse }
    }

    #[inline(always)]
    fn apply(self, v: usize) -> usize {
        if self.inverse != 0 {
            ((v as u64 * self.inverse) >> 32) as usize
        } else {
            v / self.unit
        }
    }
}

/// First index `i` at which function `base + i` is injective on `keys`
/// (`keys.len() <= 24`).
pub fn find_bijection(keys: &[u64], base: u64, max_index: u64) -> Option<u64> {
    let m = keys.len();
    debug_assert!(m <= 32);
    if m <= 1 {
        return Some(0);
    }
    #[cfg(target_arch = "x86_64")]
    if crate::simd::available() {
        // SAFETY: the required CPU features were detected at runtime.
        return unsafe { crate::simd::find_bijection(keys, base, max_index) };
    }
    find_bijection_scalar(keys, base, max_index)
}

fn find_bijection_scalar(keys: &[u64], base: u64, max_index: u64) -> Option<u64> {
    let m = keys.len();
    let full = (1u32 << m) - 1;
    // No early exit on collisions: a branch-free pass over all keys is
    // faster than mispredicting once per trial.
    (0..max_index).find(|&i| {
        let f = base + i;
        keys.iter().fold(0u32, |mask, &k| mask | 1 << remap(k, f, m)) == full
    })
}

struct BucketBuilder<'a> {
    strategy: &'a SplitStrategy,
    max_index: u64,
    codes: Vec<RiceCode>,
    scratch: Vec<u64>,
    assignments: Option<Vec<(u64, usize)>>,
}

impl BucketBuilder<'_> {
    fn node(&mut self, keys: &mut [u64], depth: usize, offset: usize) -> Option<()> {
        let m = keys.len();
        let leaf = self.strategy.leaf_size();
        let base = depth_base(depth);
        if m <= leaf {
            if m == 0 {
                return Some(());
            }
            let index = find_bijection(keys, base, self.max_index)?;
            if m > 1 {
                self.codes.push(RiceCode::new(index, self.strategy.leaf_rice(m)));
            }
            if let Some(out) = self.assignments.as_mut() {
                out.extend(keys.iter().map(|&k| (k, offset + remap(k, base + index, m))));
            }
            return Some(());
        }

        let (fanout, unit, _) = self.strategy.shape(m);
        let index = find_split(keys, unit, base, self.max_index)?;
        self.codes.push(RiceCode::new(index, self.strategy.split_rice(m)));

        // Stable counting sort of the keys by part.
        let f = base + index;
        let div = Divisor::new(unit, m);
        let mut starts = [0usize; MAX_FANOUT];
        for (j, s) in starts.iter_mut().enumerate().take(fanout) {
            *s = j * unit;
        }
        self.scratch.clear();
        self.scratch.resize(m, 0);
        for &k in keys.iter() {
            let part = div.apply(remap(k, f, m));
            self.scratch[starts[part]] = k;
            starts[part] += 1;
        }
        keys.copy_from_slice(&self.scratch);

        for j in 0..fanout {
            let end = ((j + 1) * unit).min(m);
            self.node(&mut keys[j * unit..end], depth + 1, offset + j * unit)?;
        }
        Some(())
    }
}

/// Searches the splitting tree of one bucket and returns its codes in preorder.
///
/// `keys` are the low signature halves; they are permuted in place.
pub fn build_bucket(
    keys: &mut [u64],
    strategy: &SplitStrategy,
    max_index: u64,
) -> Option<Vec<RiceCode>> {
    let mut b = BucketBuilder {
        strategy,
        max_index,
        codes: Vec::new(),
        scratch: Vec::new(),
        assignments: None,
    };
    b.node(keys, 0, 0)?;
    debug_assert_eq!(b.codes.len(), strategy.skip_info(keys.len()).1);
    debug_assert_eq!(
        b.codes.iter().map(|c| c.param as usize).sum::<usize>(),
        strategy.skip_info(keys.len()).0
    );
    Some(b.codes)
}

/// Codes of one bucket and the `(signature low half, rank)` of every key.
pub type RankedBucket = (Vec<RiceCode>, Vec<(u64, usize)>);

/// Like [`build_bucket`], also returning the bucket-local rank assigned to
/// every key.
pub fn build_bucket_with_ranks(
    keys: &mut [u64],
    strategy: &SplitStrategy,
    max_index: u64,
) -> Option<RankedBucket> {
    let mut b = BucketBuilder {
        strategy,
        max_index,
        codes: Vec::new(),
        scratch: Vec::new(),
        assignments: Some(Vec::with_capacity(keys.len())),
    };
    b.node(keys, 0, 0)?;
    Some((b.codes, b.assignments.unwrap()))
}

/// Builds a structure over `keys`, which must be distinct.
pub fn build<K: AsRef<[u8]> + Sync>(keys: &[K], config: &BuildConfig) -> Result<RecSplit> {
    config.validate()?;
    let seed = config.seed;
    with_pool(config.threads, || {
        let sigs: Vec<Signature> = keys.par_iter().map(|k| sign(k.as_ref(), seed)).collect();
        build_from_signatures(sigs, config)
    })
}

/// Builds from precomputed signatures (any order). The caller is responsible
/// for having hashed the keys with `config.seed`.
pub fn build_from_signatures(mut sigs: Vec<Signature>, config: &BuildConfig) -> Result<RecSplit> {
    config.validate()?;
    with_pool(config.threads, || {
        sigs.par_sort_unstable();
        build_from_sorted_signatures(&sigs, config)
    })
}

/// Builds from signatures sorted in increasing order, e.g. produced by an
/// external sort. Bucket assignment is monotone in the signature, so buckets
/// are contiguous runs.
pub fn build_from_sorted_signatures(sigs: &[Signature], config: &BuildConfig) -> Result<RecSplit> {
    config.validate()?;
    for w in sigs.windows(2) {
        match w[0].cmp(&w[1]) {
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Equal => return Err(Error::DuplicateKey),
            std::cmp::Ordering::Greater => {
                return Err(Error::InvalidConfig("signatures are not sorted".into()))
            }
        }
    }

    let n = sigs.len();
    let n_buckets = n.div_ceil(config.bucket_size);
    let strategy = SplitStrategy::new(config.leaf_size, table_size(config.bucket_size));

    let mut cum_keys = vec![0u64; n_buckets + 1];
    for s in sigs {
        cum_keys[bucket_of(*s, n_buckets) + 1] += 1;
    }
    for i in 0..n_buckets {
        cum_keys[i + 1] += cum_keys[i];
    }

    let mut lows: Vec<u64> = sigs.iter().map(|s| s.lo).collect();
    let mut slices = Vec::with_capacity(n_buckets);
    let mut rest = lows.as_mut_slice();
    for i in 0..n_buckets {
        let (head, tail) = rest.split_at_mut((cum_keys[i + 1] - cum_keys[i]) as usize);
        slices.push(head);
        rest = tail;
    }

    let max_index = config.max_search_index;
    let encoded: Vec<Vec<RiceCode>> = with_pool(config.threads, || {
        slices
            .into_par_iter()
            .enumerate()
            .map(|(bucket, keys)| {
                let size = keys.len();
                build_bucket(keys, &strategy, max_index).ok_or(Error::SearchOverflow {
                    bucket,
                    size,
                    max_index,
                })
            })
            .collect::<Result<_>>()
    })?;

    let mut rice = RiceBuilder::new();
    let mut offsets = Vec::with_capacity(n_buckets + 1);
    for codes in &encoded {
        offsets.push(rice.append_bucket(codes) as u64);
    }
    offsets.push(rice.len() as u64);
    drop(encoded);

    // Average tree bits per key in fixed point: offsets then grow by about
    // zero per bucket after subtracting the slope.
    let beta = if n == 0 {
        0
    } else {
        (((rice.len() as u128) << BETA_FRAC_BITS) / n as u128).min(u32::MAX as u128) as u64
    };
    let ef = DoubleEliasFano::build(&cum_keys, &offsets, beta);
    Ok(RecSplit::from_parts(
        config.leaf_size,
        config.bucket_size,
        config.seed,
        n as u64,
        strategy,
        ef,
        rice.finish(),
    ))
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if rayon::current_num_threads() == threads.max(1) {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
