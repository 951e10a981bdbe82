//! Reference implementations shared by the integration tests. Everything
//! here reads bits one at a time and walks trees without skip tables.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recsplit::bits::BitVec;
use recsplit::eliasfano::DoubleEliasFano;
use recsplit::ricecodec::RiceBitVector;
use recsplit::signatures::{bucket_of, depth_base, remap, Signature};
use recsplit::strategy::SplitStrategy;
use recsplit::builder::{build_bucket_with_ranks, build_from_signatures, BuildConfig};
use recsplit::eliasfano::BETA_FRAC_BITS;
use recsplit::evaluator::descend;
use recsplit::ricecodec::{RiceBuilder, RiceCode};
use recsplit::RecSplit;

/// Rice parameters of a tree over `m` keys, in preorder.
pub fn preorder_params(s: &SplitStrategy, m: usize) -> Vec<u32> {
    let mut out = Vec::new();
    fn go(s: &SplitStrategy, m: usize, out: &mut Vec<u32>) {
        if m <= 1 {
            return;
        }
        if m <= s.leaf_size() {
            out.push(s.leaf_rice(m));
            return;
        }
        out.push(s.split_rice(m));
        let (fanout, unit, last) = s.shape(m);
        for j in 0..fanout {
            go(s, if j + 1 == fanout { last } else { unit }, out);
        }
    }
    go(s, m, &mut out);
    out
}

/// Decodes one bucket bit by bit. Returns the values and the end position.
pub fn naive_decode(trees: &RiceBitVector, start: usize, params: &[u32]) -> (Vec<u64>, usize) {
    let mut pos = start;
    let mut fixed = Vec::with_capacity(params.len());
    for &r in params {
        let mut v = 0u64;
        for b in 0..r {
            if trees.get(pos) {
                v |= 1 << b;
            }
            pos += 1;
        }
        fixed.push(v);
    }
    let mut values = Vec::with_capacity(params.len());
    for (&r, &low) in params.iter().zip(&fixed) {
        let mut q = 0u64;
        while !trees.get(pos) {
            q += 1;
            pos += 1;
        }
        pos += 1;
        values.push(q << r | low);
    }
    (values, pos)
}

/// Rank of `lo` inside a bucket of `m` keys whose codes are `codes` (preorder).
pub fn naive_walk(s: &SplitStrategy, codes: &[u64], lo: u64, m: usize) -> usize {
    fn go(s: &SplitStrategy, codes: &[u64], pos: &mut usize, lo: u64, m: usize, depth: usize) -> usize {
        if m <= 1 {
            return 0;
        }
        let f = depth_base(depth) + codes[*pos];
        *pos += 1;
        if m <= s.leaf_size() {
            return remap(lo, f, m);
        }
        let (fanout, unit, last) = s.shape(m);
        let part = remap(lo, f, m) / unit;
        for _ in 0..part {
            *pos += preorder_params(s, unit).len();
        }
        let size = if part + 1 == fanout { last } else { unit };
        part * unit + go(s, codes, pos, lo, size, depth + 1)
    }
    go(s, codes, &mut 0, lo, m, 0)
}

/// Evaluator rebuilt from the key set and the raw tree bits only.
pub struct NaiveEvaluator {
    strategy: SplitStrategy,
    cum: Vec<u64>,
    sizes: Vec<usize>,
    codes: Vec<Vec<u64>>,
}

impl NaiveEvaluator {
    pub fn new(mphf: &RecSplit, sigs: &[Signature]) -> Self {
        let nb = mphf.bucket_count();
        let mut sizes = vec![0usize; nb];
        for &s in sigs {
            sizes[bucket_of(s, nb)] += 1;
        }
        let mut cum = vec![0u64; nb + 1];
        for i in 0..nb {
            cum[i + 1] = cum[i] + sizes[i] as u64;
        }
        let strategy = mphf.strategy().clone();
        let mut pos = 0;
        let mut codes = Vec::with_capacity(nb);
        for &m in &sizes {
            let (values, end) = naive_decode(mphf.trees(), pos, &preorder_params(&strategy, m));
            codes.push(values);
            pos = end;
        }
        assert_eq!(pos, mphf.trees().len(), "trees have trailing bits");
        Self {
            strategy,
            cum,
            sizes,
            codes,
        }
    }

    pub fn lookup(&self, sig: Signature) -> usize {
        let b = bucket_of(sig, self.sizes.len());
        if self.sizes[b] == 0 {
            return self.cum[b].min(*self.cum.last().unwrap() - 1) as usize;
        }
        self.cum[b] as usize + naive_walk(&self.strategy, &self.codes[b], sig.lo, self.sizes[b])
    }
}

/// Position of the `k`-th one by linear scan.
pub fn naive_select(bits: &BitVec, k: usize) -> usize {
    let mut seen = 0;
    for p in 0..bits.len() {
        if bits.get(p) {
            if seen == k {
                return p;
            }
            seen += 1;
        }
    }
    panic!("fewer than {} ones", k + 1);
}

/// Prefix-sum lists for random bucket sizes, with occasional empty and
/// oversized buckets.
pub fn random_lists(rng: &mut ChaCha8Rng, buckets: usize) -> (Vec<u64>, Vec<u64>) {
    let mut cum = vec![0u64];
    let mut off = vec![0u64];
    let mean = rng.gen_range(1..200u64);
    for _ in 0..buckets {
        let keys = match rng.gen_range(0..20) {
            0 => 0,
            1 => rng.gen_range(0..20 * mean),
            _ => rng.gen_range(0..2 * mean),
        };
        let bits = if keys == 0 { 0 } else { keys + rng.gen_range(0..3 * keys) };
        cum.push(cum.last().unwrap() + keys);
        off.push(off.last().unwrap() + bits);
    }
    (cum, off)
}

/// Checks every entry and every select of `ef` against the source lists.
pub fn check_elias_fano(ef: &DoubleEliasFano, cum: &[u64], off: &[u64]) -> Result<(), String> {
    for i in 0..cum.len() {
        if ef.get(i) != (cum[i], off[i]) {
            return Err(format!("entry {i}: {:?} != {:?}", ef.get(i), (cum[i], off[i])));
        }
        if i + 1 < cum.len() && ef.get_pair(i) != (cum[i], cum[i + 1], off[i]) {
            return Err(format!("pair {i}"));
        }
    }
    for list in 0..2 {
        let upper = ef.upper_bits(list);
        let ones: Vec<usize> = (0..upper.len()).filter(|&p| upper.get(p)).collect();
        if ones.len() != cum.len() {
            return Err(format!("list {list}: {} ones for {} entries", ones.len(), cum.len()));
        }
        for (k, &p) in ones.iter().enumerate() {
            if ef.select_upper(list, k) != p {
                return Err(format!("list {list}: select({k}) != {p}"));
            }
        }
    }
    Ok(())
}

pub fn random_signatures(rng: &mut ChaCha8Rng, n: usize) -> Vec<Signature> {
    (0..n).map(|_| Signature::new(rng.gen(), rng.gen())).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One random bucket: the skip-based descent, a sequential decode with a
/// table-free walk, and the ranks recorded by the builder must all agree.
pub fn skip_instance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let leaf = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=300);
    // Small tables force the approximate parameters and recursive skips.
    let table = if rng.gen() { 2000 } else { rng.gen_range(leaf..=leaf + 40) };
    let strategy = SplitStrategy::new(leaf, table);
    let mut keys: Vec<u64> = (0..m).map(|_| rng.gen()).collect();
    let (codes, ranks) = build_bucket_with_ranks(&mut keys, &strategy, 1 << 32)
        .ok_or("search overflow")?;

    let mut builder = RiceBuilder::new();
    // A random prefix puts the bucket at an arbitrary bit alignment.
    let prefix: Vec<RiceCode> = (0..rng.gen_range(0..5))
        .map(|_| {
            let r = rng.gen_range(0..12);
            RiceCode::new(rng.gen_range(0..(1u64 << r) * 6), r)
        })
        .collect();
    builder.append_bucket(&prefix);
    let start = builder.append_bucket(&codes);
    let trees = builder.finish();

    let params = preorder_params(&strategy, m);
    let (decoded, end) = naive_decode(&trees, start, &params);
    if end != trees.len() || decoded != codes.iter().map(|c| c.value).collect::<Vec<_>>() {
        return Err(format!("sequential decode mismatch (leaf {leaf}, m {m}, table {table})"));
    }
    let (fixed, _) = strategy.skip_info(m);
    for &(lo, rank) in &ranks {
        let mut reader = trees.reader(start, fixed);
        let d = descend(&strategy, &mut reader, lo, m);
        let walked = naive_walk(&strategy, &decoded, lo, m);
        if d.rank(lo) != rank || walked != rank {
            return Err(format!(
                "leaf {leaf}, m {m}: skip {} walk {walked} builder {rank}",
                d.rank(lo)
            ));
        }
        if d.codes_read > strategy.depth(m) + 1 {
            return Err(format!("{} codes read for depth {}", d.codes_read, strategy.depth(m)));
        }
    }
    Ok(())
}

/// One random double Elias-Fano list checked entry by entry and one by one
/// against a linear-scan select.
pub fn elias_fano_instance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let buckets = if rng.gen_range(0..50) == 0 { rng.gen_range(10_000..40_000) } else { rng.gen_range(0..600) };
    let (cum, off) = random_lists(rng, buckets);
    let beta = rng.gen_range(0..4u64 << BETA_FRAC_BITS);
    let ef = DoubleEliasFano::build(&cum, &off, beta);
    check_elias_fano(&ef, &cum, &off)
}

/// One random structure over `n` signatures: the evaluator must agree with
/// the naive one on members and on random non-members.
pub fn evaluator_instance(rng: &mut ChaCha8Rng, n: usize) -> Result<(), String> {
    let leaf = rng.gen_range(1..=8);
    let bucket = [1, 3, 5, 10, 50, 100, 300][rng.gen_range(0..7)];
    let sigs = random_signatures(rng, n);
    let config = BuildConfig::new(leaf, bucket).with_threads(1);
    let mphf = build_from_signatures(sigs.clone(), &config).map_err(|e| e.to_string())?;
    let naive = NaiveEvaluator::new(&mphf, &sigs);
    for &s in &sigs {
        let (fast, slow) = (mphf.lookup_signature(s), naive.lookup(s));
        if fast != slow {
            return Err(format!("leaf {leaf}, bucket {bucket}: {fast} != {slow}"));
        }
    }
    for s in random_signatures(rng, 100) {
        if mphf.lookup_signature(s) != naive.lookup(s) {
            return Err(format!("leaf {leaf}, bucket {bucket}: non-member disagrees"));
        }
    }
    Ok(())
}

/// True iff `ranks` is a permutation of `[0, ranks.len())`.
pub fn is_permutation(ranks: impl IntoIterator<Item = usize>, n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut count = 0;
    for r in ranks {
        if r >= n || seen[r] {
            return false;
        }
        seen[r] = true;
        count += 1;
    }
    count == n
}
