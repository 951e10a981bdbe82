//! Walk one key through the structure: bucket lookup, then tree descent.
//!
//! `cargo run --example inspect_layout`

use recsplit::cli::random_keys;
use recsplit::signatures::{bucket_of, sign};
use recsplit::{BuildConfig, RecSplit};

fn main() -> recsplit::Result<()> {
    let keys = random_keys(20_000, 11);
    let mphf = RecSplit::build(&keys, &BuildConfig::new(8, 100))?;

    let ef = mphf.elias_fano();
    let (w_keys, w_bits) = ef.lower_widths();
    println!(
        "{} buckets; elias-fano {} bits (lower widths {w_keys}/{w_bits}), trees {} fixed + {} unary bits",
        mphf.bucket_count(),
        ef.size_bits(),
        mphf.fixed_bits(),
        mphf.unary_bits()
    );

    let key = &keys[1234];
    let sig = sign(key, mphf.seed());
    let b = bucket_of(sig, mphf.bucket_count());
    let info = mphf.bucket(b);
    println!("key {key:02x?}");
    println!("  signature {:016x}:{:016x}", sig.hi, sig.lo);
    println!(
        "  bucket {b}: {} keys, ranks from {}, tree at bit {}",
        info.size, info.first_rank, info.bit_offset
    );

    let strategy = mphf.strategy();
    let fixed = strategy.skip_info(info.size).0;
    let mut reader = mphf.trees().reader(info.bit_offset, fixed);
    let d = mphf.descend(&mut reader, sig.lo, info.size);
    println!(
        "  leaf of {} keys at depth {}, offset {} in bucket, {} codes decoded",
        d.leaf_size, d.depth, d.offset, d.codes_read
    );
    let rank = info.first_rank as usize + d.rank(sig.lo);
    println!("  rank {rank}");
    assert_eq!(rank, mphf.lookup(key));
    Ok(())
}
