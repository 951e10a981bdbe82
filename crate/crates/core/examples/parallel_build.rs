//! Build with a varying thread count; the output is identical every time.
//!
//! Also shows the signature-level entry point, which lets callers hash keys
//! themselves (for instance while streaming them from disk).
//!
//! `cargo run --release --example parallel_build [n]`

use std::time::Instant;

use recsplit::builder::build_from_signatures;
use recsplit::cli::random_keys;
use recsplit::signatures::sign;
use recsplit::{BuildConfig, RecSplit};

fn main() -> recsplit::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500_000);
    let keys = random_keys(n, 3);
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());

    let mut reference: Option<RecSplit> = None;
    let mut threads = 1;
    while threads <= cores.max(2) {
        let config = BuildConfig::new(8, 100).with_threads(threads);
        let start = Instant::now();
        let mphf = RecSplit::build(&keys, &config)?;
        let elapsed = start.elapsed();
        println!(
            "{threads:>3} threads: {:>8.1} ns/key",
            elapsed.as_nanos() as f64 / n as f64
        );
        match &reference {
            Some(r) => assert_eq!(r, &mphf),
            None => reference = Some(mphf),
        }
        threads *= 2;
    }

    let config = BuildConfig::new(8, 100);
    let sigs = keys.iter().map(|k| sign(k, config.seed)).collect();
    let from_sigs = build_from_signatures(sigs, &config)?;
    assert_eq!(Some(&from_sigs), reference.as_ref());
    println!("signature-level build matches");
    Ok(())
}
