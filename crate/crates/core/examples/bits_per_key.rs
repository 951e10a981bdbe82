//! Space and speed across leaf and bucket sizes, as CSV.
//!
//! `cargo run --release --example bits_per_key [n]`

use recsplit::analysis::BenchRow;
use recsplit::cli::bench_row;
use recsplit::BuildConfig;

fn main() -> recsplit::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let configs = [(5, 5), (8, 100), (8, 2000), (12, 9), (12, 100)];

    println!("{}", BenchRow::CSV_HEADER);
    for (leaf, bucket) in configs {
        let row = bench_row(&BuildConfig::new(leaf, bucket).with_threads(1), n, n, 42)?;
        println!("{row}");
    }
    Ok(())
}
