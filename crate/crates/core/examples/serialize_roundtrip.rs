//! Write a function to disk, load it back, and check nothing changed.
//!
//! `cargo run --example serialize_roundtrip`

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use recsplit::cli::random_keys;
use recsplit::{BuildConfig, RecSplit};

fn main() -> recsplit::Result<()> {
    let keys = random_keys(100_000, 7);
    let mphf = RecSplit::build(&keys, &BuildConfig::new(8, 100).with_seed(99))?;

    let dir = std::env::temp_dir().join(format!("recsplit-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("keys.mphf");

    let mut out = BufWriter::new(File::create(&path)?);
    mphf.write_to(&mut out)?;
    out.flush()?;
    drop(out);

    let loaded = RecSplit::read_from(&mut BufReader::new(File::open(&path)?))?;
    assert_eq!(loaded, mphf);
    assert!(keys.iter().all(|k| loaded.lookup(k) == mphf.lookup(k)));

    let on_disk = std::fs::metadata(&path)?.len();
    println!("file: {} bytes, serialized_len: {}", on_disk, mphf.serialized_len());
    println!("header: {:?}", mphf.header());

    // In-memory form is the same bytes.
    assert_eq!(mphf.to_bytes(), std::fs::read(&path)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
